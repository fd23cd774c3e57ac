"""Strong-nonlocality certificates built from embedded MES witnesses.

A cut is certified when some sub-family of the states consists of at least
``r + 1`` states that are all maximally entangled on one common effective
``r x r`` frame. Two facts are taken as given and named in every report:

* ``PREMISE``: ``r + 1`` maximally entangled states of an ``r x r`` system
  are not perfectly distinguishable by LOCC (for ``r = 2``, three Bell
  states);
* ``SUBSET_INFERENCE``: a protocol distinguishing a set also distinguishes
  every subset of it.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NotOrthogonalError, ParameterError, SupportError
from .opm import OpmReport, find_eliminator, opm_solution_space
from .partition import (
    EffectiveFrame,
    effective_frame,
    enumerate_bipartitions,
    frame_from_supports,
    is_mes_in_frame,
    supports_of,
)
from .tensor import Bipartition, SchmidtData, StateSet, gram, regroup, schmidt
from .tolerances import DEFAULT, Tolerances

log = logging.getLogger(__name__)

CERTIFIED = "CERTIFIED"
UNCERTIFIED = "UNCERTIFIED"
STRONGLY_NONLOCAL = "STRONGLY_NONLOCAL_CERTIFIED"
NOT_CERTIFIED = "NOT_CERTIFIED"

PREMISE = (
    "Trusted premise: any r+1 maximally entangled states of an r x r system cannot be "
    "perfectly distinguished by LOCC (r = 2: any three Bell states)."
)
SUBSET_INFERENCE = (
    "Subset monotonicity: an LOCC protocol that distinguishes the full set also distinguishes "
    "each of its subsets, so an indistinguishable witness subset certifies the full set across "
    "its cut."
)
TAXONOMY = (
    "Strongly nonlocal = locally indistinguishable across every bipartition; equivalently, not "
    "perfectly distinguishable when at least two parties are merged (super-LOCC). Multipartitions "
    "into three or more blocks are not analyzed."
)


@dataclass(frozen=True, eq=False)
class MesWitness:
    bipartition: Bipartition
    member_indices: tuple
    frame: EffectiveFrame
    effective_dim: int
    schmidt: tuple

    def verify(self, states: StateSet, tol: Tolerances = DEFAULT) -> bool:
        """Re-derive the certificate from scratch: frame, coordinates, spectra."""
        members = [states[i] for i in self.member_indices]
        if len(set(self.member_indices)) != len(self.member_indices):
            return False
        frame = effective_frame(members, self.bipartition, tol)
        r = self.effective_dim
        if frame.dims != (r, r) or len(members) < r + 1:
            return False
        try:
            return all(is_mes_in_frame(s, frame, tol)[0] for s in members)
        except SupportError:
            return False


@dataclass(frozen=True)
class Candidate:
    """One frame examined by the witness search and why it was rejected."""

    members: tuple
    frame_dims: tuple
    reason: str


@dataclass(frozen=True, eq=False)
class CutDiagnostics:
    frame_dims: tuple
    state_ranks: tuple
    candidates: tuple


@dataclass(frozen=True, eq=False)
class CutEntry:
    bipartition: Bipartition
    verdict: str
    witness: MesWitness | None
    diagnostics: CutDiagnostics
    opm: dict = field(default_factory=dict)
    hinted: bool = False


@dataclass(frozen=True, eq=False)
class CertificationReport:
    label: str
    params: dict
    dims: tuple
    n_states: int
    entries: tuple
    tolerances: Tolerances
    premise: str = PREMISE
    inference: str = SUBSET_INFERENCE
    taxonomy: str = TAXONOMY

    @property
    def overall(self) -> str:
        if self.entries and all(e.verdict == CERTIFIED for e in self.entries):
            return STRONGLY_NONLOCAL
        return NOT_CERTIFIED

    @property
    def certified(self) -> bool:
        return self.overall == STRONGLY_NONLOCAL

    def entry(self, bip: Bipartition) -> CutEntry:
        bip = bip.canonicalize()
        for e in self.entries:
            if e.bipartition == bip:
                return e
        raise KeyError(str(bip))


def _witness_from(states, bip, members, tol, supports=None):
    """Validate ``members`` as a witness; return ``(witness | None, Candidate)``."""
    members = tuple(members)
    if supports is None:
        frame = effective_frame([states[i] for i in members], bip, tol)
    else:
        frame = frame_from_supports(bip, (supports[i] for i in members), tol)
    dims = frame.dims
    if dims[0] != dims[1]:
        return None, Candidate(members, dims, "frame is not square")
    r = dims[0]
    if len(members) < r + 1:
        return None, Candidate(members, dims, f"{len(members)} members < r+1 = {r + 1}")
    data = []
    for i in members:
        try:
            ok, sd = is_mes_in_frame(states[i], frame, tol)
        except SupportError:
            return None, Candidate(members, dims, f"state {i} leaves the frame")
        if not ok:
            return None, Candidate(members, dims, f"state {i} is not maximally entangled in the frame")
        data.append(sd)
    return MesWitness(bip, members, frame, r, tuple(data)), Candidate(members, dims, "accepted")


def _group_by_support(supports, tol):
    groups = []
    for i, (sa, sb) in enumerate(supports):
        for g in groups:
            ra, rb = supports[g[0]]
            if ra.same_as(sa, tol.support) and rb.same_as(sb, tol.support):
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def _search(states: StateSet, bip: Bipartition, tol: Tolerances):
    supports = [supports_of(s, bip, tol) for s in states]
    candidates = []
    for group in _group_by_support(supports, tol):
        frame = frame_from_supports(bip, (supports[i] for i in group), tol)
        if frame.dim_a != frame.dim_b:
            candidates.append(Candidate(tuple(group), frame.dims, "frame is not square"))
            continue
        r = frame.dim_a
        in_group = set(group)
        members = []
        for i, s in enumerate(states):
            if i not in in_group and not frame.contains(*supports[i], tol):
                continue
            if is_mes_in_frame(s, frame, tol)[0]:
                members.append(i)
        if len(members) < r + 1:
            candidates.append(
                Candidate(tuple(members), frame.dims, f"{len(members)} members < r+1 = {r + 1}")
            )
            continue
        # smallest certificate: the canonical (r+1)-prefix, when it still spans the frame
        witness, cand = _witness_from(states, bip, members[: r + 1], tol, supports)
        if witness is None or witness.effective_dim != r:
            witness, cand = _witness_from(states, bip, members, tol, supports)
        candidates.append(cand)
        if witness is not None:
            return witness, candidates, supports
    return None, candidates, supports


def _check_hint(states: StateSet, hint: Iterable[int]) -> tuple:
    hint = tuple(int(i) for i in hint)
    if not hint:
        raise ParameterError("hint must name at least one state")
    bad = [i for i in hint if not 0 <= i < len(states)]
    if bad:
        raise ParameterError(f"hint indices {bad} out of range for {len(states)} states")
    if len(set(hint)) != len(hint):
        raise ParameterError(f"hint {hint} repeats a state")
    return tuple(sorted(hint))


def find_mes_witness(
    states: StateSet,
    bip: Bipartition,
    hint: Sequence[int] | None = None,
    tol: Tolerances = DEFAULT,
) -> MesWitness | None:
    """Find (or, with ``hint``, validate) an ``r+1``-MES witness across ``bip``.

    The search groups states with identical reduced supports, grows each
    group's frame by any other state that lies inside it and is maximally
    entangled there, and accepts the first square frame carrying at least
    ``r + 1`` such states. Groups are scanned in state order; the returned
    witness is the first ``r + 1`` qualifying states.
    """
    if hint is not None:
        return _witness_from(states, bip, _check_hint(states, hint), tol)[0]
    return _search(states, bip, tol)[0]


def check_orthonormal(states: StateSet, tol: Tolerances = DEFAULT) -> None:
    g = gram(states.states)
    off = np.abs(g - np.eye(len(states)))
    i, j = np.unravel_index(int(np.argmax(off)), off.shape)
    if off[i, j] > tol.orthogonality:
        i, j = min(i, j), max(i, j)
        raise NotOrthogonalError(int(i), int(j), complex(g[i, j]))


def _certify_cut(states, bip, hints, skip_opm, tol) -> CutEntry:
    witness, hinted = None, False
    for hint in hints:
        witness = find_mes_witness(states, bip, hint, tol)
        if witness is not None:
            hinted = True
            break
    found, candidates, supports = _search(states, bip, tol) if witness is None else (None, [], None)
    witness = witness or found
    if supports is None:
        supports = [supports_of(s, bip, tol) for s in states]
    full = frame_from_supports(bip, supports, tol)
    ranks = tuple(schmidt(regroup(s, bip), tol).rank for s in states)
    diag = CutDiagnostics(full.dims, ranks, tuple(candidates))
    opm = {}
    if not skip_opm:
        for side in ("A", "B"):
            rep: OpmReport = opm_solution_space(states, bip, side, tol)
            opm[side] = rep.with_eliminator(find_eliminator(states, bip, side, rep, tol))
    verdict = CERTIFIED if witness is not None else UNCERTIFIED
    log.debug("cut %s: %s", bip, verdict)
    return CutEntry(bip, verdict, witness, diag, opm, hinted)


def certify(
    states: StateSet,
    hints: Sequence[Sequence[int]] = (),
    skip_opm: bool = False,
    tol: Tolerances = DEFAULT,
    workers: int | None = None,
) -> CertificationReport:
    """Certify every canonical bipartition of ``states``.

    ``hints`` are tried first on each cut; a hint that does not validate
    there falls back to the search. Raises NotOrthogonalError on a
    non-orthonormal input.
    """
    check_orthonormal(states, tol)
    hints = [_check_hint(states, h) for h in hints]
    cuts = enumerate_bipartitions(states.n_parties)

    def run(bip):
        return _certify_cut(states, bip, hints, skip_opm, tol)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = tuple(pool.map(run, cuts))
    else:
        entries = tuple(run(b) for b in cuts)
    return CertificationReport(
        states.label, dict(states.params), states.dims, len(states), entries, tol
    )
