"""Bipartition enumeration and effective bipartite frames."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, ParameterError, SupportError
from .tensor import (
    Bipartition,
    SchmidtData,
    StateVector,
    Subspace,
    reduced_support,
    regroup,
    schmidt,
    span,
)
from .tolerances import DEFAULT, Tolerances


def enumerate_bipartitions(n: int) -> list:
    """All ``2**(n-1) - 1`` canonical bipartitions of ``n >= 3`` parties.

    Sorted by the size of the block holding party 0, then lexicographically.
    """
    if n < 3:
        raise ParameterError(f"bipartitions are enumerated for n >= 3 parties, got {n}")
    out = []
    rest = range(1, n)
    for size in range(1, n):
        for extra in itertools.combinations(rest, size - 1):
            a = (0,) + extra
            b = tuple(i for i in range(n) if i not in a)
            out.append(Bipartition(a, b))
    return out


@dataclass(frozen=True, eq=False)
class EffectiveFrame:
    bipartition: Bipartition
    subspace_a: Subspace
    subspace_b: Subspace

    @property
    def dim_a(self) -> int:
        return self.subspace_a.dim

    @property
    def dim_b(self) -> int:
        return self.subspace_b.dim

    @property
    def dims(self) -> tuple:
        return (self.dim_a, self.dim_b)

    def contains(self, support_a: Subspace, support_b: Subspace, tol: Tolerances = DEFAULT) -> bool:
        return self.subspace_a.contains(support_a, tol.support) and self.subspace_b.contains(
            support_b, tol.support
        )

    def rotated(self, ua: np.ndarray, ub: np.ndarray) -> "EffectiveFrame":
        """Same frame with bases ``B_a @ ua`` and ``B_b @ ub`` (unitary ``ua``, ``ub``)."""
        return EffectiveFrame(
            self.bipartition,
            Subspace(self.subspace_a.basis @ ua),
            Subspace(self.subspace_b.basis @ ub),
        )


def frame_from_supports(bip: Bipartition, supports, tol: Tolerances = DEFAULT) -> EffectiveFrame:
    """Frame spanned by precomputed ``(support_a, support_b)`` pairs."""
    supports = list(supports)
    if not supports:
        raise DegenerateInputError("a frame needs at least one state")
    sa = span(np.hstack([a.basis for a, _ in supports]), tol)
    sb = span(np.hstack([b.basis for _, b in supports]), tol)
    return EffectiveFrame(bip, sa, sb)


def supports_of(state: StateVector, bip: Bipartition, tol: Tolerances = DEFAULT):
    return reduced_support(state, bip, "A", tol), reduced_support(state, bip, "B", tol)


def effective_frame(
    states: Sequence[StateVector], bip: Bipartition, tol: Tolerances = DEFAULT
) -> EffectiveFrame:
    """Frame spanned by the reduced supports of ``states`` on both sides."""
    return frame_from_supports(bip, (supports_of(s, bip, tol) for s in states), tol)


def restrict(state: StateVector, frame: EffectiveFrame, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Coordinates ``B_a^H M B_b`` of the regrouped state in the frame bases.

    Raises SupportError when the state has weight outside the frame.
    """
    m = regroup(state, frame.bipartition)
    ba, bb = frame.subspace_a.basis, frame.subspace_b.basis
    coords = ba.conj().T @ m @ bb
    residual = float(np.linalg.norm(m - ba @ coords @ bb.conj().T))
    if residual > tol.support:
        raise SupportError(residual, tol.support)
    return coords


def is_mes_in_frame(state: StateVector, frame: EffectiveFrame, tol: Tolerances = DEFAULT):
    """Return ``(verdict, SchmidtData)`` for maximal entanglement in a square frame."""
    data: SchmidtData = schmidt(restrict(state, frame, tol), tol)
    r = frame.dim_a
    ok = (
        frame.dim_a == frame.dim_b
        and data.rank == r
        and bool(np.all(np.abs(data.singular_values[:r] - 1.0 / np.sqrt(r)) <= tol.flat))
    )
    return ok, data
