"""Pure multipartite states, bipartite regrouping and Schmidt data.

Amplitudes are flattened row-major over the parties in ascending index
order, so the label ``(a_0, ..., a_{n-1})`` sits at
``numpy.ravel_multi_index(label, dims)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import (
    DegenerateInputError,
    DomainError,
    PreconditionError,
    ShapeError,
)
from .tolerances import DEFAULT, Tolerances

Side = Literal["A", "B"]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on ``dims`` parties.

    The constructor rescales ``amplitudes`` to unit norm; the input vector
    is kept unchanged in ``raw``.
    """

    dims: tuple
    amplitudes: np.ndarray
    label: str = ""
    raw: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise ShapeError(f"every party needs dimension >= 2, got {dims}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != int(np.prod(dims)):
            raise ShapeError(
                f"{amps.size} amplitudes do not fit dims {dims} (need {int(np.prod(dims))})"
            )
        norm = float(np.linalg.norm(amps))
        if norm == 0.0:
            raise DegenerateInputError("state has no nonzero amplitude")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "raw", _frozen(amps))
        object.__setattr__(self, "amplitudes", _frozen(amps / norm))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def with_phase(self, phase: complex) -> "StateVector":
        return StateVector(self.dims, self.raw * phase, self.label)

    def permute_parties(self, order: Sequence[int]) -> "StateVector":
        """New party ``k`` is old party ``order[k]``."""
        t = np.transpose(self.raw.reshape(self.dims), order)
        return StateVector(tuple(self.dims[i] for i in order), t.reshape(-1), self.label)

    @property
    def raw_norm(self) -> float:
        return float(np.linalg.norm(self.raw))

    def raw_terms(self):
        """Yield ``(basis_label, unnormalized amplitude)`` in ascending flattened order."""
        for idx in np.flatnonzero(self.raw):
            yield tuple(int(v) for v in np.unravel_index(idx, self.dims)), complex(self.raw[idx])

    def __repr__(self) -> str:
        return f"StateVector(label={self.label!r}, dims={self.dims})"


@dataclass(frozen=True, eq=False)
class StateSet:
    """Ordered family of states sharing one party structure."""

    label: str
    dims: tuple
    states: tuple
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        states = tuple(self.states)
        dims = tuple(int(d) for d in self.dims)
        for s in states:
            if s.dims != dims:
                raise ShapeError(f"state {s.label!r} has dims {s.dims}, set has {dims}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "params", dict(self.params))

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    def subset(self, indices: Iterable[int]) -> "StateSet":
        idx = list(indices)
        return StateSet(self.label, self.dims, tuple(self.states[i] for i in idx), self.params)

    def matrix(self) -> np.ndarray:
        """States as rows of an ``(n_states, prod(dims))`` array."""
        return np.stack([s.amplitudes for s in self.states])


def flat_index(label: Sequence[int], dims: Sequence[int]) -> int:
    if len(label) != len(dims):
        raise DomainError(f"label {tuple(label)} has {len(label)} entries, dims has {len(dims)}")
    for a, d in zip(label, dims):
        if not 0 <= a < d:
            raise DomainError(f"label {tuple(label)} out of range for dims {tuple(dims)}")
    return int(np.ravel_multi_index(tuple(int(a) for a in label), tuple(dims)))


def superpose(terms, dims: Sequence[int], label: str = "") -> StateVector:
    """Build the normalized state ``sum_k c_k |label_k>``.

    ``terms`` is an iterable of ``(coefficient, basis_label)`` pairs;
    repeated labels accumulate.
    """
    dims = tuple(int(d) for d in dims)
    amps = np.zeros(int(np.prod(dims)), dtype=np.complex128)
    for coeff, basis in terms:
        amps[flat_index(basis, dims)] += complex(coeff)
    if not np.any(amps):
        raise DegenerateInputError("all coefficients are zero")
    return StateVector(dims, amps, label)


def inner_product(x: StateVector, y: StateVector) -> complex:
    """``<x|y>``, conjugate-linear in ``x``."""
    if x.dims != y.dims:
        raise ShapeError(f"dims mismatch: {x.dims} vs {y.dims}")
    return complex(np.vdot(x.amplitudes, y.amplitudes))


def gram(states) -> np.ndarray:
    states = list(states)
    if not states:
        raise DegenerateInputError("gram of an empty set")
    dims = states[0].dims
    for s in states:
        if s.dims != dims:
            raise ShapeError(f"dims mismatch: {s.dims} vs {dims}")
    m = np.stack([s.amplitudes for s in states])
    return m.conj() @ m.T


@dataclass(frozen=True)
class Bipartition:
    """Two-block split of parties ``0..n-1``."""

    block_a: tuple
    block_b: tuple

    def __post_init__(self):
        a = tuple(sorted(int(i) for i in self.block_a))
        b = tuple(sorted(int(i) for i in self.block_b))
        object.__setattr__(self, "block_a", a)
        object.__setattr__(self, "block_b", b)
        if not a or not b:
            raise ShapeError("both blocks of a bipartition must be nonempty")
        if set(a) & set(b) or len(set(a)) != len(a) or len(set(b)) != len(b):
            raise ShapeError(f"blocks {a} and {b} overlap or repeat parties")
        if set(a) | set(b) != set(range(len(a) + len(b))):
            raise ShapeError(f"blocks {a}|{b} do not cover parties 0..{len(a) + len(b) - 1}")

    @property
    def n_parties(self) -> int:
        return len(self.block_a) + len(self.block_b)

    @property
    def canonical(self) -> bool:
        return 0 in self.block_a

    def canonicalize(self) -> "Bipartition":
        return self if self.canonical else Bipartition(self.block_b, self.block_a)

    def block(self, side: Side) -> tuple:
        if side == "A":
            return self.block_a
        if side == "B":
            return self.block_b
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")

    def grouped_dims(self, dims: Sequence[int]) -> tuple:
        return (
            int(np.prod([dims[i] for i in self.block_a])),
            int(np.prod([dims[i] for i in self.block_b])),
        )

    @classmethod
    def parse(cls, text: str, n_parties: int | None = None) -> "Bipartition":
        """Parse ``"0,1|2,3"``."""
        try:
            left, right = text.split("|")
            a = [int(t) for t in left.split(",") if t.strip()]
            b = [int(t) for t in right.split(",") if t.strip()]
        except ValueError as exc:
            raise ShapeError(f"cannot parse bipartition {text!r}") from exc
        bip = cls(tuple(a), tuple(b))
        if n_parties is not None and bip.n_parties != n_parties:
            raise ShapeError(f"bipartition {text!r} does not cover {n_parties} parties")
        return bip

    def __str__(self) -> str:
        return ",".join(map(str, self.block_a)) + "|" + ",".join(map(str, self.block_b))


def _check_bipartition(dims, bip: Bipartition):
    if bip.n_parties != len(dims):
        raise ShapeError(f"bipartition {bip} does not match {len(dims)} parties")


def regroup(state: StateVector, bip: Bipartition) -> np.ndarray:
    """Amplitude matrix with block-A parties as rows, block-B as columns."""
    _check_bipartition(state.dims, bip)
    t = np.transpose(state.tensor(), bip.block_a + bip.block_b)
    return t.reshape(bip.grouped_dims(state.dims))


def ungroup(matrix: np.ndarray, dims: Sequence[int], bip: Bipartition) -> np.ndarray:
    """Inverse of :func:`regroup`; returns the flat amplitude vector."""
    dims = tuple(dims)
    _check_bipartition(dims, bip)
    order = bip.block_a + bip.block_b
    t = np.asarray(matrix).reshape([dims[i] for i in order])
    return np.transpose(t, np.argsort(order)).reshape(-1)


@dataclass(frozen=True)
class SchmidtData:
    singular_values: np.ndarray
    rank: int
    max_deviation_from_flat: float

    def is_flat(self, tol: float) -> bool:
        return self.max_deviation_from_flat <= tol


def schmidt(m: np.ndarray, tol: Tolerances = DEFAULT) -> SchmidtData:
    m = np.asarray(m, dtype=np.complex128)
    fro = float(np.linalg.norm(m))
    if abs(fro - 1.0) > tol.norm:
        raise PreconditionError(f"Schmidt input must have unit Frobenius norm, got {fro!r}")
    sv = np.linalg.svd(m, compute_uv=False)
    rank = int(np.count_nonzero(sv > tol.rank))
    dev = float(np.max(np.abs(sv[:rank] - 1.0 / np.sqrt(rank)))) if rank else 1.0
    sv = _frozen_real(sv)
    return SchmidtData(sv, rank, dev)


def _frozen_real(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column-orthonormal basis of a subspace of ``C^ambient_dim``."""

    basis: np.ndarray
    pivots: tuple = ()

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=np.complex128)
        if b.ndim != 2 or b.shape[1] < 1 or b.shape[1] > b.shape[0]:
            raise ShapeError(f"invalid subspace basis shape {b.shape}")
        object.__setattr__(self, "basis", _frozen(b))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, vectors: np.ndarray) -> float:
        """Frobenius norm of the part of ``vectors`` outside this subspace."""
        v = np.asarray(vectors).reshape(self.ambient_dim, -1)
        return float(np.linalg.norm(v - self.basis @ (self.basis.conj().T @ v)))

    def contains(self, other: "Subspace", tol: float) -> bool:
        return other.ambient_dim == self.ambient_dim and self.residual(other.basis) <= tol

    def same_as(self, other: "Subspace", tol: float) -> bool:
        return other.dim == self.dim and self.contains(other, tol)


def span(vectors: np.ndarray, tol: Tolerances = DEFAULT) -> Subspace:
    """Canonical orthonormal basis of the column span of ``vectors``.

    The rank comes from an SVD; the basis is then extracted from the
    (gauge-free) projector by greedy column pivoting, ties going to the
    lowest flattened index, and returned in ascending pivot order. A span
    of computational basis vectors therefore comes back as exactly those
    vectors.
    """
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    rank = int(np.count_nonzero(s > tol.rank))
    if rank == 0:
        raise DegenerateInputError("cannot span an all-zero set of vectors")
    u = u[:, :rank]
    resid = u @ u.conj().T
    picked = []
    for _ in range(rank):
        weights = np.real(np.diag(resid))
        k = int(np.flatnonzero(weights >= weights.max() - tol.rank)[0])
        q = resid[:, k] / np.sqrt(weights[k])
        q = q * (abs(q[k]) / q[k])
        picked.append((k, q))
        resid = resid - np.outer(q, q.conj())
    picked.sort(key=lambda kq: kq[0])
    basis = np.stack([q for _, q in picked], axis=1)
    return Subspace(basis, tuple(k for k, _ in picked))


def reduced_support(
    state: StateVector, bip: Bipartition, side: Side, tol: Tolerances = DEFAULT
) -> Subspace:
    """Support of one side of ``state`` across ``bip``.

    Side A is the column space of the regrouped matrix, side B the column
    space of its conjugate transpose.
    """
    m = regroup(state, bip)
    if side == "A":
        return span(m, tol)
    if side == "B":
        return span(m.conj().T, tol)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def reduced_density(state: StateVector, parties: Sequence[int]) -> np.ndarray:
    """Partial trace keeping ``parties`` (in ascending order)."""
    keep = tuple(sorted(parties))
    rest = tuple(i for i in range(state.n_parties) if i not in keep)
    if not rest:
        return np.outer(state.amplitudes, state.amplitudes.conj())
    m = regroup(state, Bipartition(keep, rest))
    return m @ m.conj().T
