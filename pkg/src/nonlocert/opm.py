"""Orthogonality-preserving measurement (OPM) analysis on one side of a cut.

A Hermitian ``E`` on the measured side preserves orthogonality when
``<psi_i| E (x) I |psi_j> = 0`` for every pair ``i < j``. Hermitian
operators on ``C^D`` are parametrized by ``D**2`` real numbers in an
orthonormal basis for the trace inner product:

* ``|a><a|`` for each ``a``;
* ``(|a><b| + |b><a|) / sqrt(2)`` and ``i (|a><b| - |b><a|) / sqrt(2)`` for ``a < b``.

The constraint system is sparse for every family in this package, so it is
split into connected components (variables linked by a shared constraint)
and each component's nullspace is found with a dense SVD. Components of
equal shape are solved in one batched call.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .tensor import Bipartition, Side, StateVector, regroup
from .tolerances import DEFAULT, Tolerances

_SQRT_HALF = np.sqrt(0.5)
_COEFF_FLOOR = 1e-14


def n_params(D: int) -> int:
    return D * D


def _pair_offsets(D: int) -> np.ndarray:
    """Parameter offset of the first real variable of unordered pair ``(a, b)``, ``a <= b``."""
    off = np.full((D, D), -1, dtype=np.int64)
    k = 0
    for a in range(D):
        off[a, a] = k
        k += 1
        for b in range(a + 1, D):
            off[a, b] = k
            k += 2
    return off


def hermitian_unit(D: int, index: int) -> np.ndarray:
    """The Hermitian matrix of basis parameter ``index``."""
    off = _pair_offsets(D)
    for a in range(D):
        if off[a, a] == index:
            e = np.zeros((D, D), dtype=np.complex128)
            e[a, a] = 1.0
            return e
        for b in range(a + 1, D):
            if off[a, b] == index or off[a, b] + 1 == index:
                e = np.zeros((D, D), dtype=np.complex128)
                if off[a, b] == index:
                    e[a, b] = e[b, a] = _SQRT_HALF
                else:
                    e[a, b], e[b, a] = 1j * _SQRT_HALF, -1j * _SQRT_HALF
                return e
    raise IndexError(f"parameter {index} out of range for D={D}")


def params_to_hermitian(x: np.ndarray, D: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    off = _pair_offsets(D)
    iu = np.triu_indices(D, 1)
    e = np.zeros((D, D), dtype=np.complex128)
    e[np.diag_indices(D)] = x[np.diag(off)]
    upper = (x[off[iu]] + 1j * x[off[iu] + 1]) * _SQRT_HALF
    e[iu] = upper
    e[(iu[1], iu[0])] = upper.conj()
    return e


def hermitian_to_params(e: np.ndarray) -> np.ndarray:
    e = np.asarray(e, dtype=np.complex128)
    D = e.shape[0]
    off = _pair_offsets(D)
    iu = np.triu_indices(D, 1)
    x = np.zeros(D * D)
    x[np.diag(off)] = np.real(np.diag(e))
    upper = e[iu] / _SQRT_HALF
    x[off[iu]] = upper.real
    x[off[iu] + 1] = upper.imag
    return x


def measured_matrices(states: Sequence[StateVector], bip: Bipartition, side: Side) -> np.ndarray:
    """Stack of regrouped matrices with the measured side as rows."""
    mats = [regroup(s, bip) for s in states]
    if side == "B":
        mats = [m.T for m in mats]
    elif side != "A":
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return np.stack(mats)


def pair_couplings(psi: np.ndarray):
    """Sparse ``K_ij[a, a'] = sum_b conj(psi_i[a, b]) psi_j[a', b]`` for ``i < j``.

    Returns ``(pair, a, a2, coeff)`` arrays with ``pair`` the row-major
    index of ``(i, j)`` in the strict upper triangle.
    """
    n, D, _ = psi.shape
    si, ai, bi = np.nonzero(psi)
    amp = psi[si, ai, bi]
    order = np.argsort(bi, kind="stable")
    si, ai, bi, amp = si[order], ai[order], bi[order], amp[order]
    bounds = np.flatnonzero(np.diff(bi)) + 1
    keys, vals = [], []
    for s, a, u in zip(np.split(si, bounds), np.split(ai, bounds), np.split(amp, bounds)):
        left, right = np.meshgrid(np.arange(s.size), np.arange(s.size), indexing="ij")
        mask = s[left] < s[right]
        l, r = left[mask], right[mask]
        key = ((s[l] * n + s[r]) * D + a[l]) * D + a[r]
        keys.append(key)
        vals.append(u[l].conj() * u[r])
    if not keys:
        return (np.zeros(0, np.int64),) * 3 + (np.zeros(0, np.complex128),)
    keys = np.concatenate(keys)
    vals = np.concatenate(vals)
    uniq, inv = np.unique(keys, return_inverse=True)
    coeff = np.zeros(uniq.size, dtype=np.complex128)
    np.add.at(coeff, inv, vals)
    keep = np.abs(coeff) > _COEFF_FLOOR
    uniq, coeff = uniq[keep], coeff[keep]
    a2 = uniq % D
    a = (uniq // D) % D
    ij = uniq // (D * D)
    i, j = ij // n, ij % n
    # strict-upper-triangle rank of (i, j)
    pair = i * n - i * (i + 1) // 2 + (j - i - 1)
    return pair, a, a2, coeff


def constraint_matrix(psi: np.ndarray) -> coo_matrix:
    """Real ``(2 * pairs) x D**2`` matrix whose nullspace is the OPM space."""
    n, D, _ = psi.shape
    pair, a, a2, c = pair_couplings(psi)
    off = _pair_offsets(D)
    lo, hi = np.minimum(a, a2), np.maximum(a, a2)
    base = off[lo, hi]
    cr, ci = c.real, c.imag
    diag = a == a2
    up = a < a2
    down = a > a2
    rows, cols, vals = [], [], []

    def emit(mask, col, re_coeff, im_coeff):
        rows.append(2 * pair[mask]); cols.append(col[mask]); vals.append(re_coeff[mask])
        rows.append(2 * pair[mask] + 1); cols.append(col[mask]); vals.append(im_coeff[mask])

    emit(diag, base, cr, ci)
    h = _SQRT_HALF
    emit(up, base, h * cr, h * ci)
    emit(up, base + 1, -h * ci, h * cr)
    emit(down, base, h * cr, h * ci)
    emit(down, base + 1, h * ci, -h * cr)
    n_rows = n * (n - 1)
    if rows:
        rows, cols, vals = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    mat = coo_matrix((vals, (rows, cols)), shape=(n_rows, D * D))
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return mat


@dataclass(frozen=True, eq=False)
class NullBlock:
    columns: np.ndarray   # global parameter indices
    vectors: np.ndarray   # (k, len(columns)) orthonormal rows


def _solve_components(mat: coo_matrix, tol: float):
    n_rows, n_cols = mat.shape
    rows, cols, vals = mat.row, mat.col, mat.data
    graph = coo_matrix(
        (np.ones(rows.size), (rows, n_rows + cols)), shape=(n_rows + n_cols,) * 2
    )
    _, labels = connected_components(graph, directed=False)
    row_lab, col_lab = labels[:n_rows], labels[n_rows:]
    used_rows = np.zeros(n_rows, bool)
    used_rows[rows] = True
    used_cols = np.zeros(n_cols, bool)
    used_cols[cols] = True
    free = np.flatnonzero(~used_cols)

    comp_cols = {}
    for c in np.flatnonzero(used_cols):
        comp_cols.setdefault(col_lab[c], []).append(c)
    comp_rows = {}
    for r in np.flatnonzero(used_rows):
        comp_rows.setdefault(row_lab[r], []).append(r)
    local_row = np.zeros(n_rows, np.int64)
    local_col = np.zeros(n_cols, np.int64)
    for comp, rs in comp_rows.items():
        local_row[rs] = np.arange(len(rs))
    for comp, cs in comp_cols.items():
        local_col[cs] = np.arange(len(cs))

    comps = sorted(comp_cols, key=lambda c: comp_cols[c][0])
    by_shape = {}
    for comp in comps:
        by_shape.setdefault((len(comp_rows[comp]), len(comp_cols[comp])), []).append(comp)

    blocks = {}
    rank = 0
    for (nr, nc), members in by_shape.items():
        slot = np.full(labels.max() + 1, -1, dtype=np.int64)
        slot[members] = np.arange(len(members))
        dense = np.zeros((len(members), nr, nc))
        g = slot[row_lab[rows]]
        sel = g >= 0
        g = g[sel]
        np.add.at(dense, (g, local_row[rows[sel]], local_col[cols[sel]]), vals[sel])
        _, s, vh = np.linalg.svd(dense, full_matrices=True)
        for comp, sg, vhg in zip(members, s, vh):
            r = int(np.count_nonzero(sg > tol))
            rank += r
            if r < nc:
                blocks[comp] = NullBlock(np.asarray(comp_cols[comp]), vhg[r:])
    ordered = [blocks[c] for c in comps if c in blocks]
    return free, ordered, rank


@dataclass(frozen=True, eq=False)
class Eliminator:
    """Two-outcome class-projector measurement ``{P, I - P}``."""

    projector: np.ndarray
    basis_indices: tuple
    eliminated: tuple
    complement_eliminated: tuple


@dataclass(frozen=True, eq=False)
class OpmReport:
    bipartition: Bipartition
    measured_side: str
    grouped_dim: int
    space_dim: int
    free_params: np.ndarray = field(repr=False)
    blocks: tuple = field(repr=False)
    eliminator: Eliminator | None = None

    @property
    def trivial(self) -> bool:
        return self.space_dim == 1

    def param_basis(self) -> np.ndarray:
        """Orthonormal rows spanning the solution space in parameter coordinates."""
        D2 = self.grouped_dim ** 2
        out = np.zeros((self.space_dim, D2))
        k = 0
        for c in self.free_params:
            out[k, c] = 1.0
            k += 1
        for blk in self.blocks:
            out[k : k + len(blk.vectors), blk.columns] = blk.vectors
            k += len(blk.vectors)
        return out

    def hermitian_basis(self, limit: int | None = None) -> list:
        basis = self.param_basis()
        if limit is not None:
            basis = basis[:limit]
        return [params_to_hermitian(x, self.grouped_dim) for x in basis]

    def residual(self, e: np.ndarray) -> float:
        """Distance (trace norm-2) from ``e`` to the solution space."""
        x = hermitian_to_params(e)
        total = 0.0
        for blk in self.blocks:
            xc = x[blk.columns]
            total += float(np.sum((xc - blk.vectors.T @ (blk.vectors @ xc)) ** 2))
        covered = np.zeros(x.size, bool)
        covered[self.free_params] = True
        for blk in self.blocks:
            covered[blk.columns] = True
        total += float(np.sum(x[~covered] ** 2))
        return float(np.sqrt(total))

    def contains(self, e: np.ndarray, tol: float) -> bool:
        return self.residual(e) <= tol

    def with_eliminator(self, eliminator) -> "OpmReport":
        return OpmReport(
            self.bipartition, self.measured_side, self.grouped_dim, self.space_dim,
            self.free_params, self.blocks, eliminator,
        )


def opm_solution_space(
    states: Sequence[StateVector], bip: Bipartition, side: Side, tol: Tolerances = DEFAULT
) -> OpmReport:
    """Solve for every Hermitian ``E`` on ``side`` that keeps the states orthogonal."""
    states = list(states)
    psi = measured_matrices(states, bip, side)
    D = psi.shape[1]
    mat = constraint_matrix(psi)
    free, blocks, rank = _solve_components(mat, tol.nullspace)
    return OpmReport(bip, side, D, D * D - rank, free, tuple(blocks))


def overlap_violation(psi: np.ndarray, projector: np.ndarray) -> float:
    """Largest ``|<psi_i| P (x) I |psi_j>|`` over ``i != j``."""
    n = psi.shape[0]
    g = psi.conj().reshape(n, -1) @ (projector @ psi).reshape(n, -1).T
    np.fill_diagonal(g, 0.0)
    return float(np.max(np.abs(g))) if g.size else 0.0


def support_classes(psi: np.ndarray, tol: float) -> list:
    """Group measured-side basis indices by the set of states touching them.

    Returned in ascending order of each class's smallest index.
    """
    occupied = np.linalg.norm(psi, axis=2) > tol
    classes = {}
    for a in range(psi.shape[1]):
        classes.setdefault(tuple(np.flatnonzero(occupied[:, a])), []).append(a)
    return sorted((tuple(v) for v in classes.values()), key=lambda c: c[0])


def find_eliminator(
    states: Sequence[StateVector],
    bip: Bipartition,
    side: Side,
    report: OpmReport | None = None,
    tol: Tolerances = DEFAULT,
    max_candidates: int = 200_000,
) -> Eliminator | None:
    """First class-projector ``P`` with ``{P, I - P}`` orthogonality preserving.

    Unions of support classes are tried by increasing size, lexicographic
    within a size. ``P`` must annihilate at least one state and ``I - P``
    at least one other. ``None`` means no such projector was found among
    the candidates; it is not a proof of irreducibility.
    """
    states = list(states)
    if report is not None and report.trivial:
        return None
    psi = measured_matrices(states, bip, side)
    n, D, _ = psi.shape
    classes = support_classes(psi, tol.rank)
    if len(classes) < 2:
        return None
    overlaps = []
    for cls in classes:
        block = psi[:, list(cls), :].reshape(n, -1)
        overlaps.append(block.conj() @ block.T)
    overlaps = np.stack(overlaps)
    weights = np.real(np.einsum("cii->ci", overlaps))
    off_mask = ~np.eye(n, dtype=bool)
    thresh = tol.orthogonality
    kill = tol.rank ** 2
    tried = 0
    for size in range(1, len(classes)):
        for combo in itertools.combinations(range(len(classes)), size):
            tried += 1
            if tried > max_candidates:
                return None
            g = overlaps[list(combo)].sum(axis=0)
            if np.max(np.abs(g[off_mask]), initial=0.0) > thresh:
                continue
            inside = np.zeros(len(classes), bool)
            inside[list(combo)] = True
            killed = tuple(int(i) for i in np.flatnonzero(weights[inside].sum(0) <= kill))
            spared = tuple(int(i) for i in np.flatnonzero(weights[~inside].sum(0) <= kill))
            if not killed or not spared:
                continue
            idx = tuple(sorted(a for c in combo for a in classes[c]))
            proj = np.zeros((D, D), dtype=np.complex128)
            proj[idx, idx] = 1.0
            if overlap_violation(psi, proj) > thresh:
                continue
            if overlap_violation(psi, np.eye(D) - proj) > thresh:
                continue
            if report is not None and not report.contains(proj, tol.nullspace):
                continue
            return Eliminator(proj, idx, killed, spared)
    return None
