"""Generators for the GHZ-subset and maximally-entangled state families."""
from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import ParameterError
from .tensor import StateSet, superpose


class PhaseRoot:
    """Powers of the primitive root ``omega = exp(2 pi i / d)``.

    The exponent is reduced mod ``d`` before taking cosine and sine so the
    phase error does not grow with ``j * l``.
    """

    def __init__(self, d: int):
        if d < 1:
            raise ParameterError(f"modulus must be positive, got {d}")
        self.d = int(d)

    def value(self, j: int, l: int) -> complex:
        angle = 2.0 * math.pi * ((j * l) % self.d) / self.d
        return complex(math.cos(angle), math.sin(angle))

    def __repr__(self) -> str:
        return f"PhaseRoot(d={self.d})"


def complement(bits):
    return tuple((b + 1) % 2 for b in bits)


def ghz_subset_3qubit() -> StateSet:
    """The five three-qubit GHZ-basis states in printed order."""
    dims = (2, 2, 2)
    printed = [
        ("phi1", [(1, (0, 0, 0)), (1, (1, 1, 1))]),
        ("phi2", [(1, (0, 0, 0)), (-1, (1, 1, 1))]),
        ("phi3", [(1, (0, 1, 1)), (1, (1, 0, 0))]),
        ("phi4", [(1, (0, 0, 1)), (1, (1, 1, 0))]),
        ("phi5", [(1, (0, 1, 0)), (1, (1, 0, 1))]),
    ]
    states = tuple(superpose(terms, dims, label) for label, terms in printed)
    return StateSet("eq1", dims, states, {"N": 3})


def ghz_index(bits) -> int:
    """1-based position of the plus-state ``|0 a_2..a_N> + |complement>``."""
    n = len(bits)
    return 2 + sum(a << (n - 1 - i) for i, a in enumerate(bits) if i > 0)


def ghz_subset_nqubit(n: int) -> StateSet:
    """``2**(n-1) + 1`` N-qubit GHZ-basis states.

    Position 1 holds ``|0..0> - |1..1>``; the plus-state of the bit string
    ``(0, a_2, .., a_N)`` sits at position ``2 + sum_i a_i 2**(N-i)``.
    """
    if not isinstance(n, (int, np.integer)) or n < 3:
        raise ParameterError(f"N-qubit GHZ family needs N >= 3, got {n!r}")
    n = int(n)
    dims = (2,) * n
    zeros, ones = (0,) * n, (1,) * n
    states = [None] * (2 ** (n - 1) + 1)
    states[0] = superpose([(1, zeros), (-1, ones)], dims, "phi1")
    for tail in itertools.product((0, 1), repeat=n - 1):
        bits = (0,) + tail
        pos = ghz_index(bits)
        label = "phi%d" % pos
        states[pos - 1] = superpose([(1, bits), (1, complement(bits))], dims, label)
    return StateSet("eq3", dims, tuple(states), {"N": n})


def mes_set_3x3x3() -> StateSet:
    """The six 3x3x3 maximally entangled states as printed."""
    w = PhaseRoot(3)
    dims = (3, 3, 3)
    printed = [
        [(1, (0, 0, 0)), (1, (1, 1, 1)), (1, (2, 2, 2))],
        [(1, (0, 0, 0)), (w.value(1, 1), (1, 1, 1)), (w.value(1, 2), (2, 2, 2))],
        [(1, (0, 0, 0)), (w.value(2, 1), (1, 1, 1)), (w.value(1, 1), (2, 2, 2))],
        [(1, (1, 0, 0)), (1, (2, 1, 1)), (1, (0, 2, 2))],
        [(1, (0, 1, 0)), (1, (1, 2, 1)), (1, (2, 0, 2))],
        [(1, (0, 0, 1)), (1, (1, 1, 2)), (1, (2, 2, 0))],
    ]
    states = tuple(
        superpose(terms, dims, "psi%d" % (i + 1)) for i, terms in enumerate(printed)
    )
    return StateSet("lemma1", dims, states, {"d": 3})


def _pattern_label(l: int, d: int, k: int, shifted: int | None):
    return tuple((l + 1) % d if p == shifted else l for p in range(k))


def _phase_state(d: int, k: int, j: int, shifted: int | None, label: str):
    w = PhaseRoot(d)
    terms = [(w.value(j, l), _pattern_label(l, d, k, shifted)) for l in range(d)]
    return superpose(terms, (d,) * k, label)


def mes_set_tripartite(d: int) -> StateSet:
    """``d + 3`` maximally entangled states in ``d x d x d``.

    First the ``d`` phase states ``sum_l omega^(jl) |lll>``, then one
    cyclic-shift state per party with ``l -> l+1 (mod d)`` on that party.
    """
    if not isinstance(d, (int, np.integer)) or d < 3:
        raise ParameterError(f"tripartite MES family needs d >= 3, got {d!r}")
    d = int(d)
    states = [_phase_state(d, 3, j, None, f"phase[j={j}]") for j in range(d)]
    states += [_phase_state(d, 3, 0, p, f"shift[p={p}]") for p in range(3)]
    return StateSet("thm3", (d,) * 3, tuple(states), {"d": d})


def mes_set_kpartite(k: int, d: int) -> StateSet:
    """``(k + 1) d`` maximally entangled states in ``k`` parties of dimension ``d``.

    Ordered pattern-major (no shift, then a shift on party 0, 1, .., k-1)
    and phase-minor (``j = 0 .. d-1``).
    """
    if not isinstance(k, (int, np.integer)) or k < 4:
        raise ParameterError(f"k-partite MES family needs k >= 4, got {k!r}")
    if not isinstance(d, (int, np.integer)) or d < 3:
        raise ParameterError(f"k-partite MES family needs d >= 3, got {d!r}")
    k, d = int(k), int(d)
    states = []
    for shifted in [None] + list(range(k)):
        tag = "none" if shifted is None else f"p={shifted}"
        for j in range(d):
            states.append(_phase_state(d, k, j, shifted, f"shift[{tag}] j={j}"))
    return StateSet("thm4", (d,) * k, tuple(states), {"k": k, "d": d})


FAMILIES = {
    "eq1": (ghz_subset_3qubit, ()),
    "eq3": (ghz_subset_nqubit, ("N",)),
    "lemma1": (mes_set_3x3x3, ()),
    "thm3": (mes_set_tripartite, ("d",)),
    "thm4": (mes_set_kpartite, ("k", "d")),
}


def build_family(family: str, **params) -> StateSet:
    """Dispatch by family name; ``params`` holds ``N``/``d``/``k`` as needed."""
    try:
        fn, names = FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    missing = [n for n in names if params.get(n) is None]
    if missing:
        raise ParameterError(f"family {family!r} needs parameter(s) {', '.join(missing)}")
    return fn(*(params[n] for n in names))
