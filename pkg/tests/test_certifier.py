import numpy as np
import pytest

from nonlocert import constructions as C
from nonlocert.certifier import (
    CERTIFIED,
    STRONGLY_NONLOCAL,
    UNCERTIFIED,
    certify,
    find_mes_witness,
)
from nonlocert.errors import NotOrthogonalError, ParameterError
from nonlocert.partition import enumerate_bipartitions
from nonlocert.serialize import dumps_report
from nonlocert.tensor import Bipartition, StateSet, superpose

AB_C = Bipartition((0, 1), (2,))


def test_eq1_witness_is_bell_triple():
    w = find_mes_witness(C.ghz_subset_3qubit(), AB_C)
    assert w.member_indices == (0, 1, 3)  # phi1, phi2, phi4
    assert w.effective_dim == 2


def test_lemma1_c_ab_witness():
    w = find_mes_witness(C.mes_set_3x3x3(), Bipartition((0, 1), (2,)))
    assert w.member_indices == (0, 1, 2, 5)  # first three and the sixth
    assert w.effective_dim == 3


def test_kpartite_one_vs_rest_witness():
    s = C.mes_set_kpartite(4, 3)
    w = find_mes_witness(s, Bipartition((0,), (1, 2, 3)))
    assert w.member_indices == (0, 1, 2, 3)  # phase family + party-0 shift with j=0
    assert w.effective_dim == 3


@pytest.mark.parametrize("hint, bip, ok", [
    ((0, 1, 2, 3), Bipartition((0,), (1, 2)), True),
    ((0, 1, 2, 4), Bipartition((0, 2), (1,)), True),
    ((0, 1, 2, 5), Bipartition((0, 1), (2,)), True),
    ((0, 1, 2, 3), Bipartition((0, 1), (2,)), False),
    ((0, 1, 2), Bipartition((0,), (1, 2)), False),
])
def test_hint_validation(hint, bip, ok):
    w = find_mes_witness(C.mes_set_3x3x3(), bip, hint=hint)
    assert (w is not None) == ok
    if ok:
        assert w.member_indices == tuple(sorted(hint))


def test_hint_errors():
    with pytest.raises(ParameterError):
        find_mes_witness(C.mes_set_3x3x3(), AB_C, hint=(0, 9))
    with pytest.raises(ParameterError):
        find_mes_witness(C.mes_set_3x3x3(), AB_C, hint=(0, 0, 1))


def test_certify_eq1():
    rep = certify(C.ghz_subset_3qubit())
    assert rep.overall == STRONGLY_NONLOCAL
    assert [e.verdict for e in rep.entries] == [CERTIFIED] * 3
    for e in rep.entries:
        assert len(e.witness.member_indices) == 3
        assert set(e.opm) == {"A", "B"}


def test_certify_thm3_d4():
    rep = certify(C.mes_set_tripartite(4))
    assert rep.certified
    assert all(len(e.witness.member_indices) == 5 for e in rep.entries)


def test_certify_product_pair_is_uncertified():
    dims = (2, 2, 2)
    s = StateSet("pair", dims, (superpose([(1, (0, 0, 0))], dims), superpose([(1, (1, 1, 1))], dims)))
    rep = certify(s)
    assert all(e.verdict == UNCERTIFIED for e in rep.entries)
    assert not rep.certified


def test_certify_rejects_non_orthogonal_set():
    dims = (2, 2, 2)
    a = superpose([(1, (0, 0, 0)), (1, (1, 1, 1))], dims)
    b = superpose([(1, (0, 0, 0))], dims)
    with pytest.raises(NotOrthogonalError) as err:
        certify(StateSet("bad", dims, (a, b)))
    assert (err.value.i, err.value.j) == (0, 1)
    assert abs(err.value.value) == pytest.approx(1 / np.sqrt(2))


@pytest.mark.parametrize("make", [
    C.ghz_subset_3qubit,
    lambda: C.ghz_subset_nqubit(5),
    C.mes_set_3x3x3,
    lambda: C.mes_set_tripartite(5),
    lambda: C.mes_set_kpartite(4, 3),
])
def test_witnesses_revalidate_and_respect_size_bound(make):
    s = make()
    rep = certify(s, skip_opm=True)
    for e in rep.entries:
        if e.witness is not None:
            assert e.witness.verify(s)
            assert len(e.witness.member_indices) >= e.witness.effective_dim + 1


def test_verify_rejects_tampered_witness():
    s = C.ghz_subset_3qubit()
    w = find_mes_witness(s, AB_C)
    from dataclasses import replace

    assert not replace(w, member_indices=(0, 1, 2)).verify(s)
    assert not replace(w, member_indices=(0, 1)).verify(s)


def test_kpartite_two_two_cuts_report_diagnostics():
    rep = certify(C.mes_set_kpartite(4, 3), skip_opm=True)
    e = rep.entry(Bipartition((0, 1), (2, 3)))
    assert e.verdict == UNCERTIFIED and e.witness is None
    assert e.diagnostics.frame_dims == (9, 9)
    assert set(e.diagnostics.state_ranks) == {3}
    assert e.diagnostics.candidates


def test_determinism_and_thread_equivalence():
    s = C.mes_set_kpartite(4, 3)
    a = dumps_report(certify(s))
    b = dumps_report(certify(s))
    c = dumps_report(certify(s, workers=4))
    assert a == b == c


@pytest.mark.parametrize("make", [C.ghz_subset_3qubit, C.mes_set_3x3x3, lambda: C.mes_set_kpartite(4, 3)])
def test_phase_invariance(make):
    s = make()
    rng = np.random.default_rng(7)
    phased = StateSet(s.label, s.dims, tuple(x.with_phase(np.exp(1j * rng.uniform(0, 6.3))) for x in s), s.params)
    r1, r2 = certify(s), certify(phased)
    for e1, e2 in zip(r1.entries, r2.entries):
        assert e1.verdict == e2.verdict
        assert (e1.witness and e1.witness.member_indices) == (e2.witness and e2.witness.member_indices)
        for side in "AB":
            assert e1.opm[side].space_dim == e2.opm[side].space_dim


def test_hints_take_precedence_and_fall_back():
    s = C.mes_set_3x3x3()
    rep = certify(s, hints=[(0, 1, 2, 3)], skip_opm=True)
    first = rep.entry(Bipartition((0,), (1, 2)))
    assert first.hinted and first.witness.member_indices == (0, 1, 2, 3)
    others = [e for e in rep.entries if e.bipartition != first.bipartition]
    assert all(not e.hinted and e.verdict == CERTIFIED for e in others)


def test_ghz_cut_witness_is_phi1_phi2_and_matching_state():
    n = 5
    s = C.ghz_subset_nqubit(n)
    for bip in enumerate_bipartitions(n):
        w = find_mes_witness(s, bip)
        i, j, k = w.member_indices
        assert (i, j) == (0, 1)
        bits = [0 if p in bip.block_a else 1 for p in range(n)]
        assert k == C.ghz_index(bits) - 1
