from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flagstab.errors import InputError
from flagstab.exact_linalg import Subspace, intersect, span
from flagstab.flagkit import fl_from_chain
from flagstab.limits import (
    INF,
    POSITIVE,
    SIGNED,
    IndexSet,
    PairingDescriptor,
    SeqSubspace,
    StableFamily,
    StableSubspace,
    closure_certified,
    descriptor_from_json,
    fl_stable,
    perp_certified,
    truncate,
    truncate_chain,
)
from flagstab.pairing import is_closed, perp


def level_vectors(dom, n, *labels):
    ls = dom.labels(n)
    return span([tuple(Fraction(int(l == x)) for l in ls) for x in labels], len(ls))


def restrict(S: Subspace, dom, m: int, n: int) -> Subspace:
    """S ∩ (level-n coordinates), written in level-n coordinates."""
    big = dom.labels(m)
    keep = [i for i, l in enumerate(big) if l in dom.labels(n)]
    window = span([tuple(Fraction(int(i == j)) for j in range(len(big))) for i in keep], len(big))
    return span([[r[i] for i in keep] for r in intersect(S, window).basis], len(keep))


STD = PairingDescriptor("standard_dual", POSITIVE)
STD_SIGNED = PairingDescriptor("standard_dual", SIGNED)


# -- index sets ------------------------------------------------------------------


def test_index_set_normalization():
    s = IndexSet.parse("{-inf..-1} | {1} | {5..inf}", SIGNED)
    assert s.render() == "{-inf..1} | {5..inf}"
    assert 1 in s and -7 in s and 5 in s and 2 not in s
    assert s.labels_at(3) == [-3, -2, -1, 1]


def test_index_set_algebra():
    a = IndexSet.parse("{1..4}", POSITIVE)
    b = IndexSet.parse("{3..inf}", POSITIVE)
    assert a.union(b).render() == "{1..inf}"
    assert a.intersection(b).render() == "{3..4}"
    assert a.difference(b).render() == "{1..2}"
    assert b.complement().render() == "{1..2}"
    assert a.is_finite() and not b.is_finite()
    assert IndexSet.parse("{}", POSITIVE).is_empty()


@given(st.lists(st.integers(-6, 6).filter(bool), max_size=8), st.lists(st.integers(-6, 6).filter(bool), max_size=8))
def test_index_set_operations_match_python_sets(xs, ys):
    a = IndexSet.from_labels(SIGNED, [(x, x) for x in xs])
    b = IndexSet.from_labels(SIGNED, [(y, y) for y in ys])
    window = SIGNED.labels(6)
    assert {l for l in window if l in a.union(b)} == set(xs) | set(ys)
    assert {l for l in window if l in a.intersection(b)} == set(xs) & set(ys)
    assert {l for l in window if l in a.difference(b)} == set(xs) - set(ys)
    assert {l for l in window if l in a.complement()} == set(window) - set(xs)


# -- truncation ------------------------------------------------------------------


def test_down_ray_truncation():
    F1 = StableSubspace.build("signed", "{-inf..1}")
    assert truncate(F1, 3) == level_vectors(SIGNED, 3, -3, -2, -1, 1)


def test_empty_descriptors_truncate_to_zero():
    for n in (1, 2, 5):
        assert truncate(StableSubspace.zero("signed"), n).is_zero()
        assert truncate(SeqSubspace.build("positive"), n).is_zero()


def test_dense_hyperplane_truncation():
    h = SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"])
    assert truncate(h, 4) == span([(1, -1, 0, 0), (0, 1, -1, 0), (0, 0, 1, -1)], 4)


def test_truncation_below_normalization_level():
    d = StableSubspace.build("positive", "{}", [{"5": 1}])
    assert d.normalization_level == 5
    with pytest.raises(InputError):
        d.truncate(4)


@st.composite
def stable_descriptors(draw):
    parts = []
    for _ in range(draw(st.integers(0, 3))):
        a = draw(st.integers(-5, 5).filter(bool))
        b = draw(st.integers(-5, 5).filter(bool))
        lo, hi = sorted((a, b), key=SIGNED.rank)
        if draw(st.booleans()):
            lo = "-inf"
        if draw(st.booleans()):
            hi = "inf"
        parts.append("{" + f"{lo}..{hi}" + "}")
    src = " | ".join(parts) if parts else "{}"
    extra = []
    for _ in range(draw(st.integers(0, 2))):
        labels = draw(st.lists(st.integers(-4, 4).filter(bool), min_size=1, max_size=3, unique=True))
        extra.append({str(l): draw(st.integers(-2, 2)) for l in labels})
    return StableSubspace.build("signed", src, extra)


@given(stable_descriptors(), st.integers(4, 6), st.integers(0, 2))
def test_truncation_is_coherent(d, n, more):
    m = n + more
    assert d.truncate(n) == restrict(d.truncate(m), SIGNED, m, n)


@given(stable_descriptors(), st.integers(4, 6))
def test_stable_descriptors_are_closed(d, n):
    P = STD_SIGNED.at_level(n)
    assert is_closed(d.truncate(n), P)
    closed, cert = closure_certified(d, STD_SIGNED, n, 0)
    assert closed == d.truncate(n)
    assert cert.stable


@given(stable_descriptors(), st.integers(4, 6))
def test_stable_perp_is_exact_at_zero_lookahead(d, n):
    P = STD_SIGNED.at_level(n)
    got, cert = perp_certified(d, STD_SIGNED, n, 0)
    assert cert.stable
    assert got == perp(d.truncate(n), P)


def test_descriptor_json_round_trip():
    d = StableSubspace.build("signed", "{-inf..-2} | {4..inf}", [{"1": 1, "2": "1/2"}])
    assert descriptor_from_json(d.to_json()) == d
    h = SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"], [{"1": 1}])
    assert descriptor_from_json(h.to_json()).truncate(5) == h.truncate(5)


# -- certified perp and closure --------------------------------------------------


def test_dense_hyperplane_perp_is_zero():
    h = SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"])
    got, cert = perp_certified(h, STD, 4, 1)
    assert got.is_zero()
    assert cert.stable and (cert.level, cert.lookahead) == (4, 1)


def test_dense_hyperplane_closure_is_full():
    h = SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"])
    got, cert = closure_certified(h, STD, 4, 1)
    assert got.is_full() and cert.stable
    assert truncate(h, 4) < got


def test_lookahead_zero_is_not_enough_for_the_dense_hyperplane():
    h = SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"])
    got, cert = perp_certified(h, STD, 4, 0)
    assert got.dim == 1
    assert not cert.stable


def test_far_family_gives_full_perp():
    far = SeqSubspace.build("positive", ["e(k) for k >= 10"])
    got, cert = perp_certified(far, STD, 4, 1)
    assert got.is_full() and cert.stable


def test_zero_descriptor_closure():
    got, cert = closure_certified(SeqSubspace.build("positive"), STD, 3)
    assert got.is_zero() and cert.stable


def test_negative_lookahead_is_rejected():
    with pytest.raises(InputError):
        perp_certified(SeqSubspace.build("positive"), STD, 3, -1)


def test_certificates_are_monotone_for_the_dense_hyperplane():
    h = SeqSubspace.build("positive", ["e(k) - e(k+1) for k >= 1"])
    for n in range(3, 9):
        flags = [closure_certified(h, STD, n, L)[1].stable for L in range(0, 4)]
        first = flags.index(True)
        assert all(flags[first:])


def test_split_pairings_need_signed_domain():
    with pytest.raises(InputError):
        PairingDescriptor("split_symmetric", POSITIVE)


# -- descriptor flags ------------------------------------------------------------


def gap_chain(with_one: bool):
    lower = StableFamily.parse("{-i..-1} for i >= 1", "signed")
    src = "{-inf..-1} | {1} | {j..inf} for j >= 2" if with_one else "{-inf..-1} | {j..inf} for j >= 2"
    upper = StableFamily.parse(src, "signed")
    return [StableSubspace.zero("signed"), lower, upper, StableSubspace.full("signed")]


def test_family_limits():
    lower, upper = gap_chain(False)[1:3]
    assert lower.increasing and not upper.increasing
    assert lower.limit().index_part.render() == "{-inf..-1}"
    assert upper.limit().index_part.render() == "{-inf..-1}"


def middle_pairs(C):
    lower, upper = C[1], C[2]
    return [p for p in fl_stable(C).inserted_pairs if p.pred == lower.top and p.succ == upper.bottom]


def test_fl_stable_omits_the_pair_when_union_equals_intersection():
    C = gap_chain(False)
    assert middle_pairs(C) == []
    # only the outer pairs (0, V_1) and (W_1, V) remain
    assert len(fl_stable(C).inserted_pairs) == 2


def test_fl_stable_inserts_the_pair_when_union_differs_from_intersection():
    (pair,) = middle_pairs(gap_chain(True))
    assert pair.pred.index_part.render() == "{-inf..-1}"
    assert pair.succ.index_part.render() == "{-inf..1}"
    assert not pair.inf_marker


def test_fl_stable_of_the_trivial_chain():
    F = fl_stable([StableSubspace.zero("positive"), StableSubspace.full("positive")])
    (pair,) = F.inserted_pairs
    assert pair.inf_marker
    G = F.truncate(3)
    assert len(G.pairs) == 1 and G.pairs[0].pred.is_zero() and G.pairs[0].succ.is_full()


@pytest.mark.parametrize("with_one", [False, True])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_fl_stable_commutes_with_truncation(with_one, n):
    C = gap_chain(with_one)
    dim = SIGNED.dim(n)
    expected = fl_from_chain(truncate_chain(C, n), Subspace.full(dim))
    assert fl_stable(C).truncate(n) == expected


def test_fl_stable_rejects_non_chains():
    a = StableSubspace.build("positive", "{1}")
    b = StableSubspace.build("positive", "{2}")
    with pytest.raises(InputError):
        fl_stable([StableSubspace.zero("positive"), a, b, StableSubspace.full("positive")])
    with pytest.raises(InputError):
        fl_stable([a, StableSubspace.full("positive")])


def test_non_monotone_family_is_rejected():
    with pytest.raises(InputError):
        StableFamily.parse("{i..i} for i >= 1", "positive")


def test_infinite_marker_semantics():
    neg = StableSubspace.build("signed", "{-inf..-1}")
    assert StableSubspace.zero("signed").gap_is_infinite(neg)
    assert not neg.gap_is_infinite(StableSubspace.build("signed", "{-inf..1}"))
    assert INF > 0
