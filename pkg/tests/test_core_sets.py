import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genlimit.core_sets import (
    EMPTY_BASE,
    EMPTY_SET,
    FULL_BASE,
    INFINITE,
    Cardinality,
    Finite,
    FiniteSet,
    SeenLog,
    base_difference,
    fms,
    fms_cardinality,
    fms_count_in,
    fms_enumerate,
    fms_first,
    fms_intersection,
    fms_is_infinite,
    fms_member,
    fms_modify,
    fms_nth,
    fms_relate,
    mult,
    parity,
    suffix,
    zigzag_decode,
    zigzag_encode,
)
from genlimit.errors import UnknownBasePair

W = 400  # window for brute-force counting; corrections stay below 60


def window(s, n=W):
    return {x for x in range(0, n + 1) if fms_member(s, x)}


def brute_card(members_upto):
    """Finite(k) when the count stops growing between W and 2W, else Infinite."""
    a, b = members_upto(W), members_upto(2 * W)
    return Finite(a) if a == b else INFINITE


def brute_diff(a, b):
    return brute_card(lambda n: len(window(a, n) - window(b, n)))


# families whose pairwise relations are tabulated
FAMILIES = {
    "suffix": st.builds(suffix, st.integers(-6, 6)),
    "mult": st.builds(mult, st.integers(1, 6)),
    "parity": st.builds(parity, st.integers(0, 1)),
}
shared = st.sampled_from([EMPTY_BASE, FULL_BASE])
ids = st.lists(st.integers(0, 60), max_size=6)


@st.composite
def fms_pair(draw):
    family = draw(st.sampled_from(sorted(FAMILIES)))
    base = st.one_of(FAMILIES[family], shared)
    a = fms(draw(base), draw(ids), draw(ids))
    b = fms(draw(base), draw(ids), draw(ids))
    return a, b


def test_zigzag_examples():
    assert [zigzag_encode(z) for z in (0, 1, -1, 2, -2)] == [1, 2, 3, 4, 5]
    assert zigzag_decode(5) == -2
    with pytest.raises(ValueError):
        zigzag_decode(0)


@given(st.integers(-10**9, 10**9))
def test_zigzag_roundtrip(z):
    x = zigzag_encode(z)
    assert x >= 1
    assert zigzag_decode(x) == z


def test_cardinality_arithmetic():
    assert Finite(2) + Finite(3) == 5
    assert (Finite(2) + INFINITE).is_infinite
    assert Finite(10**6) < INFINITE
    assert not INFINITE < INFINITE
    assert Cardinality.from_json(INFINITE.to_json()) == INFINITE
    assert Cardinality.from_json(Finite(4).to_json()) == Finite(4)
    with pytest.raises(ValueError):
        Finite(-1)


def test_normal_form_drops_redundant_corrections():
    s = fms(mult(2), add=[4, 5], sub=[5, 6, 7])
    # 4 is already in the base and 5 is cancelled by the removal
    assert s.add == FiniteSet()
    # 7 is outside the base, so only 6 remains removed
    assert s.sub == FiniteSet([6])
    assert 4 in s and 5 not in s and 6 not in s and 7 not in s


def test_sentinel_never_in_a_base():
    assert not fms_member(fms(FULL_BASE), 0)
    assert fms_member(fms(FULL_BASE, add=[0]), 0)


def test_seen_log_views_and_fast_equality():
    log = SeenLog([3, 1, 4])
    assert not log.append(1)
    v2, v3 = log.view(2), log.view()
    assert v2 == FiniteSet([1, 3])
    assert v3 == {1, 3, 4}
    assert v2 != v3
    assert v3.difference(v2) == FiniteSet([4])
    assert v2.union([9]) == FiniteSet([1, 3, 9])
    assert v3.issubset(FiniteSet([1, 3, 4, 5]))
    assert v3.source == (log, 3)
    assert list(v3) == [1, 3, 4]


def test_view_cancellation_against_log():
    log = SeenLog(range(1, 2001))
    s = fms_modify(fms(FULL_BASE), minus=log.view())
    assert fms_first(s) == 2001
    back = fms_modify(s, plus=log.view())
    assert fms_relate(back, fms(FULL_BASE)).equal


def test_enumeration_examples():
    assert fms_enumerate(fms(FULL_BASE, sub=[2]), 4) == [1, 3, 4, 5]
    # zigzag ids of 0, 1, 2
    assert fms_enumerate(fms(suffix(0)), 3) == [1, 2, 4]
    assert fms_enumerate(fms(EMPTY_BASE, add=[9, 2]), 5) == [2, 9]
    assert fms_nth(fms(mult(3)), 4) == 12
    assert fms_nth(fms(EMPTY_BASE, add=[1]), 2) is None


def test_relate_examples():
    n = fms(FULL_BASE)
    rel = fms_relate(fms(FULL_BASE, sub=[1]), n)
    assert rel.subset and not rel.equal
    assert rel.rdiff_card == 1 and rel.symdiff_card == 1
    rel = fms_relate(fms(suffix(5)), fms(FULL_BASE))
    assert rel.subset and rel.rdiff_card.is_infinite
    rel = fms_relate(fms(suffix(-2)), fms(suffix(1)))
    assert rel.diff_card == 3 and rel.rdiff_card == 0
    assert fms_relate(fms(mult(4)), fms(mult(2))).subset
    assert fms_relate(fms(mult(2)), fms(mult(3))).symdiff_card.is_infinite
    assert fms_cardinality(fms(EMPTY_BASE, add=[1, 2])) == 2


def test_unknown_pairs_raise():
    with pytest.raises(UnknownBasePair):
        base_difference(suffix(0), mult(2))


@settings(max_examples=300, deadline=None)
@given(fms_pair())
def test_relate_matches_brute_force(pair):
    a, b = pair
    rel = fms_relate(a, b)
    assert rel.diff_card == brute_diff(a, b)
    assert rel.rdiff_card == brute_diff(b, a)
    assert rel.subset == (window(a, 2 * W) <= window(b, 2 * W))
    assert rel.equal == (window(a, 2 * W) == window(b, 2 * W))


@settings(max_examples=200, deadline=None)
@given(fms_pair(), ids, ids)
def test_modify_and_intersection_match_sets(pair, plus, minus):
    a, b = pair
    mod = fms_modify(a, plus=plus, minus=minus)
    assert window(mod) == (window(a) | set(plus)) - set(minus)
    inter = fms_intersection(a, b)
    assert window(inter) == window(a) & window(b)


@settings(max_examples=200, deadline=None)
@given(fms_pair(), st.lists(st.integers(0, 100), max_size=10))
def test_cardinality_and_count_in(pair, values):
    a, _ = pair
    assert fms_cardinality(a) == brute_card(lambda n: len(window(a, n)))
    assert fms_is_infinite(a) == fms_cardinality(a).is_infinite
    assert fms_count_in(a, values) == len(window(a) & set(values))


@settings(max_examples=150, deadline=None)
@given(fms_pair(), st.integers(1, 50))
def test_enumeration_is_sorted_members(pair, start):
    a, _ = pair
    members = sorted(x for x in window(a) if x >= 1)
    assert fms_enumerate(a, 20) == members[:20]
    above = [x for x in members if x >= start]
    assert fms_first(a, start) == (above[0] if above else None)


@given(st.lists(st.integers(1, 200), max_size=30), st.lists(st.integers(1, 200), max_size=30))
def test_finite_set_algebra(xs, ys):
    log = SeenLog(xs)
    a, b = log.view(), FiniteSet(ys)
    assert a.union(b) == set(xs) | set(ys)
    assert a.difference(b) == set(xs) - set(ys)
    assert b.difference(a) == set(ys) - set(xs)
    assert a.intersection(b) == set(xs) & set(ys)
    assert a.issubset(b) == (set(xs) <= set(ys))
    assert a.isdisjoint(b) == set(xs).isdisjoint(ys)
    assert hash(a) == hash(FiniteSet(xs))
    assert EMPTY_SET.union(a) == a
