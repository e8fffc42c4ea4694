import pytest
from sympy import isprime

from genlimit.collection import (
    CollectionName,
    TellTaleKind,
    builtin,
    finite_difference_oracle,
    membership_oracle,
    subset_oracle,
    telltale_oracle,
    vsi_membership,
)
from genlimit.core_sets import FiniteSet, SeenLog, fms_member, zigzag_decode
from genlimit.errors import (
    CapabilityMissing,
    ContractViolation,
    EmptyVersionSpace,
    IndexOutOfRange,
    NoTellTale,
    NotAViolationPoint,
)

H = 120


def brute_language(name, i):
    """Members among ids 1..H written straight from each collection's definition."""
    if name == "SINGLE_REMOVAL":
        return {x for x in range(1, H + 1) if x != i}
    if name == "SUFFIXES":
        return {x for x in range(1, H + 1) if i == 0 or zigzag_decode(x) >= zigzag_decode(i)}
    if name == "PRIME_MULTIPLES":
        p = [q for q in range(2, 1000) if isprime(q)][i - 1]
        return {x for x in range(1, H + 1) if x % p == 0}
    if name == "PARITY_DEMO":
        values = {v for v in range(0, H) if v % 2 == 0} if i == 1 else {0} | {v for v in range(0, H) if v % 2}
        return {v + 1 for v in values if v + 1 <= H}
    raise AssertionError(name)


INDICES = {
    "SINGLE_REMOVAL": range(0, 15),
    "SUFFIXES": range(0, 15),
    "PRIME_MULTIPLES": range(1, 10),
    "PARITY_DEMO": range(1, 3),
}


@pytest.mark.parametrize("name", [n.value for n in CollectionName])
def test_membership_matches_definition(name):
    c = builtin(name)
    for i in INDICES[name]:
        got = {x for x in range(1, H + 1) if membership_oracle(c, i, x)}
        assert got == brute_language(name, i), (name, i)


@pytest.mark.parametrize("name", [n.value for n in CollectionName])
def test_subset_matches_window(name):
    c = builtin(name)
    for i in INDICES[name]:
        for j in INDICES[name]:
            # every builtin language is determined by its first H ids at these indices
            assert subset_oracle(c, i, j) == (brute_language(name, i) <= brute_language(name, j)), (i, j)


def test_single_removal_examples():
    c = builtin("SINGLE_REMOVAL")
    assert subset_oracle(c, 3, 0) and not subset_oracle(c, 0, 3)
    assert finite_difference_oracle(c, 3, 0)
    with pytest.raises(ContractViolation):
        finite_difference_oracle(c, 0, 3)
    with pytest.raises(NoTellTale):
        telltale_oracle(c, 0, "strong")
    assert telltale_oracle(c, 0, "weak") == FiniteSet([1])
    assert telltale_oracle(c, 4, "strong") == FiniteSet()
    with pytest.raises(IndexOutOfRange):
        c.language_at(-1)


def test_suffix_examples():
    c = builtin("SUFFIXES")
    a5 = c.index_of_suffix(5)
    assert subset_oracle(c, a5, 0)
    assert not finite_difference_oracle(c, a5, 0)
    assert finite_difference_oracle(c, c.index_of_suffix(7), a5)
    with pytest.raises(NoTellTale):
        telltale_oracle(c, 0, "weak")


def _telltale_is_valid(c, i, t, kind, indices):
    li = c.language_at(i)
    if not all(fms_member(li, x) for x in t):
        return False
    for j in indices:
        if not c.is_proper_subset(j, i):
            continue
        if kind is TellTaleKind.WEAK and c.has_finite_difference(i, j):
            continue
        if all(c.member(j, x) for x in t):
            return False
    return True


@pytest.mark.parametrize("name", [n.value for n in CollectionName])
@pytest.mark.parametrize("kind", list(TellTaleKind))
def test_declared_telltales_survive_brute_check(name, kind):
    c = builtin(name)
    indices = list(INDICES[name])
    for i in indices:
        try:
            t = c.telltale(i, kind)
        except NoTellTale:
            # a declared absence must be witnessed: every candidate of size <= 2 from L_i fails
            pool = sorted(brute_language(name, i))[:12]
            cands = [()] + [(x,) for x in pool] + [(x, y) for x in pool for y in pool if x < y]
            assert not any(_telltale_is_valid(c, i, cand, kind, c.indices_upto(60)) for cand in cands)
            continue
        assert _telltale_is_valid(c, i, t, kind, c.indices_upto(60))


def test_violation_rules():
    sr = builtin("SINGLE_REMOVAL")
    t = FiniteSet([1, 2, 4])
    j = sr.violation_rule(0, t, TellTaleKind.STRONG)
    assert j == 3
    assert all(sr.member(j, x) for x in t) and sr.is_proper_subset(j, 0)
    with pytest.raises(NotAViolationPoint):
        sr.violation_rule(0, t, TellTaleKind.WEAK)

    sx = builtin("SUFFIXES")
    t = FiniteSet([sx.encode(v) for v in (3, -2, 7)])
    j = sx.violation_rule(0, t, TellTaleKind.WEAK)
    assert j == sx.index_of_suffix(-2)
    assert all(sx.member(j, x) for x in t)
    assert not sx.has_finite_difference(0, j)


def test_witness_hint_follows_a_growing_log():
    sr = builtin("SINGLE_REMOVAL")
    log = SeenLog()
    for x in [1, 2, 3, 5, 6, 4, 8]:
        log.append(x)
        view = log.view()
        expected = min(k for k in range(1, 20) if k not in set(log.items))
        assert sr.violation_rule(0, view, TellTaleKind.STRONG) == expected
    # an older, shorter view must not reuse the later hint
    assert sr.violation_rule(0, log.view(2), TellTaleKind.STRONG) == 3


def brute_vsi(name, samples, max_index=60):
    c = builtin(name)
    consistent = [i for i in c.indices_upto(max_index) if samples <= brute_language(name, i)]
    if not consistent:
        return None
    out = set(range(1, H + 1))
    for i in consistent:
        out &= brute_language(name, i)
    return out


@pytest.mark.parametrize(
    "name,samples",
    [
        ("SINGLE_REMOVAL", {3, 9}),
        ("SUFFIXES", {4, 9, 2}),
        ("PRIME_MULTIPLES", {6, 12}),
        ("PRIME_MULTIPLES", {10, 14}),
        ("PARITY_DEMO", {1}),
        ("PARITY_DEMO", {3}),
    ],
)
def test_vsi_matches_brute_intersection(name, samples):
    c = builtin(name)
    expected = brute_vsi(name, samples)
    # restrict to ids that the first 60 indices can decide
    window = range(1, 50)
    got = {x for x in window if vsi_membership(c, samples, x)}
    assert got == {x for x in expected if x in window}


def test_vsi_empty_version_space():
    with pytest.raises(EmptyVersionSpace):
        builtin("PRIME_MULTIPLES").vsi([6, 35])


def test_capability_flags_gate_oracles():
    c = builtin("SINGLE_REMOVAL").restricted("subset", "telltale_weak")
    with pytest.raises(CapabilityMissing):
        subset_oracle(c, 0, 1)
    with pytest.raises(CapabilityMissing):
        telltale_oracle(c, 0, "weak")
    assert membership_oracle(c, 0, 5)


def test_prime_index_mapping():
    c = builtin("PRIME_MULTIPLES")
    assert [c.prime_at(i) for i in range(1, 6)] == [2, 3, 5, 7, 11]
    with pytest.raises(IndexOutOfRange):
        c.language_at(0)
