import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from seriesforge.errors import EmptyResult, InvalidQuotientMap, NonMonotoneSelector
from seriesforge.hypernumber import (
    CONSISTENT,
    VIOLATED,
    HyperRep,
    QuotientMap,
    analytical_sum,
    brst_integer_obstruction,
    c0_equiv_monitor,
    checkpoints_to_quotient,
    extend_permutation,
    j0,
    j1,
    parse_quotient_map,
    quotient_series,
    subnumber_extract,
)
from seriesforge.indexsets import IndexSet
from seriesforge.rearrange import PermutationPrefix, RearrangementResult, TargetSpec, constrained_rearrange, riemann_rearrange
from seriesforge.series import altharmonic, altpow4ceil, altsign, partial_sums, term, zero_series


@st.composite
def monotone_maps(draw, max_fibers=30):
    sizes = draw(st.lists(st.integers(1, 6), min_size=1, max_size=max_fibers))
    ends, acc = [], 0
    for s in sizes:
        acc += s
        ends.append(acc)
    return QuotientMap(fiber_ends=ends)


# analytical sums -----------------------------------------------------------


def test_analytical_sum_examples():
    assert analytical_sum(altsign(), 6).prefix(6) == [1, 0, 1, 0, 1, 0]
    assert analytical_sum(zero_series(), 5).prefix(5) == [0] * 5
    assert analytical_sum(altharmonic(), 4).prefix(4) == [1, Fraction(1, 2), Fraction(5, 6), Fraction(7, 12)]
    with pytest.raises(ValueError):
        analytical_sum(altsign(), 0)


# quotient maps ---------------------------------------------------------------


def test_builtin_projections():
    q0 = quotient_series(altsign(), j0())
    assert [q0(i) for i in range(1, 1001)] == [0] * 1000
    q1 = quotient_series(altsign(), j1())
    assert [q1(i) for i in range(1, 1001)] == [1] + [0] * 999
    assert j0().fiber(3) == (5, 6)
    assert j1().fiber(1) == (1, 3) and j1().fiber(2) == (4, 5)
    # j1 as a map: j1(1) = 1, j1(2k) = j1(2k + 1) = k
    p = j1()
    assert p(1) == 1 and all(p(2 * k) == p(2 * k + 1) == k for k in range(2, 50))


def test_identity_map_reproduces_series():
    p = QuotientMap(ends_rule=lambda i: i)
    q = quotient_series(altharmonic(), p)
    assert [q(i) for i in range(1, 30)] == [term(altharmonic(), i) for i in range(1, 30)]


def test_general_map_and_validation():
    p = QuotientMap(fibers=[(3, 4), (1, 2), (5, 5)])
    assert not p.monotone and p.size == 3
    assert p(1) == 2 and p(4) == 1
    q = quotient_series(altharmonic(), p)
    assert q(1) == Fraction(1, 3) - Fraction(1, 4)
    with pytest.raises(InvalidQuotientMap):
        QuotientMap(fibers=[(1, 2), (4, 5)])
    with pytest.raises(InvalidQuotientMap):
        QuotientMap(fibers=[(1, 3), (3, 4)])
    with pytest.raises(InvalidQuotientMap):
        QuotientMap(fiber_ends=[2, 2, 5])
    with pytest.raises(InvalidQuotientMap):
        QuotientMap()
    with pytest.raises(InvalidQuotientMap):
        p.fiber_end(1)


def test_quotient_map_json():
    p = QuotientMap(fiber_ends=[2, 5, 9])
    assert p.to_json() == {"kind": "monotone", "fiber_ends": [2, 5, 9]}
    assert QuotientMap.from_json(p.to_json()).to_json() == p.to_json()
    assert parse_quotient_map("j1").name == "j1"
    assert parse_quotient_map('{"kind":"monotone","fiber_ends":[1,3]}').fiber(2) == (2, 3)
    g = QuotientMap(fibers=[(2, 2), (1, 1)])
    assert QuotientMap.from_json(g.to_json()).fiber(1) == (2, 2)


@given(monotone_maps(), st.sampled_from([altharmonic, altsign, altpow4ceil]))
def test_quotient_partial_sums_hit_fiber_ends(p, make):
    src = make()
    q = quotient_series(src, p)
    A = partial_sums(src, p.fiber_end(p.size))
    acc = 0
    for i in range(1, p.size + 1):
        acc += q(i)
        assert acc == A[p.fiber_end(i) - 1]


# checkpoints -> quotient ----------------------------------------------------


def test_checkpoints_grouping_example():
    sigma = PermutationPrefix(range(1, 10))
    r = RearrangementResult(sigma, checkpoints=[2, 5, 9], checkpoint_sums=[None] * 3, targets=[0, 0, 0])
    c, p = checkpoints_to_quotient(r, altharmonic())
    assert [p.fiber(i) for i in (1, 2, 3)] == [(1, 2), (3, 5), (6, 9)]
    assert c(1) == Fraction(1, 2)


def test_single_checkpoint():
    sigma = PermutationPrefix([3])
    r = RearrangementResult(sigma, checkpoints=[1], checkpoint_sums=[Fraction(1, 3)], targets=[0])
    c, _ = checkpoints_to_quotient(r, altharmonic())
    assert c(1) == term(altharmonic(), 3)
    with pytest.raises(EmptyResult):
        checkpoints_to_quotient(RearrangementResult(PermutationPrefix()), altharmonic())


def test_quotient_reproduces_riemann_checkpoints():
    r = riemann_rearrange(altharmonic(), TargetSpec.const(Fraction(1, 2)), 60)
    c, _ = checkpoints_to_quotient(r, altharmonic())
    acc = Fraction(0)
    for n in range(1, 61):
        acc += c(n)
        assert acc == r.checkpoint_sums[n - 1]


def test_quotient_transports_constrained_bound():
    A = IndexSet.residues(4, [1, 2])
    b = TargetSpec.sequence(lambda n: (-1) ** n)
    r = constrained_rearrange(altpow4ceil(), A, b, 15)
    c, _ = checkpoints_to_quotient(r, altpow4ceil())
    acc = Fraction(0)
    for n in range(1, 16):
        acc += c(n)
        assert abs(acc - (-1) ** n) <= Fraction(1, n)


# subnumbers ------------------------------------------------------------------


def test_subnumber_examples():
    rep = HyperRep(lambda n: n % 2)
    even = subnumber_extract(rep, lambda n: 2 * n)
    assert even.prefix(10) == [0] * 10
    assert subnumber_extract(rep, lambda n: n).prefix(7) == rep.prefix(7)
    an = analytical_sum(altharmonic(), 200)
    evens = subnumber_extract(an, lambda n: 2 * n)
    vals = [evens(n) for n in range(1, 100)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < Fraction(7, 10)


def test_subnumber_rejects_nonmonotone_selectors():
    rep = HyperRep(lambda n: n)
    with pytest.raises(NonMonotoneSelector):
        subnumber_extract(rep, [1, 3, 3])
    with pytest.raises(NonMonotoneSelector):
        subnumber_extract(rep, lambda n: 10 - n)
    lazy = subnumber_extract(rep, lambda n: n if n < 2000 else 1, check=10)
    with pytest.raises(NonMonotoneSelector):
        lazy(2000)


@given(st.lists(st.integers(1, 5), min_size=1, max_size=20), st.lists(st.integers(1, 5), min_size=1, max_size=20))
def test_subnumber_composition(g1, g2):
    s1 = [sum(g1[:i + 1]) for i in range(len(g1))]
    s2 = [sum(g2[:i + 1]) for i in range(len(g2))]
    s2 = [x for x in s2 if x <= len(s1)]
    rep = HyperRep(lambda n: Fraction(n * n + 1, n + 3))
    two_steps = subnumber_extract(subnumber_extract(rep, s1), s2)
    composed = subnumber_extract(rep, [s1[i - 1] for i in s2])
    assert two_steps.prefix(len(s2)) == composed.prefix(len(s2))


# c0 monitor ------------------------------------------------------------------


def test_c0_monitor_examples():
    x = HyperRep(lambda n: Fraction(1, n))
    rep = c0_equiv_monitor(x, x, 100)
    assert rep.verdict == CONSISTENT and rep.evidence == "FINITE_HORIZON"
    alt = HyperRep(lambda n: n % 2)
    zero = HyperRep(lambda n: 0)
    rep = c0_equiv_monitor(alt, zero, 50, schedule=lambda n: Fraction(1, 2))
    assert rep.verdict == VIOLATED and rep.first_violation == 1
    assert rep.to_dict()["verdict"] == "VIOLATED(1)"
    with pytest.raises(ValueError):
        c0_equiv_monitor(x, x, 5, schedule=lambda n: n)


def test_c0_monitor_on_verified_checkpoints():
    r = riemann_rearrange(altharmonic(), TargetSpec.const(Fraction(1, 2)), 80)
    S = HyperRep.from_values(r.checkpoint_sums)
    b = HyperRep.from_values(r.targets)
    rep = c0_equiv_monitor(S, b, 80)
    assert rep.verdict == CONSISTENT and rep.witness is not None


# integer obstruction ---------------------------------------------------------


def test_obstruction_examples():
    ident = PermutationPrefix.identity(0)
    r0 = brst_integer_obstruction(j0(), ident, 100)
    assert r0.holds and r0.partial_sums == [0] * 100
    r1 = brst_integer_obstruction(j1(), ident, 100)
    assert r1.holds and r1.partial_sums == [1] * 100
    assert r1.to_dict()["obstruction"] == "CONFIRMED"


def test_obstruction_random_maps_and_prefixes():
    rng = random.Random(20261014)
    for _ in range(100):
        m = rng.randint(0, 60)
        sigma = rng.sample(range(1, 200), m)
        ends, acc = [], 0
        for _ in range(200):
            acc += rng.randint(1, 7)
            ends.append(acc)
        rep = brst_integer_obstruction(QuotientMap(fiber_ends=ends), sigma, 200)
        assert rep.holds


def test_obstruction_refuted_for_non_integer_series():
    rep = brst_integer_obstruction(j0(), [], 10, source=altharmonic())
    assert not rep.holds and rep.first_non_integer == 1


def test_extend_permutation_fills_gaps():
    s = extend_permutation([4, 2])
    assert [s(j) for j in range(1, 7)] == [4, 2, 1, 3, 5, 6]
    with pytest.raises(ValueError):
        extend_permutation([1, 1])
