import random
from functools import lru_cache

import pytest
from hypothesis import given, strategies as st

from interlength.agents import (
    AgentParseError, agent, agent_metrics, atomic_pair, collapse_depth, conjecture_power_matches,
    conjecture_product, conjecture_sweep, decrement_root, format_agent, from_nested, graft,
    inert_core, longest_reduction, nd_via_agents, parse_agent, permuted, random_agent,
    reduction_steps, sandwich, surviving_readings, upper_bound,
)
from interlength.errors import BudgetExceeded, OutOfHypothesis
from interlength.tower import Tower

from oracles import t_longest, t_nd, t_steps, tup

A = parse_agent


# -- text format ---------------------------------------------------------------

def test_round_trip_and_canonical_order():
    a = A("3[{2}1[],{1}0[]]")
    assert format_agent(a) == "3[{1}0[],{2}1[]]"
    assert A(format_agent(a)) is a
    assert A(" 3 [ {1} 0[] , {2}1[] ] ") is a


@pytest.mark.parametrize("text, pos", [("1[{3}1[", 7), ("1[{x}0[]]", 3), ("", 0), ("0[]]", 3)])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(AgentParseError) as info:
        A(text)
    assert info.value.pos == pos
    assert f"position {pos}" in str(info.value)


def test_negative_labels_rejected():
    with pytest.raises(ValueError):
        agent(-1)


# -- structure -----------------------------------------------------------------

def test_graft_examples():
    assert graft(A("1[]"), 3, A("0[]")) is A("1[{3}0[]]")
    assert graft(A("0[{1}0[]]"), 0, A("2[]")) is A("0[{1}0[],{0}2[]]")
    assert graft(A("4[]"), 2, A("1[{1}0[]]")).size == 1 + 2


def test_reduction_step_examples():
    assert reduction_steps(A("0[{5}3[]]")) == []
    assert reduction_steps(A("4[]")) == []
    assert reduction_steps(A("1[{1}0[]]")) == [A("0[{0}0[{1}0[]]]")]
    # two equal children give one successor
    assert len(reduction_steps(A("2[{1}0[],{1}0[]]"))) == 1


@given(st.integers(0, 10**6))
def test_steps_agree_with_oracle_and_graft(seed):
    a = random_agent(random.Random(seed))
    got = reduction_steps(a)
    assert {tup(s) for s in got} == t_steps(tup(a))
    # every successor is a child grafted onto the decremented root
    for s in got:
        assert any(d >= 1 and s is graft(c, d - 1, decrement_root(a)) for d, c in a.children)


def test_metrics():
    assert agent_metrics(A("3[{2}1[],{1}0[]]")) == (3, 3, 2)
    assert agent_metrics(A("0[]")) == (1, 0, 0)
    assert agent_metrics(atomic_pair(2, 5, 4)) == (2, 5, 4)


def test_inert_core_strips_zero_edges():
    assert inert_core(A("2[{0}3[{1}1[]],{1}1[{0}2[]]]")) is A("2[{1}1[]]")


# -- search --------------------------------------------------------------------

def test_longest_examples():
    assert longest_reduction(A("0[]")).longest == 0
    assert longest_reduction(A("1[{1}0[]]")).longest == 1
    assert longest_reduction(A("1[{3}1[]]")).longest == 2


@given(st.integers(0, 10**6))
def test_longest_matches_tuple_oracle(seed):
    a = random_agent(random.Random(seed), max_size=5, max_label=2, max_edge=3)
    assert longest_reduction(a).longest == t_longest(tup(a))
    assert longest_reduction(a, quotient=False).longest == t_longest(tup(a))


@given(st.integers(0, 10**6))
def test_witness_is_a_maximal_chain(seed):
    a = random_agent(random.Random(seed), max_size=5, max_label=2, max_edge=3)
    stats = longest_reduction(a, witness=True)
    assert len(stats.witness) == stats.longest
    prev = a
    for nxt in stats.witness:
        assert nxt in reduction_steps(prev)
        prev = nxt
    assert reduction_steps(prev) == [] or longest_reduction(prev).longest == 0


@lru_cache(maxsize=None)
def _raw_longest(lit):
    # no canonical form: children kept in whatever order they arrive
    n, kids = lit
    if n < 1:
        return 0
    best = 0
    for k, (d, c) in enumerate(kids):
        if d >= 1:
            succ = (c[0], c[1] + ((d - 1, (n - 1, kids)),))
            best = max(best, 1 + _raw_longest(succ))
    return best


def _freeze(lit):
    return (lit[0], tuple((d, _freeze(c)) for d, c in lit[1]))


@given(st.integers(0, 10**6))
def test_canonicalization_soundness(seed):
    rng = random.Random(seed)
    a = random_agent(rng, max_size=5, max_label=2, max_edge=3)
    lit = permuted(a, rng)
    assert from_nested(lit) is a
    assert _raw_longest(_freeze(lit)) == longest_reduction(a).longest


def test_budget_error_carries_count():
    with pytest.raises(BudgetExceeded) as info:
        longest_reduction(atomic_pair(4, 3, 3), budget=10)
    assert info.value.explored > 10


# -- N_d(n, p) -------------------------------------------------------------------

# frozen after agreement with the tuple oracle and the play enumerator
ND = {
    (1, 1, 3): 3, (1, 2, 3): 3, (2, 2, 3): 7, (2, 1, 3): 5, (2, 2, 2): 5,
    (3, 2, 3): 15, (2, 3, 3): 9, (0, 3, 2): 1, (0, 5, 2): 1, (2, 2, 4): 7,
}


@pytest.mark.parametrize("npd, value", sorted(ND.items()))
def test_nd_frozen(npd, value):
    assert t_nd(*npd) == value
    assert nd_via_agents(*npd) == value


def test_nd_needs_depth_two():
    with pytest.raises(OutOfHypothesis):
        nd_via_agents(1, 1, 1)


def test_nd_monotone():
    grid = {(n, p, d): nd_via_agents(n, p, d) for n in range(4) for p in range(4) for d in range(2, 5)}
    for (n, p, d), v in grid.items():
        for (n2, p2, d2), v2 in grid.items():
            if n <= n2 and p <= p2 and d <= d2:
                assert v <= v2, ((n, p, d), (n2, p2, d2))


# -- bounds ----------------------------------------------------------------------

def test_upper_bound_examples():
    assert upper_bound(A("1[{1}1[]]")) == Tower(0, 1)
    assert upper_bound(A("2[{2}1[]]")) == Tower(1, 3) == 8
    assert upper_bound(A("1[{3}1[]]")) == Tower(2, 1) == 4
    with pytest.raises(OutOfHypothesis):
        upper_bound(A("0[]"))
    with pytest.raises(OutOfHypothesis):
        upper_bound(A("3[]"))


@given(st.integers(0, 10**6))
def test_bound_soundness(seed):
    a = random_agent(random.Random(seed))
    _, mx, depth = agent_metrics(a)
    if depth >= 1 and mx >= 1:
        assert upper_bound(a).compare(longest_reduction(a).longest) >= 0


def test_sandwich():
    assert sandwich(4, 3, 3) == (Tower(1, 2), Tower(1, 16))
    assert sandwich(4, 3, 3)[1] == 65536
    assert sandwich(5, 4, 4) == (Tower(2, 2), Tower(2, 25))
    assert sandwich(5, 4, 4)[0] == 16
    with pytest.raises(OutOfHypothesis):
        sandwich(5, 4, 2)
    low, high = sandwich(4, 3, 3)
    assert low.compare(nd_via_agents(4, 3, 3)) <= 0 <= high.compare(nd_via_agents(4, 3, 3))


def test_collapse_depth():
    assert collapse_depth(3, 1) == 3
    assert collapse_depth(1, 5) == 2
    assert collapse_depth(0, 0) == 0


def test_collapse_depth_saturates():
    for n in range(1, 3):
        for p in range(1, 3):
            c = collapse_depth(n, p)
            assert nd_via_agents(n, p, c) == nd_via_agents(n, p, c + 2)


# -- the depth-3 conjecture ---------------------------------------------------------

def test_conjecture_readings():
    assert conjecture_product(1, 5) == 3
    assert conjecture_product(2, 3) == 9
    assert conjecture_power_matches(1, 2, 3)
    assert not conjecture_power_matches(2, 2, 7)
    rows = conjecture_sweep(6)
    assert [r.value for r in rows if r.n == 1] == [3] * 4
    assert all(r.value == t_nd(r.n, r.p, 3) for r in rows)
    assert surviving_readings(rows) == ["product"]
    assert conjecture_sweep(2) == []
