import itertools
import random

import pytest

from interlength.agents import agent, graft, nd_via_agents, random_agent, reduction_steps
from interlength.errors import BudgetExceeded
from interlength.pointers import (
    Membership, Play, PlayError, SimulationError, atomic_interaction, enumerate_interactions,
    format_play, in_interaction, is_cotrace, is_trace, iter_interactions, maximal_interactions,
    parse_play, simulate_play, simulate_step,
)

from oracles import brute_interactions, chain_depth, oview, pview

LADDER = parse_play("O@- P@0 O@1 P@2")
BRANCH = parse_play("O@- P@0 O@1 P@0")


def corpus(n_max=2, p_max=2, depths=(2, 3, 4)):
    for n in range(n_max + 1):
        for p in range(p_max + 1):
            for d in depths:
                for just in iter_interactions(n, p, d):
                    yield n, p, d, Play(just)


# -- plays and views ---------------------------------------------------------------

def test_text_round_trip():
    assert format_play(LADDER) == "O@- P@0 O@1 P@2"
    assert parse_play(format_play(BRANCH)) == BRANCH


@pytest.mark.parametrize("text", ["P@-", "O@- O@0", "O@- P@1", "O@- P@0 O@0", "O@0"])
def test_bad_plays_rejected(text):
    with pytest.raises(PlayError):
        parse_play(text)


def test_hand_views():
    assert Play([None]).pview(0) == [0] == Play([None]).oview(0)
    assert LADDER.pview(2) == LADDER.pview(1) + [2]
    assert LADDER.pview(3) == LADDER.oview(3) == [0, 1, 2, 3]
    assert BRANCH.pview(3) == [0, 1, 2, 3]
    assert BRANCH.oview(3) == [0, 3]
    assert BRANCH.depth() == 2 and LADDER.depth() == 3


def test_views_match_reference_and_are_well_formed():
    for *_, s in corpus():
        for i in range(len(s)):
            for got, ref in ((s.pview(i), pview(s.just, i)), (s.oview(i), oview(s.just, i))):
                assert got == ref
                assert got[-1] == i and all(x < y for x, y in zip(got, got[1:]))
                assert len(got) <= i + 1


def test_visibility_closure():
    for *_, s in corpus():
        for k in range(len(s)):
            assert s.prefix(k).is_visible()


# -- residual quantities (hand traces) ------------------------------------------------

def test_residual_sizes_on_ladder():
    # P-moves below move 0 reach P-view length 4; O-moves reach O-view length 3
    assert LADDER.rsize(0) == 4
    assert LADDER.rcosize(0) == 3
    assert LADDER.rsize(1) == 2  # O-move 2: O-view [0,1,2], counted from move 1 on
    assert LADDER.rcosize(1) == 3  # P-moves 1, 3 with P-views through 1
    # nothing of the opposite polarity follows the last move
    assert LADDER.rsize(3) == 0
    assert LADDER.rcosize(3) == 1


def test_residual_depth():
    assert LADDER.residual_depth(0) == 3 == LADDER.depth()
    assert LADDER.residual_depth(3) == 0
    assert BRANCH.residual_depth(0) == 2
    assert BRANCH.residual_depth(1) == 1


def test_residual_depth_against_chain_walk():
    for *_, s in corpus():
        for i in range(len(s)):
            brute = 0
            for j in range(i, len(s)):
                k, steps = j, 0
                while k is not None and k > i:
                    k, steps = s.just[k], steps + 1
                if k == i:
                    brute = max(brute, steps)
            assert s.residual_depth(i) == brute
        assert s.residual_depth(0) == max(chain_depth(s.just, j) for j in range(len(s)))


def test_contexts():
    assert LADDER.context(0) == [] and LADDER.cocontext(0) == []
    assert LADDER.context(2) == [0]
    assert LADDER.cocontext(2) == [1]
    assert LADDER.context(3) == [1]
    # contexts split the strict-prefix views by polarity
    for *_, s in corpus():
        for i in range(len(s)):
            own = (s.pview if i % 2 == 0 else s.oview)(i)[:-1]
            other = (s.oview if i % 2 == 0 else s.pview)(i)[:-1]
            assert sorted(s.context(i)) == [m for m in own if (m - i) % 2 == 0]
            assert sorted(s.cocontext(i)) == [m for m in other if (m - i) % 2 == 1]


# -- membership ------------------------------------------------------------------------

def test_single_move_memberships():
    s = Play([None])
    assert is_trace(s, 0, agent(0))
    assert is_trace(s, 0, agent(1))
    assert is_cotrace(s, 0, agent(0))
    assert not is_trace(s, 0, agent(0, [(1, agent(0))]))  # a child with no context move


def test_atomic_coincidence_on_all_visible_sequences():
    """Tr(n[]) and coTr(p[]) at the root reproduce the direct view-length test."""
    plays = brute_interactions(9, 9, 9, 7)
    for just in plays:
        s = Play(just)
        for n, p, d in itertools.product(range(3), range(3), range(1, 5)):
            assert in_interaction(s, 0, agent(n), d, agent(p)) == atomic_interaction(s, n, p, d)


def test_justifier_of_cotrace_move_is_trace():
    rng = random.Random(3)
    agents = [random_agent(rng, max_size=4, max_label=2, max_edge=3) for _ in range(40)]
    checked = 0
    for *_, s in corpus(2, 2, (3, 4)):
        mem = Membership(s)
        for j in range(1, len(s)):
            i = s.just[j]
            for a in agents:
                if mem.cotrace(i, a):
                    checked += 1
                    assert mem.trace(j, a), (format_play(s), i, j, a)
    assert checked > 100


# -- enumeration ---------------------------------------------------------------------------

COUNTS = {(2, 1, 3): 6, (2, 2, 3): 10, (2, 2, 4): 11, (1, 1, 3): 3, (0, 2, 4): 1}


@pytest.mark.parametrize("npd, count", sorted(COUNTS.items()))
def test_counts_frozen(npd, count):
    assert len(brute_interactions(*npd, 9)) == count
    assert enumerate_interactions(*npd).count == count


@pytest.mark.parametrize("n, p, d", list(itertools.product(range(3), range(3), (2, 3, 4))))
def test_enumerator_matches_brute_force_and_agents(n, p, d):
    assert set(iter_interactions(n, p, d)) == set(brute_interactions(n, p, d, 9))
    assert enumerate_interactions(n, p, d).max_length == nd_via_agents(n, p, d)


def test_enumeration_caps():
    with pytest.raises(BudgetExceeded):
        enumerate_interactions(2, 2, 4, max_len=3)
    with pytest.raises(BudgetExceeded):
        enumerate_interactions(3, 3, 4, budget=5)
    with pytest.raises(ValueError):
        enumerate_interactions(1, 1, 1)


def test_maximal_plays_admit_no_extension():
    plays = set(iter_interactions(2, 2, 3))
    for s in maximal_interactions(2, 2, 3):
        assert not any(len(t) == len(s) + 1 and t[:-1] == s.just for t in plays)


# -- simulation -------------------------------------------------------------------------------

def test_first_step_calls_the_argument():
    s = parse_play("O@- P@0")
    assert simulate_step(s, 0, agent(2), 3, agent(1)) == (agent(1), 2, agent(1, [(3, agent(1))]))


def test_simulation_totality():
    steps = 0
    for n, p, d in itertools.product((1, 2), (1, 2), (2, 3)):
        for s in maximal_interactions(n, p, d):
            triples = simulate_play(s, n, d, p)
            for k, (a, e, b) in enumerate(triples):
                assert Membership(s).interaction(k, a, e, b)
            for (a, e, b), (a2, e2, b2) in zip(triples, triples[1:]):
                assert graft(a2, e2, b2) in reduction_steps(graft(a, e, b))
                steps += 1
    assert steps == 38


def test_simulation_rejects_bad_input():
    s = parse_play("O@- P@0")
    with pytest.raises(SimulationError):
        simulate_step(s, 1, agent(1), 2, agent(1))
    with pytest.raises(SimulationError):
        simulate_step(s, 0, agent(0), 2, agent(1))
