"""Support enumeration, feasibility systems, and correlated equilibria
on sampled games."""

import itertools
import random

import numpy as np
import pytest

import ipgames.support_search as ss
from ipgames import (
    JointDistribution,
    MixedStrategy,
    conditionally_dominated,
    find_ne,
    solve_ce,
    solve_feasibility,
    sort_sizes,
    sort_strategies,
    tau_based_ne,
)
from ipgames.support_search import payoff_tensors, tau_marginals, tau_payoffs

from conftest import (
    bt_sampled,
    cell_index,
    hawk_dove,
    matching_pennies,
    random_table_game,
    table_game,
    unit_sampled,
)


def is_sampled_equilibrium(sampled, eq, tol=1e-6):
    probs = list(eq.probs)
    for p in range(sampled.num_players):
        best = float(sampled.payoff_against(p, probs).max())
        if best > sampled.expected(p, probs) + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# ordering heuristics


def test_sort_sizes_without_history():
    assert sort_sizes([2, 2], None, 2) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert sort_sizes([1, 1], None, 2) == [(1, 1)]


def test_sort_sizes_without_history_three_players():
    assert sort_sizes([2, 2, 2], None, 3) == [
        (1, 1, 1), (2, 2, 2),
        (1, 1, 2), (1, 2, 1), (2, 1, 1),
        (1, 2, 2), (2, 1, 2), (2, 2, 1),
    ]


def test_sort_sizes_resumes_near_predecessor():
    order = sort_sizes([3, 3], (2, 2), 2)
    assert order[0] == (2, 2)
    assert order.index((2, 2)) < order.index((1, 1))
    assert sorted(order) == sorted(itertools.product((1, 2, 3), repeat=2))


def test_sort_strategies_prefers_recent_support():
    sampled = bt_sampled(3)
    strategies = sampled.strategies
    recent = [
        MixedStrategy([(strategies[0][1], 0.3), (strategies[0][2], 0.7)]),
        MixedStrategy.point_mass(strategies[1][1]),
    ]
    order = sort_strategies(sampled, recent)
    assert order[0] == [2, 1, 0]
    assert order[1] == [1, 0]
    assert sort_strategies(sampled, None) == [[0, 1, 2], [0, 1]]


# ---------------------------------------------------------------------------
# conditional dominance


def test_dominance_against_two_columns():
    sampled = bt_sampled(3)
    assert conditionally_dominated(sampled, 0, 0, [[0, 1, 2], [0, 1]])


def test_dominance_blocked_by_new_column():
    sampled = bt_sampled(4)
    assert not conditionally_dominated(sampled, 0, 0, [[0, 1, 2], [0, 1, 2]])


def test_dominance_needs_a_second_strategy():
    sampled = bt_sampled(0)
    assert not conditionally_dominated(sampled, 0, 0, [[0], [0]])
    with pytest.raises(ValueError):
        conditionally_dominated(bt_sampled(1), 0, 0, [[0, 1], []])


# ---------------------------------------------------------------------------
# feasibility systems


def test_feasibility_recovers_hand_mixed_equilibrium():
    eq = solve_feasibility(bt_sampled(3), [[1, 2], [0, 1]])
    assert eq is not None
    assert eq.probs[0] == pytest.approx([0.0, 3 / 13, 10 / 13], abs=1e-9)
    assert eq.probs[1] == pytest.approx([3 / 11, 8 / 11], abs=1e-9)
    assert eq.values[0] == pytest.approx(56 / 11, abs=1e-9)
    assert eq.values[1] == pytest.approx(13.0, abs=1e-9)
    assert eq.support(0) == (1, 2)
    assert eq.sizes() == (2, 2)


def test_feasibility_rejects_every_support_holding_dead_strategy():
    sampled = bt_sampled(5)
    for extra in itertools.chain.from_iterable(
            itertools.combinations([0, 1, 2], r) for r in range(4)):
        support_a = sorted((3,) + extra)
        for r in range(1, 4):
            for support_b in itertools.combinations([0, 1, 2], r):
                assert solve_feasibility(
                    sampled, [support_a, list(support_b)]) is None


def test_feasibility_singleton_support_is_point_mass():
    eq = solve_feasibility(bt_sampled(0), [[0], [0]])
    assert eq is not None
    assert eq.probs[0] == pytest.approx([1.0])
    assert eq.values == pytest.approx((-84.0, -100.0))


def test_feasibility_epsilon_band():
    game = table_game({1: [[1.0, 1.0], [0.0, 0.0]]},
                      {0: [[0.0, 0.0], [0.0, 0.0]]})
    sampled = unit_sampled(game)
    support = [[0, 1], [0, 1]]
    assert solve_feasibility(sampled, support) is None
    eq = solve_feasibility(sampled, support, epsilon=1.5)
    assert eq is not None
    for p in range(2):
        assert eq.probs[p].sum() == pytest.approx(1.0, abs=1e-9)
        assert eq.probs[p].min() > 1e-9


def test_feasibility_with_pinned_values():
    sampled = bt_sampled(3)
    support = [[1, 2], [0, 1]]
    eq = solve_feasibility(sampled, support, fixed_values=(56 / 11, 13.0))
    assert eq is not None
    assert eq.probs[0] == pytest.approx([0.0, 3 / 13, 10 / 13], abs=1e-9)
    assert solve_feasibility(sampled, support, fixed_values=(0.0, 0.0)) is None


def test_feasibility_rejects_empty_support():
    with pytest.raises(ValueError):
        solve_feasibility(bt_sampled(1), [[], [0]])


# ---------------------------------------------------------------------------
# equilibrium search


def test_find_ne_with_forced_strategy():
    eq = find_ne(bt_sampled(4), forced=(1, 2))
    assert eq is not None
    assert eq.probs[0] == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)
    assert eq.probs[1] == pytest.approx([0.0, 0.0, 1.0], abs=1e-9)


def test_find_ne_exhausts_forced_branch():
    assert find_ne(bt_sampled(5), forced=(0, 3)) is None


def test_find_ne_revisit_with_exclusion():
    eq = find_ne(bt_sampled(5), forced=(1, 2), excluded={(0, 3)},
                 predecessor_sizes=(1, 1))
    assert eq is not None
    assert eq.probs[0] == pytest.approx([0.0, 29 / 39, 10 / 39, 0.0], abs=1e-9)
    assert eq.probs[1] == pytest.approx([0.0, 8 / 11, 3 / 11], abs=1e-9)
    assert eq.values[0] == pytest.approx(179 / 11, abs=1e-9)
    assert eq.values[1] == pytest.approx(13.0, abs=1e-9)


def test_find_ne_restrict_narrows_the_pool():
    sampled = unit_sampled(matching_pennies())
    assert find_ne(sampled, restrict=[[0], [0]]) is None
    assert find_ne(sampled, restrict=[[0], [1]]) is None
    eq = find_ne(sampled)
    assert eq is not None
    assert eq.probs[0] == pytest.approx([0.5, 0.5], abs=1e-9)
    assert eq.probs[1] == pytest.approx([0.5, 0.5], abs=1e-9)
    assert find_ne(sampled, forced=(0, 1), restrict=[[0], [0, 1]]) is None


def test_find_ne_keeps_forced_in_support_and_excluded_out():
    rng = random.Random(3)
    for _ in range(40):
        dims = [rng.randint(2, 4), rng.randint(2, 4)]
        sampled = unit_sampled(random_table_game(rng, dims))
        forced = (0, rng.randrange(dims[0]))
        excluded = {(1, rng.randrange(dims[1]))} if dims[1] > 1 else set()
        eq = find_ne(sampled, forced=forced, excluded=excluded)
        if eq is None:
            continue
        assert eq.probs[forced[0]][forced[1]] > 1e-9
        for p, i in excluded:
            assert eq.probs[p][i] <= 1e-9
        assert is_sampled_equilibrium(sampled, eq)


def test_pruning_never_changes_solvability(monkeypatch):
    rng = random.Random(91)
    games = []
    for _ in range(60):
        games.append([rng.randint(2, 4), rng.randint(2, 4)])
    for _ in range(30):
        games.append([rng.randint(2, 3) for _ in range(3)])
    for dims in games:
        sampled = unit_sampled(random_table_game(rng, dims))
        pruned = find_ne(sampled)
        with monkeypatch.context() as patch:
            patch.setattr(ss, "conditionally_dominated",
                          lambda *args: False)
            plain = find_ne(sampled)
        assert pruned is not None
        assert plain is not None
        assert is_sampled_equilibrium(sampled, pruned)
        assert is_sampled_equilibrium(sampled, plain)


def test_payoff_tensors_match_cells():
    rng = random.Random(5)
    for dims in ([2, 3], [3, 2], [2, 2, 3]):
        sampled = unit_sampled(random_table_game(rng, dims))
        tensors = payoff_tensors(sampled)
        for cell in itertools.product(*[range(d) for d in dims]):
            expect = sampled.pure_cell(cell)
            for p in range(len(dims)):
                assert tensors[p][cell] == pytest.approx(expect[p], abs=1e-12)


# ---------------------------------------------------------------------------
# correlated equilibria


def test_ce_on_pennies_is_uniform():
    sampled = unit_sampled(matching_pennies())
    tau = solve_ce(sampled)
    weights = {cell_index(cells): w for cells, w in tau.atoms}
    assert len(weights) == 4
    for w in weights.values():
        assert w == pytest.approx(0.25, abs=1e-6)
    assert tau_payoffs(sampled, tau) == pytest.approx([0.0, 0.0], abs=1e-9)


def test_ce_welfare_maximum_is_half_quarter_quarter():
    sampled = unit_sampled(hawk_dove())
    tau = solve_ce(sampled)
    weights = {cell_index(cells): w for cells, w in tau.atoms}
    assert weights[(0, 0)] == pytest.approx(0.5, abs=1e-9)
    assert weights[(0, 1)] == pytest.approx(0.25, abs=1e-9)
    assert weights[(1, 0)] == pytest.approx(0.25, abs=1e-9)
    assert weights.get((1, 1), 0.0) == pytest.approx(0.0, abs=1e-9)
    assert tau_payoffs(sampled, tau) == pytest.approx([5.25, 5.25], abs=1e-9)


def test_ce_point_mass_on_singleton():
    tau = solve_ce(bt_sampled(0))
    assert len(tau.atoms) == 1
    assert tau.atoms[0][1] == pytest.approx(1.0)


def test_ce_rows_hold_on_random_games():
    rng = random.Random(17)
    for _ in range(25):
        dims = [rng.randint(2, 3) for _ in range(rng.choice([2, 3]))]
        sampled = unit_sampled(random_table_game(rng, dims))
        tau = solve_ce(sampled)
        tensors = payoff_tensors(sampled)
        mass = np.zeros(sampled.sizes())
        for cells, w in tau.atoms:
            mass[tuple(sampled.index_of(p, s) for p, s in enumerate(cells))] += w
        assert mass.sum() == pytest.approx(1.0, abs=1e-9)
        for p in range(len(dims)):
            for i in range(dims[p]):
                take = [slice(None)] * len(dims)
                take[p] = i
                held = mass[tuple(take)]
                here = tensors[p][tuple(take)]
                for j in range(dims[p]):
                    swap = [slice(None)] * len(dims)
                    swap[p] = j
                    there = tensors[p][tuple(swap)]
                    assert float((held * (there - here)).sum()) <= 1e-7


def test_ce_welfare_at_least_mixed_equilibrium():
    rng = random.Random(23)
    for _ in range(20):
        sampled = unit_sampled(random_table_game(rng, [2, 2]))
        tau = solve_ce(sampled)
        eq = find_ne(sampled)
        assert eq is not None
        ce_welfare = sum(tau_payoffs(sampled, tau))
        ne_welfare = sum(sampled.expected(p, list(eq.probs)) for p in range(2))
        assert ce_welfare >= ne_welfare - 1e-9


# ---------------------------------------------------------------------------
# equilibrium extraction from a correlated distribution


def test_tau_based_ne_on_pennies():
    sampled = unit_sampled(matching_pennies())
    tau = solve_ce(sampled)
    eq = tau_based_ne(sampled, tau)
    assert eq is not None
    assert eq.probs[0] == pytest.approx([0.5, 0.5], abs=1e-9)
    assert eq.probs[1] == pytest.approx([0.5, 0.5], abs=1e-9)
    assert eq.values == pytest.approx((0.0, 0.0), abs=1e-9)


def test_tau_based_ne_fails_on_hawk_dove():
    sampled = unit_sampled(hawk_dove())
    assert tau_based_ne(sampled, solve_ce(sampled)) is None


def test_tau_marginals_and_payoffs():
    sampled = unit_sampled(matching_pennies())
    strategies = sampled.strategies
    cells = [((strategies[0][i], strategies[1][j]), 0.25)
             for i in range(2) for j in range(2)]
    tau = JointDistribution(cells)
    marginals = tau_marginals(sampled, tau)
    assert marginals[0] == pytest.approx([0.5, 0.5], abs=1e-12)
    assert tau_payoffs(sampled, tau) == pytest.approx([0.0, 0.0], abs=1e-12)
    game = sampled.game
    foreign = JointDistribution([
        ((game.make_strategy(0, [1, 1]), strategies[1][0]), 1.0)])
    with pytest.raises(ValueError):
        tau_marginals(sampled, foreign)
