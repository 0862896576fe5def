"""Exhaustive enumeration, one-shot support search, and profile audits."""

import pytest

from ipgames import (
    MixedStrategy,
    Profile,
    SampledGame,
    VerificationReport,
    direct_pns,
    enumerate_strategies,
    solve_feasibility,
    verify_ne,
)
from ipgames.games import BinaryBilinearGame, DuopolyGame, gen_knapsack

from conftest import (
    BT_A_INIT,
    BT_B_INIT,
    BT_X1,
    BT_X2,
    BT_X3,
    BT_X4,
    backtracking_game,
    border_graph_game,
    single_strategy_game,
    two_equilibria_game,
)


# ---------------------------------------------------------------------------
# strategy enumeration


def test_enumerate_single_feasible_point():
    game = single_strategy_game()
    for p in range(2):
        found = enumerate_strategies(game, p)
        assert len(found) == 1
        assert found[0].values == pytest.approx([1.0, 0.0])


def test_enumerate_lists_every_feasible_vector():
    game = two_equilibria_game()
    first = {tuple(s.values) for s in enumerate_strategies(game, 0)}
    second = {tuple(s.values) for s in enumerate_strategies(game, 1)}
    assert first == {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)}
    assert second == {(0.0, 0.0), (0.0, 1.0)}


def test_enumerate_maximal_filter():
    game = border_graph_game()
    for p in range(2):
        everything = enumerate_strategies(game, p)
        maximal = enumerate_strategies(game, p, maximal=True)
        assert 0 < len(maximal) < len(everything)
        keys = {tuple(s.values) for s in everything}
        for s in maximal:
            assert tuple(s.values) in keys
            assert game.is_maximal(p, s.values)


def test_enumerate_refuses_unsuitable_players():
    with pytest.raises(ValueError):
        enumerate_strategies(DuopolyGame(), 0)
    with pytest.raises(ValueError):
        enumerate_strategies(backtracking_game(), 0, cap=3)


def test_enumerate_empty_when_nothing_is_feasible():
    game = BinaryBilinearGame(
        values=[[0.0, 0.0], [0.0, 0.0]],
        rows=[[([1.0, 1.0], "=", 1.5)], [([1.0, 1.0], "=", 1.5)]],
        interactions=[{1: [[0.0, 0.0], [0.0, 0.0]]},
                      {0: [[0.0, 0.0], [0.0, 0.0]]}],
    )
    assert enumerate_strategies(game, 0) == []


# ---------------------------------------------------------------------------
# one-shot support search over the fully enumerated game


def test_direct_pns_finds_the_unique_point():
    game = single_strategy_game()
    profile = direct_pns(game)
    assert profile.is_pure()
    for p in range(2):
        strategy, weight = profile[p].atoms[0]
        assert weight == pytest.approx(1.0)
        assert strategy.values == pytest.approx([1.0, 0.0])
    assert verify_ne(game, profile).passed


def test_direct_pns_lands_on_a_pure_equilibrium():
    game = two_equilibria_game()
    profile = direct_pns(game)
    assert verify_ne(two_equilibria_game(), profile).passed
    assert profile.is_pure()
    cell = tuple(tuple(profile[p].atoms[0][0].values) for p in range(2))
    assert cell in {
        ((0.0, 0.0), (0.0, 0.0)),
        ((1.0, 0.0), (0.0, 0.0)),
        ((0.0, 1.0), (0.0, 1.0)),
    }


def test_exhaustive_certification_of_pure_cells():
    game = two_equilibria_game()
    lists = [enumerate_strategies(game, p) for p in range(2)]
    sampled = SampledGame(game, lists)
    order = [
        {tuple(s.values): i for i, s in enumerate(lists[p])} for p in range(2)
    ]
    equilibria = set()
    for i in range(len(lists[0])):
        for j in range(len(lists[1])):
            if solve_feasibility(sampled, [[i], [j]]) is not None:
                equilibria.add((i, j))
    expected = {
        (order[0][0.0, 0.0], order[1][0.0, 0.0]),
        (order[0][1.0, 0.0], order[1][0.0, 0.0]),
        (order[0][0.0, 1.0], order[1][0.0, 1.0]),
    }
    assert equilibria == expected


def test_direct_pns_respects_support_caps_on_random_games():
    for ins in range(4):
        game = gen_knapsack(4, 2, ins, seed=7)
        profile = direct_pns(game)
        for p in range(2):
            assert len(profile[p].atoms) <= game.n
        assert verify_ne(gen_knapsack(4, 2, ins, seed=7), profile, 1e-7).passed


# ---------------------------------------------------------------------------
# profile audits


def test_verify_ne_confirms_a_hand_checked_mixture():
    game = backtracking_game()
    profile = Profile([
        MixedStrategy([(game.make_strategy(0, BT_X1), 29 / 39),
                       (game.make_strategy(0, BT_X3), 10 / 39)]),
        MixedStrategy([(game.make_strategy(1, BT_X2), 8 / 11),
                       (game.make_strategy(1, BT_X4), 3 / 11)]),
    ])
    report = verify_ne(game, profile)
    assert report.passed
    assert report.current[0] == pytest.approx(179 / 11, abs=1e-9)
    assert report.current[1] == pytest.approx(13.0, abs=1e-9)
    assert report.max_gap <= 1e-9


def test_verify_ne_flags_the_initial_cell():
    game = backtracking_game()
    profile = Profile([
        MixedStrategy.point_mass(game.make_strategy(0, BT_A_INIT)),
        MixedStrategy.point_mass(game.make_strategy(1, BT_B_INIT)),
    ])
    report = verify_ne(game, profile)
    assert not report.passed
    assert report.current[0] == pytest.approx(-84.0)
    assert report.best[0] == pytest.approx(-48.0)
    assert report.responses[0].equals(game.make_strategy(0, BT_X1))


def test_verify_ne_accepts_the_idle_duopoly():
    game = DuopolyGame()
    profile = Profile([
        MixedStrategy.point_mass(game.make_strategy(p, [0.0]))
        for p in range(2)
    ])
    report = verify_ne(game, profile)
    assert report.passed
    assert report.max_gap == pytest.approx(0.0, abs=1e-12)


def test_report_gap_arithmetic():
    report = VerificationReport(
        current=(1.0, 2.0), best=(1.5, 2.0),
        responses=(None, None), epsilon=0.4)
    assert report.gaps == pytest.approx((0.5, 0.0))
    assert report.max_gap == pytest.approx(0.5)
    assert not report.passed
    relaxed = VerificationReport(
        current=(1.0, 2.0), best=(1.5, 2.0),
        responses=(None, None), epsilon=0.5)
    assert relaxed.passed
