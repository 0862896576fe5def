"""Correlated-equilibrium generation loop and its verifier."""

import math

import pytest

from ipgames import (
    EQUILIBRIUM,
    ITERATION_LIMIT,
    JointDistribution,
    SampledGame,
    SgmConfig,
    SolverFailure,
    expected_payoff,
    run_sgm_ce,
    verify_ce,
)
from ipgames.driver import _ce_scan

from conftest import cell_index, hawk_dove, matching_pennies, unit_sampled


def test_ce_loop_reaches_the_uniform_distribution():
    game = matching_pennies()
    out = run_sgm_ce(game, SgmConfig(method="ce"))
    assert out.status == EQUILIBRIUM
    assert out.iterations == 2
    assert out.sizes == (2, 2)
    weights = {cell_index(cells): w for cells, w in out.joint.atoms}
    assert len(weights) == 4
    for w in weights.values():
        assert w == pytest.approx(0.25, abs=1e-6)
    assert out.payoffs == pytest.approx((0.0, 0.0), abs=1e-9)
    assert out.tau_ne is True
    assert out.profile is not None
    for p in range(2):
        probs = sorted(w for _, w in out.profile[p].atoms)
        assert probs == pytest.approx([0.5, 0.5], abs=1e-9)
    assert verify_ce(matching_pennies(), out.joint).passed


def test_ce_loop_on_chicken_stops_at_a_pure_cell():
    game = hawk_dove()
    out = run_sgm_ce(game, SgmConfig(method="ce"))
    assert out.status == EQUILIBRIUM
    assert out.iterations == 1
    assert len(out.joint.atoms) == 1
    assert cell_index(out.joint.atoms[0][0]) == (0, 1)
    assert out.payoffs == pytest.approx((2.0, 7.0), abs=1e-9)
    assert verify_ce(hawk_dove(), out.joint).passed
    assert out.tau_ne is True
    for p in range(2):
        assert expected_payoff(game, out.profile, p) == pytest.approx(
            out.payoffs[p], abs=1e-6)


def test_ce_scan_returns_first_unsampled_improvement():
    game = hawk_dove()
    dove_row = game.make_strategy(0, [1, 0])
    dove_col = game.make_strategy(1, [1, 0])
    sampled = SampledGame(game, [[dove_row], [dove_col]])
    tau = JointDistribution([((dove_row, dove_col), 1.0)])
    deviator, strategy, certificates = _ce_scan(game, sampled, tau, 0.0)
    assert deviator == 0
    assert strategy.values == pytest.approx([0.0, 1.0])
    assert certificates[0] == pytest.approx(7.0)
    assert math.isnan(certificates[1])


def test_ce_scan_raises_when_improvement_is_already_sampled():
    game = hawk_dove()
    sampled = unit_sampled(game)
    s = sampled.strategies
    tau = JointDistribution([((s[0][0], s[1][0]), 1.0)])
    with pytest.raises(SolverFailure):
        _ce_scan(game, sampled, tau, 0.0)


def test_ce_iteration_limit_keeps_the_distribution():
    game = matching_pennies()
    out = run_sgm_ce(game, SgmConfig(
        method="ce", max_iterations=1,
        initialization_mode=[[1.0, 0.0], [1.0, 0.0]]))
    assert out.status == ITERATION_LIMIT
    assert out.iterations == 1
    assert out.sizes == (1, 2)
    assert out.profile is None
    assert len(out.joint.atoms) == 1
    assert cell_index(out.joint.atoms[0][0]) == (0, 1)
    assert out.payoffs == pytest.approx((-1.0, 1.0), abs=1e-9)
    assert out.certificates[0] == pytest.approx(1.0)
    assert math.isnan(out.certificates[1])


def test_verify_ce_accepts_known_distributions():
    game = hawk_dove()
    s = unit_sampled(game).strategies
    tau = JointDistribution([
        ((s[0][0], s[1][0]), 0.5),
        ((s[0][0], s[1][1]), 0.25),
        ((s[0][1], s[1][0]), 0.25),
    ])
    report = verify_ce(game, tau)
    assert report.passed
    assert report.current == pytest.approx((5.25, 5.25), abs=1e-9)
    assert report.max_gap <= 1e-9
    point = JointDistribution([((s[0][1], s[1][0]), 1.0)])
    assert verify_ce(game, point).passed


def test_verify_ce_rejects_correlated_coordination():
    game = matching_pennies()
    s = unit_sampled(game).strategies
    tau = JointDistribution([
        ((s[0][0], s[1][0]), 0.5),
        ((s[0][1], s[1][1]), 0.5),
    ])
    report = verify_ce(game, tau)
    assert not report.passed
    assert report.max_gap == pytest.approx(1.0, abs=1e-9)
    assert report.current == pytest.approx((1.0, -1.0), abs=1e-9)
    assert report.best[1] == pytest.approx(0.0, abs=1e-9)
    assert report.responses[1] is not None


def test_point_mass_tau_extraction_round_trips():
    game = hawk_dove()
    out = run_sgm_ce(game, SgmConfig(
        method="ce", initialization_mode=[[0.0, 1.0], [1.0, 0.0]]))
    assert out.status == EQUILIBRIUM
    assert out.iterations == 0
    assert len(out.joint.atoms) == 1
    assert out.tau_ne is True
    assert out.payoffs == pytest.approx((7.0, 2.0), abs=1e-9)
    for p in range(2):
        assert expected_payoff(game, out.profile, p) == pytest.approx(
            out.payoffs[p], abs=1e-9)
