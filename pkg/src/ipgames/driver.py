"""Strategy-generation drivers.

run_sgm grows a sampled game one best response at a time until no player
can improve by more than epsilon.  run_msgm is the depth-first variant:
each new sampled game is solved with the freshly added strategy forced
into the support, and the search backtracks when no such equilibrium
exists.  run_sgm_ce swaps the sampled-game solve for a correlated
equilibrium and verifies it recommendation by recommendation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .lp import SolverFailure
from .model import (
    BilateralGame,
    JointDistribution,
    MixedStrategy,
    NoStrategyError,
    Profile,
    PureStrategy,
    SampledGame,
    expected_payoff,
)
from .support_search import find_ne, solve_ce, tau_based_ne, tau_payoffs

NE_SLACK = 1e-9  # numerical slack on top of epsilon in every deviation test

EQUILIBRIUM = "equilibrium"
ITERATION_LIMIT = "iteration-limit"
TIME_LIMIT = "time-limit"

InitMode = Union[str, Sequence]


@dataclass
class SgmConfig:
    epsilon: float = 0.0
    max_iterations: int = 10_000
    time_limit: float = 3600.0
    method: str = "sgm"
    initialization_mode: InitMode = "alone"
    ce_objective: str = "welfare"
    use_caps: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.max_iterations <= 0 or self.time_limit <= 0:
            raise ValueError("limits must be positive")
        if self.method not in ("sgm", "msgm", "ce"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class SgmOutcome:
    """Result of a driver run.

    profile is the mixed equilibrium (for ce: the tau-based equilibrium
    when extraction succeeded); joint is the correlated distribution for
    the ce method.  certificates holds the per-player best-response
    values at termination, NaN for players not re-checked when a limit
    cut the run short.
    """

    status: str
    profile: Optional[Profile]
    iterations: int
    backtracks: int
    sizes: tuple[int, ...]
    wall_time: float
    payoffs: tuple[float, ...]
    certificates: tuple[float, ...]
    joint: Optional[JointDistribution] = None
    tau_ne: Optional[bool] = None
    sampled: Optional[SampledGame] = field(default=None, repr=False)


def initialization(game: BilateralGame, mode: InitMode = "alone",
                   ) -> list[list[PureStrategy]]:
    """One starting strategy list per player.

    "alone" best-responds against opponents pinned to their zero
    vectors, so each player optimizes its own term in isolation.
    "optimistic" asks the game for the strategy a player would pick if
    it also controlled the opponents' shared variables.  A sequence is
    taken as a custom per-player choice (strategies or raw vectors).
    """
    m = game.num_players
    if isinstance(mode, str):
        if mode == "alone":
            lists = []
            for p in range(m):
                opponents = [
                    None if k == p else MixedStrategy.point_mass(game.zero_strategy(k))
                    for k in range(m)
                ]
                lists.append([game.best_response(p, opponents)])
            return lists
        if mode == "optimistic":
            builder = getattr(game, "optimistic_strategy", None)
            if builder is None:
                raise ValueError(
                    "optimistic initialization needs a game that models"
                    " jointly controlled variables"
                )
            return [[builder(p)] for p in range(m)]
        raise ValueError(f"unknown initialization mode {mode!r}")
    entries = list(mode)
    if len(entries) != m:
        raise ValueError("custom initialization needs one entry per player")
    lists = []
    for p, entry in enumerate(entries):
        if isinstance(entry, PureStrategy):
            candidates = [entry]
        elif isinstance(entry, np.ndarray):
            candidates = [entry] if entry.ndim == 1 else list(entry)
        elif isinstance(entry, (list, tuple)):
            if entry and all(np.isscalar(v) for v in entry):
                candidates = [entry]  # a bare coordinate vector
            else:
                candidates = list(entry)
        else:
            raise ValueError(f"cannot interpret initialization entry for player {p}")
        strategies = [
            s if isinstance(s, PureStrategy)
            else game.make_strategy(p, np.asarray(s, dtype=float))
            for s in candidates
        ]
        if not strategies:
            raise NoStrategyError(f"player {p} has an empty custom initialization")
        lists.append(strategies)
    return lists


def player_order(deviation_log, num_players: int) -> list[int]:
    """Players sorted by staleness: the longer since a player last added
    a strategy, the earlier it is checked; ties break by index."""
    last = [0] * num_players
    for rec in deviation_log:
        if rec.iteration > last[rec.player]:
            last[rec.player] = rec.iteration
    return sorted(range(num_players), key=lambda p: (last[p], p))


def _response_value(game: BilateralGame, p: int, strategy: PureStrategy,
                    profile: Profile) -> float:
    players = [
        MixedStrategy.point_mass(strategy) if k == p else profile[k]
        for k in range(len(profile))
    ]
    return expected_payoff(game, Profile(players), p)


def deviation_reaction(game: BilateralGame, p: int, profile: Profile,
                       current: float, epsilon: float,
                       ) -> tuple[Optional[PureStrategy], float]:
    """Exact best response of p against the profile's opponents.

    Returns (strategy, value) when the value improves on current by more
    than epsilon, else (None, value); the value is reported either way so
    callers can certify termination.
    """
    best = game.best_response(p, profile.players)
    value = _response_value(game, p, best, profile)
    if value > current + epsilon + NE_SLACK:
        return best, value
    return None, value


def _scan_for_deviation(game, sampled, profile, payoffs, epsilon):
    """Run the termination test player by player.

    Returns (deviator, strategy, certificates); deviator is None when no
    player improves, and certificates carries NaN for players the scan
    never reached because an earlier one already deviated.
    """
    m = game.num_players
    certificates = [math.nan] * m
    for p in player_order(sampled.deviation_log, m):
        strategy, value = deviation_reaction(game, p, profile, payoffs[p], epsilon)
        certificates[p] = value
        if strategy is not None:
            if sampled.index_of(p, strategy) is not None:
                raise SolverFailure(
                    f"player {p} deviates to a strategy already sampled:"
                    " the sampled-game solve violated a best-payoff row"
                    " beyond tolerance"
                )
            return p, strategy, certificates
    return None, None, certificates


def run_sgm(game: BilateralGame, config: SgmConfig) -> SgmOutcome:
    """Plain strategy generation: solve, test, add, repeat."""
    start = time.monotonic()
    sampled = SampledGame(game, initialization(game, config.initialization_mode))
    previous = None  # last equilibrium, guides size and strategy order
    additions = 0
    while True:
        eq = find_ne(
            sampled,
            predecessor_sizes=previous.sizes() if previous is not None else None,
            recent=previous.to_profile(sampled).players if previous is not None else None,
            use_caps=config.use_caps,
        )
        if eq is None:
            raise SolverFailure("sampled game admitted no equilibrium")
        profile = eq.to_profile(sampled)
        payoffs = tuple(sampled.expected(p, eq.probs) for p in range(game.num_players))
        deviator, strategy, certificates = _scan_for_deviation(
            game, sampled, profile, payoffs, config.epsilon
        )
        elapsed = time.monotonic() - start
        if deviator is None:
            return SgmOutcome(
                status=EQUILIBRIUM, profile=profile, iterations=additions,
                backtracks=0, sizes=sampled.sizes(), wall_time=elapsed,
                payoffs=payoffs, certificates=tuple(certificates),
                sampled=sampled,
            )
        if additions >= config.max_iterations or elapsed > config.time_limit:
            status = TIME_LIMIT if elapsed > config.time_limit else ITERATION_LIMIT
            return SgmOutcome(
                status=status, profile=profile, iterations=additions,
                backtracks=0, sizes=sampled.sizes(), wall_time=elapsed,
                payoffs=payoffs, certificates=tuple(certificates),
                sampled=sampled,
            )
        additions += 1
        sampled.add_strategy(deviator, strategy, iteration=additions)
        previous = eq


def run_msgm(game: BilateralGame, config: SgmConfig) -> SgmOutcome:
    """Depth-first strategy generation with backtracking.

    Game k is always solved with x(k), the strategy whose addition
    created it, forced into the support; dev[k+1] collects strategies
    whose branches out of game k already failed, and they stay excluded
    from supports on revisits.  When game k has no such equilibrium the
    dev[k+1] strategies leave the sampled game, the equilibrium of game
    k-1 is forgotten, and the search resumes one level up.
    """
    start = time.monotonic()
    initial = initialization(game, config.initialization_mode)
    if any(len(entry) != 1 for entry in initial):
        raise ValueError("backtracking requires one initial strategy per player")
    sampled = SampledGame(game, initial)
    m = game.num_players
    # sigma[j]: equilibrium of sampled game j on the current branch;
    # game 0 is never solved, its single profile is the equilibrium.
    sigma: dict[int, list[MixedStrategy]] = {
        0: [MixedStrategy.point_mass(entry[0]) for entry in initial]
    }
    last_sizes: dict[int, tuple[int, ...]] = {}  # support sizes per game index, kept across backtracks
    forced: dict[int, tuple[int, PureStrategy]] = {}  # x(k) per game index
    dev: dict[int, list[tuple[int, PureStrategy]]] = {}
    k = 0
    additions = 0
    backtracks = 0

    def outcome(status, profile, payoffs, certificates):
        return SgmOutcome(
            status=status, profile=profile, iterations=additions,
            backtracks=backtracks, sizes=sampled.sizes(),
            wall_time=time.monotonic() - start, payoffs=payoffs,
            certificates=tuple(certificates), sampled=sampled,
        )

    while True:
        profile = Profile(sigma[k])
        payoffs = tuple(expected_payoff(game, profile, p) for p in range(m))
        deviator, strategy, certificates = _scan_for_deviation(
            game, sampled, profile, payoffs, config.epsilon
        )
        if deviator is None:
            return outcome(EQUILIBRIUM, profile, payoffs, certificates)
        elapsed = time.monotonic() - start
        if additions >= config.max_iterations or elapsed > config.time_limit:
            status = TIME_LIMIT if elapsed > config.time_limit else ITERATION_LIMIT
            return outcome(status, profile, payoffs, certificates)

        # forward: game k+1 is game k plus the deviation, forced into play
        additions += 1
        k += 1
        sampled.add_strategy(deviator, strategy, iteration=additions)
        bucket = dev.setdefault(k, [])
        if not any(q == deviator and s.equals(strategy) for q, s in bucket):
            bucket.append((deviator, strategy))
        forced[k] = (deviator, strategy)
        dev[k + 2] = []

        while True:
            fp, fs = forced[k]
            fidx = sampled.index_of(fp, fs)
            if fidx is None:
                raise SolverFailure(f"forced strategy of game {k} left the sampled game")
            excluded = []
            for q, s in dev.get(k + 1, ()):
                idx = sampled.index_of(q, s)
                if idx is not None:  # entries removed by deeper failures resolve to nothing
                    excluded.append((q, idx))
            eq = find_ne(
                sampled,
                forced=(fp, fidx),
                excluded=excluded,
                predecessor_sizes=last_sizes.get(k),
                recent=sigma[k - 1],
                use_caps=config.use_caps,
            )
            if eq is not None:
                sigma[k] = list(eq.to_profile(sampled).players)
                last_sizes[k] = eq.sizes()
                break
            if k == 1:
                raise SolverFailure(
                    "backtracking reached sampled game 0, which has a unique"
                    " equilibrium by construction; this indicates a solver bug"
                )
            backtracks += 1
            stale = [
                (q, s) for q, s in dev.get(k + 1, ())
                if sampled.index_of(q, s) is not None
            ]
            if stale:
                sampled.remove_strategies(stale)
            del sigma[k - 1]
            dev[k + 2] = []
            k -= 1
            if time.monotonic() - start > config.time_limit:
                best = max(sigma)
                profile = Profile(sigma[best])
                payoffs = tuple(expected_payoff(game, profile, p) for p in range(m))
                return outcome(TIME_LIMIT, profile, payoffs, [math.nan] * m)


def _ce_scan(game: BilateralGame, sampled: SampledGame, tau: JointDistribution,
             epsilon: float):
    """Verify a correlated distribution recommendation by recommendation.

    For each player and each recommended strategy with positive weight,
    best-respond against the conditional opponent play and compare the
    weighted value with the weighted recommended payoff.  Returns the
    first profitable deviation (or None) plus per-player certificates:
    the sum of weighted best-response values, which at a correlated
    equilibrium cannot exceed the player's expected payoff by more than
    epsilon.
    """
    m = sampled.num_players
    certificates = [math.nan] * m
    for p in player_order(sampled.deviation_log, m):
        groups: dict[int, list[tuple[tuple[int, ...], float]]] = {}
        for cells, weight in tau.atoms:
            indices = tuple(sampled.index_of(q, cells[q]) for q in range(m))
            if any(i is None for i in indices):
                raise ValueError("joint distribution atom outside the sampled game")
            groups.setdefault(indices[p], []).append((indices, weight))
        total_best = 0.0
        violation = None
        for bar in sorted(groups):
            atoms = groups[bar]
            mass = sum(weight for _, weight in atoms)
            conditionals: list[Optional[MixedStrategy]] = []
            for q in range(m):
                if q == p:
                    conditionals.append(None)
                    continue
                weights: dict[int, float] = {}
                for indices, weight in atoms:
                    weights[indices[q]] = weights.get(indices[q], 0.0) + weight
                conditionals.append(MixedStrategy(
                    [(sampled.strategies[q][i], w / mass) for i, w in sorted(weights.items())]
                ))
            best = game.best_response(p, conditionals)
            best_value = mass * _response_value(
                game, p, best,
                Profile([MixedStrategy.point_mass(best) if q == p else conditionals[q]
                         for q in range(m)]),
            )
            recommended = sum(
                weight * sampled.pure_cell(indices)[p] for indices, weight in atoms
            )
            total_best += best_value
            if violation is None and best_value > recommended + epsilon + NE_SLACK:
                violation = best
        certificates[p] = total_best
        if violation is not None:
            if sampled.index_of(p, violation) is not None:
                raise SolverFailure(
                    f"player {p} deviates to a sampled strategy: the"
                    " correlated-equilibrium program violated an obedience"
                    " row beyond tolerance"
                )
            return p, violation, certificates
    return None, None, certificates


def run_sgm_ce(game: BilateralGame, config: SgmConfig) -> SgmOutcome:
    """Strategy generation with a correlated distribution at each round.

    On success the joint distribution is returned together with the
    product-form equilibrium recovered from it when one exists over the
    strategies it recommends.
    """
    start = time.monotonic()
    sampled = SampledGame(game, initialization(game, config.initialization_mode))
    m = game.num_players
    additions = 0
    while True:
        tau = solve_ce(sampled, objective=config.ce_objective)
        payoffs = tuple(tau_payoffs(sampled, tau))
        deviator, strategy, certificates = _ce_scan(game, sampled, tau, config.epsilon)
        elapsed = time.monotonic() - start
        if deviator is None:
            extracted = tau_based_ne(sampled, tau)
            profile = extracted.to_profile(sampled) if extracted is not None else None
            return SgmOutcome(
                status=EQUILIBRIUM, profile=profile, iterations=additions,
                backtracks=0, sizes=sampled.sizes(), wall_time=time.monotonic() - start,
                payoffs=payoffs, certificates=tuple(certificates), joint=tau,
                tau_ne=extracted is not None, sampled=sampled,
            )
        if additions >= config.max_iterations or elapsed > config.time_limit:
            status = TIME_LIMIT if elapsed > config.time_limit else ITERATION_LIMIT
            return SgmOutcome(
                status=status, profile=None, iterations=additions,
                backtracks=0, sizes=sampled.sizes(), wall_time=elapsed,
                payoffs=payoffs, certificates=tuple(certificates), joint=tau,
                sampled=sampled,
            )
        additions += 1
        sampled.add_strategy(deviator, strategy, iteration=additions)


def run(game: BilateralGame, config: SgmConfig) -> SgmOutcome:
    if config.method == "sgm":
        return run_sgm(game, config)
    if config.method == "msgm":
        return run_msgm(game, config)
    return run_sgm_ce(game, config)
