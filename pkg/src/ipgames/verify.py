"""Independent equilibrium checks.

Everything here recomputes payoffs from the game definition instead of
trusting solver caches: exhaustive strategy enumeration for binary
players, a one-shot support search over the fully enumerated game, and
certificate verification for mixed profiles and joint distributions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lp import SolverFailure
from .model import (
    BilateralGame,
    JointDistribution,
    MixedStrategy,
    Profile,
    PureStrategy,
    SampledGame,
    expected_payoff,
)
from .support_search import find_ne

GAP_SLACK = 1e-9  # tolerance added to epsilon in the pass/fail verdict
ENUM_CAP = 20     # refuse exhaustive enumeration beyond this many binaries


@dataclass(frozen=True)
class VerificationReport:
    """Per-player deviation audit of a candidate equilibrium.

    gap = best - current; for a joint distribution, best is the payoff
    after the single most profitable recommendation swap, so the same
    verdict rule applies to both kinds of certificate.
    """

    current: tuple[float, ...]
    best: tuple[float, ...]
    responses: tuple[PureStrategy, ...]
    epsilon: float

    @property
    def gaps(self) -> tuple[float, ...]:
        return tuple(b - c for b, c in zip(self.best, self.current))

    @property
    def max_gap(self) -> float:
        return max(self.gaps)

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.epsilon + GAP_SLACK


def enumerate_strategies(game: BilateralGame, p: int, maximal: bool = False,
                         cap: int = ENUM_CAP) -> list[PureStrategy]:
    """All feasible 0/1 vectors of player p, optionally only maximal ones.

    Refuses when p has more than cap binary variables or any continuous
    variable; silent truncation would poison everything built on top.
    """
    n = game.dimension(p)
    if not game.all_binary(p):
        raise ValueError(f"player {p} is not purely binary")
    if n > cap:
        raise ValueError(
            f"player {p} has {n} binary variables, above the enumeration cap {cap}"
        )
    out = []
    for bits in itertools.product((0.0, 1.0), repeat=n):
        vec = np.asarray(bits)
        if not game.feasible(p, vec):
            continue
        if maximal and not game.is_maximal(p, vec):
            continue
        out.append(game.make_strategy(p, vec))
    return out


def direct_pns(game: BilateralGame, maximal: bool = False, cap: int = ENUM_CAP,
               ) -> Profile:
    """Support search over the fully enumerated game, no sampling loop."""
    lists = [
        enumerate_strategies(game, p, maximal=maximal, cap=cap)
        for p in range(game.num_players)
    ]
    sampled = SampledGame(game, lists)
    eq = find_ne(sampled)
    if eq is None:
        raise SolverFailure("fully enumerated game admitted no equilibrium")
    return eq.to_profile(sampled)


def verify_ne(game: BilateralGame, profile: Profile, epsilon: float = 0.0,
              ) -> VerificationReport:
    """Audit a mixed profile: exact best response per player, fresh payoffs."""
    m = game.num_players
    current = []
    best = []
    responses = []
    for p in range(m):
        current.append(expected_payoff(game, profile, p))
        reply = game.best_response(p, profile.players)
        replaced = Profile([
            MixedStrategy.point_mass(reply) if k == p else profile[k]
            for k in range(m)
        ])
        best.append(expected_payoff(game, replaced, p))
        responses.append(reply)
    return VerificationReport(tuple(current), tuple(best), tuple(responses), epsilon)


def verify_ce(game: BilateralGame, tau: JointDistribution, epsilon: float = 0.0,
              ) -> VerificationReport:
    """Audit a joint distribution recommendation by recommendation.

    For every player and every recommended strategy with positive weight,
    best-respond to the conditional opponent play; the bilateral payoff
    structure lets the conditional joint be replaced by its per-opponent
    marginals without error.  A player's gap is the largest weighted gain
    any single recommendation swap can produce.
    """
    m = game.num_players
    current = []
    best = []
    responses = []
    for p in range(m):
        groups: dict[int, list[tuple[tuple[PureStrategy, ...], float]]] = {}
        keys: list[PureStrategy] = []
        for cells, weight in tau.atoms:
            slot = next((i for i, s in enumerate(keys) if s.equals(cells[p])), None)
            if slot is None:
                slot = len(keys)
                keys.append(cells[p])
            groups.setdefault(slot, []).append((cells, weight))
        total = 0.0
        worst_gap = -np.inf
        worst_reply = None
        for slot in range(len(keys)):
            atoms = groups[slot]
            mass = sum(weight for _, weight in atoms)
            conditionals: list[Optional[MixedStrategy]] = []
            for q in range(m):
                if q == p:
                    conditionals.append(None)
                    continue
                marg: list[tuple[PureStrategy, float]] = []
                for cells, weight in atoms:
                    hit = next((i for i, (s, _) in enumerate(marg)
                                if s.equals(cells[q])), None)
                    if hit is None:
                        marg.append((cells[q], weight / mass))
                    else:
                        marg[hit] = (marg[hit][0], marg[hit][1] + weight / mass)
                conditionals.append(MixedStrategy(marg))
            reply = game.best_response(p, conditionals)
            replaced = Profile([
                MixedStrategy.point_mass(reply) if q == p else conditionals[q]
                for q in range(m)
            ])
            reply_value = mass * expected_payoff(game, replaced, p)
            recommended = sum(
                weight * game.pure_payoff(p, cells) for cells, weight in atoms
            )
            total += recommended
            gap = reply_value - recommended
            if gap > worst_gap:
                worst_gap = gap
                worst_reply = reply
        current.append(total)
        best.append(total + worst_gap)
        responses.append(worst_reply)
    return VerificationReport(tuple(current), tuple(best), tuple(responses), epsilon)
