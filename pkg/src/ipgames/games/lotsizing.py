"""Competitive lot-sizing: producers choose setups, production, sales and
inventory over a horizon; the market clears each period at a price linear
in the total quantity sold.

The supported regime has zero inventory cost and unlimited capacity.
There best responses decompose into consecutive production blocks, each
served by its opening setup, and an O(T^2) dynamic program over block
starts is exact: a setup whose unit cost is no cheaper than an already
open one can be dropped without loss, so optimal plans use setups with
strictly decreasing unit costs and each period buys from the latest one.

The game is an exact potential game; best-response ascent on the
potential yields a pure equilibrium.
"""

from __future__ import annotations

import math
import random
from typing import Optional, Sequence

import numpy as np

from ..model import BilateralGame, MixedStrategy, Profile, PureStrategy

IMPROVE_TOL = 1e-9   # ascent stops when no player gains more than this
BALANCE_TOL = 1e-6   # inventory conservation slack accepted on input vectors


class UnsupportedRegimeError(ValueError):
    """Raised when inventory costs or finite capacities are present."""


class LotSizingGame(BilateralGame):
    """Strategy vector layout per player: (y_1..y_T, x_1..x_T, q_1..q_T,
    h_1..h_T) - setup indicators, production, sales, end-of-period stock."""

    def __init__(self, a, b, setup_costs, unit_costs, inventory_costs=None,
                 capacities=None):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.T = len(self.a)
        if len(self.b) != self.T:
            raise ValueError("a and b must share the horizon length")
        if np.any(self.b <= 0):
            raise ValueError("price slopes must be positive")
        self.setup = [np.asarray(f, dtype=float) for f in setup_costs]
        self.unit = [np.asarray(c, dtype=float) for c in unit_costs]
        self.num_players = len(self.setup)
        m = self.num_players
        self.inventory = (
            [np.asarray(h, dtype=float) for h in inventory_costs]
            if inventory_costs is not None
            else [np.zeros(self.T) for _ in range(m)]
        )
        self.capacity = (
            [np.asarray(cap, dtype=float) for cap in capacities]
            if capacities is not None
            else [np.full(self.T, np.inf) for _ in range(m)]
        )

    def _require_simple_regime(self) -> None:
        if any(np.any(h != 0) for h in self.inventory) or any(
            np.any(np.isfinite(cap)) for cap in self.capacity
        ):
            raise UnsupportedRegimeError(
                "best responses support only zero inventory cost and"
                " unlimited capacity"
            )

    def dimension(self, p: int) -> int:
        return 4 * self.T

    def integrality(self, p: int) -> np.ndarray:
        mask = np.zeros(4 * self.T, dtype=bool)
        mask[: self.T] = True
        return mask

    @staticmethod
    def split(vec: np.ndarray):
        T = len(vec) // 4
        return vec[:T], vec[T: 2 * T], vec[2 * T: 3 * T], vec[3 * T:]

    def feasible(self, p: int, values: np.ndarray) -> bool:
        y, x, q, h = self.split(values)
        if np.any((y < -1e-9) | (y > 1 + 1e-9)):
            return False
        if np.any(x < -1e-9) or np.any(q < -1e-9) or np.any(h < -1e-9):
            return False
        # production needs an open setup, bounded by capacity when finite
        limit = np.where(y > 0.5, self.capacity[p], 0.0)
        if np.any(x > limit + 1e-9):
            return False
        prev = 0.0
        for t in range(self.T):
            balance = prev + x[t] - q[t]
            if abs(balance - h[t]) > BALANCE_TOL:
                return False
            prev = h[t]
        return abs(prev) <= BALANCE_TOL  # closing stock returns to zero

    def own_payoff(self, p: int, vec: np.ndarray) -> float:
        y, x, q, h = self.split(vec)
        revenue = float(self.a @ q - self.b @ (q * q))
        cost = float(self.setup[p] @ y + self.unit[p] @ x + self.inventory[p] @ h)
        return revenue - cost

    def pair_payoff(self, p: int, k: int, vp: np.ndarray, vk: np.ndarray) -> float:
        _, _, qp, _ = self.split(vp)
        _, _, qk, _ = self.split(vk)
        return -float(self.b @ (qp * qk))

    def opponent_quantity(self, p: int, opponents: Sequence[Optional[MixedStrategy]]) -> np.ndarray:
        qbar = np.zeros(self.T)
        for k in range(self.num_players):
            if k != p and opponents[k] is not None:
                qbar += self.split(opponents[k].expectation())[2]
        return qbar

    def best_response(self, p: int, opponents: Sequence[Optional[MixedStrategy]]) -> PureStrategy:
        self._require_simple_regime()
        qbar = self.opponent_quantity(p, opponents)
        if np.any(qbar < -1e-9):
            raise ValueError("opponent quantities must be nonnegative")
        _, plan = self._block_dp(p, qbar)
        return self.make_strategy(p, plan)

    def best_response_value(self, p: int, qbar: np.ndarray) -> float:
        self._require_simple_regime()
        return self._block_dp(p, qbar)[0]

    def _block_dp(self, p: int, qbar: np.ndarray):
        """Exact best response for zero inventory cost, infinite capacity.

        f[t] = best profit over periods t..T-1; either skip period t or
        open a setup at t serving t..e at unit cost C_t, for every e.
        """
        T = self.T
        d = self.a - self.b * qbar  # residual price at zero own quantity
        F, C = self.setup[p], self.unit[p]

        def period_profit(u: int, c: float) -> float:
            margin = d[u] - c
            return margin * margin / (4 * self.b[u]) if margin > 0 else 0.0

        f = np.zeros(T + 1)
        choice: list[Optional[int]] = [None] * T  # block end, or None to skip
        for t in range(T - 1, -1, -1):
            best, arg = f[t + 1], None
            running = -F[t]
            for e in range(t, T):
                running += period_profit(e, C[t])
                cand = running + f[e + 1]
                if cand > best + 1e-12:
                    best, arg = cand, e
            f[t] = best
            choice[t] = arg

        y = np.zeros(T)
        x = np.zeros(T)
        q = np.zeros(T)
        h = np.zeros(T)
        t = 0
        while t < T:
            e = choice[t]
            if e is None:
                t += 1
                continue
            y[t] = 1.0
            for u in range(t, e + 1):
                margin = d[u] - C[t]
                q[u] = max(0.0, margin / (2 * self.b[u]))
            x[t] = q[t: e + 1].sum()
            stock = x[t]
            for u in range(t, e + 1):
                stock -= q[u]
                h[u] = stock
            t = e + 1
        return float(f[0]), np.concatenate([y, x, q, h])


def potential_value(game: LotSizingGame, profile: Sequence[PureStrategy]) -> float:
    """Exact potential: market terms with halved cross products, minus every
    player's own production costs.  A unilateral deviation changes this by
    exactly the deviator's payoff change."""
    if any(np.any(h != 0) for h in game.inventory):
        raise UnsupportedRegimeError("potential requires zero inventory costs")
    qs = [game.split(profile[p].values)[2] for p in range(game.num_players)]
    total = 0.0
    for t in range(game.T):
        q_t = np.array([qs[p][t] for p in range(game.num_players)])
        total += game.a[t] * q_t.sum() - game.b[t] * float(q_t @ q_t)
        cross = (q_t.sum() ** 2 - float(q_t @ q_t)) / 2.0
        total -= game.b[t] * cross
    for p in range(game.num_players):
        y, x, _, _ = game.split(profile[p].values)
        total -= float(game.setup[p] @ y + game.unit[p] @ x)
    return total


def potential_ascent(game: LotSizingGame, start: Optional[Sequence[PureStrategy]] = None,
                     tolerance: float = IMPROVE_TOL, max_rounds: int = 100_000) -> Profile:
    """Round-robin best responses until no player improves by more than the
    tolerance; the exact potential strictly increases at each adopted move,
    so the ascent terminates at a pure equilibrium."""
    game._require_simple_regime()
    current = (
        list(start)
        if start is not None
        else [game.zero_strategy(p) for p in range(game.num_players)]
    )
    for _ in range(max_rounds):
        improved = False
        for p in range(game.num_players):
            opponents = [
                MixedStrategy.point_mass(s) if k != p else None
                for k, s in enumerate(current)
            ]
            value_now = game.pure_payoff(p, current)
            qbar = game.opponent_quantity(p, opponents)
            best_value = game.best_response_value(p, qbar)
            if best_value > value_now + tolerance:
                current[p] = game.best_response(p, opponents)
                improved = True
        if not improved:
            return Profile([MixedStrategy.point_mass(s) for s in current])
    raise RuntimeError("best-response ascent failed to stabilize")


def gen_lot(m: int, T: int, ins: int, seed: int) -> LotSizingGame:
    """Random instance: a in [20,30], b in [1,3], F in [10,20], C in [5,10],
    all uniform integers; zero inventory costs, unlimited capacity.  Draw
    order: a, b, then per player F and C."""
    if not 0 <= ins <= 9:
        raise ValueError("ins must lie in 0..9")
    rng = random.Random(f"lotsizing-{m}-{T}-{ins}-{seed}")
    a = [rng.randint(20, 30) for _ in range(T)]
    b = [rng.randint(1, 3) for _ in range(T)]
    setup, unit = [], []
    for _ in range(m):
        setup.append([rng.randint(10, 20) for _ in range(T)])
        unit.append([rng.randint(5, 10) for _ in range(T)])
    return LotSizingGame(a, b, setup, unit)
