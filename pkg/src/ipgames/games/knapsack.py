"""Knapsack game: each player picks projects under a budget; payoffs add a
diagonal bilinear spillover when two players invest in the same project.

Best responses reduce to a 0/1 knapsack with possibly negative weights and
profits, solved exactly by complementation plus a capacity dynamic program.
"""

from __future__ import annotations

import math
import random
from typing import Optional, Sequence

import numpy as np

from ..model import BilateralGame, MixedStrategy, NoStrategyError, PureStrategy

WEIGHT_INT_TOL = 1e-9  # weights must be integral for the capacity DP
PROFIT_TOL = 1e-12     # profits below this never enter the DP


def knapsack_argmax(profits: Sequence[float], weights: Sequence[int], budget: float) -> np.ndarray:
    """Maximize profits @ x over binary x subject to weights @ x <= budget.

    Negative-weight variables are complemented (x -> 1-x), which makes all
    weights nonnegative and raises the budget; variables with nonpositive
    transformed profit are fixed off; the rest is a textbook 0/1 knapsack
    solved by DP over the integer capacity.
    """
    w = np.asarray(weights, dtype=float)
    if w.size and np.max(np.abs(w - np.rint(w))) > WEIGHT_INT_TOL:
        raise ValueError("knapsack weights must be integers")
    w = np.rint(w).astype(np.int64)
    profits = np.asarray(profits, dtype=float)
    neg = w < 0
    cap_float = float(budget) - float(w[neg].sum())
    if cap_float < -WEIGHT_INT_TOL:
        raise NoStrategyError("budget below the minimum achievable weight")
    cap = int(math.floor(cap_float + WEIGHT_INT_TOL))
    prof = np.where(neg, -profits, profits)
    aw = np.abs(w)

    chosen = np.zeros(len(w), dtype=bool)
    chosen[(prof > PROFIT_TOL) & (aw == 0)] = True
    items = np.nonzero((prof > PROFIT_TOL) & (aw > 0) & (aw <= cap))[0]
    if items.size:
        dp = np.zeros(cap + 1)
        take = np.zeros((items.size, cap + 1), dtype=bool)
        for row, i in enumerate(items):
            wi, pi = int(aw[i]), prof[i]
            shifted = dp[: cap + 1 - wi] + pi
            better = shifted > dp[wi:] + PROFIT_TOL
            take[row, wi:] = better
            dp[wi:] = np.where(better, shifted, dp[wi:])
        c = cap
        for row in range(items.size - 1, -1, -1):
            if take[row, c]:
                chosen[items[row]] = True
                c -= int(aw[items[row]])
    return np.where(neg ^ chosen, 1.0, 0.0)


class KnapsackGame(BilateralGame):
    """m players, n projects each; payoff v^p.x^p plus sum_k c^p_k.(x^p*x^k)."""

    def __init__(self, values, weights, budgets, interactions):
        self.values = [np.asarray(v, dtype=float) for v in values]
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.budgets = [float(b) for b in budgets]
        self.num_players = len(self.values)
        self.n = len(self.values[0])
        # interactions[p][k]: length-n coefficients of x^p_i * x^k_i in p's payoff
        self.interactions = {}
        for p in range(self.num_players):
            for k in range(self.num_players):
                if k == p:
                    continue
                self.interactions[(p, k)] = np.asarray(interactions[p][k], dtype=float)
        for p in range(self.num_players):
            if len(self.weights[p]) != self.n or len(self.values[p]) != self.n:
                raise ValueError("value/weight arrays must share length n")

    def dimension(self, p: int) -> int:
        return self.n

    def integrality(self, p: int) -> np.ndarray:
        return np.ones(self.n, dtype=bool)

    def all_binary(self, p: int) -> bool:
        return True

    def support_cap(self, p: int) -> Optional[int]:
        # payoffs are linear in own variables: optimal mixing stays on a
        # facet of the strategy polytope, so supports of size n suffice
        return self.n

    def feasible(self, p: int, values: np.ndarray) -> bool:
        if np.any((values < -1e-9) | (values > 1 + 1e-9)):
            return False
        return float(self.weights[p] @ values) <= self.budgets[p] + 1e-9

    def own_payoff(self, p: int, x: np.ndarray) -> float:
        return float(self.values[p] @ x)

    def pair_payoff(self, p: int, k: int, xp: np.ndarray, xk: np.ndarray) -> float:
        return float(self.interactions[(p, k)] @ (xp * xk))

    def best_response(self, p: int, opponents: Sequence[Optional[MixedStrategy]]) -> PureStrategy:
        rho = self.values[p].copy()
        for k in range(self.num_players):
            if k != p and opponents[k] is not None:
                rho += self.interactions[(p, k)] * opponents[k].expectation()
        x = knapsack_argmax(rho, self.weights[p], self.budgets[p])
        return self.make_strategy(p, x)


def gen_knapsack(n: int, m: int, ins: int, seed: int) -> KnapsackGame:
    """Random instance: v, w, c uniform integers in [-100, 100]; budget
    floor(ins/11 * sum of weights).  Draw order per player: v, w, then the
    interaction rows for each opponent in increasing index order."""
    if not 0 <= ins <= 9:
        raise ValueError("ins must lie in 0..9")
    rng = random.Random(f"knapsack-{n}-{m}-{ins}-{seed}")
    values, weights, budgets, interactions = [], [], [], []
    for p in range(m):
        v = [rng.randint(-100, 100) for _ in range(n)]
        w = [rng.randint(-100, 100) for _ in range(n)]
        c = {}
        for k in range(m):
            if k != p:
                c[k] = [rng.randint(-100, 100) for _ in range(n)]
        values.append(v)
        weights.append(w)
        budgets.append(math.floor(ins / 11 * sum(w)))
        interactions.append(c)
    return KnapsackGame(values, weights, budgets, interactions)
