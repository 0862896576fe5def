"""Quadratic duopoly with payoff -(x)^2 + x * (opponent's x).

Strategies are single nonnegative reals; the best response to a mixed
opponent is half the opponent's expected value.  The strategy space is
unbounded, so the solver relies on a positive epsilon to terminate.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..model import BilateralGame, MixedStrategy, PureStrategy


class DuopolyGame(BilateralGame):
    num_players = 2

    def __init__(self, bound: Optional[float] = None):
        self.bound = None if bound is None else float(bound)

    def dimension(self, p: int) -> int:
        return 1

    def integrality(self, p: int) -> np.ndarray:
        return np.zeros(1, dtype=bool)

    def feasible(self, p: int, values: np.ndarray) -> bool:
        if values[0] < -1e-9:
            return False
        return self.bound is None or values[0] <= self.bound + 1e-9

    def own_payoff(self, p: int, x: np.ndarray) -> float:
        return -float(x[0]) ** 2

    def pair_payoff(self, p: int, k: int, xp: np.ndarray, xk: np.ndarray) -> float:
        return float(xp[0]) * float(xk[0])

    def best_response(self, p: int, opponents: Sequence[Optional[MixedStrategy]]) -> PureStrategy:
        expected = float(opponents[1 - p].expectation()[0])
        best = expected / 2.0
        if self.bound is not None:
            best = min(best, self.bound)  # payoff concave, so clamping is optimal
        return self.make_strategy(p, [best])
