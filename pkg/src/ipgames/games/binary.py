"""Generic binary game with linear own payoffs, bilinear interactions and
arbitrary linear constraint rows per player.

Best responses enumerate the feasible 0/1 vectors, so this class is meant
for small hand-built games and oracle cross-checks, not for benchmarks.
"""

from __future__ import annotations

import itertools
from typing import Optional, Sequence

import numpy as np

from ..model import BilateralGame, MixedStrategy, NoStrategyError, PureStrategy

ENUM_CAP = 20  # enumeration refuses beyond this many binary variables


class BinaryBilinearGame(BilateralGame):
    """Player p maximizes v^p.x^p + sum_k (x^p)' C^{pk} x^k subject to its
    linear rows; every variable is binary.

    rows[p] is a list of (coefficients, relation, rhs) with relation in
    {"<=", ">=", "="}; interactions[p][k] is an (n_p, n_k) matrix.
    """

    def __init__(self, values, rows, interactions):
        self.values = [np.asarray(v, dtype=float) for v in values]
        self.num_players = len(self.values)
        self.rows = []
        for p in range(self.num_players):
            cleaned = []
            for coeffs, rel, rhs in rows[p]:
                if rel not in ("<=", ">=", "="):
                    raise ValueError(f"unknown relation {rel!r}")
                cleaned.append((np.asarray(coeffs, dtype=float), rel, float(rhs)))
            self.rows.append(cleaned)
        self.interactions = {}
        for p in range(self.num_players):
            for k in range(self.num_players):
                if k != p:
                    self.interactions[(p, k)] = np.asarray(
                        interactions[p][k], dtype=float
                    )

    def dimension(self, p: int) -> int:
        return len(self.values[p])

    def integrality(self, p: int) -> np.ndarray:
        return np.ones(self.dimension(p), dtype=bool)

    def all_binary(self, p: int) -> bool:
        return True

    def support_cap(self, p: int) -> Optional[int]:
        return self.dimension(p)

    def feasible(self, p: int, values: np.ndarray) -> bool:
        if np.any((values < -1e-9) | (values > 1 + 1e-9)):
            return False
        for coeffs, rel, rhs in self.rows[p]:
            lhs = float(coeffs @ values)
            if rel == "<=" and lhs > rhs + 1e-9:
                return False
            if rel == ">=" and lhs < rhs - 1e-9:
                return False
            if rel == "=" and abs(lhs - rhs) > 1e-9:
                return False
        return True

    def own_payoff(self, p: int, x: np.ndarray) -> float:
        return float(self.values[p] @ x)

    def pair_payoff(self, p: int, k: int, xp: np.ndarray, xk: np.ndarray) -> float:
        return float(xp @ self.interactions[(p, k)] @ xk)

    def feasible_vectors(self, p: int) -> list[np.ndarray]:
        n = self.dimension(p)
        if n > ENUM_CAP:
            raise ValueError(f"enumeration refused for {n} > {ENUM_CAP} variables")
        out = []
        for bits in itertools.product((0.0, 1.0), repeat=n):
            x = np.asarray(bits)
            if self.feasible(p, x):
                out.append(x)
        return out

    def best_response(self, p: int, opponents: Sequence[Optional[MixedStrategy]]) -> PureStrategy:
        rho = self.values[p].copy()
        for k in range(self.num_players):
            if k != p and opponents[k] is not None:
                rho += self.interactions[(p, k)] @ opponents[k].expectation()
        candidates = self.feasible_vectors(p)
        if not candidates:
            raise NoStrategyError(f"player {p} has no feasible strategy")
        best = max(candidates, key=lambda x: float(rho @ x))
        return self.make_strategy(p, best)
