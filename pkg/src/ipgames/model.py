"""Core abstractions: pure/mixed strategies, profiles, bilateral games and
their finite sampled restrictions with cached payoff decompositions.

Payoffs are bilateral: a player's payoff is an own term plus a sum of
pairwise interaction terms, one per opponent.  Expected payoffs of product
distributions therefore cost one cache lookup per opponent instead of a sum
over the exponential profile space, and the equilibrium feasibility systems
stay linear for any number of players.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

SNAP_TOL = 1e-6    # integral coordinates may deviate this much before rejection
COORD_TOL = 1e-9   # equality tolerance for continuous coordinates
PROB_TOL = 1e-9    # probability mass bookkeeping tolerance
CACHE_TOL = 1e-12  # sampled payoff caches must re-verify this tightly


class DuplicateStrategyError(ValueError):
    """Raised when a strategy is inserted twice into a player's sampled list."""


class NoStrategyError(RuntimeError):
    """Raised when a player's strategy set is empty or would become empty."""


class PureStrategy:
    """An immutable decision vector with an integrality mask.

    Integral coordinates are snapped to the nearest integer on construction;
    values further than SNAP_TOL from an integer are rejected.
    """

    __slots__ = ("values", "integral")

    def __init__(self, values: Sequence[float], integral: Sequence[bool]):
        vals = np.asarray(values, dtype=float).copy()
        mask = np.asarray(integral, dtype=bool).copy()
        if vals.ndim != 1 or mask.shape != vals.shape:
            raise ValueError("strategy values and integrality mask must be 1-d and aligned")
        if mask.any():
            snapped = np.rint(vals[mask])
            if np.max(np.abs(vals[mask] - snapped), initial=0.0) > SNAP_TOL:
                raise ValueError("integral coordinate outside snap tolerance")
            vals[mask] = snapped
        vals.setflags(write=False)
        mask.setflags(write=False)
        self.values = vals
        self.integral = mask

    def __len__(self) -> int:
        return self.values.shape[0]

    def equals(self, other: "PureStrategy", tol: float = COORD_TOL) -> bool:
        if len(self) != len(other):
            return False
        diff = np.abs(self.values - other.values)
        if self.integral.any() and np.max(diff[self.integral], initial=0.0) > 0.0:
            return False
        cont = ~self.integral
        return bool(np.max(diff[cont], initial=0.0) <= tol)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PureStrategy) and self.equals(other)

    def __hash__(self):  # pragma: no cover - guard against accidental set use
        raise TypeError("PureStrategy uses tolerance equality and is unhashable")

    def __repr__(self) -> str:
        body = ", ".join(f"{v:g}" for v in self.values)
        return f"PureStrategy([{body}])"


class MixedStrategy:
    """A finitely supported distribution over pure strategies of one player."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[tuple[PureStrategy, float]]):
        cleaned: list[tuple[PureStrategy, float]] = []
        for strategy, prob in atoms:
            if prob < -PROB_TOL:
                raise ValueError(f"negative probability {prob}")
            if prob <= PROB_TOL:
                continue
            for seen, _ in cleaned:
                if seen.equals(strategy):
                    raise ValueError("duplicate atom in mixed strategy")
            cleaned.append((strategy, float(prob)))
        if not cleaned:
            raise ValueError("mixed strategy needs at least one positive atom")
        total = sum(p for _, p in cleaned)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total}, not 1")
        cleaned = [(s, p / total) for s, p in cleaned]
        self.atoms = tuple(cleaned)

    @classmethod
    def point_mass(cls, strategy: PureStrategy) -> "MixedStrategy":
        return cls([(strategy, 1.0)])

    def support(self) -> tuple[PureStrategy, ...]:
        return tuple(s for s, _ in self.atoms)

    def probability(self, strategy: PureStrategy) -> float:
        for s, p in self.atoms:
            if s.equals(strategy):
                return p
        return 0.0

    def expectation(self) -> np.ndarray:
        """Coordinatewise expectation of the decision vector."""
        out = np.zeros(len(self.atoms[0][0]))
        for s, p in self.atoms:
            out += p * s.values
        return out

    def __repr__(self) -> str:
        body = ", ".join(f"{p:.4g}*{s!r}" for s, p in self.atoms)
        return f"MixedStrategy({body})"


class Profile:
    """One mixed strategy per player."""

    __slots__ = ("players",)

    def __init__(self, players: Sequence[MixedStrategy]):
        if not players:
            raise ValueError("empty profile")
        self.players = tuple(players)

    def __len__(self) -> int:
        return len(self.players)

    def __getitem__(self, p: int) -> MixedStrategy:
        return self.players[p]

    def is_pure(self) -> bool:
        return all(len(m.atoms) == 1 for m in self.players)


class JointDistribution:
    """A distribution over full pure profiles (not necessarily a product)."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[tuple[tuple[PureStrategy, ...], float]]):
        cleaned = []
        for profile, prob in atoms:
            if prob < -PROB_TOL:
                raise ValueError(f"negative probability {prob}")
            if prob <= PROB_TOL:
                continue
            cleaned.append((tuple(profile), float(prob)))
        if not cleaned:
            raise ValueError("joint distribution needs positive mass")
        m = len(cleaned[0][0])
        if any(len(profile) != m for profile, _ in cleaned):
            raise ValueError("atoms disagree on the number of players")
        total = sum(p for _, p in cleaned)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"probabilities sum to {total}, not 1")
        self.atoms = tuple((profile, p / total) for profile, p in cleaned)

    @property
    def num_players(self) -> int:
        return len(self.atoms[0][0])

    def marginal(self, p: int) -> list[tuple[PureStrategy, float]]:
        """Marginal distribution of player p as (strategy, probability) pairs."""
        out: list[tuple[PureStrategy, float]] = []
        for profile, prob in self.atoms:
            for i, (seen, mass) in enumerate(out):
                if seen.equals(profile[p]):
                    out[i] = (seen, mass + prob)
                    break
            else:
                out.append((profile[p], prob))
        return out


class BilateralGame:
    """Base class for games whose payoffs split into own plus pairwise terms.

    Subclasses provide the decomposition, a feasibility test, and an exact
    best-response engine; everything downstream (sampled caches, equilibrium
    search, verification) works through this interface only.
    """

    num_players: int

    def dimension(self, p: int) -> int:
        raise NotImplementedError

    def integrality(self, p: int) -> np.ndarray:
        raise NotImplementedError

    def feasible(self, p: int, values: np.ndarray) -> bool:
        raise NotImplementedError

    def own_payoff(self, p: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def pair_payoff(self, p: int, k: int, xp: np.ndarray, xk: np.ndarray) -> float:
        raise NotImplementedError

    def best_response(self, p: int, opponents: Sequence[Optional[MixedStrategy]]) -> PureStrategy:
        """Exact argmax of player p's expected payoff against the opponents.

        opponents is indexed by player; entry p is ignored.
        """
        raise NotImplementedError

    def support_cap(self, p: int) -> Optional[int]:
        """Upper bound on equilibrium support size when payoffs are linear in
        own variables; None when no such bound applies."""
        return None

    def all_binary(self, p: int) -> bool:
        return False

    def make_strategy(self, p: int, values: Sequence[float]) -> PureStrategy:
        strategy = PureStrategy(values, self.integrality(p))
        if len(strategy) != self.dimension(p):
            raise ValueError(
                f"strategy of length {len(strategy)} for player {p}"
                f" (dimension {self.dimension(p)})"
            )
        return strategy

    def zero_strategy(self, p: int) -> PureStrategy:
        return PureStrategy(np.zeros(self.dimension(p)), self.integrality(p))

    def pure_payoff(self, p: int, profile: Sequence[PureStrategy]) -> float:
        total = self.own_payoff(p, profile[p].values)
        for k in range(self.num_players):
            if k != p:
                total += self.pair_payoff(p, k, profile[p].values, profile[k].values)
        return total


def expected_payoff(game: BilateralGame, profile: Profile, p: int) -> float:
    """Expected payoff of player p under a product distribution.

    Uses the bilateral decomposition, so the cost is linear in the number of
    opponents (times support sizes), never exponential in the player count.
    """
    if len(profile) != game.num_players:
        raise ValueError("profile has wrong number of players")
    for k in range(game.num_players):
        for s, _ in profile[k].atoms:
            if len(s) != game.dimension(k):
                raise ValueError(f"player {k} strategy has wrong dimension")
    total = 0.0
    for xp, wp in profile[p].atoms:
        value = game.own_payoff(p, xp.values)
        for k in range(game.num_players):
            if k == p:
                continue
            value += sum(
                wk * game.pair_payoff(p, k, xp.values, xk.values)
                for xk, wk in profile[k].atoms
            )
        total += wp * value
    return total


@dataclass(frozen=True)
class DeviationRecord:
    player: int
    strategy: PureStrategy
    iteration: int


class SampledGame:
    """A finite restriction of a bilateral game with cached payoffs.

    Caches: own[p][i] = own term of strategy i; pair[(p, k)][i, j] = pairwise
    term earned by p when p plays its strategy i and opponent k plays its
    strategy j.  add/remove keep the caches exactly consistent with a fresh
    rebuild.
    """

    def __init__(self, game: BilateralGame, initial: Sequence[Sequence[PureStrategy]]):
        if len(initial) != game.num_players:
            raise ValueError("one strategy list per player required")
        self.game = game
        self.strategies: list[list[PureStrategy]] = [[] for _ in range(game.num_players)]
        self.own: list[np.ndarray] = [np.zeros(0) for _ in range(game.num_players)]
        self.pair: dict[tuple[int, int], np.ndarray] = {}
        m = game.num_players
        for p in range(m):
            for k in range(m):
                if p != k:
                    self.pair[(p, k)] = np.zeros((0, 0))
        self.deviation_log: list[DeviationRecord] = []
        for p, strategies in enumerate(initial):
            if not strategies:
                raise NoStrategyError(f"player {p} has no initial strategy")
            for s in strategies:
                self.add_strategy(p, s, iteration=0)

    @property
    def num_players(self) -> int:
        return self.game.num_players

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategies)

    def index_of(self, p: int, strategy: PureStrategy) -> Optional[int]:
        for i, s in enumerate(self.strategies[p]):
            if s.equals(strategy):
                return i
        return None

    def add_strategy(self, p: int, strategy: PureStrategy, iteration: int) -> int:
        if len(strategy) != self.game.dimension(p):
            raise ValueError("dimension mismatch")
        if not self.game.feasible(p, strategy.values):
            raise ValueError(f"infeasible strategy for player {p}: {strategy!r}")
        if self.index_of(p, strategy) is not None:
            raise DuplicateStrategyError(f"player {p} already holds {strategy!r}")
        self.strategies[p].append(strategy)
        self.own[p] = np.append(self.own[p], self.game.own_payoff(p, strategy.values))
        for k in range(self.num_players):
            if k == p:
                continue
            nk = len(self.strategies[k])
            col = np.asarray(
                [self.game.pair_payoff(k, p, xk.values, strategy.values)
                 for xk in self.strategies[k]],
                dtype=float,
            ).reshape(nk, 1)
            self.pair[(k, p)] = np.hstack([self.pair[(k, p)], col])
            row = np.asarray(
                [self.game.pair_payoff(p, k, strategy.values, xk.values)
                 for xk in self.strategies[k]],
                dtype=float,
            ).reshape(1, nk)
            self.pair[(p, k)] = np.vstack([self.pair[(p, k)], row])
        self.deviation_log.append(DeviationRecord(p, strategy, iteration))
        return len(self.strategies[p]) - 1

    def remove_strategies(self, removals: Iterable[tuple[int, PureStrategy]]) -> None:
        drop: dict[int, list[int]] = {}
        for p, strategy in removals:
            idx = self.index_of(p, strategy)
            if idx is None:
                raise ValueError(f"player {p} does not hold {strategy!r}")
            drop.setdefault(p, []).append(idx)
        for p, indices in drop.items():
            if len(set(indices)) >= len(self.strategies[p]):
                raise NoStrategyError(f"removal would empty player {p}'s strategy list")
        for p, indices in drop.items():
            keep = [i for i in range(len(self.strategies[p])) if i not in set(indices)]
            removed_strategies = [self.strategies[p][i] for i in set(indices)]
            self.strategies[p] = [self.strategies[p][i] for i in keep]
            self.own[p] = self.own[p][keep]
            for k in range(self.num_players):
                if k == p:
                    continue
                self.pair[(p, k)] = self.pair[(p, k)][keep, :]
                self.pair[(k, p)] = self.pair[(k, p)][:, keep]
            self.deviation_log = [
                rec for rec in self.deviation_log
                if not (rec.player == p and any(rec.strategy.equals(s) for s in removed_strategies))
            ]

    def payoff_against(self, p: int, probs: Sequence[np.ndarray]) -> np.ndarray:
        """Expected payoff of each of p's sampled strategies versus the
        opponents' probability vectors (aligned with the sampled lists)."""
        out = self.own[p].copy()
        for k in range(self.num_players):
            if k != p:
                out += self.pair[(p, k)] @ probs[k]
        return out

    def expected(self, p: int, probs: Sequence[np.ndarray]) -> float:
        return float(probs[p] @ self.payoff_against(p, probs))

    def pure_cell(self, indices: Sequence[int]) -> tuple[float, ...]:
        """Payoff vector of a pure profile given by per-player indices."""
        out = []
        for p in range(self.num_players):
            v = self.own[p][indices[p]]
            for k in range(self.num_players):
                if k != p:
                    v += self.pair[(p, k)][indices[p], indices[k]]
            out.append(float(v))
        return tuple(out)

    def profile_from(self, probs: Sequence[np.ndarray]) -> Profile:
        mixed = []
        for p, vec in enumerate(probs):
            atoms = [
                (self.strategies[p][i], float(vec[i]))
                for i in range(len(vec))
                if vec[i] > PROB_TOL
            ]
            mixed.append(MixedStrategy(atoms))
        return Profile(mixed)

    def recheck_caches(self, rng=None, samples: int = 16) -> float:
        """Spot-recompute cache entries against the game; returns the max error."""
        import random as _random

        rng = rng or _random.Random(0)
        worst = 0.0
        for _ in range(samples):
            p = rng.randrange(self.num_players)
            i = rng.randrange(len(self.strategies[p]))
            worst = max(worst, abs(self.own[p][i] - self.game.own_payoff(p, self.strategies[p][i].values)))
            ks = [k for k in range(self.num_players) if k != p]
            k = rng.choice(ks)
            j = rng.randrange(len(self.strategies[k]))
            direct = self.game.pair_payoff(p, k, self.strategies[p][i].values, self.strategies[k][j].values)
            worst = max(worst, abs(self.pair[(p, k)][i, j] - direct))
        return worst


def assemble_sampled(game: BilateralGame, initial: Sequence[Sequence[PureStrategy]]) -> SampledGame:
    """Build a sampled game from per-player strategy lists, validating
    feasibility, distinctness and non-emptiness."""
    return SampledGame(game, initial)
