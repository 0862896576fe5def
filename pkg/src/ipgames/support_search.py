"""Equilibrium computation on sampled games via support enumeration.

The search guesses support sizes and supports in a history-guided order,
prunes conditionally dominated strategies, and solves a linear
feasibility system per candidate support.  The feasibility objective
maximizes the minimum support probability, so a support is accepted
exactly when an equilibrium placing strictly positive mass on every
member exists; this keeps forced-support guarantees and dominance
pruning mutually consistent.

Also here: the correlated-equilibrium linear program over a sampled
game's full strategy product, and equilibrium extraction from a
correlated distribution with pinned payoff values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .lp import EQ, GE, INFEASIBLE, LE, LpProblem, SolverFailure, solve_lp
from .model import JointDistribution, MixedStrategy, Profile, SampledGame

DOM_TOL = 1e-9   # strict-dominance gap; pruning ties would be unsound
MIN_PROB = 1e-9  # smallest probability accepted as "in the support"
CE_ROW_TOL = 1e-7  # recheck tolerance for correlated-equilibrium rows


@dataclass(frozen=True)
class SampledEquilibrium:
    """Mixed equilibrium of a sampled game, aligned with its strategy lists."""

    probs: tuple[np.ndarray, ...]   # per player, over the full sampled list
    values: tuple[float, ...]       # equilibrium expected payoffs

    def support(self, p: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.nonzero(self.probs[p] > MIN_PROB)[0])

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(self.support(p)) for p in range(len(self.probs)))

    def to_profile(self, sampled: SampledGame) -> Profile:
        return sampled.profile_from(self.probs)


def conditionally_dominated(sampled: SampledGame, p: int, x: int,
                            candidates: Sequence[Sequence[int]]) -> bool:
    """True iff some sampled strategy of p beats x strictly against every
    pure profile drawn from the opponents' candidate sets.

    The bilateral decomposition makes the worst case separable: the
    minimum payoff gap over the candidate product is the sum of per-
    opponent minima.  Dominators are drawn from the full sampled list,
    which is sound because every sampled strategy keeps its best-payoff
    row in the feasibility system.
    """
    gaps = sampled.own[p] - sampled.own[p][x]
    for k in range(sampled.num_players):
        if k == p:
            continue
        r = np.asarray(candidates[k], dtype=int)
        if r.size == 0:
            raise ValueError(f"empty candidate set for player {k}")
        block = sampled.pair[(p, k)][:, r] - sampled.pair[(p, k)][x, r]
        gaps = gaps + block.min(axis=1)
    gaps[x] = -np.inf
    return bool(gaps.size) and float(gaps.max()) > DOM_TOL


def sort_sizes(limits: Sequence[int], predecessor: Optional[Sequence[int]],
               num_players: int) -> list[tuple[int, ...]]:
    """Support-size vectors in search order.

    Without history: total size then balance for two players, reversed
    beyond two.  With a predecessor equilibrium's support sizes: balance
    first for two players, then the Chebyshev distances to the
    predecessor sizes and to the predecessor sizes plus one, then total;
    beyond two players the distance criteria lead.  Ties break
    lexicographically.
    """
    vectors = list(itertools.product(*(range(1, limit + 1) for limit in limits)))

    def balance(s):
        return max(s) - min(s)

    if predecessor is None:
        if num_players == 2:
            key = lambda s: (sum(s), balance(s), s)
        else:
            key = lambda s: (balance(s), sum(s), s)
    else:
        prev = tuple(predecessor)
        bumped = tuple(v + 1 for v in prev)

        def dist(s, ref):
            return max(abs(a - b) for a, b in zip(s, ref))

        if num_players == 2:
            key = lambda s: (balance(s), dist(s, prev), dist(s, bumped), sum(s), s)
        else:
            key = lambda s: (dist(s, prev), dist(s, bumped), sum(s), balance(s), s)
    return sorted(vectors, key=key)


def sort_strategies(sampled: SampledGame,
                    recent: Optional[Sequence[MixedStrategy]]) -> list[list[int]]:
    """Per player, sampled indices by probability in the most recent
    equilibrium descending; unseen strategies keep insertion order."""
    order = []
    for p in range(sampled.num_players):
        n = len(sampled.strategies[p])
        probs = np.zeros(n)
        if recent is not None:
            for i in range(n):
                probs[i] = recent[p].probability(sampled.strategies[p][i])
        order.append(sorted(range(n), key=lambda i: (-probs[i], i)))
    return order


def solve_feasibility(sampled: SampledGame, support: Sequence[Sequence[int]],
                      epsilon: float = 0.0,
                      fixed_values: Optional[Sequence[float]] = None,
                      ) -> Optional[SampledEquilibrium]:
    """Solve the equilibrium system for a guessed support.

    Rows: indifference (or an epsilon band when epsilon > 0) for support
    strategies, best-payoff inequalities for every sampled strategy,
    probability simplex rows; the objective maximizes the minimum
    support probability.  When fixed_values is given, the payoff
    variables are pinned to those constants instead of being free.
    """
    m = sampled.num_players
    support = [tuple(s) for s in support]
    offsets = []
    total = 0
    for p in range(m):
        if not support[p]:
            raise ValueError(f"empty support for player {p}")
        offsets.append(total)
        total += len(support[p])
    free_values = fixed_values is None
    value_col = total
    t_col = total + (m if free_values else 0)
    problem = LpProblem(t_col + 1)
    problem.set_bounds(t_col, 0.0, 1.0)
    if free_values:
        for p in range(m):
            problem.make_free(value_col + p)

    for p in range(m):
        for i in range(len(sampled.strategies[p])):
            row = np.zeros(problem.num_vars)
            for k in range(m):
                if k == p:
                    continue
                cols = sampled.pair[(p, k)][i, list(support[k])]
                row[offsets[k]: offsets[k] + len(support[k])] = cols
            rhs = -float(sampled.own[p][i])
            if free_values:
                row[value_col + p] = -1.0
            else:
                rhs += float(fixed_values[p])
            in_support = i in support[p]
            if in_support and epsilon > 0:
                problem.add_row(row, GE, rhs - epsilon)
            elif in_support:
                problem.add_row(row, EQ, rhs)
            # every sampled strategy, supported or not, stays a candidate
            # deviation: expected payoff may not exceed the player's value
            problem.add_row(row, LE, rhs)

    for p in range(m):
        row = np.zeros(problem.num_vars)
        row[offsets[p]: offsets[p] + len(support[p])] = 1.0
        problem.add_row(row, EQ, 1.0)
        for j in range(len(support[p])):
            row = np.zeros(problem.num_vars)
            row[offsets[p] + j] = 1.0
            row[t_col] = -1.0
            problem.add_row(row, GE, 0.0)

    objective = np.zeros(problem.num_vars)
    objective[t_col] = 1.0
    problem.objective = objective
    result = solve_lp(problem)
    if result.status == INFEASIBLE:
        return None
    if result.status != "optimal":
        raise SolverFailure(f"feasibility solve ended with {result.status}")
    if result.x[t_col] <= MIN_PROB:
        return None

    probs = []
    for p in range(m):
        vec = np.zeros(len(sampled.strategies[p]))
        for j, i in enumerate(support[p]):
            vec[i] = max(0.0, float(result.x[offsets[p] + j]))
        vec /= vec.sum()
        probs.append(vec)
    if free_values:
        values = tuple(float(result.x[value_col + p]) for p in range(m))
    else:
        values = tuple(float(v) for v in fixed_values)
    return SampledEquilibrium(tuple(probs), values)


def _eliminate(sampled: SampledGame, sets: list[list[int]], locked: Sequence[bool],
               forced: Optional[tuple[int, int]]) -> Optional[list[list[int]]]:
    """Iterated conditional-dominance removal to a fixed point.

    Locked players' sets are committed supports: a dominated member there
    kills the branch, as does losing a forced strategy or emptying a set.
    Shrinking opponent sets only grows the dominated region, so any
    removal order reaches the same fixed point.
    """
    changed = True
    while changed:
        changed = False
        for p in range(sampled.num_players):
            keep = []
            for i in sets[p]:
                if conditionally_dominated(sampled, p, i, sets):
                    if locked[p] or (forced is not None and forced == (p, i)):
                        return None
                    changed = True
                else:
                    keep.append(i)
            if not keep:
                return None
            sets[p] = keep
    return sets


def find_ne(sampled: SampledGame, *,
            predecessor_sizes: Optional[Sequence[int]] = None,
            recent: Optional[Sequence[MixedStrategy]] = None,
            forced: Optional[tuple[int, int]] = None,
            excluded: Iterable[tuple[int, int]] = (),
            restrict: Optional[Sequence[Sequence[int]]] = None,
            use_caps: bool = True,
            epsilon: float = 0.0,
            fixed_values: Optional[Sequence[float]] = None,
            ) -> Optional[SampledEquilibrium]:
    """Support enumeration over a sampled game.

    forced pins one (player, index) into the support; excluded pairs are
    barred from every support but keep their best-payoff rows; restrict
    narrows the candidate pool per player.  Returns the first support
    admitting an equilibrium, or None when enumeration is exhausted.
    """
    m = sampled.num_players
    excluded = set(excluded)
    order = sort_strategies(sampled, recent)
    base: list[list[int]] = []
    for p in range(m):
        allowed = [i for i in order[p] if (p, i) not in excluded]
        if restrict is not None:
            wanted = set(restrict[p])
            allowed = [i for i in allowed if i in wanted]
        if not allowed:
            return None
        base.append(allowed)
    if forced is not None and forced[1] not in base[forced[0]]:
        return None

    limits = []
    for p in range(m):
        cap = sampled.game.support_cap(p) if use_caps else None
        limit = len(base[p])
        if cap is not None:
            limit = min(limit, max(1, cap))
        limits.append(limit)

    sets0 = _eliminate(sampled, [list(b) for b in base], [False] * m, forced)
    if sets0 is None:
        return None

    for sizes in sort_sizes(limits, predecessor_sizes, m):
        if any(sizes[p] > len(sets0[p]) for p in range(m)):
            continue
        found = _instantiate(sampled, 0, sizes, sets0, forced, epsilon, fixed_values)
        if found is not None:
            return found
    return None


def _instantiate(sampled: SampledGame, level: int, sizes: Sequence[int],
                 sets: list[list[int]], forced: Optional[tuple[int, int]],
                 epsilon: float, fixed_values) -> Optional[SampledEquilibrium]:
    m = sampled.num_players
    if level == m:
        return solve_feasibility(sampled, sets, epsilon=epsilon,
                                 fixed_values=fixed_values)
    if len(sets[level]) < sizes[level]:
        return None
    for combo in itertools.combinations(sets[level], sizes[level]):
        if forced is not None and forced[0] == level and forced[1] not in combo:
            continue
        child = [list(combo) if p == level else list(sets[p]) for p in range(m)]
        child = _eliminate(sampled, child, [p <= level for p in range(m)], forced)
        if child is None:
            continue
        if any(len(child[p]) < sizes[p] for p in range(level + 1, m)):
            continue
        found = _instantiate(sampled, level + 1, sizes, child, forced,
                             epsilon, fixed_values)
        if found is not None:
            return found
    return None


def payoff_tensors(sampled: SampledGame) -> list[np.ndarray]:
    """Per player, the payoff over the full strategy product as an
    m-dimensional array indexed by sampled strategy indices."""
    m = sampled.num_players
    shape = sampled.sizes()
    tensors = []
    for p in range(m):
        t = np.zeros(shape)
        axes_own = [1] * m
        axes_own[p] = shape[p]
        t += sampled.own[p].reshape(axes_own)
        for k in range(m):
            if k == p:
                continue
            axes = [1] * m
            axes[p] = shape[p]
            axes[k] = shape[k]
            mat = sampled.pair[(p, k)]
            # reshape wants the earlier axis major: transpose when k comes first
            if k < p:
                mat = mat.T
            t = t + mat.reshape(axes)
        tensors.append(t)
    return tensors


def solve_ce(sampled: SampledGame, objective: str = "welfare") -> JointDistribution:
    """Correlated equilibrium of a sampled game by linear programming.

    Variables are joint probabilities over the full strategy product in
    C order (last player's index fastest).  One obedience row per player
    and ordered pair of that player's strategies; objective either pure
    feasibility or social-welfare maximization.
    """
    if objective not in ("welfare", "feasible"):
        raise ValueError(f"unknown objective {objective!r}")
    m = sampled.num_players
    shape = sampled.sizes()
    n = int(np.prod(shape))
    tensors = payoff_tensors(sampled)

    problem = LpProblem(n)
    for p in range(m):
        moved = np.moveaxis(tensors[p], p, 0)  # own index first
        for bar in range(shape[p]):
            for hat in range(shape[p]):
                if hat == bar:
                    continue
                coeffs = np.zeros_like(moved)
                coeffs[bar] = moved[bar] - moved[hat]
                problem.add_row(np.moveaxis(coeffs, 0, p).reshape(-1), GE, 0.0)
    problem.add_row(np.ones(n), EQ, 1.0)
    if objective == "welfare":
        problem.objective = sum(tensors).reshape(-1)
    else:
        problem.objective = np.zeros(n)
    result = solve_lp(problem)
    if result.status != "optimal":
        raise SolverFailure(
            f"correlated-equilibrium program ended with {result.status};"
            " a sampled game always admits one"
        )
    tau = np.maximum(result.x, 0.0).reshape(shape)
    tau /= tau.sum()
    atoms = []
    for idx in np.ndindex(*shape):
        weight = float(tau[idx])
        if weight > MIN_PROB:
            atoms.append(
                (tuple(sampled.strategies[p][idx[p]] for p in range(m)), weight)
            )
    return JointDistribution(atoms)


def tau_marginals(sampled: SampledGame, tau: JointDistribution) -> list[np.ndarray]:
    """Per-player marginal probabilities of tau over sampled indices."""
    out = [np.zeros(len(sampled.strategies[p])) for p in range(sampled.num_players)]
    for profile, weight in tau.atoms:
        for p in range(sampled.num_players):
            idx = sampled.index_of(p, profile[p])
            if idx is None:
                raise ValueError("tau atom outside the sampled game")
            out[p][idx] += weight
    return out


def tau_payoffs(sampled: SampledGame, tau: JointDistribution) -> list[float]:
    """Expected payoff per player under a joint distribution."""
    out = []
    for p in range(sampled.num_players):
        total = 0.0
        for profile, weight in tau.atoms:
            indices = [sampled.index_of(k, profile[k]) for k in range(sampled.num_players)]
            total += weight * sampled.pure_cell(indices)[p]
        out.append(total)
    return out


def tau_based_ne(sampled: SampledGame, tau: JointDistribution,
                 ) -> Optional[SampledEquilibrium]:
    """Search for an equilibrium whose supports lie inside tau's positive
    marginals and whose payoffs equal the tau payoffs exactly."""
    marginals = tau_marginals(sampled, tau)
    restrict = [
        [int(i) for i in np.nonzero(mp > MIN_PROB)[0]] for mp in marginals
    ]
    values = tau_payoffs(sampled, tau)
    return find_ne(sampled, restrict=restrict, fixed_values=values,
                   use_caps=False)
