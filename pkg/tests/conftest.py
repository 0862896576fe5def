"""Hand-built instances with frozen golden values, plus brute-force oracles.

The oracles recompute optima by plain enumeration over numpy arrays and
share no code with the engines they check.  Golden numbers were computed
by hand from the instance data and are asserted exactly (up to stated
tolerances) in the test modules.
"""

from __future__ import annotations

import itertools

import numpy as np

from ipgames import LpProblem, MixedStrategy, SampledGame
from ipgames.games import (
    BinaryBilinearGame,
    KidneyExchangeGame,
    KnapsackGame,
    LotSizingGame,
)

# ---------------------------------------------------------------------------
# a 5-item knapsack duel whose strategy generation needs exactly one
# backtracking step; all golden numbers in the tests come from its
# hand-computed payoff tables

BT_A_INIT = (1, 1, 0, 1, 1)  # initial best responses of the isolated players
BT_B_INIT = (1, 1, 1, 1, 0)
BT_X1 = (0, 0, 1, 1, 1)  # added by player 0 at iteration 1
BT_X2 = (0, 1, 0, 0, 0)  # player 1, iteration 2
BT_X3 = (0, 0, 0, 1, 1)  # player 0, iteration 3
BT_X4 = (0, 0, 1, 0, 1)  # player 1, iteration 4
BT_X5 = (0, 1, 1, 1, 0)  # player 0, iteration 5; no equilibrium keeps it


def backtracking_game() -> KnapsackGame:
    return KnapsackGame(
        values=[[15, 8, -3, 43, -15], [24, 13, 44, -1, -45]],
        weights=[[70, -79, -8, -62, -96], [69, 25, -39, -74, 70]],
        budgets=[-140, 40.8],
        interactions=[{1: [39, -90, 11, -84, -43]},
                      {0: [-73, -58, -78, -49, 72]}],
    )


def bt_sampled(upto: int = 0) -> SampledGame:
    """Sampled game after the first `upto` strategy additions."""
    game = backtracking_game()
    sampled = SampledGame(game, [[game.make_strategy(0, BT_A_INIT)],
                                 [game.make_strategy(1, BT_B_INIT)]])
    added = [(0, BT_X1), (1, BT_X2), (0, BT_X3), (1, BT_X4), (0, BT_X5)]
    for it, (p, vec) in enumerate(added[:upto], start=1):
        sampled.add_strategy(p, game.make_strategy(p, vec), iteration=it)
    return sampled


# ---------------------------------------------------------------------------
# two binary games with known equilibria: the first leaves each player a
# single feasible vector, the second has exactly the two pure equilibria
# ((0,0),(0,0)) and ((0,1),(0,1))


def single_strategy_game() -> BinaryBilinearGame:
    coupling = np.array([[5.0, 0.0], [0.0, 23.0]])
    rows = [([1.0, 3.0], ">=", 1.0), ([1.0, 3.0], "<=", 2.0)]
    return BinaryBilinearGame(
        values=[[0.0, 0.0], [0.0, 0.0]],
        rows=[list(rows), list(rows)],
        interactions=[{1: coupling}, {0: coupling}],
    )


def two_equilibria_game() -> KnapsackGame:
    return KnapsackGame(
        values=[[0, 0], [100, 0]],
        weights=[[2, 2], [2, 1]],
        budgets=[3, 1],
        interactions=[{1: [12, 5]}, {0: [12, 5]}],
    )


# ---------------------------------------------------------------------------
# one-period quantity duel with a setup fee so high that both producing is
# never stable: exactly the two pure equilibria (idle; produce 7.5) and
# (produce 7.5; idle)


def one_period_duel() -> LotSizingGame:
    return LotSizingGame(a=[15.0], b=[1.0],
                         setup_costs=[[26.0], [26.0]],
                         unit_costs=[[0.0], [0.0]])


IDLE = (0.0, 0.0, 0.0, 0.0)
PRODUCE = (1.0, 7.5, 7.5, 0.0)  # layout (y | x | q | h)


# ---------------------------------------------------------------------------
# thirteen-vertex two-country exchange graph: country A owns five
# two-cycles outright, four cycles cross the border, B owns none alone

GRAPH_COUNTRIES = ["A", "A", "A", "B", "A", "A", "B",
                   "A", "A", "B", "A", "A", "B"]
GRAPH_ARCS = [
    (0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2),
    (4, 5), (5, 4), (5, 6), (6, 4),
    (7, 8), (8, 7), (8, 9), (9, 7),
    (10, 11), (11, 10), (11, 12), (12, 10),
]


def border_graph_game() -> KidneyExchangeGame:
    return KidneyExchangeGame(GRAPH_COUNTRIES, GRAPH_ARCS)


# ---------------------------------------------------------------------------
# finite matrix games embedded as binary games over unit vectors


def table_game(*tables) -> BinaryBilinearGame:
    """Polymatrix game over unit-vector strategies.

    tables[p] maps an opponent index to a payoff matrix with rows indexed
    by p's action and columns by the opponent's; a single pick-exactly-one
    row makes the unit vectors the feasible set.
    """
    dims = [None] * len(tables)
    for p, per in enumerate(tables):
        for tbl in per.values():
            dims[p] = np.asarray(tbl).shape[0]
    values = [np.zeros(dims[p]) for p in range(len(tables))]
    rows = [[(np.ones(dims[p]), "=", 1.0)] for p in range(len(tables))]
    interactions = [
        {k: np.asarray(tbl, dtype=float) for k, tbl in per.items()}
        for per in tables
    ]
    return BinaryBilinearGame(values, rows, interactions)


def matching_pennies() -> BinaryBilinearGame:
    table = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return table_game({1: table}, {0: -table})


def hawk_dove() -> BinaryBilinearGame:
    # symmetric chicken; rows are the player's own action (dove, hawk)
    table = np.array([[6.0, 2.0], [7.0, 0.0]])
    return table_game({1: table}, {0: table})


def unit_sampled(game: BinaryBilinearGame) -> SampledGame:
    """Sampled game whose strategy i of player p is exactly action i."""
    lists = []
    for p in range(game.num_players):
        eye = np.eye(game.dimension(p))
        lists.append([game.make_strategy(p, eye[i]) for i in range(len(eye))])
    return SampledGame(game, lists)


def cell_index(atom) -> tuple:
    """Action indices of a unit-vector profile (one per player)."""
    return tuple(int(np.argmax(s.values)) for s in atom)


def random_table_game(rng, dims) -> BinaryBilinearGame:
    tables = []
    for p in range(len(dims)):
        per = {}
        for k in range(len(dims)):
            if k != p:
                per[k] = np.array(
                    [[rng.randint(-9, 9) for _ in range(dims[k])]
                     for _ in range(dims[p])], dtype=float)
        tables.append(per)
    return table_game(*tables)


# ---------------------------------------------------------------------------
# brute-force oracles


def binary_rows(n: int) -> np.ndarray:
    """All 0/1 vectors of length n, one per row."""
    return ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(float)


def brute_knapsack_value(profits, weights, budget) -> float:
    """Exact optimum by enumerating every 0/1 vector; -inf if infeasible."""
    xs = binary_rows(len(profits))
    totals = xs @ np.asarray(profits, dtype=float)
    totals[xs @ np.asarray(weights, dtype=float) > budget + 1e-9] = -np.inf
    return float(totals.max())


def brute_pack_value(coefs, masks) -> float:
    """Best total over subsets of pairwise mask-disjoint items."""
    best = 0.0
    for picks in itertools.product((False, True), repeat=len(coefs)):
        used, total = 0, 0.0
        for pick, coef, mask in zip(picks, coefs, masks):
            if not pick:
                continue
            if used & mask:
                break
            used |= mask
            total += coef
        else:
            best = max(best, total)
    return best


def mixed_value(game, p, x, opponents) -> float:
    """Expected payoff of pure x against per-player mixed opponents,
    straight from the own-plus-pairwise decomposition."""
    vec = np.asarray(x, dtype=float)
    total = game.own_payoff(p, vec)
    for k, mix in enumerate(opponents):
        if k == p or mix is None:
            continue
        for strategy, prob in mix.atoms:
            total += prob * game.pair_payoff(p, k, vec, strategy.values)
    return float(total)


def brute_best_response_value(game, p, opponents) -> float:
    """Best-response value by enumerating every feasible 0/1 vector."""
    best = -np.inf
    for bits in itertools.product((0.0, 1.0), repeat=game.dimension(p)):
        vec = np.asarray(bits)
        if game.feasible(p, vec):
            best = max(best, mixed_value(game, p, vec, opponents))
    return best


def brute_lot_value(a, b, setup_costs, unit_costs, qbar) -> float:
    """Single-producer optimum by enumerating setup patterns.

    With free storage and no capacity, each period buys at the cheapest
    open setup so far and the best quantity solves a one-variable concave
    quadratic, so only the 0/1 setup pattern needs enumeration.
    """
    d = np.asarray(a, dtype=float) - np.asarray(b) * np.asarray(qbar, dtype=float)
    fees = np.asarray(setup_costs, dtype=float)
    T = len(d)
    pats = ((np.arange(2 ** T)[:, None] >> np.arange(T)) & 1).astype(bool)
    cost = np.minimum.accumulate(
        np.where(pats, np.asarray(unit_costs, dtype=float), np.inf), axis=1)
    margin = np.maximum(d - cost, 0.0)
    gains = (margin * margin / (4.0 * np.asarray(b))).sum(axis=1) - pats @ fees
    return float(gains.max())


def point_masses(game, vectors):
    """Per-player point-mass opponents from raw coordinate vectors."""
    return [MixedStrategy.point_mass(game.make_strategy(p, v))
            for p, v in enumerate(vectors)]


# ---------------------------------------------------------------------------
# LP vertex oracle


def lp_point_feasible(problem: LpProblem, x, tol: float = 1e-7) -> bool:
    if np.any(x < problem.lower - tol) or np.any(x > problem.upper + tol):
        return False
    for coeffs, rel, rhs in problem.rows:
        lhs = float(np.asarray(coeffs) @ x)
        if rel == "<=" and lhs > rhs + tol:
            return False
        if rel == ">=" and lhs < rhs - tol:
            return False
        if rel == "=" and abs(lhs - rhs) > tol:
            return False
    return True


def vertex_optimum(problem: LpProblem) -> float:
    """LP maximum by enumerating basic points of rows plus finite bounds.

    A bounded feasible LP attains its maximum where n linearly independent
    constraints are active, so checking every n-subset of hyperplanes is a
    complete (if slow) oracle.
    """
    n = problem.num_vars
    planes = [(np.asarray(c, dtype=float), float(rhs))
              for c, _, rhs in problem.rows]
    for j in range(n):
        for bound in (problem.lower[j], problem.upper[j]):
            if np.isfinite(bound):
                unit = np.zeros(n)
                unit[j] = 1.0
                planes.append((unit, float(bound)))
    best = -np.inf
    for combo in itertools.combinations(range(len(planes)), n):
        mat = np.array([planes[i][0] for i in combo])
        if abs(np.linalg.det(mat)) < 1e-9:
            continue
        x = np.linalg.solve(mat, np.array([planes[i][1] for i in combo]))
        if lp_point_feasible(problem, x):
            best = max(best, float(problem.objective @ x))
    return best


def random_bounded_lp(rng) -> LpProblem:
    """Feasible bounded LP: random inequality rows through a known interior
    point, plus a simplex cap that keeps the feasible set bounded."""
    n = rng.randint(2, 6)
    inner = np.array([rng.uniform(0.0, 2.0) for _ in range(n)])
    problem = LpProblem(
        n, objective=np.array([rng.uniform(-5.0, 5.0) for _ in range(n)]))
    for _ in range(rng.randint(1, 5)):
        coeffs = np.array([rng.uniform(-3.0, 3.0) for _ in range(n)])
        slack = rng.uniform(0.1, 4.0)
        if rng.random() < 0.5:
            problem.add_row(coeffs, "<=", float(coeffs @ inner) + slack)
        else:
            problem.add_row(coeffs, ">=", float(coeffs @ inner) - slack)
    problem.add_row(np.ones(n), "<=", float(inner.sum()) + rng.uniform(1.0, 5.0))
    return problem
