"""Two-country kidney exchange game over short cycles.

Each country selects vertex-disjoint exchange cycles among its own
incompatible pairs; international cycles take effect only when both
countries select them.  A country earns one unit per own vertex covered
by an executed cycle.  Best responses are exact cycle packings computed
by depth-first branch and bound.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

import numpy as np

from ..model import BilateralGame, MixedStrategy, PureStrategy

COEF_TOL = 1e-12  # packing coefficients below this are left to the closure

COUNTRIES = ("A", "B")


def enumerate_cycles(num_vertices: int, arcs, max_length: int):
    """All vertex-simple directed cycles of length <= max_length (2 or 3),
    deduplicated up to rotation; canonical form starts at the smallest
    vertex; result sorted by (length, vertex tuple)."""
    if max_length not in (2, 3):
        raise ValueError("cycle cap must be 2 or 3")
    arc_set = {(int(u), int(v)) for u, v in arcs}
    out = set()
    for u, v in arc_set:
        if u < v and (v, u) in arc_set:
            out.add((u, v))
    if max_length == 3:
        succ = {}
        for u, v in arc_set:
            succ.setdefault(u, set()).add(v)
        for u in range(num_vertices):
            for v in succ.get(u, ()):
                if v <= u:
                    continue
                for w in succ.get(v, ()):
                    if w > u and w != v and (w, u) in arc_set:
                        out.add((u, v, w))
    return sorted(out, key=lambda c: (len(c), c))


def pack_cycles(coefs: Sequence[float], masks: Sequence[int]):
    """Maximize the coefficient sum of pairwise vertex-disjoint cycles.

    Depth-first branch and bound over cycles sorted by coefficient
    descending; the bound sums the remaining cycles still compatible
    with the vertices used so far, which cuts deep on dense conflict
    structure; cycles with negligible coefficient are skipped entirely.
    """
    order = [i for i in sorted(range(len(coefs)), key=lambda i: (-coefs[i], i))
             if coefs[i] > COEF_TOL]
    suffix = np.zeros(len(order) + 1)
    for pos in range(len(order) - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + coefs[order[pos]]
    best_value = 0.0
    best_pick: list[int] = []

    def dive(pos: int, used: int, value: float, pick: list[int]) -> None:
        nonlocal best_value, best_pick
        if value > best_value + COEF_TOL:
            best_value, best_pick = value, list(pick)
        if pos == len(order) or value + suffix[pos] <= best_value + COEF_TOL:
            return
        free = sum(
            coefs[i] for i in order[pos:] if not used & masks[i]
        )
        if value + free <= best_value + COEF_TOL:
            return
        i = order[pos]
        if not used & masks[i]:
            pick.append(i)
            dive(pos + 1, used | masks[i], value + coefs[i], pick)
            pick.pop()
        dive(pos + 1, used, value, pick)

    dive(0, 0, 0.0, [])
    return best_value, sorted(best_pick)


class KidneyExchangeGame(BilateralGame):
    """Country A is player 0, country B is player 1.

    A player's strategy vector has one indicator per own national cycle
    followed by one indicator per international cycle, in the canonical
    cycle order of enumerate_cycles.
    """

    num_players = 2

    def __init__(self, countries: Sequence[str], arcs, max_length: int = 3):
        self.countries = [str(c) for c in countries]
        if set(self.countries) - set(COUNTRIES):
            raise ValueError("vertex countries must be 'A' or 'B'")
        self.arcs = sorted((int(u), int(v)) for u, v in arcs)
        self.max_length = int(max_length)
        self.num_vertices = len(self.countries)
        cycles = enumerate_cycles(self.num_vertices, self.arcs, self.max_length)
        self.national = ([], [])  # vertex tuples per player
        self.international = []
        for c in cycles:
            owners = {self.countries[v] for v in c}
            if owners == {"A"}:
                self.national[0].append(c)
            elif owners == {"B"}:
                self.national[1].append(c)
            else:
                self.international.append(c)
        # per player: packed coefficients/masks aligned with the strategy layout
        self._own_weight = []
        self._own_mask = []
        self._full_mask = []
        for p in range(2):
            label = COUNTRIES[p]
            weights, own_masks, full_masks = [], [], []
            for c in self.national[p] + self.international:
                weights.append(sum(1 for v in c if self.countries[v] == label))
                own_masks.append(self._mask(c, label))
                full_masks.append(self._mask(c, None))
            self._own_weight.append(np.asarray(weights, dtype=float))
            self._own_mask.append(own_masks)
            self._full_mask.append(full_masks)

    def _mask(self, cycle, label: Optional[str]) -> int:
        m = 0
        for v in cycle:
            if label is None or self.countries[v] == label:
                m |= 1 << v
        return m

    def dimension(self, p: int) -> int:
        return len(self.national[p]) + len(self.international)

    def integrality(self, p: int) -> np.ndarray:
        return np.ones(self.dimension(p), dtype=bool)

    def all_binary(self, p: int) -> bool:
        return True

    def support_cap(self, p: int) -> Optional[int]:
        return self.dimension(p)

    def _international_slice(self, p: int, x: np.ndarray) -> np.ndarray:
        return x[len(self.national[p]):]

    def feasible(self, p: int, values: np.ndarray) -> bool:
        if np.any((values < -1e-9) | (values > 1 + 1e-9)):
            return False
        used = 0
        for i in np.nonzero(values > 0.5)[0]:
            mask = self._own_mask[p][int(i)]
            if used & mask:
                return False
            used |= mask
        return True

    def own_payoff(self, p: int, x: np.ndarray) -> float:
        n_nat = len(self.national[p])
        return float(self._own_weight[p][:n_nat] @ x[:n_nat])

    def pair_payoff(self, p: int, k: int, xp: np.ndarray, xk: np.ndarray) -> float:
        wp = self._own_weight[p][len(self.national[p]):]
        return float(wp @ (self._international_slice(p, xp) * self._international_slice(k, xk)))

    def best_response(self, p: int, opponents: Sequence[Optional[MixedStrategy]],
                      maximal: bool = True) -> PureStrategy:
        k = 1 - p
        agree = (
            self._international_slice(k, opponents[k].expectation())
            if opponents[k] is not None
            else np.zeros(len(self.international))
        )
        n_nat = len(self.national[p])
        coefs = self._own_weight[p].copy()
        coefs[n_nat:] *= agree
        _, pick = pack_cycles(coefs, self._own_mask[p])
        x = np.zeros(self.dimension(p))
        x[pick] = 1.0
        if maximal:
            x = self._close(p, x)
        return self.make_strategy(p, x)

    def _close(self, p: int, x: np.ndarray) -> np.ndarray:
        """Flip zero indicators to one while own-vertex feasibility holds."""
        used = 0
        for i in np.nonzero(x > 0.5)[0]:
            used |= self._own_mask[p][int(i)]
        for i in range(self.dimension(p)):
            mask = self._own_mask[p][i]
            if x[i] < 0.5 and not used & mask:
                x[i] = 1.0
                used |= mask
        return x

    def is_maximal(self, p: int, x: np.ndarray) -> bool:
        used = 0
        for i in np.nonzero(x > 0.5)[0]:
            used |= self._own_mask[p][int(i)]
        return all(
            x[i] > 0.5 or (used & self._own_mask[p][i])
            for i in range(self.dimension(p))
        )

    def optimistic_strategy(self, p: int) -> PureStrategy:
        """Own optimum pretending the opponent agrees to any international
        cycle, with the opponent's vertex-disjointness still respected;
        projected onto the player's own indicators."""
        masks = list(self._own_mask[p][: len(self.national[p])])
        masks += self._full_mask[p][len(self.national[p]):]
        _, pick = pack_cycles(self._own_weight[p], masks)
        x = np.zeros(self.dimension(p))
        x[pick] = 1.0
        return self.make_strategy(p, self._close(p, x))

    def standalone_value(self, p: int) -> float:
        n_nat = len(self.national[p])
        value, _ = pack_cycles(
            self._own_weight[p][:n_nat], self._own_mask[p][:n_nat]
        )
        return value

    def social_optimum(self):
        """Best total patient coverage with full cooperation: all cycles,
        disjointness over every vertex."""
        cycles = self.national[0] + self.national[1] + self.international
        coefs = [float(len(c)) for c in cycles]
        masks = [self._mask(c, None) for c in cycles]
        value, pick = pack_cycles(coefs, masks)
        return value, [cycles[i] for i in pick]

    def social_welfare(self, profile) -> float:
        """Total executed patient count under a pure profile."""
        return sum(
            self.own_payoff(p, profile[p].values)
            + self.pair_payoff(p, 1 - p, profile[p].values, profile[1 - p].values)
            for p in range(2)
        )


def gen_keg(num_vertices: int, density: float, ins: int, seed: int,
            max_length: int = 3) -> KidneyExchangeGame:
    """Random digraph: first half of the vertices in country A, second half
    in B; each ordered pair carries an arc independently with the given
    probability."""
    if not 0 <= ins <= 9:
        raise ValueError("ins must lie in 0..9")
    rng = random.Random(f"keg-{num_vertices}-{density}-{ins}-{seed}")
    countries = ["A" if v < num_vertices // 2 else "B" for v in range(num_vertices)]
    arcs = [
        (u, v)
        for u in range(num_vertices)
        for v in range(num_vertices)
        if u != v and rng.random() < density
    ]
    return KidneyExchangeGame(countries, arcs, max_length)
