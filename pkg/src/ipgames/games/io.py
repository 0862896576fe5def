"""JSON instance schemas and round-trip helpers.

One schema per game kind, dispatched on the "game" field.  Serialization
is deterministic (sorted keys, fixed indentation, no timestamps), so
generating the same instance twice yields byte-identical files.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .duopoly import DuopolyGame
from .kidney import KidneyExchangeGame
from .knapsack import KnapsackGame
from .lotsizing import LotSizingGame


def _num(x):
    """Plain int when integral, float otherwise; keeps files tidy."""
    x = float(x)
    return int(x) if x.is_integer() else x


def _numlist(xs):
    return [_num(x) for x in xs]


def to_json(game) -> dict:
    if isinstance(game, KnapsackGame):
        players = []
        for p in range(game.num_players):
            players.append({
                "v": _numlist(game.values[p]),
                "w": _numlist(game.weights[p]),
                "budget": _num(game.budgets[p]),
                "c": {
                    str(k): _numlist(game.interactions[(p, k)])
                    for k in range(game.num_players)
                    if k != p
                },
            })
        return {
            "game": "knapsack",
            "m": game.num_players,
            "n": game.n,
            "players": players,
        }
    if isinstance(game, KidneyExchangeGame):
        return {
            "game": "keg",
            "L": game.max_length,
            "vertices": [
                {"id": i, "country": c} for i, c in enumerate(game.countries)
            ],
            "arcs": [[u, v] for u, v in game.arcs],
        }
    if isinstance(game, LotSizingGame):
        players = []
        for p in range(game.num_players):
            players.append({
                "F": _numlist(game.setup[p]),
                "C": _numlist(game.unit[p]),
                "H": _numlist(game.inventory[p]),
                "M": [None if math.isinf(c) else _num(c) for c in game.capacity[p]],
            })
        return {
            "game": "lotsizing",
            "m": game.num_players,
            "T": game.T,
            "a": _numlist(game.a),
            "b": _numlist(game.b),
            "players": players,
        }
    if isinstance(game, DuopolyGame):
        out = {"game": "duopoly"}
        if game.bound is not None:
            out["bound"] = _num(game.bound)
        return out
    raise TypeError(f"no JSON schema for {type(game).__name__}")


def from_json(data: dict):
    kind = data.get("game")
    if kind == "knapsack":
        players = data["players"]
        m = int(data["m"])
        if len(players) != m:
            raise ValueError("player count mismatch")
        values = [p["v"] for p in players]
        weights = [p["w"] for p in players]
        budgets = [p["budget"] for p in players]
        interactions = [
            {int(k): coeffs for k, coeffs in p["c"].items()} for p in players
        ]
        return KnapsackGame(values, weights, budgets, interactions)
    if kind == "keg":
        vertices = sorted(data["vertices"], key=lambda v: int(v["id"]))
        if [int(v["id"]) for v in vertices] != list(range(len(vertices))):
            raise ValueError("vertex ids must be 0..V-1")
        countries = [v["country"] for v in vertices]
        return KidneyExchangeGame(countries, data["arcs"], int(data.get("L", 3)))
    if kind == "lotsizing":
        players = data["players"]
        caps = [
            [np.inf if c is None else float(c) for c in p["M"]] for p in players
        ]
        return LotSizingGame(
            data["a"],
            data["b"],
            [p["F"] for p in players],
            [p["C"] for p in players],
            [p["H"] for p in players],
            caps,
        )
    if kind == "duopoly":
        return DuopolyGame(bound=data.get("bound"))
    raise ValueError(f"unknown game kind {kind!r}")


def save_instance(game, path) -> None:
    Path(path).write_text(dumps(game))


def dumps(game) -> str:
    return json.dumps(to_json(game), sort_keys=True, indent=2) + "\n"


def load_instance(path):
    return from_json(json.loads(Path(path).read_text()))
