"""Concrete game models with exact best-response engines and generators."""

from .binary import BinaryBilinearGame
from .duopoly import DuopolyGame
from .kidney import KidneyExchangeGame, enumerate_cycles, gen_keg, pack_cycles
from .knapsack import KnapsackGame, gen_knapsack, knapsack_argmax
from .lotsizing import (
    LotSizingGame,
    UnsupportedRegimeError,
    gen_lot,
    potential_ascent,
    potential_value,
)
from .io import dumps, from_json, load_instance, save_instance, to_json

__all__ = [
    "BinaryBilinearGame",
    "DuopolyGame",
    "KidneyExchangeGame",
    "KnapsackGame",
    "LotSizingGame",
    "UnsupportedRegimeError",
    "dumps",
    "enumerate_cycles",
    "from_json",
    "gen_keg",
    "gen_knapsack",
    "gen_lot",
    "knapsack_argmax",
    "load_instance",
    "pack_cycles",
    "potential_ascent",
    "potential_value",
    "save_instance",
    "to_json",
]
