"""Deterministic local strategies and their CHSH values."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.errors import ConfigError
from src.model.types import Setting


@dataclass(frozen=True)
class LrhvBound:
    max_abs_s: float
    # (a(x), a(x'), b(y), b(y'))
    strategy: tuple[int, int, int, int]
    settings: tuple[str, str, str, str]


def strategy_chsh(strategy: Sequence[int]) -> float:
    """S for a deterministic strategy (a(x), a(x'), b(y), b(y'))."""
    a, a_prime, b, b_prime = strategy
    return abs(a * b - a * b_prime) + abs(a_prime * b + a_prime * b_prime)


def all_strategies():
    return list(itertools.product((-1, 1), repeat=4))


def enumerate_lrhv_chsh(settings_a: Sequence[Setting], settings_b: Sequence[Setting]) -> LrhvBound:
    """Exhaustive maximum of |S| over the 16 deterministic assignments."""
    if len(settings_a) != 2 or len(settings_b) != 2:
        raise ConfigError("CHSH enumeration needs exactly two settings per station")
    best_value, best_strategy = -1.0, None
    for strategy in all_strategies():
        value = strategy_chsh(strategy)
        if value > best_value:
            best_value, best_strategy = value, strategy
    labels = tuple(s.label for s in (*settings_a, *settings_b))
    return LrhvBound(float(best_value), best_strategy, labels)


def mixture_chsh(weights: Sequence[float]) -> float:
    """
    S of a convex mixture of the 16 deterministic strategies; correlations
    average before the absolute values are taken.
    """
    weights = np.asarray(weights, dtype=float)
    strategies = np.asarray(all_strategies(), dtype=float)
    if weights.shape != (len(strategies),) or (weights < 0).any():
        raise ConfigError("mixture needs 16 non-negative weights")
    if weights.sum() <= 0.0:
        raise ConfigError("mixture weights must not all be zero")
    weights = weights / weights.sum()
    a, a_prime, b, b_prime = strategies.T

    def e(x, y):
        return float(weights @ (x * y))

    return abs(e(a, b) - e(a, b_prime)) + abs(e(a_prime, b) + e(a_prime, b_prime))
