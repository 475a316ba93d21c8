"""
Models with finite hidden-variable spaces.

Probabilities in the sampling integral become finite sums, so joint
distributions and expectations can be computed exactly.
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from src.engine.plugins import ModelPlugin
from src.errors import ConfigError, DegenerateModelError
from src.model.types import OUTCOMES, Setting

WILDCARD = "*"
_TOLERANCE = 1e-12


def _probability_vector(name: str, values) -> np.ndarray:
    probs = np.asarray(values, dtype=float)
    if (probs < 0).any() or not np.isfinite(probs).all():
        raise ConfigError(f"{name}: probabilities must be finite and non-negative")
    if abs(probs.sum() - 1.0) > _TOLERANCE:
        raise ConfigError(f"{name}: probabilities sum to {probs.sum()!r}, expected 1")
    return probs


def _outcome_tables(name: str, tables: Mapping[str, object], shape: tuple[int, int]) -> dict[str, np.ndarray]:
    if not tables:
        raise ConfigError(f"{name}: at least one outcome table is required")
    checked = {}
    for label, table in tables.items():
        arr = np.asarray(table, dtype=np.int8)
        if arr.shape != shape:
            raise ConfigError(f"{name}[{label!r}]: expected shape {shape}, got {arr.shape}")
        if not np.isin(arr, OUTCOMES).all():
            raise ConfigError(f"{name}[{label!r}]: outcomes must be -1, 0 or +1")
        arr.setflags(write=False)
        checked[str(label)] = arr
    return checked


class DiscreteModel(ModelPlugin):
    """
    Finite atoms: a joint source matrix P[i, j] = P(lambda1=i, lambda2=j),
    instrument vectors px, py and outcome tables per setting label,
    table_a[label][i, x] and table_b[label][j, y]. A table stored under
    ``"*"`` applies to every label without its own table.
    """

    def __init__(self, name, source_probs, px, py, table_a, table_b):
        self.name = name
        source = np.atleast_2d(np.asarray(source_probs, dtype=float))
        self.source_probs = _probability_vector(f"{name}.source", source.ravel()).reshape(source.shape)
        self.px = _probability_vector(f"{name}.px", px)
        self.py = _probability_vector(f"{name}.py", py)
        n1, n2 = self.source_probs.shape
        self.table_a = _outcome_tables(f"{name}.table_a", table_a, (n1, self.px.size))
        self.table_b = _outcome_tables(f"{name}.table_b", table_b, (n2, self.py.size))
        self._source_cdf = np.cumsum(self.source_probs.ravel())
        self._px_cdf = np.cumsum(self.px)
        self._py_cdf = np.cumsum(self.py)

    def params(self):
        return {
            "source_probs": self.source_probs.tolist(),
            "px": self.px.tolist(),
            "py": self.py.tolist(),
            "table_a": {k: v.tolist() for k, v in self.table_a.items()},
            "table_b": {k: v.tolist() for k, v in self.table_b.items()},
        }

    @staticmethod
    def _lookup(tables: dict[str, np.ndarray], setting: Setting, station: str) -> np.ndarray:
        table = tables.get(setting.label, tables.get(WILDCARD))
        if table is None:
            raise ConfigError(f"no outcome table for setting {setting.label!r} at station {station}")
        return table

    def outcome_table_a(self, setting: Setting) -> np.ndarray:
        return self._lookup(self.table_a, setting, "A")

    def outcome_table_b(self, setting: Setting) -> np.ndarray:
        return self._lookup(self.table_b, setting, "B")

    @staticmethod
    def _draw(rng, cdf, n):
        return np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), cdf.size - 1)

    def sample_source(self, rng, n):
        flat = self._draw(rng, self._source_cdf, n)
        return np.divmod(flat, self.source_probs.shape[1])

    def sample_instrument_a(self, rng, n):
        return self._draw(rng, self._px_cdf, n)

    def sample_instrument_b(self, rng, n):
        return self._draw(rng, self._py_cdf, n)

    def outcome_a(self, lambda1, lambda_x, setting_a):
        return self.outcome_table_a(setting_a)[lambda1, lambda_x]

    def outcome_b(self, lambda2, lambda_y, setting_b):
        return self.outcome_table_b(setting_b)[lambda2, lambda_y]


def exact_joint(model: DiscreteModel, setting_a: Setting, setting_b: Setting) -> dict[tuple[int, int], float]:
    """p(a, b | x, y) summed over every atom, for a, b in {-1, 0, +1}."""
    table_a = model.outcome_table_a(setting_a)
    table_b = model.outcome_table_b(setting_b)
    # weight of each source atom producing outcome a (resp. b), instruments summed out
    local_a = {a: (table_a == a).astype(float) @ model.px for a in OUTCOMES}
    local_b = {b: (table_b == b).astype(float) @ model.py for b in OUTCOMES}
    return {
        (a, b): float(local_a[a] @ model.source_probs @ local_b[b])
        for a in OUTCOMES
        for b in OUTCOMES
    }


def exact_expectation(model: DiscreteModel, setting_a: Setting, setting_b: Setting) -> float:
    """Post-selected E: only pairs with both outcomes non-zero enter."""
    joint = exact_joint(model, setting_a, setting_b)
    kept = {cell: p for cell, p in joint.items() if cell[0] != 0 and cell[1] != 0}
    mass = sum(kept.values())
    if mass <= 0.0:
        raise DegenerateModelError(
            f"{model.name}: no coincident clicks at ({setting_a.label}, {setting_b.label})"
        )
    return sum(a * b * p for (a, b), p in kept.items()) / mass


def exact_marginals(model: DiscreteModel, setting_a: Setting, setting_b: Setting):
    """Full-event marginals (0 outcomes included) of both stations."""
    joint = exact_joint(model, setting_a, setting_b)
    marginal_a = {a: sum(joint[(a, b)] for b in OUTCOMES) for a in OUTCOMES}
    marginal_b = {b: sum(joint[(a, b)] for a in OUTCOMES) for b in OUTCOMES}
    return marginal_a, marginal_b
