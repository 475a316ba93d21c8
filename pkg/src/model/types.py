"""
Domain value objects shared by every module.

All types are immutable after construction and safe to share between
worker threads. Validation happens in ``__post_init__``; invalid values
raise :class:`src.errors.ConfigError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any

import numpy as np

from src.errors import ConfigError

MAX_APERTURE = math.pi / 4
OUTCOMES = (-1, 0, 1)


def normalize_setting(theta_raw: float, mod_pi: bool = True) -> float:
    """
    Map an orientation onto its canonical interval.

    Polarizer axes are identified mod pi (result in [0, pi)); spin analyzer
    directions mod 2pi (result in [0, 2pi)).
    """
    if not math.isfinite(theta_raw):
        raise ConfigError(f"orientation must be finite, got {theta_raw!r}")
    period = math.pi if mod_pi else 2.0 * math.pi
    reduced = math.fmod(theta_raw, period)
    if reduced < 0:
        reduced += period
    if reduced >= period:
        reduced = 0.0
    return reduced


class Outcome(IntEnum):
    MINUS = -1
    NONE = 0
    PLUS = 1

    @classmethod
    def of(cls, value: int) -> "Outcome":
        if isinstance(value, Outcome):
            return value
        if isinstance(value, (bool, float)) or int(value) != value:
            raise ConfigError(f"outcome must be one of -1, 0, +1, got {value!r}")
        try:
            return cls(int(value))
        except ValueError:
            raise ConfigError(f"outcome must be one of -1, 0, +1, got {value!r}") from None

    @property
    def clicked(self) -> bool:
        return self is not Outcome.NONE


@dataclass(frozen=True)
class Setting:
    """A measurement context: label, nominal orientation and aperture half-width."""

    label: str
    theta: float
    aperture: float = 0.0
    axis_mod_pi: bool = False

    def __post_init__(self):
        if not self.label:
            raise ConfigError("setting label must be non-empty")
        if not math.isfinite(self.aperture) or not 0.0 <= self.aperture <= MAX_APERTURE:
            raise ConfigError(
                f"setting {self.label!r}: aperture must lie in [0, pi/4], got {self.aperture!r}"
            )
        object.__setattr__(self, "theta", normalize_setting(self.theta, mod_pi=self.axis_mod_pi))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "theta": self.theta,
            "aperture": self.aperture,
            "axis_mod_pi": self.axis_mod_pi,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Setting":
        return cls(
            label=str(data["label"]),
            theta=float(data["theta"]),
            aperture=float(data.get("aperture", 0.0)),
            axis_mod_pi=bool(data.get("axis_mod_pi", False)),
        )


@dataclass(frozen=True)
class TrialRecord:
    trial_id: int
    setting_a: Setting
    setting_b: Setting
    outcome_a: Outcome
    outcome_b: Outcome
    window_index: int

    def __post_init__(self):
        object.__setattr__(self, "outcome_a", Outcome.of(self.outcome_a))
        object.__setattr__(self, "outcome_b", Outcome.of(self.outcome_b))
        if self.window_index < 0:
            raise ConfigError(f"window_index must be non-negative, got {self.window_index}")

    @property
    def setting_pair(self) -> tuple[Setting, Setting]:
        return (self.setting_a, self.setting_b)


@dataclass(frozen=True)
class HiddenState:
    """
    Draws of (lambda1, lambda2, lambda_x, lambda_y).

    Fields hold either one draw or equally long arrays of draws that share
    the trial index. Domains are defined by the model that produced them.
    """

    lambda1: Any
    lambda2: Any
    lambda_x: Any
    lambda_y: Any

    def __len__(self):
        return int(np.size(self.lambda_x))


@dataclass(frozen=True)
class StateLabel:
    mu: str
    visibility: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ConfigError(f"visibility must lie in [0, 1], got {self.visibility!r}")


def cell_index(outcome: int) -> int:
    """Row/column of an outcome in a 3x3 table ordered (-1, 0, +1)."""
    return int(outcome) + 1


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Counts over the 3x3 grid of (outcome_a, outcome_b) for one setting pair."""

    counts: np.ndarray
    n_total: int
    setting_pair: tuple[Setting, Setting]
    _probabilities: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (3, 3):
            raise ConfigError(f"counts must be 3x3, got shape {counts.shape}")
        if (counts < 0).any():
            raise ConfigError("counts must be non-negative")
        if int(counts.sum()) != int(self.n_total):
            raise ConfigError(f"counts sum {int(counts.sum())} != n_total {self.n_total}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "n_total", int(self.n_total))

    @classmethod
    def empty(cls, setting_pair: tuple[Setting, Setting]) -> "ContingencyTable":
        return cls(np.zeros((3, 3), dtype=np.int64), 0, setting_pair)

    @classmethod
    def from_cells(cls, setting_pair, cells: dict[tuple[int, int], int]) -> "ContingencyTable":
        counts = np.zeros((3, 3), dtype=np.int64)
        for (a, b), n in cells.items():
            counts[cell_index(Outcome.of(a)), cell_index(Outcome.of(b))] += n
        return cls(counts, int(counts.sum()), setting_pair)

    def cell(self, a: int, b: int) -> int:
        return int(self.counts[cell_index(a), cell_index(b)])

    @property
    def n_used(self) -> int:
        """Trials with both outcomes non-zero."""
        return int(self.counts[[0, 0, 2, 2], [0, 2, 0, 2]].sum())

    def probabilities(self) -> np.ndarray:
        if self.n_total == 0:
            raise ConfigError("probability view undefined for an empty table")
        if self._probabilities is None:
            probs = self.counts / self.n_total
            probs.setflags(write=False)
            object.__setattr__(self, "_probabilities", probs)
        return self._probabilities

    def marginal_a(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def marginal_b(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def merge(self, other: "ContingencyTable") -> "ContingencyTable":
        if other.setting_pair != self.setting_pair:
            raise ConfigError("cannot merge tables of different setting pairs")
        return ContingencyTable(self.counts + other.counts, self.n_total + other.n_total, self.setting_pair)

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return (
            self.setting_pair == other.setting_pair
            and self.n_total == other.n_total
            and np.array_equal(self.counts, other.counts)
        )

    def __hash__(self):
        return hash((self.setting_pair, self.n_total, self.counts.tobytes()))

    def to_dict(self) -> dict:
        return {
            "setting_a": self.setting_pair[0].to_dict(),
            "setting_b": self.setting_pair[1].to_dict(),
            "outcomes": list(OUTCOMES),
            "counts": self.counts.tolist(),
            "n_total": self.n_total,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContingencyTable":
        pair = (Setting.from_dict(data["setting_a"]), Setting.from_dict(data["setting_b"]))
        return cls(np.asarray(data["counts"], dtype=np.int64), int(data["n_total"]), pair)
