"""
Parametric model families the fitter searches over.

A family maps a parameter dict to a ModelPlugin and knows the box bounds
of every parameter and how to compute a model's post-selected E exactly.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Mapping, Sequence

from src.engine.catalog import lookup_model
from src.engine.discrete import DiscreteModel, exact_expectation
from src.engine.plugins import ModelPlugin, ThresholdDetectionModel
from src.errors import ConfigError, DegenerateModelError
from src.model.types import Setting
from src.oracle.quantum import setting_correlation

SettingPair = tuple[Setting, Setting]


class ModelFamily(ABC):
    name: str = "family"

    @property
    @abstractmethod
    def param_names(self) -> tuple[str, ...]:
        ...

    @abstractmethod
    def bounds(self) -> dict[str, tuple[float, float]]:
        ...

    @abstractmethod
    def build(self, params: Mapping[str, float], grid: Sequence[SettingPair]) -> ModelPlugin:
        ...

    @abstractmethod
    def exact_expectation(self, model: ModelPlugin, setting_a: Setting, setting_b: Setting) -> float:
        ...

    @abstractmethod
    def to_dict(self) -> dict:
        ...

    def check_params(self, params: Mapping[str, float]) -> dict[str, float]:
        unknown = set(params) - set(self.param_names)
        if unknown:
            raise ConfigError(f"{self.name}: unknown parameter(s) {', '.join(sorted(unknown))}")
        missing = set(self.param_names) - set(params)
        if missing:
            raise ConfigError(f"{self.name}: missing parameter(s) {', '.join(sorted(missing))}")
        checked = {}
        for name in self.param_names:
            lo, hi = self.bounds()[name]
            value = float(params[name])
            if not lo <= value <= hi:
                raise ConfigError(f"{self.name}: {name}={value!r} outside [{lo}, {hi}]")
            checked[name] = value
        return checked


class ThresholdFamily(ModelFamily):
    """
    ThresholdDetectionModel with a chosen subset of free parameters.

    Free names come from ``visibility``, ``source_noise``,
    ``zero_threshold_mass`` and the bin weights ``w0..w{bins-1}``; the rest
    keep the values in ``fixed``.
    """

    name = "threshold"
    MAX_SOURCE_NOISE = 1.5

    def __init__(self, free: Sequence[str], bins: int = 8, fixed: Mapping[str, object] | None = None, n_phi: int = 4096):
        if bins < 1:
            raise ConfigError(f"threshold family needs bins >= 1, got {bins!r}")
        self.bins = int(bins)
        self.n_phi = int(n_phi)
        allowed = ("visibility", "source_noise", "zero_threshold_mass", *(f"w{i}" for i in range(self.bins)))
        free = tuple(free)
        if not free:
            raise ConfigError("threshold family needs at least one free parameter")
        for name in free:
            if name not in allowed:
                raise ConfigError(f"threshold family: unknown free parameter {name!r}")
        if len(set(free)) != len(free):
            raise ConfigError("threshold family: duplicate free parameter")
        self.free = free
        self.fixed = dict(fixed or {})
        unknown = set(self.fixed) - {"visibility", "source_noise", "zero_threshold_mass", "weights"}
        if unknown:
            raise ConfigError(f"threshold family: unknown fixed parameter(s) {', '.join(sorted(unknown))}")

    @property
    def param_names(self):
        return self.free

    def bounds(self):
        limits = {"visibility": (0.0, 1.0), "source_noise": (0.0, self.MAX_SOURCE_NOISE), "zero_threshold_mass": (0.0, 1.0)}
        return {name: limits.get(name, (0.0, 1.0)) for name in self.free}

    def build(self, params, grid=()):
        params = self.check_params(params)
        weights = list(self.fixed.get("weights") or [1.0 / self.bins] * self.bins)
        if len(weights) != self.bins:
            raise ConfigError(f"threshold family: fixed weights need {self.bins} entries")
        for i in range(self.bins):
            if f"w{i}" in params:
                weights[i] = params[f"w{i}"]
        zero_mass = params.get("zero_threshold_mass", float(self.fixed.get("zero_threshold_mass", 0.0)))
        if sum(weights) <= 0.0 and zero_mass < 1.0:
            raise DegenerateModelError("threshold family: every bin weight is zero")
        return ThresholdDetectionModel(
            weights=weights,
            bins=self.bins,
            source_noise=params.get("source_noise", float(self.fixed.get("source_noise", 0.0))),
            visibility=params.get("visibility", float(self.fixed.get("visibility", 1.0))),
            zero_threshold_mass=zero_mass,
        )

    def exact_expectation(self, model, setting_a, setting_b):
        return model.expectation(setting_a, setting_b, n_phi=self.n_phi)

    def to_dict(self):
        return {"name": self.name, "free": list(self.free), "bins": self.bins, "fixed": dict(self.fixed), "n_phi": self.n_phi}


class LookupFamily(ModelFamily):
    """Post-selection lookup model realising -v cos(delta) on the fit grid."""

    name = "lookup"

    def __init__(self, photon_convention: bool = False):
        self.photon_convention = bool(photon_convention)

    @property
    def param_names(self):
        return ("visibility",)

    def bounds(self):
        return {"visibility": (0.0, 1.0)}

    def build(self, params, grid=()):
        params = self.check_params(params)
        if not grid:
            raise ConfigError("lookup family needs the setting grid")
        targets = [setting_correlation(a, b, params["visibility"], self.photon_convention) for a, b in grid]
        return lookup_model(grid, targets)

    def exact_expectation(self, model: DiscreteModel, setting_a, setting_b):
        return exact_expectation(model, setting_a, setting_b)

    def to_dict(self):
        return {"name": self.name, "photon_convention": self.photon_convention}


def family_from_dict(data: Mapping[str, object]) -> ModelFamily:
    options = dict(data)
    name = options.pop("name", None)
    try:
        if name == ThresholdFamily.name:
            return ThresholdFamily(**options)
        if name == LookupFamily.name:
            return LookupFamily(**options)
    except TypeError as exc:
        raise ConfigError(f"model family {name!r}: {exc}") from exc
    raise ConfigError(f"unknown model family {name!r}")
