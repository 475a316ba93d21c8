"""
JSON experiment configs.

Each ``kind`` has a dataclass schema; unknown fields are rejected by name
before anything runs. Relative paths resolve against the config file's
directory.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from src.beam.simulation import BeamConfig
from src.engine import catalog
from src.engine.plugins import ModelPlugin, ThresholdDetectionModel
from src.engine.rng import check_seed
from src.errors import ConfigError
from src.fitting.families import LookupFamily
from src.fitting.problem import FitProblem
from src.model.types import Setting

KINDS = ("spce", "beam", "fit", "analyze")


def _strict(cls, data: Any, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where} must be a JSON object")
    allowed = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown field {unknown[0]!r} in {where}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _resolve(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else base / path


@dataclass(frozen=True)
class SettingsSpec:
    a: list
    b: list

    def __post_init__(self):
        a = tuple(s if isinstance(s, Setting) else _strict(Setting, s, f"settings.a[{i}]") for i, s in enumerate(self.a))
        b = tuple(s if isinstance(s, Setting) else _strict(Setting, s, f"settings.b[{i}]") for i, s in enumerate(self.b))
        if not a or not b:
            raise ConfigError("settings need at least one entry per station")
        labels = [s.label for s in a + b]
        if len(set(labels)) != len(labels):
            raise ConfigError("setting labels must be unique across both stations")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def parse(cls, data) -> "SettingsSpec":
        return _strict(cls, data, "settings")

    def by_label(self) -> dict[str, Setting]:
        return {s.label: s for s in self.a + self.b}

    def to_dict(self) -> dict:
        return {"a": [s.to_dict() for s in self.a], "b": [s.to_dict() for s in self.b]}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)


def _threshold_model(params: Mapping[str, Any]) -> ThresholdDetectionModel:
    options = dict(params)
    bins = int(options.pop("bins", len(options["weights"]) if options.get("weights") else 8))
    weights = list(options.pop("weights", None) or [1.0 / bins] * bins)
    for i in range(bins):
        if f"w{i}" in options:
            weights[i] = float(options.pop(f"w{i}"))
    allowed = {"source_noise", "visibility", "zero_threshold_mass"}
    unknown = sorted(set(options) - allowed)
    if unknown:
        raise ConfigError(f"unknown field {unknown[0]!r} in model.params")
    return ThresholdDetectionModel(weights=weights, bins=bins, **{k: float(v) for k, v in options.items()})


def build_model(spec: ModelSpec, settings: SettingsSpec, pairs: list[tuple[Setting, Setting]]) -> ModelPlugin:
    params = dict(spec.params)
    try:
        if spec.name == "threshold":
            return _threshold_model(params)
        if spec.name == "lookup":
            family = LookupFamily(bool(params.pop("photon_convention", False)))
            return family.build({"visibility": float(params.pop("visibility", 1.0)), **params}, pairs)
        if spec.name == "constant":
            return catalog.constant_model(**params)
        if spec.name == "anticorrelated_coin":
            return catalog.anticorrelated_coin(**params)
        if spec.name == "independent_coins":
            return catalog.independent_coins(**params)
        if spec.name == "four_atom_correlated":
            return catalog.four_atom_correlated(**params)
        if spec.name == "discretized_threshold":
            return catalog.discretized_threshold_model(settings.a, settings.b, **params)
    except TypeError as exc:
        raise ConfigError(f"model {spec.name!r}: {exc}") from exc
    raise ConfigError(f"unknown model {spec.name!r}")


@dataclass(frozen=True)
class SpceConfig:
    kind: str
    model: Any
    settings: Any
    trials: int
    seed: int = 0
    pairs: list | None = None
    chsh: list | None = None
    window_ns: int = 1000
    export_events: bool = False
    export_trials: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model", _strict(ModelSpec, self.model, "model"))
        object.__setattr__(self, "settings", SettingsSpec.parse(self.settings))
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials!r}")
        if self.window_ns < 2:
            raise ConfigError(f"window_ns must be >= 2, got {self.window_ns!r}")
        check_seed(self.seed)
        labels = self.settings.by_label()
        if self.pairs is not None:
            for pair in self.pairs:
                if len(pair) != 2 or pair[0] not in labels or pair[1] not in labels:
                    raise ConfigError(f"pair {pair!r} names an unknown setting")
        if self.chsh is not None and (len(self.chsh) != 4 or any(label not in labels for label in self.chsh)):
            raise ConfigError("chsh must list four known labels (a, a', b, b')")

    def setting_pairs(self) -> list[tuple[Setting, Setting]]:
        if self.pairs is None:
            return [(a, b) for a in self.settings.a for b in self.settings.b]
        labels = self.settings.by_label()
        return [(labels[a], labels[b]) for a, b in self.pairs]


@dataclass(frozen=True)
class BeamExperimentConfig:
    kind: str
    beam: Any
    seed: int = 0
    theta: float = 0.0
    sweep_deltas: list = field(default_factory=lambda: [k * math.pi / 8 for k in range(8)])
    export_stages: bool = True

    def __post_init__(self):
        data = dict(self.beam) if isinstance(self.beam, Mapping) else self.beam
        if isinstance(data, dict):
            data["seed"] = self.seed
        object.__setattr__(self, "beam", _strict(BeamConfig, data, "beam"))
        if not self.sweep_deltas:
            raise ConfigError("sweep_deltas must be non-empty")


@dataclass(frozen=True)
class FitExperimentConfig:
    kind: str
    problem: Any
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.problem, Mapping):
            raise ConfigError("problem must be a JSON object")
        check_seed(self.seed)

    def build_problem(self, threads: int = 1) -> FitProblem:
        return FitProblem.from_dict({**self.problem, "seed": self.seed}, threads=threads)


@dataclass(frozen=True)
class AnalyzeConfig:
    kind: str
    events_a: str
    events_b: str
    window_ns: int
    seed: int = 0
    settings: Any = None
    schedule: str | None = None
    chsh: list | None = None

    def __post_init__(self):
        if self.window_ns < 1:
            raise ConfigError(f"window_ns must be >= 1, got {self.window_ns!r}")
        if self.settings is None and self.schedule is None:
            raise ConfigError("analyze needs a settings catalogue or a schedule")
        if self.settings is not None:
            object.__setattr__(self, "settings", SettingsSpec.parse(self.settings))


SCHEMAS = {
    "spce": SpceConfig,
    "beam": BeamExperimentConfig,
    "fit": FitExperimentConfig,
    "analyze": AnalyzeConfig,
}


def parse_config(data: Any, seed: int | None = None):
    """Validate a decoded config; ``seed`` overrides the config's seed."""
    if not isinstance(data, Mapping):
        raise ConfigError("config must be a JSON object")
    kind = data.get("kind")
    if kind not in SCHEMAS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}")
    if seed is not None:
        data = {**data, "seed": check_seed(seed)}
    return _strict(SCHEMAS[kind], data, "config")


def load_config(path: str | Path, seed: int | None = None):
    """Returns ``(config, raw_dict)``; raw_dict (seed override applied) feeds the config hash."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    config = parse_config(raw, seed)
    if seed is not None:
        raw = {**raw, "seed": seed}
    return config, raw
