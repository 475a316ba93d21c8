from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from src.engine.rng import check_seed
from src.errors import ConfigError, DegenerateModelError
from src.fitting.families import ModelFamily, SettingPair, family_from_dict
from src.model.types import Setting, StateLabel
from src.oracle.quantum import setting_correlation

LOSSES = ("max-abs", "mean-square")
MIN_TRIALS_PER_EVAL = 10_000


def default_grid(points: int = 8) -> tuple[SettingPair, ...]:
    """Alice fixed at 0, Bob at k*pi/points for k < points."""
    a = Setting("a0", 0.0)
    return tuple((a, Setting(f"b{k}", k * math.pi / points)) for k in range(points))


def square_grid(points: int = 8) -> tuple[SettingPair, ...]:
    """Every pair (i*pi/points, j*pi/points): points x points grid."""
    alice = [Setting(f"a{i}", i * math.pi / points) for i in range(points)]
    bob = [Setting(f"b{j}", j * math.pi / points) for j in range(points)]
    return tuple((a, b) for a in alice for b in bob)


@dataclass(frozen=True)
class SingletTarget:
    visibility: float = 1.0
    photon_convention: bool = False

    def __post_init__(self) -> None:
        StateLabel("singlet", self.visibility)

    @property
    def state(self) -> StateLabel:
        return StateLabel("singlet", self.visibility)

    def values(self, grid: Sequence[SettingPair], family: ModelFamily) -> tuple[float, ...]:
        return tuple(setting_correlation(a, b, self.state.visibility, self.photon_convention) for a, b in grid)

    def to_dict(self) -> dict:
        return {"kind": "singlet", "visibility": self.visibility, "photon_convention": self.photon_convention}


@dataclass(frozen=True)
class ModelTarget:
    """Exact post-selected E of the fitted family itself at known parameters."""

    params: Mapping[str, float]

    def values(self, grid, family):
        model = family.build(self.params, grid)
        try:
            return tuple(family.exact_expectation(model, a, b) for a, b in grid)
        except DegenerateModelError as exc:
            raise ConfigError(f"target parameters are degenerate: {exc}") from exc

    def to_dict(self):
        return {"kind": "model", "params": dict(self.params)}


def target_from_dict(data: Mapping[str, object] | None):
    if not data:
        raise ConfigError("fit needs a target")
    kind = data.get("kind")
    if kind == "singlet":
        return SingletTarget(float(data.get("visibility", 1.0)), bool(data.get("photon_convention", False)))
    if kind == "model":
        return ModelTarget(dict(data.get("params") or {}))
    raise ConfigError(f"unknown target kind {kind!r}")


def _grid_to_dict(grid):
    return [{"setting_a": a.to_dict(), "setting_b": b.to_dict()} for a, b in grid]


def _grid_from_dict(data):
    return tuple((Setting.from_dict(p["setting_a"]), Setting.from_dict(p["setting_b"])) for p in data)


@dataclass(frozen=True)
class FitProblem:
    family: ModelFamily
    initial_params: Mapping[str, float]
    target: SingletTarget | ModelTarget
    grid: tuple[SettingPair, ...] = field(default_factory=default_grid)
    loss: str = "max-abs"
    trials_per_eval: int = 100_000
    budget: int = 500
    seed: int = 0
    exact: bool = False
    restarts: int = 3
    tol: float = 1e-3
    xtol: float = 1e-4
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise ConfigError("fit grid must be non-empty")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.trials_per_eval < MIN_TRIALS_PER_EVAL:
            raise ConfigError(f"trials_per_eval must be >= {MIN_TRIALS_PER_EVAL}, got {self.trials_per_eval!r}")
        if self.budget < 1:
            raise ConfigError(f"budget must be >= 1, got {self.budget!r}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts!r}")
        if self.tol <= 0 or self.xtol <= 0:
            raise ConfigError("tol and xtol must be positive")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads!r}")
        check_seed(self.seed)
        object.__setattr__(self, "initial_params", self.family.check_params(self.initial_params))
        object.__setattr__(self, "_targets", self.target.values(self.grid, self.family))

    @property
    def targets(self) -> tuple[float, ...]:
        return self._targets

    def to_dict(self) -> dict:
        return {
            "family": self.family.to_dict(),
            "initial_params": dict(self.initial_params),
            "target": self.target.to_dict(),
            "grid": _grid_to_dict(self.grid),
            "loss": self.loss,
            "trials_per_eval": self.trials_per_eval,
            "budget": self.budget,
            "seed": self.seed,
            "exact": self.exact,
            "restarts": self.restarts,
            "tol": self.tol,
            "xtol": self.xtol,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object], threads: int = 1) -> "FitProblem":
        options = dict(data)
        try:
            family = family_from_dict(options.pop("family"))
            target = target_from_dict(options.pop("target", None))
            grid = _grid_from_dict(options.pop("grid")) if "grid" in options else default_grid()
            initial = options.pop("initial_params")
        except KeyError as exc:
            raise ConfigError(f"fit problem is missing {exc.args[0]!r}") from exc
        try:
            return cls(family=family, initial_params=initial, target=target, grid=grid, threads=threads, **options)
        except TypeError as exc:
            raise ConfigError(f"fit problem: {exc}") from exc


@dataclass(frozen=True)
class FitResult:
    params: dict[str, float]
    loss: float
    residuals: tuple[float, ...]
    evaluations: int
    converged: bool
    # best-so-far loss after every counted evaluation
    history: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        def finite(x):
            return x if math.isfinite(x) else None

        return {
            "params": dict(self.params),
            "loss": finite(self.loss),
            "residuals": [finite(r) for r in self.residuals],
            "evaluations": self.evaluations,
            "converged": self.converged,
            "history": [finite(h) for h in self.history],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "FitResult":
        def number(x):
            return math.inf if x is None else float(x)

        return cls(
            params={k: float(v) for k, v in data["params"].items()},
            loss=number(data["loss"]),
            residuals=tuple(number(r) for r in data["residuals"]),
            evaluations=int(data["evaluations"]),
            converged=bool(data["converged"]),
            history=tuple(number(h) for h in data.get("history", [])),
        )
