"""
Photon-beam contexts.

C1(theta): source -> P1(theta). C2(theta): source -> P1(theta) -> P2(theta).
C3(theta, theta'): source -> P1(theta) -> P2(theta'). Stage k counts the
photons detected after the k-th polarizer (stage 0 is the bare source).
Photons are independent; each passes a polarizer at alpha with probability
(1 - eps) cos^2(phi - alpha) + eps sin^2(phi - alpha) and then carries
phi = alpha. Detection with efficiency eta is applied per stage and never
changes the photon.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import numpy as np
import pandas as pd

from src.engine.rng import STREAM_BEAM, check_seed, chunk_bounds, chunk_generator, derive_seed
from src.errors import ConfigError, ZeroIntensityError
from src.observability.instruments import beam_windows_total, safe_attrs, time_histogram, trial_chunk_seconds
from src.observability.tracing import get_tracer

UNPOLARIZED = "unpolarized"
MAX_EXTINCTION = 0.05
WINDOW_CHUNK = 1024


@dataclass(frozen=True)
class BeamConfig:
    mean_rate: float
    input_polarization: str | float = UNPOLARIZED
    detector_efficiency: float = 1.0
    polarizer_extinction: float = 0.0
    window_count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.mean_rate) and self.mean_rate > 0):
            raise ConfigError(f"mean_rate must be > 0, got {self.mean_rate!r}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ConfigError(f"detector_efficiency must lie in (0, 1], got {self.detector_efficiency!r}")
        if not 0.0 <= self.polarizer_extinction <= MAX_EXTINCTION:
            raise ConfigError(f"polarizer_extinction must lie in [0, {MAX_EXTINCTION}], got {self.polarizer_extinction!r}")
        if isinstance(self.window_count, bool) or int(self.window_count) != self.window_count or self.window_count < 1:
            raise ConfigError(f"window_count must be >= 1, got {self.window_count!r}")
        if isinstance(self.input_polarization, str):
            if self.input_polarization != UNPOLARIZED:
                raise ConfigError(f"input_polarization must be {UNPOLARIZED!r} or an angle, got {self.input_polarization!r}")
        elif not math.isfinite(float(self.input_polarization)):
            raise ConfigError("input_polarization angle must be finite")
        check_seed(self.seed)

    @property
    def unpolarized(self) -> bool:
        return self.input_polarization == UNPOLARIZED

    def to_dict(self) -> dict:
        return {
            "mean_rate": self.mean_rate,
            "input_polarization": self.input_polarization,
            "detector_efficiency": self.detector_efficiency,
            "polarizer_extinction": self.polarizer_extinction,
            "window_count": self.window_count,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class C1:
    theta: float
    code = 1

    @property
    def polarizers(self) -> tuple[float, ...]:
        return (self.theta,)


@dataclass(frozen=True)
class C2:
    theta: float
    code = 2

    @property
    def polarizers(self):
        return (self.theta, self.theta)


@dataclass(frozen=True)
class C3:
    theta: float
    theta_prime: float
    code = 3

    @property
    def polarizers(self):
        return (self.theta, self.theta_prime)


Context = C1 | C2 | C3


@dataclass(frozen=True, eq=False)
class IntensityRun:
    """Per-window intensities with t = one window, so I(i) = n(i)."""

    samples: np.ndarray
    mean: float
    std_err: float | None

    @classmethod
    def from_counts(cls, counts) -> "IntensityRun":
        samples = np.asarray(counts, dtype=float)
        if samples.size == 0 or (samples < 0).any():
            raise ConfigError("intensity samples must be a non-empty non-negative series")
        std_err = float(samples.std(ddof=1) / math.sqrt(samples.size)) if samples.size > 1 else None
        return cls(samples, float(samples.mean()), std_err)

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std_err": self.std_err, "windows": int(self.samples.size)}


def _simulate_chunk(config: BeamConfig, context: Context, seed: int, chunk: int, windows: int) -> np.ndarray:
    rng = chunk_generator(seed, STREAM_BEAM, chunk)
    photons = rng.poisson(config.mean_rate, windows)
    total = int(photons.sum())
    window_of = np.repeat(np.arange(windows), photons)
    if config.unpolarized:
        phi = rng.uniform(0.0, math.pi, total)
    else:
        phi = np.full(total, float(config.input_polarization))

    eps, eta = config.polarizer_extinction, config.detector_efficiency
    alive = np.ones(total, dtype=bool)
    stages = np.empty((len(context.polarizers) + 1, windows), dtype=np.int64)

    def detect(stage):
        detected = alive & (rng.random(total) < eta)
        stages[stage] = np.bincount(window_of[detected], minlength=windows)

    detect(0)
    for k, alpha in enumerate(context.polarizers, start=1):
        c2 = np.cos(phi - alpha) ** 2
        passes = rng.random(total) < (1.0 - eps) * c2 + eps * (1.0 - c2)
        alive &= passes
        phi = np.where(alive, alpha, phi)
        detect(k)
    return stages


def simulate_stages(config: BeamConfig, context: Context, threads: int = 1) -> np.ndarray:
    """Detected counts, shape (stages, window_count); identical for any thread count."""
    seed = derive_seed(config.seed, context.code)
    chunks = list(chunk_bounds(int(config.window_count), WINDOW_CHUNK))

    def work(bounds):
        chunk, start, stop = bounds
        t0 = time.perf_counter()
        stages = _simulate_chunk(config, context, seed, chunk, stop - start)
        trial_chunk_seconds.record(time.perf_counter() - t0, safe_attrs({"model": "beam"}))
        return stages

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(b) for b in chunks]
    return np.concatenate(parts, axis=1)


def run_context(config: BeamConfig, context: Context, threads: int = 1) -> tuple[IntensityRun, IntensityRun]:
    """(input, output) runs: stage 0/1 for C1, stage 1/2 for C2 and C3."""
    with get_tracer().start_as_current_span("beam.run_context") as span:
        span.set_attribute("context", type(context).__name__)
        span.set_attribute("windows", int(config.window_count))
        stages = simulate_stages(config, context, threads)
        beam_windows_total.add(int(config.window_count), safe_attrs({"context": type(context).__name__}))
    return IntensityRun.from_counts(stages[-2]), IntensityRun.from_counts(stages[-1])


def intensity_ratio(numer: IntensityRun, denom: IntensityRun) -> tuple[float, float | None]:
    if denom.mean <= 0.0:
        raise ZeroIntensityError("denominator intensity has zero mean")
    r = numer.mean / denom.mean
    if numer.std_err is None or denom.std_err is None:
        return r, None
    if numer.mean == 0.0:
        return 0.0, r * denom.std_err / denom.mean
    return r, r * math.sqrt((numer.std_err / numer.mean) ** 2 + (denom.std_err / denom.mean) ** 2)


def malus_sweep(config: BeamConfig, theta: float, deltas, threads: int = 1) -> list[dict]:
    """C3 at theta' = theta + delta for every delta: rows of R31 against cos^2(delta)."""
    rows = []
    with time_histogram(trial_chunk_seconds, {"model": "beam_sweep"}):
        for delta in deltas:
            input_run, output_run = run_context(config, C3(theta, theta + float(delta)), threads)
            r, sigma = intensity_ratio(output_run, input_run)
            rows.append({"delta": float(delta), "r31": r, "sigma": sigma, "cos2": math.cos(delta) ** 2})
    return rows


def dispersion_index(run: IntensityRun) -> float:
    """Sample variance over mean of the per-window counts; 1 for Poisson."""
    if run.mean == 0.0:
        raise ZeroIntensityError("dispersion index undefined for a dark run")
    return float(run.samples.var(ddof=1) / run.mean) if run.samples.size > 1 else math.nan


def stage_frame(stages: np.ndarray) -> pd.DataFrame:
    n_stages, windows = stages.shape
    return pd.DataFrame({
        "window_index": np.tile(np.arange(windows), n_stages),
        "stage": np.repeat(np.arange(n_stages), windows),
        "count": stages.ravel(),
    })
