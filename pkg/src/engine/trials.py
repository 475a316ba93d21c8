"""
Monte Carlo trial streams.

Trials are generated in fixed-size chunks; chunk c draws its hidden
variables from counter-based generators addressed by (seed, stream, c), so
the stream for a given (model, settings, n, seed) is bit-identical for any
worker count. Alice's outcomes are computed from the source and
instrument-A streams only, so changing Bob's setting cannot alter them.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from src.config import select_config
from src.engine.plugins import ModelPlugin
from src.engine.rng import (
    STREAM_INSTRUMENT_A,
    STREAM_INSTRUMENT_B,
    STREAM_SOURCE,
    check_seed,
    chunk_bounds,
    chunk_generator,
)
from src.errors import ConfigError
from src.model.types import HiddenState, Setting, TrialRecord
from src.observability.instruments import safe_attrs, trial_chunk_seconds, trials_generated_total
from src.observability.tracing import get_tracer


@dataclass(frozen=True, eq=False)
class TrialBatch:
    """A columnar run of trials under one setting pair; iterates as TrialRecords."""

    setting_a: Setting
    setting_b: Setting
    trial_id: np.ndarray
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    window_index: np.ndarray

    def __len__(self):
        return int(self.trial_id.size)

    def __iter__(self) -> Iterator[TrialRecord]:
        for tid, a, b, w in zip(self.trial_id, self.outcome_a, self.outcome_b, self.window_index):
            yield TrialRecord(int(tid), self.setting_a, self.setting_b, int(a), int(b), int(w))

    @property
    def setting_pair(self) -> tuple[Setting, Setting]:
        return (self.setting_a, self.setting_b)


def sample_hidden(model: ModelPlugin, n: int, seed: int, chunk: int = 0) -> HiddenState:
    """Hidden-variable draws of one chunk, exactly as run_trials consumes them."""
    lambda1, lambda2 = model.sample_source(chunk_generator(seed, STREAM_SOURCE, chunk), n)
    lambda_x = model.sample_instrument_a(chunk_generator(seed, STREAM_INSTRUMENT_A, chunk), n)
    lambda_y = model.sample_instrument_b(chunk_generator(seed, STREAM_INSTRUMENT_B, chunk), n)
    return HiddenState(lambda1, lambda2, lambda_x, lambda_y)


def _run_chunk(model, setting_a, setting_b, seed, chunk, start, stop):
    t0 = time.perf_counter()
    hidden = sample_hidden(model, stop - start, seed, chunk)
    outcome_a = np.asarray(model.outcome_a(hidden.lambda1, hidden.lambda_x, setting_a), dtype=np.int8)
    outcome_b = np.asarray(model.outcome_b(hidden.lambda2, hidden.lambda_y, setting_b), dtype=np.int8)
    trial_chunk_seconds.record(time.perf_counter() - t0, safe_attrs({"model": model.name}))
    return outcome_a, outcome_b


def run_trials(
    model: ModelPlugin,
    setting_a: Setting,
    setting_b: Setting,
    n: int,
    seed: int,
    threads: int = 1,
) -> TrialBatch:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ConfigError(f"trial count must be >= 1, got {n!r}")
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads!r}")
    n = int(n)
    seed = check_seed(seed)
    chunk_size = select_config().TRIAL_CHUNK

    with get_tracer().start_as_current_span("engine.run_trials") as span:
        span.set_attribute("model", model.name)
        span.set_attribute("trials", n)
        span.set_attribute("setting_pair", f"{setting_a.label},{setting_b.label}")

        def work(bounds):
            chunk, start, stop = bounds
            return _run_chunk(model, setting_a, setting_b, seed, chunk, start, stop)

        chunks = list(chunk_bounds(n, chunk_size))
        if threads == 1 or len(chunks) == 1:
            parts = [work(b) for b in chunks]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(work, chunks))

        trials_generated_total.add(n, safe_attrs({"model": model.name}))

    ids = np.arange(n, dtype=np.int64)
    return TrialBatch(
        setting_a=setting_a,
        setting_b=setting_b,
        trial_id=ids,
        outcome_a=np.concatenate([p[0] for p in parts]),
        outcome_b=np.concatenate([p[1] for p in parts]),
        # one synchronized window per trial
        window_index=ids.copy(),
    )
