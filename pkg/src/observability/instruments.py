from src.observability.metrics import init_metrics, get_meter

init_metrics()

# Prevent resource attribute duplication as metric labels
FORBIDDEN_LABELS = {"service.name", "deployment.environment"}

def safe_attrs(attrs: dict | None) -> dict:
    return {k: v for k, v in (attrs or {}).items() if k not in FORBIDDEN_LABELS}

meter = get_meter()

# chv-engine
trials_generated_total = meter.create_counter("trials_generated_total", description="Trials produced by run_trials")
trial_chunk_seconds = meter.create_histogram("trial_chunk_seconds", description="Latency of one counter-based trial chunk")

# statistics
postselection_discards_total = meter.create_counter("postselection_discards_total", description="Trials discarded because of a 0 outcome")
coincidence_rejections_total = meter.create_counter("coincidence_rejections_total", description="Second clicks of a station inside one window")
coincidence_windows_total = meter.create_counter("coincidence_windows_total", description="Windows with at least one click")

# fitter
fit_evaluations_total = meter.create_counter("fit_evaluations_total", description="Objective evaluations performed by the fitter")
fit_evaluation_seconds = meter.create_histogram("fit_evaluation_seconds", description="Latency of one loss evaluation over the grid")
fit_degenerate_total = meter.create_counter("fit_degenerate_total", description="Evaluations returning the +inf sentinel")

# beam-sim
beam_windows_total = meter.create_counter("beam_windows_total", description="Time windows simulated by the beam module")

# cli
cli_runs_total = meter.create_counter("cli_runs_total", description="CLI invocations by kind and exit code")
cli_run_seconds = meter.create_histogram("cli_run_seconds", description="End-to-end CLI run duration")

__all__ = [
    # helper
    "safe_attrs", "time_histogram",
    # engine
    "trials_generated_total", "trial_chunk_seconds",
    # statistics
    "postselection_discards_total", "coincidence_rejections_total", "coincidence_windows_total",
    # fitter
    "fit_evaluations_total", "fit_evaluation_seconds", "fit_degenerate_total",
    # beam
    "beam_windows_total",
    # cli
    "cli_runs_total", "cli_run_seconds",
]

from contextlib import contextmanager
import time as _time

@contextmanager
def time_histogram(hist_instrument, attributes: dict | None = None):
    start = _time.perf_counter()
    try:
        yield
        duration = _time.perf_counter() - start
        hist_instrument.record(duration, safe_attrs(attributes))
    except Exception:
        duration = _time.perf_counter() - start
        hist_instrument.record(duration, {**safe_attrs(attributes), "status": "error"})
        raise
