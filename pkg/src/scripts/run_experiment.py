"""
spce-lab: run one experiment config end to end.

    spce-lab --config cfg.json [--out DIR] [--seed U64] [--threads N]

Exit codes: 0 success, 2 invalid config or input data, 3 any other failure.
"""
import argparse
import sys
import time
from pathlib import Path

import pandas as pd
from dotenv import load_dotenv

from src.analysis.coincidence import SettingSchedule, ScheduleBlock, coincidence_match
from src.analysis.event_log import EVENT_COLUMNS, batch_events, read_event_log
from src.analysis.report import build_report
from src.analysis.tables import pad_silent_windows, tabulate
from src.beam.simulation import (
    C1,
    C2,
    C3,
    UNPOLARIZED,
    dispersion_index,
    intensity_ratio,
    malus_sweep,
    run_context,
    simulate_stages,
    stage_frame,
)
from src.config import select_config
from src.engine.rng import derive_seed
from src.engine.trials import run_trials
from src.errors import ConfigError, DataFormatError, MissingSettingPairError
from src.fitting.search import fit
from src.model.types import Setting
from src.observability.instruments import cli_run_seconds, cli_runs_total, safe_attrs
from src.observability.metrics import force_flush
from src.observability.tracing import get_tracer, init_tracing
from src.oracle.quantum import chsh_prediction, setting_correlation
from src.scripts.experiment_config import SettingsSpec, build_model, load_config
from src.scripts.reports import provenance, read_json, write_csv, write_json

EXIT_OK, EXIT_INVALID, EXIT_FAILURE = 0, 2, 3


def log(tag: str, message: str):
    print(f"[{tag}] {message}", file=sys.stderr)


def _statistics(tables, settings: dict[str, Setting], chsh_labels) -> dict:
    body = build_report(tables, chsh_labels)
    body["oracle"] = {
        "correlations": [
            {"setting_a": e["setting_a"], "setting_b": e["setting_b"],
             "e_qm": setting_correlation(settings[e["setting_a"]], settings[e["setting_b"]])}
            for e in body["correlations"]
        ],
        "chsh": chsh_prediction(*(settings[label] for label in chsh_labels)) if chsh_labels else None,
    }
    return body


def _trial_frame(batch, first_window: int) -> pd.DataFrame:
    return pd.DataFrame({
        "trial_id": batch.trial_id + first_window,
        "window_index": batch.window_index + first_window,
        "setting_a": batch.setting_a.label,
        "setting_b": batch.setting_b.label,
        "outcome_a": batch.outcome_a,
        "outcome_b": batch.outcome_b,
    })


def run_spce(config, raw, out: Path, threads: int = 1, base: Path | None = None) -> list[Path]:
    meta = provenance(raw, config.seed)
    pairs = config.setting_pairs()
    model = build_model(config.model, config.settings, pairs)
    log("spce", f"model={model.name} pairs={len(pairs)} trials/pair={config.trials} seed={config.seed}")

    batches, blocks = [], []
    first_window = 0
    for index, (setting_a, setting_b) in enumerate(pairs):
        batch = run_trials(model, setting_a, setting_b, config.trials, derive_seed(config.seed, index), threads)
        batches.append(batch)
        blocks.append(ScheduleBlock(first_window, config.trials, setting_a.label, setting_b.label))
        first_window += config.trials
        log("spce", f"({setting_a.label}, {setting_b.label}) done")

    tables = tabulate(batches)
    body = _statistics(tables, config.settings.by_label(), config.chsh)
    body["model"] = {"name": model.name, "params": model.params()}
    body["trials_per_pair"] = config.trials

    written = [
        write_json(out / "report.json", meta, body),
        write_json(out / "contingency.json", meta, {"tables": body["tables"]}),
    ]
    if config.export_trials:
        frame = pd.concat([_trial_frame(b, blk.first_window) for b, blk in zip(batches, blocks)], ignore_index=True)
        written.append(write_csv(out / "trials.csv", meta, frame))
    if config.export_events:
        frames_a, frames_b = zip(*(batch_events(b, config.window_ns, blk.first_window) for b, blk in zip(batches, blocks)))
        written.append(write_csv(out / "events_a.csv", meta, pd.concat(frames_a, ignore_index=True)[EVENT_COLUMNS]))
        written.append(write_csv(out / "events_b.csv", meta, pd.concat(frames_b, ignore_index=True)[EVENT_COLUMNS]))
        schedule = SettingSchedule(tuple(blocks))
        written.append(write_json(out / "schedule.json", meta, {
            **schedule.to_dict(),
            "settings": config.settings.to_dict(),
            "window_ns": config.window_ns,
            "chsh": config.chsh,
        }))
    if body["chsh"] and body["chsh"].get("s") is not None:
        log("spce", f"S = {body['chsh']['s']:.4f} +- {body['chsh']['sigma_s']:.4f}")
    return written


def run_analyze(config, raw, out: Path, threads: int = 1, base: Path | None = None) -> list[Path]:
    base = base or Path(".")
    meta = provenance(raw, config.seed)
    schedule_doc = read_json(_path(base, config.schedule)) if config.schedule else None
    if config.settings is not None:
        catalogue = config.settings
    elif schedule_doc and "settings" in schedule_doc:
        catalogue = SettingsSpec.parse(schedule_doc["settings"])
    else:
        raise ConfigError("schedule carries no settings catalogue; add 'settings' to the config")
    settings = catalogue.by_label()
    schedule = SettingSchedule.from_dict(schedule_doc) if schedule_doc else None
    chsh_labels = config.chsh or (schedule_doc or {}).get("chsh")

    events_a = read_event_log(_path(base, config.events_a), station="A")
    events_b = read_event_log(_path(base, config.events_b), station="B")
    log("analyze", f"events A={len(events_a)} B={len(events_b)} window_ns={config.window_ns}")
    matched = coincidence_match(events_a, events_b, config.window_ns, settings, schedule)
    if matched.rejected["A"] or matched.rejected["B"]:
        log("analyze", f"warning: rejected repeat clicks A={matched.rejected['A']} B={matched.rejected['B']}")

    tables = tabulate(matched.batches())
    if schedule is not None and len(matched):
        windows_per_pair: dict[tuple[Setting, Setting], int] = {}
        for block in schedule.blocks:
            pair = (settings[block.setting_a], settings[block.setting_b])
            windows_per_pair[pair] = windows_per_pair.get(pair, 0) + block.n_windows
        tables = pad_silent_windows(tables, windows_per_pair)

    body = _statistics(tables, settings, chsh_labels if tables else None)
    body["coincidence"] = {"windows": len(matched), "rejected": matched.rejected, "window_ns": config.window_ns}
    return [
        write_json(out / "report.json", meta, body),
        write_json(out / "contingency.json", meta, {"tables": body["tables"]}),
    ]


def run_fit(config, raw, out: Path, threads: int = 1, base: Path | None = None) -> list[Path]:
    meta = provenance(raw, config.seed)
    problem = config.build_problem(threads)
    log("fit", f"family={problem.family.name} grid={len(problem.grid)} exact={problem.exact} budget={problem.budget}")
    result = fit(problem)
    log("fit", f"loss={result.loss:.6g} evaluations={result.evaluations} converged={result.converged}")
    residuals = [abs(r) for r in result.residuals]
    body = {
        "problem": problem.to_dict(),
        "fit_result": result.to_dict(),
        "max_abs_residual": max(residuals) if residuals else None,
    }
    return [write_json(out / "fit_result.json", meta, body)]


def run_beam(config, raw, out: Path, threads: int = 1, base: Path | None = None) -> list[Path]:
    meta = provenance(raw, config.seed)
    beam = config.beam
    theta = config.theta
    if beam.unpolarized:
        log("beam", "input polarization not specified by the source; simulating unpolarized light")

    ratios = {}
    for name, context in (("r10", C1(theta)), ("r21", C2(theta))):
        input_run, output_run = run_context(beam, context, threads)
        r, sigma = intensity_ratio(output_run, input_run)
        ratios[name] = {"r": r, "sigma": sigma, "input": input_run.to_dict(), "output": output_run.to_dict()}
        if name == "r10":
            ratios[name]["dispersion_index"] = dispersion_index(input_run) if input_run.mean > 0 else None

    sweep = malus_sweep(beam, theta, config.sweep_deltas, threads)
    body = {
        "beam": beam.to_dict(),
        "input_polarization_flag": "default-unpolarized" if beam.input_polarization == UNPOLARIZED else "linear",
        "theta": theta,
        **ratios,
        "r31_sweep": sweep,
    }
    written = [
        write_json(out / "beam_report.json", meta, body),
        write_csv(out / "malus_sweep.csv", meta, pd.DataFrame(sweep, columns=["delta", "r31", "sigma", "cos2"])),
    ]
    if config.export_stages:
        for name, context in (("c1", C1(theta)), ("c2", C2(theta))):
            written.append(write_csv(out / f"stages_{name}.csv", meta, stage_frame(simulate_stages(beam, context, threads))))
    log("beam", f"R10={ratios['r10']['r']:.4f} R21={ratios['r21']['r']:.4f}")
    return written


RUNNERS = {"spce": run_spce, "beam": run_beam, "fit": run_fit, "analyze": run_analyze}


def _path(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else base / path


def main(argv=None) -> int:
    load_dotenv()
    init_tracing()
    parser = argparse.ArgumentParser(prog="spce-lab", description="Contextual hidden-variable SPCE laboratory")
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed; overrides the config")
    parser.add_argument("--threads", type=int, default=None, help="worker threads; never changes results")
    args = parser.parse_args(argv)

    kind, code = "unknown", EXIT_OK
    start = time.perf_counter()
    with get_tracer().start_as_current_span("cli.run") as span:
        try:
            threads = args.threads if args.threads is not None else select_config().DEFAULT_THREADS
            if threads < 1:
                raise ConfigError(f"--threads must be >= 1, got {threads}")
            config, raw = load_config(args.config, args.seed)
            kind = config.kind
            span.set_attribute("kind", kind)
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for path in RUNNERS[kind](config, raw, out, threads, Path(args.config).resolve().parent):
                log(kind, f"wrote {path}")
        except (ConfigError, DataFormatError, MissingSettingPairError) as exc:
            log("error", str(exc))
            code = EXIT_INVALID
        except Exception as exc:
            log("error", f"{type(exc).__name__}: {exc}")
            code = EXIT_FAILURE
        span.set_attribute("exit_code", code)

    cli_runs_total.add(1, safe_attrs({"kind": kind, "exit_code": code}))
    cli_run_seconds.record(time.perf_counter() - start, safe_attrs({"kind": kind}))
    force_flush()
    return code


if __name__ == '__main__':
    sys.exit(main())
