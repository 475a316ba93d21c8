import json
import math

import pytest

from src.scripts import run_experiment
from src.scripts.run_experiment import main

CHSH_SETTINGS = {
    "a": [{"label": "a", "theta": 0.0}, {"label": "a'", "theta": math.pi / 2}],
    "b": [{"label": "b", "theta": math.pi / 4}, {"label": "b'", "theta": 3 * math.pi / 4}],
}


def write_config(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def run(tmp_path, document, *extra, out="out"):
    code = main(["--config", write_config(tmp_path, document), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def spce_config(**overrides):
    document = {
        "kind": "spce",
        "model": {"name": "lookup", "params": {"visibility": 1.0}},
        "settings": CHSH_SETTINGS,
        "trials": 20_000,
        "chsh": ["a", "a'", "b", "b'"],
        "seed": 5,
    }
    document.update(overrides)
    return document


def load(path):
    return json.loads(path.read_text())


def test_spce_run_reports_chsh_violation(tmp_path):
    code, out = run(tmp_path, spce_config())
    assert code == 0
    report = load(out / "report.json")
    chsh = report["chsh"]
    assert abs(chsh["s"] - 2 * math.sqrt(2)) <= 4 * chsh["sigma_s"]
    assert report["oracle"]["chsh"] == pytest.approx(2 * math.sqrt(2))
    assert report["provenance"]["seed"] == 5
    assert len(report["provenance"]["config_sha256"]) == 64
    assert (out / "contingency.json").exists()


def test_unknown_field_is_rejected(tmp_path, capsys):
    code, _ = run(tmp_path, spce_config(foo=1))
    assert code == 2
    assert "foo" in capsys.readouterr().err


def test_zero_trials_is_rejected(tmp_path):
    assert run(tmp_path, spce_config(trials=0))[0] == 2


def test_runtime_failure_exits_three(tmp_path, monkeypatch):
    def broken(*args, **kwargs):
        raise RuntimeError("engine down")

    monkeypatch.setattr(run_experiment, "run_trials", broken)
    assert run(tmp_path, spce_config())[0] == 3


def test_seed_flag_overrides_config(tmp_path):
    code, out = run(tmp_path, spce_config(trials=100), "--seed", "42")
    assert code == 0
    assert load(out / "report.json")["provenance"]["seed"] == 42


def test_thread_count_does_not_change_report(tmp_path):
    document = spce_config(model={"name": "threshold", "params": {"source_noise": 0.2}}, trials=70_000, export_trials=True)
    _, one = run(tmp_path, document, "--threads", "1", out="one")
    _, eight = run(tmp_path, document, "--threads", "8", out="eight")
    for name in ("report.json", "contingency.json", "trials.csv"):
        assert (one / name).read_bytes() == (eight / name).read_bytes()


def test_analyze_reproduces_spce_report(tmp_path):
    code, out = run(tmp_path, spce_config(model={"name": "threshold", "params": {"weights": [0.5, 0.2, 0.1, 0.1, 0.05, 0.05]}},
                                          export_events=True, window_ns=1000))
    assert code == 0
    analyze = {
        "kind": "analyze",
        "events_a": str(out / "events_a.csv"),
        "events_b": str(out / "events_b.csv"),
        "schedule": str(out / "schedule.json"),
        "window_ns": 1000,
    }
    code, again = run(tmp_path, analyze, out="analyzed")
    assert code == 0
    original, replayed = load(out / "report.json"), load(again / "report.json")
    for section in ("tables", "correlations", "chsh", "nosignaling", "nosignaling_post_selected", "oracle"):
        assert replayed[section] == original[section]


def test_analyze_empty_logs(tmp_path):
    for name in ("a.csv", "b.csv"):
        (tmp_path / name).write_text("")
    code, out = run(tmp_path, {"kind": "analyze", "events_a": "a.csv", "events_b": "b.csv",
                               "window_ns": 100, "settings": CHSH_SETTINGS})
    assert code == 0
    report = load(out / "report.json")
    assert report["tables"] == [] and report["coincidence"]["windows"] == 0


def test_analyze_unsorted_timestamps(tmp_path):
    (tmp_path / "a.csv").write_text("station,timestamp_ns,setting_label,outcome\nA,200,a,1\nA,100,a,-1\n")
    (tmp_path / "b.csv").write_text("station,timestamp_ns,setting_label,outcome\n")
    code, _ = run(tmp_path, {"kind": "analyze", "events_a": "a.csv", "events_b": "b.csv",
                             "window_ns": 100, "settings": CHSH_SETTINGS})
    assert code == 2


def test_analyze_malformed_row_names_line(tmp_path, capsys):
    (tmp_path / "a.csv").write_text("station,timestamp_ns,setting_label,outcome\nA,100,a,1\nA,200,a,3\n")
    (tmp_path / "b.csv").write_text("station,timestamp_ns,setting_label,outcome\n")
    code, _ = run(tmp_path, {"kind": "analyze", "events_a": "a.csv", "events_b": "b.csv",
                             "window_ns": 100, "settings": CHSH_SETTINGS})
    assert code == 2
    assert "line 3" in capsys.readouterr().err


@pytest.mark.parametrize("timestamp", ["99999999999999999999", "\u0661\u0662"])
def test_analyze_rejects_unrepresentable_timestamp(tmp_path, capsys, timestamp):
    (tmp_path / "a.csv").write_text(f"station,timestamp_ns,setting_label,outcome\nA,{timestamp},a,1\n", encoding="utf-8")
    (tmp_path / "b.csv").write_text("station,timestamp_ns,setting_label,outcome\n")
    code, _ = run(tmp_path, {"kind": "analyze", "events_a": "a.csv", "events_b": "b.csv",
                             "window_ns": 100, "settings": CHSH_SETTINGS})
    assert code == 2
    assert "line 2" in capsys.readouterr().err


def fit_config(**problem_overrides):
    problem = {
        "family": {"name": "lookup"},
        "initial_params": {"visibility": 0.5},
        "target": {"kind": "singlet", "visibility": 0.9},
        "exact": True,
    }
    problem.update(problem_overrides)
    return {"kind": "fit", "seed": 1, "problem": problem}


def test_fit_run_writes_result(tmp_path):
    code, out = run(tmp_path, fit_config())
    assert code == 0
    document = load(out / "fit_result.json")
    assert abs(document["fit_result"]["params"]["visibility"] - 0.9) <= 0.01
    assert document["max_abs_residual"] == pytest.approx(document["fit_result"]["loss"])


def test_fit_budget_of_one(tmp_path):
    code, out = run(tmp_path, fit_config(budget=1))
    assert code == 0
    assert load(out / "fit_result.json")["fit_result"]["converged"] is False


def test_fit_without_target(tmp_path):
    config = fit_config()
    del config["problem"]["target"]
    assert run(tmp_path, config)[0] == 2


def test_beam_run(tmp_path):
    code, out = run(tmp_path, {"kind": "beam", "seed": 3, "beam": {"mean_rate": 50.0, "window_count": 2000}})
    assert code == 0
    report = load(out / "beam_report.json")
    assert len(report["r31_sweep"]) == 8
    for row in report["r31_sweep"]:
        assert abs(row["r31"] - row["cos2"]) <= 3 * row["sigma"] + 1e-12
    assert report["input_polarization_flag"] == "default-unpolarized"
    assert (out / "malus_sweep.csv").read_text().startswith("# spce-lab")
    assert (out / "stages_c1.csv").exists()


def test_beam_single_window_flags_null_sigma(tmp_path):
    code, out = run(tmp_path, {"kind": "beam", "beam": {"mean_rate": 50.0, "window_count": 1}})
    assert code == 0
    assert load(out / "beam_report.json")["r10"]["sigma"] is None


def test_beam_zero_efficiency_rejected(tmp_path):
    assert run(tmp_path, {"kind": "beam", "beam": {"mean_rate": 50.0, "detector_efficiency": 0.0}})[0] == 2


def test_unknown_kind_and_missing_file(tmp_path):
    assert run(tmp_path, {"kind": "tomography"})[0] == 2
    assert main(["--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "x")]) == 2
