import contextlib
import json

import pytest

from src.scripts import track_fit_mlflow


@pytest.fixture
def recorded(monkeypatch):
    calls = {"params": {}, "metrics": [], "artifacts": [], "experiment": None}
    mlflow = track_fit_mlflow.mlflow
    monkeypatch.setattr(mlflow, "set_experiment", lambda name: calls.__setitem__("experiment", name))
    monkeypatch.setattr(mlflow, "start_run", lambda: contextlib.nullcontext())
    monkeypatch.setattr(mlflow, "log_param", lambda k, v: calls["params"].__setitem__(k, v))
    monkeypatch.setattr(mlflow, "log_metric", lambda k, v, step=None: calls["metrics"].append((k, v, step)))
    monkeypatch.setattr(mlflow, "log_artifact", lambda path: calls["artifacts"].append(path))
    return calls


def fit_report(tmp_path, **fit_result):
    document = {
        "provenance": {"tool": "spce-lab", "version": "0.1.0", "config_sha256": "ab" * 32, "seed": 4},
        "problem": {"family": {"name": "lookup"}, "loss": "max-abs", "exact": True, "budget": 50},
        "fit_result": {"params": {"visibility": 0.9}, "loss": 0.001, "residuals": [0.001, -0.0005],
                       "evaluations": 37, "converged": True, "history": [0.4, 0.1, 0.001], **fit_result},
    }
    path = tmp_path / "fit_result.json"
    path.write_text(json.dumps(document))
    return str(path)


def test_logs_parameters_metrics_and_artifact(tmp_path, recorded):
    path = fit_report(tmp_path)
    track_fit_mlflow.main(path, "lab-fits")
    assert recorded["experiment"] == "lab-fits"
    assert recorded["params"]["family"] == "lookup"
    assert recorded["params"]["fit.visibility"] == 0.9
    assert recorded["params"]["seed"] == 4
    assert ("achieved_loss", 0.001, None) in recorded["metrics"]
    assert [step for name, _, step in recorded["metrics"] if name == "best_loss"] == [0, 1, 2]
    assert recorded["artifacts"] == [path]


def test_default_experiment_comes_from_config(tmp_path, recorded):
    track_fit_mlflow.main(fit_report(tmp_path))
    assert recorded["experiment"] == "spce-fit"


def test_rejects_other_reports(tmp_path, recorded):
    path = tmp_path / "report.json"
    path.write_text(json.dumps({"provenance": {}, "tables": []}))
    with pytest.raises(SystemExit):
        track_fit_mlflow.main(str(path))
