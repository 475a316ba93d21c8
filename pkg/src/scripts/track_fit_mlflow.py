"""Log a fit_result.json written by spce-lab to an MLflow experiment."""
import argparse
import sys

import mlflow
from dotenv import load_dotenv

from src.config import select_config
from src.fitting.problem import FitResult
from src.scripts.reports import read_json


def load_fit_report(path):
    document = read_json(path)
    if "fit_result" not in document:
        raise SystemExit(f"{path}: not a fit report (no 'fit_result' section)")
    return document, FitResult.from_dict(document["fit_result"])


def main(report_path, experiment=None):
    document, result = load_fit_report(report_path)
    problem = document.get("problem", {})
    provenance = document.get("provenance", {})

    mlflow.set_experiment(experiment or select_config().MLFLOW_EXPERIMENT)
    with mlflow.start_run():
        mlflow.log_param("family", problem.get("family", {}).get("name", "unknown"))
        mlflow.log_param("loss", problem.get("loss"))
        mlflow.log_param("exact", problem.get("exact"))
        mlflow.log_param("budget", problem.get("budget"))
        mlflow.log_param("seed", provenance.get("seed"))
        mlflow.log_param("config_sha256", provenance.get("config_sha256"))
        for name, value in result.params.items():
            mlflow.log_param(f"fit.{name}", value)

        mlflow.log_metric("achieved_loss", result.loss)
        mlflow.log_metric("evaluations", result.evaluations)
        mlflow.log_metric("converged", float(result.converged))
        for index, residual in enumerate(result.residuals):
            mlflow.log_metric("residual", residual, step=index)
        for step, best in enumerate(result.history):
            mlflow.log_metric("best_loss", best, step=step)
        mlflow.log_artifact(report_path)

    print(f"[mlflow] loss={result.loss:.6g} evaluations={result.evaluations} converged={result.converged}", file=sys.stderr)


if __name__ == "__main__":
    load_dotenv()
    parser = argparse.ArgumentParser()
    parser.add_argument("--report", type=str, default="out/fit_result.json")
    parser.add_argument("--experiment", type=str, default=None)
    args = parser.parse_args()
    main(args.report, args.experiment)
