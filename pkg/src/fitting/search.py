"""
Derivative-free fitting of model parameters to target correlations.

The search runs scipy's bounded Nelder-Mead in unit-cube coordinates with
restarts. Only loss values are used. Every grid point draws its trials
from the same seed for every parameter vector (common random numbers), so
the sampled objective is a deterministic function of the parameters.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from src.analysis.estimators import post_selected_correlation
from src.analysis.tables import tabulate
from src.engine.rng import derive_seed
from src.engine.trials import run_trials
from src.errors import DegenerateModelError, EmptyPostSelectionError
from src.fitting.problem import FitProblem, FitResult
from src.observability.instruments import (
    fit_degenerate_total,
    fit_evaluation_seconds,
    fit_evaluations_total,
    safe_attrs,
)
from src.observability.tracing import get_tracer

RESTART_TAG = 0x5EED
INITIAL_STEP = 0.1


@dataclass(frozen=True)
class GridEvaluation:
    expectations: tuple[float, ...]
    std_errs: tuple[float, ...]
    residuals: tuple[float, ...]
    loss: float


def _point(problem: FitProblem, model, index: int) -> tuple[float, float]:
    setting_a, setting_b = problem.grid[index]
    if problem.exact:
        return problem.family.exact_expectation(model, setting_a, setting_b), 0.0
    batch = run_trials(model, setting_a, setting_b, problem.trials_per_eval, derive_seed(problem.seed, index))
    estimate = post_selected_correlation(tabulate([batch])[(setting_a, setting_b)])
    return estimate.e_hat, estimate.std_err


def _aggregate(residuals, loss: str) -> float:
    r = np.abs(np.asarray(residuals, dtype=float))
    return float(r.max()) if loss == "max-abs" else float(np.mean(r * r))


def evaluate_grid(params, problem: FitProblem) -> GridEvaluation:
    """Per-point estimates, residuals and aggregated loss; +inf on a degenerate model."""
    family = problem.family.name
    with get_tracer().start_as_current_span("fit.evaluate_loss") as span:
        span.set_attribute("family", family)
        t0 = time.perf_counter()
        indices = range(len(problem.grid))
        try:
            model = problem.family.build(params, problem.grid)
            if problem.threads > 1 and len(problem.grid) > 1:
                with ThreadPoolExecutor(max_workers=problem.threads) as pool:
                    points = list(pool.map(lambda i: _point(problem, model, i), indices))
            else:
                points = [_point(problem, model, i) for i in indices]
        except (DegenerateModelError, EmptyPostSelectionError):
            fit_degenerate_total.add(1, safe_attrs({"family": family}))
            span.set_attribute("degenerate", True)
            inf = (math.inf,) * len(problem.grid)
            return GridEvaluation(inf, inf, inf, math.inf)
        finally:
            fit_evaluations_total.add(1, safe_attrs({"family": family}))
            fit_evaluation_seconds.record(time.perf_counter() - t0, safe_attrs({"family": family}))

    expectations = tuple(e for e, _ in points)
    residuals = tuple(e - t for e, t in zip(expectations, problem.targets))
    return GridEvaluation(expectations, tuple(s for _, s in points), residuals, _aggregate(residuals, problem.loss))


def evaluate_loss(params, problem: FitProblem) -> float:
    return evaluate_grid(params, problem).loss


class _BudgetExhausted(Exception):
    pass


class _Objective:
    """Budgeted, memoized loss over unit-cube coordinates with a best-so-far trace."""

    def __init__(self, problem: FitProblem):
        self.problem = problem
        self.names = problem.family.param_names
        bounds = problem.family.bounds()
        self.lo = np.array([bounds[n][0] for n in self.names])
        self.span = np.array([bounds[n][1] - bounds[n][0] for n in self.names])
        self.cache: dict[tuple[float, ...], GridEvaluation] = {}
        self.evaluations = 0
        self.history: list[float] = []
        self.best_x: np.ndarray | None = None
        self.best: GridEvaluation | None = None

    def params(self, x) -> dict[str, float]:
        values = self.lo + self.span * np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return {n: float(v) for n, v in zip(self.names, values)}

    def unit(self, params) -> np.ndarray:
        values = np.array([params[n] for n in self.names], dtype=float)
        return np.divide(values - self.lo, self.span, out=np.zeros_like(values), where=self.span > 0)

    def __call__(self, x) -> float:
        key = tuple(np.clip(np.asarray(x, dtype=float), 0.0, 1.0).tolist())
        if key in self.cache:
            return self.cache[key].loss
        if self.evaluations >= self.problem.budget:
            raise _BudgetExhausted
        evaluation = evaluate_grid(self.params(key), self.problem)
        self.evaluations += 1
        self.cache[key] = evaluation
        if self.best is None or evaluation.loss < self.best.loss:
            self.best, self.best_x = evaluation, np.array(key)
        self.history.append(self.best.loss)
        return evaluation.loss


def _initial_simplex(x0: np.ndarray) -> np.ndarray:
    simplex = [x0]
    for i in range(x0.size):
        vertex = x0.copy()
        vertex[i] += INITIAL_STEP if x0[i] + INITIAL_STEP <= 1.0 else -INITIAL_STEP
        simplex.append(vertex)
    return np.array(simplex)


def fit(problem: FitProblem) -> FitResult:
    """
    Restart 0 starts from the initial parameters, later restarts from
    seeded uniform points in the parameter box. On the sampling path tol is
    raised to twice the mean standard error of the initial evaluation.
    """
    objective = _Objective(problem)
    x0 = objective.unit(problem.initial_params)
    converged = False

    with get_tracer().start_as_current_span("fit.search") as span:
        span.set_attribute("family", problem.family.name)
        span.set_attribute("budget", problem.budget)
        try:
            objective(x0)
            tol = problem.tol
            if not problem.exact and objective.best is not None and math.isfinite(objective.best.loss):
                tol = max(tol, 2.0 * float(np.mean(objective.best.std_errs)))
            best_run_converged = False
            for restart in range(problem.restarts):
                if restart == 0:
                    start = x0
                else:
                    rng = np.random.default_rng(derive_seed(problem.seed, RESTART_TAG, restart))
                    start = rng.random(x0.size)
                before = objective.best.loss
                result = minimize(
                    objective,
                    start,
                    method="Nelder-Mead",
                    bounds=[(0.0, 1.0)] * x0.size,
                    options={
                        "initial_simplex": _initial_simplex(start),
                        "xatol": problem.xtol,
                        "fatol": tol,
                        "maxfev": problem.budget,
                    },
                )
                if restart == 0 or objective.best.loss < before:
                    best_run_converged = bool(result.success)
            converged = best_run_converged
        except _BudgetExhausted:
            converged = False
        span.set_attribute("evaluations", objective.evaluations)
        span.set_attribute("converged", converged)

    best = objective.best
    return FitResult(
        params=objective.params(objective.best_x),
        loss=best.loss,
        residuals=best.residuals,
        evaluations=objective.evaluations,
        converged=converged,
        history=tuple(objective.history),
    )
