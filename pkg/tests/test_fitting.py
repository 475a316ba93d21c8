import math

import numpy as np
import pytest

from src.engine.discrete import DiscreteModel, exact_expectation
from src.errors import ConfigError
from src.fitting.families import LookupFamily, ModelFamily, ThresholdFamily, family_from_dict
from src.fitting.problem import FitProblem, FitResult, ModelTarget, SingletTarget, default_grid
from src.fitting.search import evaluate_grid, evaluate_loss, fit


class SilentFamily(ModelFamily):
    name = "silent"

    @property
    def param_names(self):
        return ("p",)

    def bounds(self):
        return {"p": (0.0, 1.0)}

    def build(self, params, grid=()):
        return DiscreteModel("silent", [[1.0]], [1.0], [1.0], {"*": [[0]]}, {"*": [[0]]})

    def exact_expectation(self, model, setting_a, setting_b):
        return exact_expectation(model, setting_a, setting_b)

    def to_dict(self):
        return {"name": self.name}


def lookup_problem(**overrides):
    options = dict(family=LookupFamily(), initial_params={"visibility": 0.5}, target=SingletTarget(0.9), exact=True)
    options.update(overrides)
    return FitProblem(**options)


def test_default_grid_covers_half_period():
    grid = default_grid()
    assert len(grid) == 8
    assert [round(b.theta / (math.pi / 8)) for _, b in grid] == list(range(8))


def test_loss_is_zero_at_target_visibility():
    assert evaluate_loss({"visibility": 0.9}, lookup_problem()) <= 1e-12


def test_max_abs_loss_at_full_visibility():
    assert evaluate_loss({"visibility": 1.0}, lookup_problem()) == pytest.approx(0.1, abs=1e-12)


def test_mean_square_loss():
    grid = default_grid()
    expected = np.mean([(0.1 * math.cos(b.theta)) ** 2 for _, b in grid])
    assert evaluate_loss({"visibility": 1.0}, lookup_problem(loss="mean-square")) == pytest.approx(expected, abs=1e-14)


def test_degenerate_model_gives_infinite_loss():
    problem = FitProblem(family=SilentFamily(), initial_params={"p": 0.5}, target=SingletTarget(), exact=True)
    assert evaluate_loss({"p": 0.5}, problem) == math.inf
    result = fit(FitProblem(family=SilentFamily(), initial_params={"p": 0.5}, target=SingletTarget(), exact=True, budget=5))
    assert result.loss == math.inf and not result.converged


def test_all_zero_threshold_weights_give_infinite_loss():
    names = [f"w{i}" for i in range(8)]
    problem = FitProblem(family=ThresholdFamily(free=names), initial_params={n: 0.125 for n in names},
                         target=SingletTarget(), exact=True)
    assert evaluate_loss({n: 0.0 for n in names}, problem) == math.inf
    assert evaluate_loss({n: 0.125 for n in names}, problem) < math.inf


def test_singlet_target_rejects_visibility_outside_unit_interval():
    with pytest.raises(ConfigError):
        SingletTarget(visibility=1.2)
    assert SingletTarget(visibility=0.9).state.visibility == 0.9


def test_fit_recovers_visibility():
    result = fit(lookup_problem())
    assert abs(result.params["visibility"] - 0.9) <= 0.01
    assert result.converged


def test_fit_two_parameter_round_trip():
    family = ThresholdFamily(free=("visibility", "source_noise"), fixed={"zero_threshold_mass": 1.0}, n_phi=8192)
    truth = {"visibility": 0.85, "source_noise": 0.3}
    problem = FitProblem(
        family=family,
        initial_params={"visibility": 0.6, "source_noise": 0.1},
        target=ModelTarget(truth),
        loss="mean-square",
        exact=True,
        budget=400,
        tol=1e-12,
        xtol=1e-6,
    )
    result = fit(problem)
    for name, value in truth.items():
        assert abs(result.params[name] - value) <= 0.05 * value


def test_budget_of_one_returns_initial_params():
    result = fit(lookup_problem(budget=1))
    assert result.params["visibility"] == pytest.approx(0.5)
    assert result.evaluations == 1
    assert not result.converged


def test_history_is_monotone_and_loss_reproducible():
    problem = lookup_problem(exact=False, trials_per_eval=10_000, budget=25, grid=default_grid(4), seed=17)
    result = fit(problem)
    assert all(later <= earlier for earlier, later in zip(result.history, result.history[1:]))
    assert len(result.history) == result.evaluations
    assert evaluate_loss(result.params, problem) == result.loss
    assert fit(problem) == result


def test_sampled_fit_is_within_noise_of_truth():
    problem = lookup_problem(exact=False, trials_per_eval=20_000, budget=40, grid=default_grid(4), seed=3)
    result = fit(problem)
    at_truth = evaluate_grid({"visibility": 0.9}, problem)
    assert result.loss <= at_truth.loss + 2 * float(np.mean(at_truth.std_errs))


def test_grid_evaluation_does_not_depend_on_threads():
    problem = lookup_problem(exact=False, trials_per_eval=10_000, grid=default_grid(4), seed=5)
    pooled = lookup_problem(exact=False, trials_per_eval=10_000, grid=default_grid(4), seed=5, threads=4)
    assert evaluate_grid({"visibility": 0.7}, problem) == evaluate_grid({"visibility": 0.7}, pooled)


@pytest.mark.parametrize("overrides", [
    {"grid": ()},
    {"trials_per_eval": 9_999},
    {"budget": 0},
    {"loss": "huber"},
    {"initial_params": {"visibility": 1.5}},
    {"initial_params": {"v": 0.5}},
])
def test_problem_validation(overrides):
    with pytest.raises(ConfigError):
        lookup_problem(**overrides)


def test_problem_and_result_serialize():
    problem = lookup_problem(grid=default_grid(4))
    again = FitProblem.from_dict(problem.to_dict())
    assert again.to_dict() == problem.to_dict()
    assert again.targets == problem.targets
    result = fit(lookup_problem(budget=1))
    assert FitResult.from_dict(result.to_dict()) == result


def test_family_from_dict():
    family = family_from_dict({"name": "threshold", "free": ["w0", "w1"], "bins": 4})
    assert family.param_names == ("w0", "w1")
    with pytest.raises(ConfigError):
        family_from_dict({"name": "threshold", "free": ["w9"], "bins": 4})
    with pytest.raises(ConfigError):
        family_from_dict({"name": "pearle"})
