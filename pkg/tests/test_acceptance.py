"""Desk-scale runs at 10^6 trials; deselect with ``-m "not slow"``."""
import math

import numpy as np
import pytest

from src.analysis.estimators import chsh_estimate, post_selected_correlation
from src.analysis.nosignaling import nosignaling_audit
from src.analysis.tables import tabulate
from src.beam.simulation import C1, C2, BeamConfig, intensity_ratio, malus_sweep, run_context
from src.engine import catalog
from src.engine.discrete import exact_joint
from src.engine.lrhv import enumerate_lrhv_chsh
from src.engine.plugins import ThresholdDetectionModel
from src.engine.rng import derive_seed
from src.engine.trials import run_trials
from src.fitting.families import ThresholdFamily
from src.fitting.problem import FitProblem, SingletTarget, default_grid, square_grid
from src.fitting.search import fit
from src.model.types import Setting

pytestmark = pytest.mark.slow

N = 1_000_000


@pytest.fixture(scope="module")
def fitted_model():
    bins = 8
    family = ThresholdFamily(free=["zero_threshold_mass", *(f"w{i}" for i in range(bins))], bins=bins)
    initial = {"zero_threshold_mass": 0.5, **{f"w{i}": 1.0 / bins for i in range(bins)}}
    problem = FitProblem(
        family=family,
        initial_params=initial,
        target=SingletTarget(),
        grid=default_grid(8),
        exact=True,
        budget=4000,
        restarts=3,
        tol=1e-7,
        xtol=1e-6,
        seed=2024,
    )
    result = fit(problem)
    assert result.loss <= 0.01
    return family.build(result.params, problem.grid)


def test_fitted_threshold_model_reproduces_singlet_on_square_grid(fitted_model):
    worst = 0.0
    for index, (sa, sb) in enumerate(square_grid(8)):
        table = tabulate([run_trials(fitted_model, sa, sb, N, derive_seed(31, index), threads=4)])[(sa, sb)]
        estimate = post_selected_correlation(table)
        worst = max(worst, abs(estimate.e_hat + math.cos(sa.theta - sb.theta)))
    assert worst <= 0.02


def test_fitted_threshold_model_violates_chsh(fitted_model, chsh_settings):
    a, a_prime, b, b_prime = chsh_settings
    pairs = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)]
    tables = [
        tabulate([run_trials(fitted_model, sa, sb, N, derive_seed(47, index), threads=4)])[(sa, sb)]
        for index, (sa, sb) in enumerate(pairs)
    ]
    chsh = chsh_estimate(tables)
    assert chsh.s >= 2.6
    assert chsh.sigma <= 0.01
    assert chsh.s - 2.0 > 5 * chsh.sigma


def test_local_strategies_never_exceed_two():
    rng = np.random.default_rng(3)
    for angles in rng.uniform(0.0, math.pi, size=(1000, 4)):
        bound = enumerate_lrhv_chsh(
            [Setting("a", angles[0]), Setting("a'", angles[1])],
            [Setting("b", angles[2]), Setting("b'", angles[3])],
        )
        assert bound.max_abs_s == 2.0


def test_nosignaling_audit_on_engine_data(chsh_settings):
    a, a_prime, b, b_prime = chsh_settings
    model = ThresholdDetectionModel(weights=[0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1], source_noise=0.2)
    batches = [
        run_trials(model, sa, sb, N, derive_seed(5, index), threads=4)
        for index, (sa, sb) in enumerate([(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)])
    ]
    tables = tabulate(batches)
    assert nosignaling_audit(tables).worst_z < 5
    assert nosignaling_audit(tables, post_selected=True).worst_z < 5


def test_monte_carlo_frequencies_match_exact_joint():
    settings_a = [Setting("x", 0.0), Setting("x2", 0.7)]
    settings_b = [Setting("y", 0.5), Setting("y2", 1.2)]
    models = [
        catalog.constant_model(),
        catalog.anticorrelated_coin(),
        catalog.independent_coins(),
        catalog.four_atom_correlated(0.7),
        catalog.discretized_threshold_model(settings_a, settings_b),
    ]
    sa, sb = settings_a[1], settings_b[1]
    for index, model in enumerate(models):
        table = tabulate([run_trials(model, sa, sb, N, seed=9000 + index, threads=4)])[(sa, sb)]
        for (x, y), p in exact_joint(model, sa, sb).items():
            sigma = math.sqrt(max(p * (1 - p), 1e-12) / N)
            assert abs(table.cell(x, y) / N - p) <= 4 * sigma + 1e-12


def test_beam_malus_extinction_and_unpolarized_ratio():
    config = BeamConfig(mean_rate=100.0, window_count=10_000, seed=17)
    for row in malus_sweep(config, 0.3, [k * math.pi / 8 for k in range(8)], threads=4):
        assert abs(row["r31"] - row["cos2"]) <= 3 * row["sigma"] + 1e-12

    source, polarized = run_context(config, C1(0.3))
    r10, sigma10 = intensity_ratio(polarized, source)
    assert abs(r10 - 0.5) <= 0.01

    for extinction in (0.005, 0.02):
        leaky = BeamConfig(mean_rate=100.0, window_count=10_000, polarizer_extinction=extinction, seed=19)
        r21, sigma21 = intensity_ratio(*reversed(run_context(leaky, C2(0.3))))
        assert 1 - 2 * extinction - 3 * sigma21 <= r21 < 1
