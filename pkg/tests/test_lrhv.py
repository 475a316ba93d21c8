import math

import numpy as np
import pytest

from src.analysis.estimators import chsh_estimate
from src.analysis.tables import tabulate
from src.engine import catalog
from src.engine.discrete import exact_expectation
from src.engine.lrhv import all_strategies, enumerate_lrhv_chsh, mixture_chsh, strategy_chsh
from src.engine.rng import derive_seed
from src.engine.trials import run_trials
from src.errors import ConfigError
from src.model.types import Setting


def test_bound_is_two_for_random_angles():
    rng = np.random.default_rng(2)
    for row in rng.uniform(0, 2 * math.pi, size=(1000, 4)):
        bound = enumerate_lrhv_chsh([Setting("a", row[0]), Setting("a'", row[1])],
                                    [Setting("b", row[2]), Setting("b'", row[3])])
        assert bound.max_abs_s == 2.0


def test_every_strategy_gives_two():
    assert len(all_strategies()) == 16
    assert {strategy_chsh(s) for s in all_strategies()} == {2}
    assert strategy_chsh((1, 1, 1, 1)) == 2


def test_mixtures_stay_within_bound():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        assert mixture_chsh(rng.dirichlet(np.ones(16))) <= 2.0 + 1e-12


def test_strategy_mixture_model_obeys_bound(chsh_settings):
    a, a_prime, b, b_prime = chsh_settings
    strategies = [((s[0], s[1]), (s[2], s[3])) for s in all_strategies()]
    weights = np.random.default_rng(4).dirichlet(np.ones(16))
    model = catalog.strategy_mixture(["a", "a'"], ["b", "b'"], strategies, weights)

    def e(x, y):
        return exact_expectation(model, x, y)

    s = abs(e(a, b) - e(a, b_prime)) + abs(e(a_prime, b) + e(a_prime, b_prime))
    assert s <= 2.0 + 1e-12
    assert np.isclose(s, mixture_chsh(weights))


def test_mixture_rejects_all_zero_weights():
    with pytest.raises(ConfigError):
        mixture_chsh(np.zeros(16))


def test_sampled_strategy_mixture_stays_below_bound(chsh_settings):
    a, a_prime, b, b_prime = chsh_settings
    strategies = [((s[0], s[1]), (s[2], s[3])) for s in all_strategies()]
    weights = np.random.default_rng(21).dirichlet(np.ones(16))
    model = catalog.strategy_mixture(["a", "a'"], ["b", "b'"], strategies, weights)
    pairs = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)]
    tables = [tabulate([run_trials(model, x, y, 100_000, derive_seed(5, i))])[(x, y)] for i, (x, y) in enumerate(pairs)]
    estimate = chsh_estimate(tables)
    assert estimate.s <= 2.0 + 3 * estimate.sigma
