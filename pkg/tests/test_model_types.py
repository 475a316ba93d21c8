import math

import numpy as np
import pytest

from src.errors import ConfigError
from src.model.types import ContingencyTable, Outcome, Setting, StateLabel, TrialRecord, normalize_setting


def test_normalize_setting_mod_pi():
    assert math.isclose(normalize_setting(math.pi / 6), math.pi / 6)
    assert math.isclose(normalize_setting(math.pi + math.pi / 6), math.pi / 6)
    assert math.isclose(normalize_setting(-math.pi / 4), 3 * math.pi / 4)


def test_normalize_setting_mod_two_pi():
    assert math.isclose(normalize_setting(math.pi + 0.5, mod_pi=False), math.pi + 0.5)
    assert math.isclose(normalize_setting(-math.pi / 2, mod_pi=False), 3 * math.pi / 2)


def test_normalize_setting_rejects_non_finite():
    with pytest.raises(ConfigError):
        normalize_setting(float("nan"))


def test_setting_axis_flag_selects_period():
    assert math.isclose(Setting("p", math.pi + 0.2, axis_mod_pi=True).theta, 0.2)
    assert math.isclose(Setting("s", math.pi + 0.2).theta, math.pi + 0.2)


@pytest.mark.parametrize("aperture", [-0.01, math.pi / 4 + 1e-9, float("inf")])
def test_setting_rejects_aperture_out_of_range(aperture):
    with pytest.raises(ConfigError):
        Setting("x", 0.0, aperture=aperture)


@pytest.mark.parametrize("value", [2, -2, 0.5, True])
def test_outcome_rejects_other_values(value):
    with pytest.raises(ConfigError):
        Outcome.of(value)


def test_outcome_clicked():
    assert Outcome.of(1).clicked and Outcome.of(-1).clicked
    assert not Outcome.of(0).clicked


def test_trial_record_validates():
    a, b = Setting("a", 0.0), Setting("b", 1.0)
    record = TrialRecord(0, a, b, 1, 0, 3)
    assert record.outcome_b is Outcome.NONE
    with pytest.raises(ConfigError):
        TrialRecord(1, a, b, 1, 1, -1)


def test_contingency_table_probabilities_sum_to_one():
    pair = (Setting("a", 0.0), Setting("b", 0.3))
    rng = np.random.default_rng(3)
    for _ in range(50):
        counts = rng.integers(0, 1000, size=(3, 3))
        table = ContingencyTable(counts, int(counts.sum()), pair)
        assert abs(table.probabilities().sum() - 1.0) <= 1e-12


def test_contingency_table_rejects_bad_total():
    pair = (Setting("a", 0.0), Setting("b", 0.3))
    with pytest.raises(ConfigError):
        ContingencyTable(np.ones((3, 3)), 10, pair)


def test_contingency_table_merge_and_serialization():
    pair = (Setting("a", 0.0), Setting("b", 0.3))
    left = ContingencyTable.from_cells(pair, {(1, -1): 2, (0, 1): 1})
    right = ContingencyTable.from_cells(pair, {(1, -1): 1, (-1, -1): 4})
    merged = left.merge(right)
    assert merged.cell(1, -1) == 3
    assert merged.n_total == 8
    assert merged.n_used == 7
    assert ContingencyTable.from_dict(merged.to_dict()) == merged


@pytest.mark.parametrize("visibility", [-0.1, 1.2])
def test_state_label_rejects_visibility_outside_unit_interval(visibility):
    with pytest.raises(ConfigError):
        StateLabel("singlet", visibility)


def test_state_label_keeps_visibility():
    assert StateLabel("singlet", 0.9).visibility == 0.9
    assert StateLabel("singlet").visibility == 1.0
