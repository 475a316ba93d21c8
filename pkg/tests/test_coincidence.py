import math

import pandas as pd
import pytest

from src.analysis.coincidence import EventRecord, ScheduleBlock, SettingSchedule, coincidence_match
from src.analysis.event_log import batch_events, read_event_log, to_records, write_event_log
from src.analysis.tables import pad_silent_windows, tabulate
from src.engine.plugins import ThresholdDetectionModel
from src.engine.trials import run_trials
from src.errors import DataFormatError
from src.model.types import Setting

SA, SB = Setting("x", 0.0), Setting("y", math.pi / 4)
SB2 = Setting("y2", math.pi / 2)
SETTINGS = {"x": SA, "y": SB, "y2": SB2}


def test_clicks_in_same_window_pair_up():
    result = coincidence_match([EventRecord("A", 10, "x", 1)], [EventRecord("B", 990, "y", -1)], 1000, SETTINGS)
    records = list(result)
    assert len(records) == 1
    assert records[0].window_index == 0
    assert (records[0].outcome_a, records[0].outcome_b) == (1, -1)


def test_silent_station_contributes_zero():
    events_b = [EventRecord("B", 5000, "y", 1)]
    records = list(coincidence_match([EventRecord("A", 10, "x", -1)], events_b, 1000, SETTINGS))
    assert (records[0].outcome_a, records[0].outcome_b) == (-1, 0)
    assert records[0].setting_b == SB
    assert (records[1].outcome_a, records[1].outcome_b, records[1].window_index) == (0, 1, 5)


def test_second_click_in_window_is_rejected():
    events_a = [EventRecord("A", 10, "x", 1), EventRecord("A", 20, "x", -1)]
    result = coincidence_match(events_a, [EventRecord("B", 30, "y", 1)], 1000, SETTINGS)
    assert result.rejected == {"A": 1, "B": 0}
    assert [r.outcome_a for r in result] == [1]


def test_unsorted_input_is_rejected():
    events_a = [EventRecord("A", 2000, "x", 1), EventRecord("A", 10, "x", 1)]
    with pytest.raises(DataFormatError):
        coincidence_match(events_a, [], 1000, SETTINGS)


def test_empty_logs_give_no_trials():
    result = coincidence_match([], [], 1000, SETTINGS)
    assert len(result) == 0
    assert tabulate(result.batches()) == {}


def test_silent_station_holds_last_setting():
    events_a = [EventRecord("A", 10, "x", 1), EventRecord("A", 3010, "x", 1)]
    events_b = [EventRecord("B", 20, "y", 1), EventRecord("B", 1020, "y2", -1)]
    records = list(coincidence_match(events_a, events_b, 1000, SETTINGS))
    assert [r.setting_b.label for r in records] == ["y", "y2", "y2"]


def test_schedule_resolves_settings_and_checks_labels():
    schedule = SettingSchedule((ScheduleBlock(0, 2, "x", "y"), ScheduleBlock(2, 2, "x", "y2")))
    events_a = [EventRecord("A", 2500, "x", 1)]
    records = list(coincidence_match(events_a, [], 1000, SETTINGS, schedule))
    assert records[0].setting_b == SB2
    with pytest.raises(DataFormatError):
        coincidence_match([], [EventRecord("B", 10, "y2", 1)], 1000, SETTINGS, schedule)


def test_event_record_validation():
    with pytest.raises(DataFormatError):
        EventRecord("C", 0, "x", 1)
    with pytest.raises(DataFormatError):
        EventRecord("A", 0, "x", 0)


def test_export_then_match_reproduces_tables(tmp_path):
    model = ThresholdDetectionModel(weights=[0.4, 0.2, 0.1, 0.1, 0.1, 0.05, 0.03, 0.02])
    n = 20_000
    runs = [run_trials(model, SA, SB, n, seed=1), run_trials(model, SA, SB2, n, seed=2)]
    frames_a, frames_b = zip(*(batch_events(run, 100, first_window=i * n) for i, run in enumerate(runs)))
    write_event_log(tmp_path / "a.csv", pd.concat(frames_a, ignore_index=True), header="test run")
    write_event_log(tmp_path / "b.csv", pd.concat(frames_b, ignore_index=True))

    schedule = SettingSchedule((ScheduleBlock(0, n, "x", "y"), ScheduleBlock(n, n, "x", "y2")))
    matched = coincidence_match(
        read_event_log(tmp_path / "a.csv", station="A"),
        read_event_log(tmp_path / "b.csv", station="B"),
        100, SETTINGS, schedule,
    )
    tables = pad_silent_windows(tabulate(matched.batches()), {(SA, SB): n, (SA, SB2): n})
    assert tables == tabulate(runs)


def test_read_event_log_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# provenance\nstation,timestamp_ns,setting_label,outcome\nA,10,x,1\nA,20,x,2\n")
    with pytest.raises(DataFormatError, match="line 4"):
        read_event_log(path)


def test_read_event_log_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("station,time,setting_label,outcome\n")
    with pytest.raises(DataFormatError, match="line 1"):
        read_event_log(path)


def test_read_event_log_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert len(read_event_log(path)) == 0


def test_event_log_round_trip(tmp_path):
    events = [EventRecord("B", 5, "y", -1), EventRecord("B", 17, "y2", 1)]
    write_event_log(tmp_path / "b.csv", events)
    assert to_records(read_event_log(tmp_path / "b.csv", station="B")) == events
    assert b"\r\n" not in (tmp_path / "b.csv").read_bytes()
