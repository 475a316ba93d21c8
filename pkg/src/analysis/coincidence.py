"""
Fixed-grid coincidence matching of per-station click logs.

window_index = timestamp_ns // window_ns on a clock shared by both
stations. Within a window only a station's first click counts; later
clicks are rejected and counted. A station without a click in a window
contributes outcome 0, and windows in which neither station clicked do
not appear at all.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np
import pandas as pd

from src.engine.trials import TrialBatch
from src.errors import ConfigError, DataFormatError
from src.model.types import Setting, TrialRecord
from src.observability.instruments import (
    coincidence_rejections_total,
    coincidence_windows_total,
    safe_attrs,
)
from src.observability.tracing import get_tracer

STATIONS = ("A", "B")


@dataclass(frozen=True)
class EventRecord:
    station: str
    timestamp_ns: int
    setting_label: str
    outcome: int

    def __post_init__(self):
        if self.station not in STATIONS:
            raise DataFormatError(f"station must be A or B, got {self.station!r}")
        if self.outcome not in (-1, 1):
            raise DataFormatError(f"click outcome must be -1 or 1, got {self.outcome!r}")
        if not self.setting_label:
            raise DataFormatError("setting_label must be non-empty")


@dataclass(frozen=True)
class ScheduleBlock:
    first_window: int
    n_windows: int
    setting_a: str
    setting_b: str


@dataclass(frozen=True)
class SettingSchedule:
    """Contiguous window blocks, each run under one setting pair."""

    blocks: tuple[ScheduleBlock, ...]
    _starts: list[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        blocks = tuple(sorted(self.blocks, key=lambda b: b.first_window))
        for prev, block in zip(blocks, blocks[1:]):
            if block.first_window < prev.first_window + prev.n_windows:
                raise ConfigError(f"schedule blocks overlap at window {block.first_window}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "_starts", [b.first_window for b in blocks])

    def block_for(self, window: int) -> ScheduleBlock | None:
        idx = bisect.bisect_right(self._starts, window) - 1
        if idx < 0:
            return None
        block = self.blocks[idx]
        return block if window < block.first_window + block.n_windows else None

    def to_dict(self) -> dict:
        return {"blocks": [vars(b).copy() for b in self.blocks]}

    @classmethod
    def from_dict(cls, data: dict) -> "SettingSchedule":
        try:
            return cls(tuple(
                ScheduleBlock(int(b["first_window"]), int(b["n_windows"]), str(b["setting_a"]), str(b["setting_b"]))
                for b in data["blocks"]
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed schedule: {exc}") from exc


@dataclass(frozen=True, eq=False)
class CoincidenceResult:
    window_index: np.ndarray
    outcome_a: np.ndarray
    outcome_b: np.ndarray
    label_a: np.ndarray
    label_b: np.ndarray
    settings: Mapping[str, Setting]
    rejected: dict[str, int]

    def __len__(self):
        return int(self.window_index.size)

    def __iter__(self) -> Iterator[TrialRecord]:
        for trial_id, (w, a, b, la, lb) in enumerate(
            zip(self.window_index, self.outcome_a, self.outcome_b, self.label_a, self.label_b)
        ):
            yield TrialRecord(trial_id, self.settings[la], self.settings[lb], int(a), int(b), int(w))

    def batches(self) -> list[TrialBatch]:
        """One columnar batch per setting pair, for fast tabulation."""
        ids = np.arange(len(self), dtype=np.int64)
        pairs = sorted(set(zip(self.label_a.tolist(), self.label_b.tolist())))
        batches = []
        for la, lb in pairs:
            mask = (self.label_a == la) & (self.label_b == lb)
            batches.append(TrialBatch(
                self.settings[la], self.settings[lb],
                ids[mask], self.outcome_a[mask], self.outcome_b[mask], self.window_index[mask],
            ))
        return batches


def _station_columns(events, station: str):
    if isinstance(events, pd.DataFrame):
        frame = events
    else:
        frame = pd.DataFrame(
            [(e.station, e.timestamp_ns, e.setting_label, e.outcome) for e in events],
            columns=["station", "timestamp_ns", "setting_label", "outcome"],
        )
    if len(frame) and (frame["station"] != station).any():
        bad = int(np.argmax((frame["station"] != station).to_numpy()))
        raise DataFormatError(f"event {bad} belongs to station {frame['station'].iloc[bad]!r}, expected {station}")
    ts = frame["timestamp_ns"].to_numpy(dtype=np.int64)
    if ts.size > 1 and (np.diff(ts) < 0).any():
        bad = int(np.argmax(np.diff(ts) < 0)) + 1
        raise DataFormatError(f"station {station}: timestamps not sorted at event {bad}")
    labels = frame["setting_label"].astype(str).to_numpy(dtype=object)
    outcomes = frame["outcome"].to_numpy(dtype=np.int8)
    return ts, labels, outcomes


def _first_click_per_window(ts, labels, outcomes, window_ns):
    windows = ts // window_ns
    keep = np.ones(windows.size, dtype=bool)
    keep[1:] = windows[1:] != windows[:-1]
    return windows[keep], labels[keep], outcomes[keep], int((~keep).sum())


def _align(station_windows, station_values, all_windows, fill):
    idx = np.searchsorted(station_windows, all_windows)
    clipped = np.minimum(idx, max(station_windows.size - 1, 0))
    present = (idx < station_windows.size) & (station_windows[clipped] == all_windows) if station_windows.size else np.zeros(all_windows.size, dtype=bool)
    values = station_values[clipped] if station_windows.size else np.full(all_windows.size, fill, dtype=object)
    return present, np.where(present, values, fill)


def _hold_last_labels(station, windows, labels, all_windows, present, clicked_labels):
    if windows.size == 0:
        raise DataFormatError(f"station {station} never clicked; its settings cannot be resolved without a schedule")
    previous = np.searchsorted(windows, all_windows, side="left") - 1
    held = labels[np.maximum(previous, 0)]
    held = np.where(previous < 0, labels[0], held)
    return np.where(present, clicked_labels, held)


def coincidence_match(
    events_a: Sequence[EventRecord] | pd.DataFrame,
    events_b: Sequence[EventRecord] | pd.DataFrame,
    window_ns: int,
    settings: Mapping[str, Setting],
    schedule: SettingSchedule | None = None,
) -> CoincidenceResult:
    """
    A silent station's setting is read from ``schedule`` when given;
    otherwise the station's most recent click's setting holds (its first
    click's setting before any click).
    """
    if window_ns < 1:
        raise ConfigError(f"window_ns must be >= 1, got {window_ns!r}")

    with get_tracer().start_as_current_span("analysis.coincidence_match") as span:
        ts_a, lab_a, out_a = _station_columns(events_a, "A")
        ts_b, lab_b, out_b = _station_columns(events_b, "B")
        wa, la, oa, rejected_a = _first_click_per_window(ts_a, lab_a, out_a, window_ns)
        wb, lb, ob, rejected_b = _first_click_per_window(ts_b, lab_b, out_b, window_ns)

        all_windows = np.union1d(wa, wb).astype(np.int64)
        present_a, outcome_a = _align(wa, oa, all_windows, 0)
        present_b, outcome_b = _align(wb, ob, all_windows, 0)
        _, clicked_la = _align(wa, la, all_windows, "")
        _, clicked_lb = _align(wb, lb, all_windows, "")

        if schedule is not None:
            label_a = np.empty(all_windows.size, dtype=object)
            label_b = np.empty(all_windows.size, dtype=object)
            for i, window in enumerate(all_windows.tolist()):
                block = schedule.block_for(window)
                if block is None:
                    raise DataFormatError(f"window {window} lies outside the setting schedule")
                label_a[i], label_b[i] = block.setting_a, block.setting_b
            for station, present, clicked, scheduled in (
                ("A", present_a, clicked_la, label_a),
                ("B", present_b, clicked_lb, label_b),
            ):
                mismatch = present & (clicked != scheduled)
                if mismatch.any():
                    window = int(all_windows[np.argmax(mismatch)])
                    raise DataFormatError(f"station {station}: click label disagrees with schedule in window {window}")
        elif all_windows.size:
            label_a = _hold_last_labels("A", wa, la, all_windows, present_a, clicked_la)
            label_b = _hold_last_labels("B", wb, lb, all_windows, present_b, clicked_lb)
        else:
            label_a = label_b = np.empty(0, dtype=object)

        unknown = (set(label_a.tolist()) | set(label_b.tolist())) - set(settings)
        if unknown:
            raise DataFormatError(f"unknown setting label(s): {', '.join(sorted(unknown))}")

        coincidence_rejections_total.add(rejected_a, safe_attrs({"station": "A"}))
        coincidence_rejections_total.add(rejected_b, safe_attrs({"station": "B"}))
        coincidence_windows_total.add(int(all_windows.size), safe_attrs({}))
        span.set_attribute("windows", int(all_windows.size))
        span.set_attribute("rejected", rejected_a + rejected_b)

    return CoincidenceResult(
        window_index=all_windows,
        outcome_a=outcome_a.astype(np.int8),
        outcome_b=outcome_b.astype(np.int8),
        label_a=label_a.astype(object),
        label_b=label_b.astype(object),
        settings=dict(settings),
        rejected={"A": rejected_a, "B": rejected_b},
    )
