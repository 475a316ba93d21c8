"""Per-station click logs as CSV: station,timestamp_ns,setting_label,outcome."""
from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np
import pandas as pd

from src.analysis.coincidence import STATIONS, EventRecord
from src.engine.trials import TrialBatch
from src.errors import DataFormatError

EVENT_COLUMNS = ["station", "timestamp_ns", "setting_label", "outcome"]
MAX_TIMESTAMP_NS = np.iinfo(np.int64).max


def _leading_comments(path: str | Path) -> int:
    count = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            count += 1
    return count


def read_event_log(path: str | Path, station: str | None = None) -> pd.DataFrame:
    """
    Load and validate one click log. Leading ``#`` lines (provenance) are
    skipped; errors name the offending line of the file.
    """
    skip = _leading_comments(path)
    header_line = skip + 1
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skiprows=skip)
    except pd.errors.EmptyDataError:
        return pd.DataFrame({c: pd.Series(dtype=object) for c in EVENT_COLUMNS}).astype(
            {"timestamp_ns": np.int64, "outcome": np.int8}
        )
    except pd.errors.ParserError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc

    if list(frame.columns) != EVENT_COLUMNS:
        raise DataFormatError(
            f"expected header {','.join(EVENT_COLUMNS)}, got {','.join(map(str, frame.columns))}", line=header_line
        )
    frame = frame.fillna("")

    for i, row in enumerate(frame.itertuples(index=False), start=header_line + 1):
        if row.station not in STATIONS or (station is not None and row.station != station):
            raise DataFormatError(f"unexpected station {row.station!r}", line=i)
        if not (row.timestamp_ns.isascii() and row.timestamp_ns.isdigit()):
            raise DataFormatError(f"timestamp_ns must be a non-negative integer, got {row.timestamp_ns!r}", line=i)
        if int(row.timestamp_ns) > MAX_TIMESTAMP_NS:
            raise DataFormatError(f"timestamp_ns {row.timestamp_ns} does not fit in 64 bits", line=i)
        if row.outcome not in ("-1", "1", "+1"):
            raise DataFormatError(f"outcome must be -1 or 1, got {row.outcome!r}", line=i)
        if not row.setting_label:
            raise DataFormatError("empty setting_label", line=i)

    frame["timestamp_ns"] = frame["timestamp_ns"].astype(np.int64)
    frame["outcome"] = frame["outcome"].astype(np.int8)
    return frame


def write_event_log(path: str | Path, events: pd.DataFrame | Iterable[EventRecord], header: str | None = None) -> None:
    if not isinstance(events, pd.DataFrame):
        events = pd.DataFrame(
            [(e.station, e.timestamp_ns, e.setting_label, e.outcome) for e in events],
            columns=EVENT_COLUMNS,
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        events[EVENT_COLUMNS].to_csv(fh, index=False, lineterminator="\n")


def to_records(frame: pd.DataFrame) -> list[EventRecord]:
    return [
        EventRecord(r.station, int(r.timestamp_ns), str(r.setting_label), int(r.outcome))
        for r in frame.itertuples(index=False)
    ]


def batch_events(batch: TrialBatch, window_ns: int, first_window: int = 0) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Click logs of a simulated batch laid out on the window grid starting at
    ``first_window``. Station A clicks a quarter into its window, station B
    at the half, so both fall inside the same window for any window_ns >= 2.
    """
    frames = []
    for station, outcomes, label, offset in (
        ("A", batch.outcome_a, batch.setting_a.label, window_ns // 4),
        ("B", batch.outcome_b, batch.setting_b.label, window_ns // 2),
    ):
        clicked = outcomes != 0
        windows = first_window + batch.window_index[clicked].astype(np.int64)
        frames.append(pd.DataFrame({
            "station": station,
            "timestamp_ns": windows * window_ns + offset,
            "setting_label": label,
            "outcome": outcomes[clicked].astype(np.int8),
        }, columns=EVENT_COLUMNS))
    return frames[0], frames[1]
