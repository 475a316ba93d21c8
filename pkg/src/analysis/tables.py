from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Mapping

import numpy as np

from src.engine.trials import TrialBatch
from src.errors import DataFormatError
from src.model.types import ContingencyTable, Setting, TrialRecord, cell_index

SettingPair = tuple[Setting, Setting]


def _batch_counts(batch: TrialBatch) -> np.ndarray:
    flat = (batch.outcome_a.astype(np.int64) + 1) * 3 + (batch.outcome_b.astype(np.int64) + 1)
    return np.bincount(flat, minlength=9).reshape(3, 3)


def tabulate(trials: Iterable[TrialRecord | TrialBatch]) -> dict[SettingPair, ContingencyTable]:
    """
    Count every trial once in the table of its setting pair.

    Accepts TrialRecords, TrialBatches, or any mix of them; batches are
    counted column-wise.
    """
    counts: dict[SettingPair, np.ndarray] = defaultdict(lambda: np.zeros((3, 3), dtype=np.int64))
    for item in trials:
        if isinstance(item, TrialBatch):
            counts[item.setting_pair] += _batch_counts(item)
        else:
            counts[item.setting_pair][cell_index(item.outcome_a), cell_index(item.outcome_b)] += 1
    return {pair: ContingencyTable(c, int(c.sum()), pair) for pair, c in counts.items()}


def merge_tables(*partials: Mapping[SettingPair, ContingencyTable]) -> dict[SettingPair, ContingencyTable]:
    """Cell-wise sum of partial tabulations (associative and commutative)."""
    merged: dict[SettingPair, ContingencyTable] = {}
    for partial in partials:
        for pair, table in partial.items():
            merged[pair] = merged[pair].merge(table) if pair in merged else table
    return merged


def table_by_labels(tables: Mapping[SettingPair, ContingencyTable]) -> dict[tuple[str, str], ContingencyTable]:
    return {(a.label, b.label): t for (a, b), t in tables.items()}


def pad_silent_windows(
    tables: Mapping[SettingPair, ContingencyTable],
    windows_per_pair: Mapping[SettingPair, int],
) -> dict[SettingPair, ContingencyTable]:
    """
    Restore the (0, 0) cell of tables built from click logs, given how many
    windows each setting pair actually occupied.
    """
    padded = dict(tables)
    for pair, n_windows in windows_per_pair.items():
        table = tables.get(pair, ContingencyTable.empty(pair))
        silent = int(n_windows) - table.n_total
        if silent < 0:
            raise DataFormatError(
                f"pair ({pair[0].label}, {pair[1].label}) has more clicked windows than scheduled windows"
            )
        counts = table.counts.copy()
        counts[1, 1] += silent
        padded[pair] = ContingencyTable(counts, int(n_windows), pair)
    return padded
