"""
Parameter-independence audit.

For each station, outcome and local setting the outcome frequency is
compared across every remote setting it was paired with. The primary
audit uses full-event marginals (0 outcomes included), where the model
guarantees independence exactly; the post-selected variant is reported as
an empirical statistic only.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from src.errors import InsufficientGridError
from src.model.types import ContingencyTable, OUTCOMES, Setting

SettingPair = tuple[Setting, Setting]


@dataclass(frozen=True)
class NoSignalingEntry:
    station: str
    outcome: int
    local_setting: str
    max_abs_diff: float
    z: float
    remote_settings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "station": self.station,
            "outcome": self.outcome,
            "local_setting": self.local_setting,
            "max_abs_diff": self.max_abs_diff,
            "z": self.z,
            "remote_settings": list(self.remote_settings),
        }


@dataclass(frozen=True)
class NoSignalingReport:
    entries: tuple[NoSignalingEntry, ...]
    worst_z: float
    post_selected: bool = False
    skipped: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "post_selected": self.post_selected,
            "worst_z": self.worst_z,
            "entries": [e.to_dict() for e in self.entries],
            "skipped": list(self.skipped),
        }


def two_proportion_z(p1: float, n1: int, p2: float, n2: int) -> float:
    diff = abs(p1 - p2)
    if diff == 0.0:
        return 0.0
    variance = p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2
    if variance <= 0.0:
        # both frequencies at 0 or 1 but different: fall back to the pooled estimate
        pooled = (p1 * n1 + p2 * n2) / (n1 + n2)
        variance = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    return diff / math.sqrt(variance)


def _frequencies(table: ContingencyTable, station: str, post_selected: bool):
    counts = table.counts
    if post_selected:
        counts = counts[[0, 2]][:, [0, 2]]
        outcomes = (-1, 1)
    else:
        outcomes = OUTCOMES
    marginal = counts.sum(axis=1) if station == "A" else counts.sum(axis=0)
    n = int(marginal.sum())
    return {o: (int(marginal[i]), n) for i, o in enumerate(outcomes)}


def nosignaling_audit(
    tables: Mapping[SettingPair, ContingencyTable],
    post_selected: bool = False,
) -> NoSignalingReport:
    grouped: dict[tuple[str, str], list[tuple[str, ContingencyTable]]] = defaultdict(list)
    for (setting_a, setting_b), table in tables.items():
        grouped[("A", setting_a.label)].append((setting_b.label, table))
        grouped[("B", setting_b.label)].append((setting_a.label, table))

    entries, skipped = [], []
    for (station, local), remotes in sorted(grouped.items()):
        if len(remotes) < 2:
            skipped.append(f"{station}:{local}")
            continue
        remotes.sort(key=lambda item: item[0])
        freqs = [(label, _frequencies(table, station, post_selected)) for label, table in remotes]
        outcomes = (-1, 1) if post_selected else OUTCOMES
        for outcome in outcomes:
            max_diff, max_z = 0.0, 0.0
            for (_, f1), (_, f2) in itertools.combinations(freqs, 2):
                (k1, n1), (k2, n2) = f1[outcome], f2[outcome]
                if n1 == 0 or n2 == 0:
                    continue
                p1, p2 = k1 / n1, k2 / n2
                max_diff = max(max_diff, abs(p1 - p2))
                max_z = max(max_z, two_proportion_z(p1, n1, p2, n2))
            entries.append(NoSignalingEntry(
                station, outcome, local, max_diff, max_z, tuple(label for label, _ in remotes)
            ))

    if not entries:
        raise InsufficientGridError("no local setting is paired with two or more remote settings")
    worst = max(entry.z for entry in entries)
    return NoSignalingReport(tuple(entries), worst, post_selected, tuple(skipped))
