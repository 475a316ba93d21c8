"""Estimators on contingency tables; pure functions of the counts."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.errors import EmptyPostSelectionError, MissingSettingPairError
from src.model.types import ContingencyTable, OUTCOMES
from src.observability.instruments import postselection_discards_total, safe_attrs


@dataclass(frozen=True)
class CorrelationEstimate:
    e_hat: float
    std_err: float
    n_used: int
    n_discarded: int

    def to_dict(self) -> dict:
        return {
            "e_hat": self.e_hat,
            "std_err": self.std_err,
            "n_used": self.n_used,
            "n_discarded": self.n_discarded,
        }


def post_selected_correlation(table: ContingencyTable) -> CorrelationEstimate:
    n_pp, n_pm = table.cell(1, 1), table.cell(1, -1)
    n_mp, n_mm = table.cell(-1, 1), table.cell(-1, -1)
    n_used = n_pp + n_pm + n_mp + n_mm
    if n_used == 0:
        a, b = table.setting_pair
        raise EmptyPostSelectionError(f"no coincident clicks at ({a.label}, {b.label})")
    n_discarded = table.n_total - n_used
    postselection_discards_total.add(n_discarded, safe_attrs({}))
    e_hat = (n_pp + n_mm - n_pm - n_mp) / n_used
    std_err = math.sqrt(max(0.0, 1.0 - e_hat * e_hat) / n_used)
    return CorrelationEstimate(e_hat, std_err, n_used, n_discarded)


@dataclass(frozen=True)
class ChshEstimate:
    s: float
    sigma: float
    correlations: tuple[CorrelationEstimate, CorrelationEstimate, CorrelationEstimate, CorrelationEstimate]

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "sigma_s": self.sigma,
            "correlations": [c.to_dict() for c in self.correlations],
        }


def chsh_from_correlations(estimates: Sequence[CorrelationEstimate]) -> ChshEstimate:
    """S = |E1 - E2| + |E3 + E4| for (a,b), (a,b'), (a',b), (a',b')."""
    e1, e2, e3, e4 = (est.e_hat for est in estimates)
    s = abs(e1 - e2) + abs(e3 + e4)
    sigma = math.sqrt(sum(est.std_err ** 2 for est in estimates))
    return ChshEstimate(s, sigma, tuple(estimates))


def chsh_estimate(tables: Sequence[ContingencyTable | None]) -> ChshEstimate:
    """Tables ordered (a,b), (a,b'), (a',b), (a',b')."""
    if len(tables) != 4 or any(t is None for t in tables):
        missing = [i for i, t in enumerate(tables) if t is None] if len(tables) == 4 else list(range(4))
        raise MissingSettingPairError(f"CHSH needs four setting-pair tables; missing positions {missing}")
    return chsh_from_correlations([post_selected_correlation(t) for t in tables])


@dataclass(frozen=True)
class DecompositionCheck:
    residual: float
    # outcomes whose conditioning event had zero count
    undefined_rows: tuple[int, ...]
    undefined_columns: tuple[int, ...]

    @property
    def defined(self) -> bool:
        return not self.undefined_rows and not self.undefined_columns

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "undefined_rows": list(self.undefined_rows),
            "undefined_columns": list(self.undefined_columns),
        }


def decomposition_check(table: ContingencyTable) -> DecompositionCheck:
    """
    Compare p(a,b), p(a) p(b|a) and p(b) p(a|b) from the same table.
    Conditionals on zero-count events are flagged and skipped.
    """
    joint = table.probabilities()
    p_a = joint.sum(axis=1)
    p_b = joint.sum(axis=0)
    counts_a = table.marginal_a()
    counts_b = table.marginal_b()
    residual = 0.0
    for i in range(3):
        if counts_a[i] == 0:
            continue
        conditional = table.counts[i, :] / counts_a[i]
        residual = max(residual, float(np.max(np.abs(joint[i, :] - p_a[i] * conditional))))
    for j in range(3):
        if counts_b[j] == 0:
            continue
        conditional = table.counts[:, j] / counts_b[j]
        residual = max(residual, float(np.max(np.abs(joint[:, j] - p_b[j] * conditional))))
    for i in range(3):
        for j in range(3):
            if counts_a[i] and counts_b[j]:
                via_a = p_a[i] * table.counts[i, j] / counts_a[i]
                via_b = p_b[j] * table.counts[i, j] / counts_b[j]
                residual = max(residual, abs(via_a - via_b))
    return DecompositionCheck(
        residual,
        tuple(OUTCOMES[i] for i in range(3) if counts_a[i] == 0),
        tuple(OUTCOMES[j] for j in range(3) if counts_b[j] == 0),
    )


def detection_rates(table: ContingencyTable) -> tuple[float, float]:
    """Fraction of trials in which each station clicked."""
    if table.n_total == 0:
        return 0.0, 0.0
    silent_a = table.marginal_a()[1]
    silent_b = table.marginal_b()[1]
    return 1.0 - silent_a / table.n_total, 1.0 - silent_b / table.n_total
