from __future__ import annotations

from typing import Mapping, Sequence

from src.analysis.estimators import (
    chsh_estimate,
    decomposition_check,
    detection_rates,
    post_selected_correlation,
)
from src.analysis.nosignaling import nosignaling_audit
from src.analysis.tables import SettingPair, table_by_labels
from src.errors import EmptyPostSelectionError, InsufficientGridError, MissingSettingPairError
from src.model.types import ContingencyTable

LRHV_BOUND = 2.0


def _pair_entry(table: ContingencyTable) -> dict:
    a, b = table.setting_pair
    rate_a, rate_b = detection_rates(table)
    entry = {
        "setting_a": a.label,
        "setting_b": b.label,
        "delta": b.theta - a.theta,
        "detection_rate_a": rate_a,
        "detection_rate_b": rate_b,
    }
    try:
        entry.update(post_selected_correlation(table).to_dict())
    except EmptyPostSelectionError:
        entry.update({"e_hat": None, "std_err": None, "n_used": 0, "n_discarded": table.n_total})
    entry["decomposition"] = decomposition_check(table).to_dict() if table.n_total else None
    return entry


def _audit(tables, post_selected: bool) -> dict:
    try:
        return nosignaling_audit(tables, post_selected=post_selected).to_dict()
    except InsufficientGridError as exc:
        return {"post_selected": post_selected, "worst_z": None, "entries": [], "skipped": [str(exc)]}


def build_report(
    tables: Mapping[SettingPair, ContingencyTable],
    chsh_labels: Sequence[str] | None = None,
) -> dict:
    """
    Full statistics report over a tabulation.

    ``chsh_labels`` is (a, a', b, b'); when given, S is estimated from the
    pairs (a,b), (a,b'), (a',b), (a',b'). A missing pair raises
    MissingSettingPairError.
    """
    ordered = sorted(tables.values(), key=lambda t: (t.setting_pair[0].label, t.setting_pair[1].label))
    report = {
        "tables": [t.to_dict() for t in ordered],
        "correlations": [_pair_entry(t) for t in ordered],
        "chsh": None,
        "nosignaling": _audit(tables, post_selected=False) if tables else None,
        # post-selected marginals are expected to drift; reported, never asserted
        "nosignaling_post_selected": _audit(tables, post_selected=True) if tables else None,
    }
    if chsh_labels is not None and tables:
        a, a_prime, b, b_prime = chsh_labels
        by_label = table_by_labels(tables)
        wanted = [(a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime)]
        missing = [pair for pair in wanted if pair not in by_label]
        if missing:
            raise MissingSettingPairError(f"CHSH pairs absent from the run: {missing}")
        try:
            estimate = chsh_estimate([by_label[pair] for pair in wanted])
        except EmptyPostSelectionError as exc:
            report["chsh"] = {"labels": list(chsh_labels), "s": None, "sigma_s": None, "undefined": str(exc)}
            return report
        report["chsh"] = {
            **estimate.to_dict(),
            "labels": list(chsh_labels),
            "lrhv_bound": LRHV_BOUND,
            "sigmas_above_lrhv": (estimate.s - LRHV_BOUND) / estimate.sigma if estimate.sigma > 0 else None,
        }
    return report
