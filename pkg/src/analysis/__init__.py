from src.analysis.coincidence import (
    CoincidenceResult,
    EventRecord,
    ScheduleBlock,
    SettingSchedule,
    coincidence_match,
)
from src.analysis.estimators import (
    ChshEstimate,
    CorrelationEstimate,
    DecompositionCheck,
    chsh_estimate,
    chsh_from_correlations,
    decomposition_check,
    detection_rates,
    post_selected_correlation,
)
from src.analysis.nosignaling import NoSignalingEntry, NoSignalingReport, nosignaling_audit, two_proportion_z
from src.analysis.report import build_report
from src.analysis.tables import merge_tables, pad_silent_windows, table_by_labels, tabulate

__all__ = [
    "ChshEstimate", "CoincidenceResult", "CorrelationEstimate", "DecompositionCheck", "EventRecord",
    "NoSignalingEntry", "NoSignalingReport", "ScheduleBlock", "SettingSchedule",
    "build_report", "chsh_estimate", "chsh_from_correlations", "coincidence_match", "decomposition_check",
    "detection_rates", "merge_tables", "nosignaling_audit", "pad_silent_windows", "post_selected_correlation",
    "table_by_labels", "tabulate", "two_proportion_z",
]
