from src.model.types import (
    OUTCOMES,
    ContingencyTable,
    HiddenState,
    Outcome,
    Setting,
    StateLabel,
    TrialRecord,
    normalize_setting,
)

__all__ = [
    "OUTCOMES", "ContingencyTable", "HiddenState", "Outcome", "Setting",
    "StateLabel", "TrialRecord", "normalize_setting",
]
