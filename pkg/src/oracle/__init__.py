from src.oracle.quantum import (
    TSIRELSON_BOUND,
    QmPrediction,
    brute_force_chsh_max,
    chsh_prediction,
    malus_ratio,
    quadrature_correlation,
    setting_correlation,
    singlet_correlation,
    singlet_joint,
)

__all__ = [
    "TSIRELSON_BOUND", "QmPrediction", "brute_force_chsh_max", "chsh_prediction",
    "malus_ratio", "quadrature_correlation", "setting_correlation",
    "singlet_correlation", "singlet_joint",
]
