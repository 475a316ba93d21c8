from src.fitting.families import LookupFamily, ModelFamily, ThresholdFamily, family_from_dict
from src.fitting.problem import (
    FitProblem,
    FitResult,
    ModelTarget,
    SingletTarget,
    default_grid,
    square_grid,
    target_from_dict,
)
from src.fitting.search import GridEvaluation, evaluate_grid, evaluate_loss, fit

__all__ = [
    "FitProblem", "FitResult", "GridEvaluation", "LookupFamily", "ModelFamily", "ModelTarget",
    "SingletTarget", "ThresholdFamily", "default_grid", "evaluate_grid", "evaluate_loss",
    "family_from_dict", "fit", "square_grid", "target_from_dict",
]
