from src.engine.discrete import DiscreteModel, exact_expectation, exact_joint, exact_marginals
from src.engine.lrhv import LrhvBound, enumerate_lrhv_chsh, mixture_chsh, strategy_chsh
from src.engine.plugins import ConstantModel, ModelPlugin, ThresholdDetectionModel
from src.engine.trials import TrialBatch, run_trials, sample_hidden

__all__ = [
    "ConstantModel", "DiscreteModel", "LrhvBound", "ModelPlugin", "ThresholdDetectionModel",
    "TrialBatch", "enumerate_lrhv_chsh", "exact_expectation", "exact_joint", "exact_marginals",
    "mixture_chsh", "run_trials", "sample_hidden", "strategy_chsh",
]
