from src.beam.simulation import (
    C1,
    C2,
    C3,
    BeamConfig,
    IntensityRun,
    dispersion_index,
    intensity_ratio,
    malus_sweep,
    run_context,
    simulate_stages,
    stage_frame,
)

__all__ = [
    "BeamConfig", "C1", "C2", "C3", "IntensityRun", "dispersion_index", "intensity_ratio",
    "malus_sweep", "run_context", "simulate_stages", "stage_frame",
]
