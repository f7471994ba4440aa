from .runner import (
    CollateralReport,
    ExperimentConfig,
    SeparationReport,
    TrialRunner,
    ball_experiment,
    collateral_sweep,
    cube_experiment,
    fisher_separability_experiment,
    orthogonality_experiment,
    tuple_experiment,
)
from .statistics import WilsonInterval, verdict, wilson_interval
