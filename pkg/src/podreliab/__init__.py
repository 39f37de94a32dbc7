"""Reliability evaluation for vessel trajectory predictors.

Probability-of-detection style assessment (POAP: probability of adequate
prediction) over AIS-derived sequence windows: trajectory preparation,
traffic-situation labelling, displacement-error metrics, censored
reliability horizons, synthetic scenarios, and report rendering.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from ._kernels import available_backends
from .errors import (AlignmentError, CovarianceError, EmptyGroupError,
                     InputError, PodReliabError, ScaleDomainError,
                     ScenarioError, SingularDesignError)
from .projections import DEFAULT_ZONE, TMZone, tm_forward, tm_inverse
from .trajectory import (SequenceSample, TrackPoint, Trajectory,
                         build_sequence_samples, extract_trajectories,
                         ingest_records, resample, split_tracks,
                         window_sequences)
from .traffic import (InteractionEvent, TrafficSituationLabel,
                      classify_sample, coarse_group, detect_interactions,
                      label_string)
from .metrics import (ErrorSeries, PredictionSample, SummaryStats,
                      aggregate, aggregate_pooled, densify_3s,
                      displacement_error, horizon_grid, summarize)
from .pod import (AxisTransform, HorizonSolution, LevelData, PoapCurve,
                  RegressionFit, average_per_level, build_poap_curve,
                  fit_mle, poap, pool_series, render_horizon,
                  select_transform, solve_a_at_probability,
                  wald_lower_bound)
from .scenario import (ScenarioSpec, SyntheticErrorSpec,
                       build_scene_trajectories, constant_velocity_predict,
                       demo_scenario, generate_scene, persistence_predict,
                       simulate_errors)

__all__ = [
    "__version__",
    "KERNEL_BACKEND",
    "available_backends",
    "PodReliabError", "InputError", "AlignmentError", "EmptyGroupError",
    "SingularDesignError", "ScaleDomainError", "CovarianceError",
    "ScenarioError",
    "TMZone", "DEFAULT_ZONE", "tm_forward", "tm_inverse",
    "TrackPoint", "Trajectory", "SequenceSample",
    "ingest_records", "split_tracks", "resample", "extract_trajectories",
    "window_sequences", "build_sequence_samples",
    "InteractionEvent", "TrafficSituationLabel", "detect_interactions",
    "classify_sample", "label_string", "coarse_group",
    "PredictionSample", "ErrorSeries", "SummaryStats",
    "displacement_error", "horizon_grid", "densify_3s", "summarize",
    "aggregate", "aggregate_pooled",
    "AxisTransform", "LevelData", "RegressionFit", "HorizonSolution",
    "PoapCurve", "average_per_level", "pool_series", "select_transform",
    "fit_mle", "poap", "wald_lower_bound", "solve_a_at_probability",
    "build_poap_curve", "render_horizon",
    "ScenarioSpec", "SyntheticErrorSpec", "build_scene_trajectories",
    "generate_scene", "constant_velocity_predict", "persistence_predict",
    "simulate_errors", "demo_scenario",
]
