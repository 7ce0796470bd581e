"""Deterministic federated-learning simulator with self-adaptive workload
prediction and loss-driven client selection."""

from .datagen import (
    ClientShard,
    LabeledSet,
    SyntheticSpec,
    generate_synthetic,
    ingest_csv,
    partition_label_skew,
    power_law_sizes,
)
from .engine import (
    ALGORITHMS,
    ExperimentConfig,
    MetricsRow,
    RoundReport,
    evaluate_global,
    federated_average,
    init_state,
    run_experiment,
    run_round,
)
from .hetero import CapacityProfile, draw_capacity, sample_profile
from .model import ModelWeights, TrainingConfig, gradient, local_train, loss_and_accuracy
from .predictor import (
    PredictorParams,
    RoundOutcome,
    TaskPair,
    execute_assignment,
    fassa_update,
    ira_update,
    update_threshold,
)
from .selector import SelectionState, select, selection_probabilities, update_values

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "CapacityProfile",
    "ClientShard",
    "ExperimentConfig",
    "LabeledSet",
    "MetricsRow",
    "ModelWeights",
    "PredictorParams",
    "RoundOutcome",
    "RoundReport",
    "SelectionState",
    "SyntheticSpec",
    "TaskPair",
    "TrainingConfig",
    "draw_capacity",
    "evaluate_global",
    "execute_assignment",
    "fassa_update",
    "federated_average",
    "generate_synthetic",
    "gradient",
    "ingest_csv",
    "init_state",
    "ira_update",
    "local_train",
    "loss_and_accuracy",
    "partition_label_skew",
    "power_law_sizes",
    "run_experiment",
    "run_round",
    "sample_profile",
    "select",
    "selection_probabilities",
    "update_threshold",
    "update_values",
]
