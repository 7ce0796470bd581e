"""The federated orchestration loop.

One round: select participants, draw each one's affordable workload,
resolve its assignment, train the uploaders locally, aggregate uploads by
sample count, update workload predictions and selection values, and record
metrics. Uniform fixed-workload training (fedavg) and both self-adaptive
variants (fedsae_ira, fedsae_fassa) share this loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .datagen import ClientShard
from .hetero import CapacityProfile, draw_capacity, sample_profile
from .model import ModelWeights, TrainingConfig, local_train, loss_and_accuracy
from .predictor import (
    PredictorParams,
    RoundOutcome,
    TaskPair,
    execute_assignment,
    fassa_update,
    initial_pair,
    ira_update,
    record_capacity,
)
from .selector import SelectionState, make_state, select, update_values

ALGORITHMS = ("fedavg", "fedsae_ira", "fedsae_fassa")


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    rounds: int
    clients_per_round: int
    seed: int
    training: TrainingConfig
    predictor: PredictorParams = PredictorParams()
    fixed_epochs: float = 15.0  # fedavg assignment
    selection_scale: float = 0.01
    al_rounds: int = 0
    uploader_values_only: bool = False  # restrict value refreshes to uploaders

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.clients_per_round < 1:
            raise ValueError("clients_per_round must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.algorithm == "fedavg" and self.fixed_epochs <= 0:
            raise ValueError("fixed_epochs must be positive for fedavg")


@dataclass(frozen=True)
class RoundReport:
    """One selected client's outcome in one round."""

    client_id: int
    assigned_epochs: float
    completed_epochs: float
    uploaded: bool
    weights: ModelWeights | None
    train_loss: float  # mean loss at the broadcast weights, before training
    capacity: float
    num_train: int


@dataclass(frozen=True)
class MetricsRow:
    round: int
    test_accuracy: float
    train_loss: float
    dropout_rate: float
    mean_assigned: float
    mean_completed: float


@dataclass
class ExperimentState:
    """Mutable per-run state owned by the loop."""

    config: ExperimentConfig
    shards: list[ClientShard]
    profiles: list[CapacityProfile]
    pairs: list[TaskPair] | None  # None for fedavg
    selection: SelectionState
    test_x: np.ndarray = field(repr=False)
    test_y: np.ndarray = field(repr=False)
    num_classes: int = 0
    dim: int = 0


def init_state(config: ExperimentConfig, shards: list[ClientShard]) -> ExperimentState:
    if not shards:
        raise ValueError("no client shards")
    if config.clients_per_round > len(shards):
        raise ValueError("clients_per_round exceeds the number of clients")
    profiles = [
        sample_profile(rng.stream(config.seed, rng.PROFILE, k)) for k in range(len(shards))
    ]
    pairs = None
    if config.algorithm != "fedavg":
        pairs = [initial_pair(config.predictor) for _ in shards]
    selection = make_state(
        len(shards), config.selection_scale, config.al_rounds, config.clients_per_round
    )
    test_x = np.vstack([s.test.x for s in shards])
    test_y = np.concatenate([s.test.y for s in shards])
    num_classes = (
        max(
            max(int(s.train.y.max()) for s in shards),
            max(int(s.test.y.max()) for s in shards),
        )
        + 1
    )
    dim = shards[0].train.x.shape[1]
    return ExperimentState(
        config, shards, profiles, pairs, selection, test_x, test_y, num_classes, dim
    )


def federated_average(updates: list[tuple[int, ModelWeights]]) -> ModelWeights:
    """Sample-count weighted mean of uploaded weights.

    Weights are normalized over the uploaders, so the result is a convex
    combination of the uploads.
    """
    if not updates:
        raise ValueError("nothing to aggregate")
    total = float(sum(n for n, _ in updates))
    w = np.zeros_like(updates[0][1].w)
    b = np.zeros_like(updates[0][1].b)
    for n, upload in updates:
        w += (n / total) * upload.w
        b += (n / total) * upload.b
    return ModelWeights(w, b)


def evaluate_global(weights: ModelWeights, shards: list[ClientShard]) -> tuple[float, float]:
    """Sample-weighted top-1 accuracy and mean loss over all test shards."""
    x = np.vstack([s.test.x for s in shards])
    y = np.concatenate([s.test.y for s in shards])
    loss, accuracy = loss_and_accuracy(weights, x, y)
    return accuracy, loss


def run_round(
    state: ExperimentState, weights: ModelWeights, round_index: int
) -> tuple[ModelWeights, MetricsRow, list[RoundReport]]:
    """Execute one communication round and return the new global weights."""
    cfg = state.config
    seed = cfg.seed
    selected = select(state.selection, round_index, rng.stream(seed, rng.SELECTION, round_index))

    reports: list[RoundReport] = []
    for k in selected:
        k = int(k)
        shard = state.shards[k]
        capacity = draw_capacity(state.profiles[k], rng.stream(seed, rng.CAPACITY, k, round_index))
        if cfg.algorithm == "fedavg":
            assigned = cfg.fixed_epochs
            uploaded = capacity >= assigned
            completed = assigned if uploaded else 0.0
        else:
            assert state.pairs is not None
            outcome = execute_assignment(state.pairs[k], capacity)
            assigned = state.pairs[k].hard
            completed, uploaded = outcome.completed_epochs, outcome.uploaded
        x, y = shard.train.x, shard.train.y
        if uploaded:
            trained, pre_loss = local_train(
                weights, x, y, completed, cfg.training, rng.stream(seed, rng.TRAINING, k, round_index)
            )
        else:
            trained = None
            pre_loss, _ = loss_and_accuracy(weights, x, y)
        reports.append(
            RoundReport(k, assigned, completed, uploaded, trained, pre_loss, capacity, len(y))
        )

    uploads = [(r.num_train, r.weights) for r in reports if r.uploaded and r.weights is not None]
    new_weights = federated_average(uploads) if uploads else weights

    if cfg.algorithm != "fedavg":
        assert state.pairs is not None
        for r in reports:
            pair = state.pairs[r.client_id]
            outcome = RoundOutcome(r.completed_epochs, r.uploaded, r.capacity)
            if cfg.algorithm == "fedsae_ira":
                state.pairs[r.client_id] = ira_update(pair, outcome, cfg.predictor)
            else:
                pair = record_capacity(pair, r.capacity, cfg.predictor)
                state.pairs[r.client_id] = fassa_update(pair, outcome, cfg.predictor)

    value_reports = [
        (r.client_id, r.num_train, r.train_loss)
        for r in reports
        if r.uploaded or not cfg.uploader_values_only
    ]
    update_values(state.selection, value_reports)

    _, test_accuracy = loss_and_accuracy(new_weights, state.test_x, state.test_y)
    sample_total = sum(r.num_train for r in reports)
    train_loss = sum(r.num_train * r.train_loss for r in reports) / sample_total
    dropped = sum(1 for r in reports if not r.uploaded)
    row = MetricsRow(
        round=round_index,
        test_accuracy=test_accuracy,
        train_loss=train_loss,
        dropout_rate=dropped / len(reports),
        mean_assigned=float(np.mean([r.assigned_epochs for r in reports])),
        mean_completed=float(np.mean([r.completed_epochs for r in reports])),
    )
    return new_weights, row, reports


def run_experiment(config: ExperimentConfig, shards: list[ClientShard]) -> list[MetricsRow]:
    """Run the full training loop and return one metrics row per round."""
    state = init_state(config, shards)
    weights = ModelWeights.zeros(state.num_classes, state.dim)
    rows: list[MetricsRow] = []
    for t in range(1, config.rounds + 1):
        weights, row, _ = run_round(state, weights, t)
        rows.append(row)
    return rows
