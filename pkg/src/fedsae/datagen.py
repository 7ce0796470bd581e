"""Federated dataset construction.

Builds the synthetic non-IID classification benchmark, partitions labeled
data across clients with label skew and power-law shard sizes, and ingests
external labeled-vector data from CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import rng

TRAIN_FRACTION = 0.8
MIN_SHARD_SIZE = 2
# variance of feature j (1-based) decays as j ** FEATURE_DECAY
FEATURE_DECAY = -1.2


@dataclass(frozen=True)
class LabeledSet:
    """A feature matrix with one integer class label per row."""

    x: np.ndarray  # (n, dim) float64
    y: np.ndarray  # (n,) int64

    def __len__(self) -> int:
        return int(self.y.shape[0])


@dataclass(frozen=True)
class ClientShard:
    """One client's local data, already split into train and test."""

    client_id: int
    train: LabeledSet
    test: LabeledSet


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic non-IID dataset.

    ``alpha`` spreads the per-client shift of the label-generating model,
    ``beta`` spreads the per-client feature-mean shift. Zero for either
    collapses the corresponding heterogeneity: all governing means become
    exactly zero.
    """

    alpha: float
    beta: float
    num_clients: int
    total_samples: int
    dim: int = 60
    num_classes: int = 10
    power_law_exponent: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.num_clients < 1:
            raise ValueError("num_clients must be positive")
        if self.num_classes < 2:
            raise ValueError("num_classes must be at least 2")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.total_samples < self.num_clients:
            raise ValueError("total_samples must be at least num_clients")


@dataclass(frozen=True)
class ClientGenerator:
    """The sampled parameters that produced one synthetic client's data."""

    model_shift: float  # mean of the client's label-model entries
    feature_shift: float  # mean of the client's feature means
    w: np.ndarray  # (num_classes, dim)
    b: np.ndarray  # (num_classes,)
    feature_mean: np.ndarray  # (dim,)


def power_law_sizes(
    total: int,
    count: int,
    exponent: float,
    min_size: int = MIN_SHARD_SIZE,
) -> np.ndarray:
    """Split ``total`` into ``count`` integer sizes proportional to a power law.

    Size k is proportional to ``(k + 1) ** -exponent``; rounding uses the
    largest-remainder rule so the sizes sum to ``total`` exactly. Entries
    below ``min_size`` are lifted to it and the difference is taken from
    the largest entries.
    """
    if count < 1:
        raise ValueError("count must be positive")
    if total < min_size * count:
        raise ValueError(
            f"cannot split {total} samples into {count} shards of at least {min_size}"
        )
    ranks = np.arange(1, count + 1, dtype=float)
    weights = ranks ** -float(exponent)
    raw = total * weights / weights.sum()
    sizes = np.floor(raw).astype(int)
    fractional = raw - sizes
    short = total - int(sizes.sum())
    order = np.argsort(-fractional, kind="stable")
    sizes[order[:short]] += 1

    deficit = int(np.maximum(min_size - sizes, 0).sum())
    sizes = np.maximum(sizes, min_size)
    while deficit > 0:
        i = int(np.argmax(sizes))
        cut = min(deficit, int(sizes[i]) - min_size)
        sizes[i] -= cut
        deficit -= cut
    return sizes


def client_generator(spec: SyntheticSpec, client_id: int) -> ClientGenerator:
    """Reproduce the generating parameters of one synthetic client.

    Pure function of ``(spec.seed, client_id)``; used by tests to confirm
    that emitted labels match the stored generating model.
    """
    r = rng.stream(spec.seed, rng.CLIENT_MODEL, client_id)
    model_shift = float(r.normal(0.0, spec.alpha))
    feature_shift = float(r.normal(0.0, spec.beta))
    w = r.normal(model_shift, 1.0, size=(spec.num_classes, spec.dim))
    b = r.normal(model_shift, 1.0, size=spec.num_classes)
    feature_mean = r.normal(feature_shift, 1.0, size=spec.dim)
    return ClientGenerator(model_shift, feature_shift, w, b, feature_mean)


def _split_train_test(x: np.ndarray, y: np.ndarray, client_id: int) -> ClientShard:
    # test size = max(1, n // 5), so every client keeps at least one
    # test sample and at least one training sample (n >= MIN_SHARD_SIZE).
    n = len(y)
    n_test = max(1, n // 5)
    n_train = n - n_test
    train = LabeledSet(x[:n_train], y[:n_train])
    test = LabeledSet(x[n_train:], y[n_train:])
    return ClientShard(client_id, train, test)


def generate_synthetic(spec: SyntheticSpec) -> list[ClientShard]:
    """Generate the synthetic federated dataset described by ``spec``.

    Each client k draws a label model (w_k, b_k) around a client shift
    sampled with spread ``alpha`` and a feature mean around a shift sampled
    with spread ``beta``. Features have independent coordinates whose
    variance decays as a power of the coordinate index; labels are the
    argmax class score, which equals the argmax of the softmax. Shard sizes
    follow a power law and sum exactly to ``total_samples``.
    """
    sizes = power_law_sizes(spec.total_samples, spec.num_clients, spec.power_law_exponent)
    feature_scale = np.sqrt((np.arange(1, spec.dim + 1, dtype=float)) ** FEATURE_DECAY)
    shards: list[ClientShard] = []
    for k in range(spec.num_clients):
        gen = client_generator(spec, k)
        r = rng.stream(spec.seed, rng.CLIENT_SAMPLES, k)
        x = gen.feature_mean + r.normal(size=(int(sizes[k]), spec.dim)) * feature_scale
        y = np.argmax(x @ gen.w.T + gen.b, axis=1).astype(np.int64)
        shards.append(_split_train_test(x, y, k))
    return shards


def partition_label_skew(
    samples: LabeledSet,
    num_clients: int,
    classes_per_client: int,
    power_law_exponent: float = 1.0,
    seed: int = 0,
) -> list[ClientShard]:
    """Partition labeled data into shards with bounded label diversity.

    Every sample is assigned to exactly one client, shard sizes follow a
    power law, and each shard draws from at most ``classes_per_client``
    distinct classes. Clients are filled largest first, always taking from
    the class with the most samples left; a client opens a new class only
    when its current ones are exhausted.

    Raises ValueError when a client cannot fill its quota from its class
    budget, naming the exhausted class.
    """
    y = np.asarray(samples.y)
    num_classes = int(y.max()) + 1 if len(y) else 0
    if len(y) == 0:
        raise ValueError("cannot partition an empty dataset")
    if classes_per_client < 1 or classes_per_client > num_classes:
        raise ValueError(
            f"classes_per_client must be in [1, {num_classes}], got {classes_per_client}"
        )
    sizes = power_law_sizes(len(y), num_clients, power_law_exponent)

    pools: dict[int, np.ndarray] = {}
    cursor: dict[int, int] = {}
    for c in range(num_classes):
        idx = np.flatnonzero(y == c)
        rng.stream(seed, rng.PARTITION, c).shuffle(idx)
        pools[c] = idx
        cursor[c] = 0

    def remaining(c: int) -> int:
        return len(pools[c]) - cursor[c]

    shard_indices: list[np.ndarray | None] = [None] * num_clients
    fill_order = np.argsort(-sizes, kind="stable")
    for k in fill_order:
        need = int(sizes[k])
        open_classes: list[int] = []
        taken: list[np.ndarray] = []
        while need > 0:
            live = [c for c in open_classes if remaining(c) > 0]
            if not live:
                fresh = [c for c in range(num_classes) if c not in open_classes and remaining(c) > 0]
                if not fresh or len(open_classes) >= classes_per_client:
                    # sizes sum to the sample count, so open_classes is
                    # never empty here: the class budget ran dry.
                    culprit = open_classes[-1]
                    raise ValueError(
                        f"infeasible label skew: class {culprit} exhausted while "
                        f"client {int(k)} still needs {need} samples"
                    )
                live = [max(fresh, key=remaining)]
                open_classes.append(live[0])
            c = max(live, key=remaining)
            grab = min(need, remaining(c))
            taken.append(pools[c][cursor[c] : cursor[c] + grab])
            cursor[c] += grab
            need -= grab
        idx = np.concatenate(taken)
        rng.stream(seed, rng.SPLIT, int(k)).shuffle(idx)
        shard_indices[int(k)] = idx

    shards = []
    for k in range(num_clients):
        idx = shard_indices[k]
        assert idx is not None
        shards.append(_split_train_test(samples.x[idx], samples.y[idx], k))
    return shards


def ingest_csv(
    path: str,
    label_column: str,
    num_clients: int,
    classes_per_client: int = 0,
    power_law_exponent: float = 1.0,
    seed: int = 0,
) -> list[ClientShard]:
    """Load a labeled-vector CSV and partition it across clients.

    The first row is a header; ``label_column`` selects the integer label,
    every other column is a numeric feature. ``classes_per_client`` of 0
    means no label-diversity constraint.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"{path}: no column named {label_column!r}")
        label_idx = header.index(label_column)
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        features: list[list[float]] = []
        labels: list[int] = []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {row_num} has {len(row)} fields, expected {len(header)}"
                )
            try:
                label = int(row[label_idx])
            except ValueError:
                raise ValueError(
                    f"{path}: row {row_num}: label {row[label_idx]!r} is not an integer"
                ) from None
            if label < 0:
                raise ValueError(f"{path}: row {row_num}: label must be non-negative")
            try:
                features.append([float(row[i]) for i in feature_idx])
            except ValueError:
                raise ValueError(f"{path}: row {row_num}: non-numeric feature value") from None
            labels.append(label)
    if not labels:
        raise ValueError(f"{path}: no data rows")

    samples = LabeledSet(np.asarray(features, dtype=float), np.asarray(labels, dtype=np.int64))
    if classes_per_client <= 0:
        classes_per_client = int(samples.y.max()) + 1
    return partition_label_skew(
        samples,
        num_clients,
        classes_per_client,
        power_law_exponent=power_law_exponent,
        seed=seed,
    )
