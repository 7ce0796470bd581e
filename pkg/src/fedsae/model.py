"""Multinomial logistic regression trained with mini-batch SGD.

Supports fractional epoch counts: the whole passes run first, then the
leftover fraction becomes a proportional number of extra iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float
    batch_size: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.learning_rate) or self.learning_rate < 0:
            raise ValueError("learning_rate must be finite and non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


@dataclass
class ModelWeights:
    """Dense parameters of a linear classifier: class scores are x @ w.T + b."""

    w: np.ndarray  # (num_classes, dim)
    b: np.ndarray  # (num_classes,)

    @classmethod
    def zeros(cls, num_classes: int, dim: int) -> "ModelWeights":
        return cls(np.zeros((num_classes, dim)), np.zeros(num_classes))

    def copy(self) -> "ModelWeights":
        return ModelWeights(self.w.copy(), self.b.copy())


def _check_dims(weights: ModelWeights, x: np.ndarray) -> None:
    if x.ndim != 2 or x.shape[1] != weights.w.shape[1]:
        raise ValueError(
            f"feature dimension {x.shape} does not match weights {weights.w.shape}"
        )


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def loss_and_accuracy(
    weights: ModelWeights, x: np.ndarray, y: np.ndarray
) -> tuple[float, float]:
    """Mean cross-entropy and top-1 accuracy of ``weights`` on ``(x, y)``."""
    _check_dims(weights, x)
    if len(y) == 0:
        raise ValueError("evaluation set is empty")
    logits = x @ weights.w.T + weights.b
    log_probs = _log_softmax(logits)
    loss = float(-log_probs[np.arange(len(y)), y].mean())
    accuracy = float((logits.argmax(axis=1) == y).mean())
    return loss, accuracy


def gradient(weights: ModelWeights, x: np.ndarray, y: np.ndarray) -> ModelWeights:
    """Exact gradient of the mean cross-entropy over the batch."""
    _check_dims(weights, x)
    if len(y) == 0:
        raise ValueError("batch is empty")
    logits = x @ weights.w.T + weights.b
    probs = np.exp(_log_softmax(logits))
    probs[np.arange(len(y)), y] -= 1.0
    return ModelWeights(probs.T @ x / len(y), probs.mean(axis=0))


def sgd_iterations(num_samples: int, batch_size: int, epochs: float) -> tuple[int, int]:
    """Split a fractional epoch count into (full passes, extra iterations).

    An epoch is ceil(n / batch_size) iterations; the fractional part maps to
    round(fraction * iterations_per_epoch), with Python's round-half-even.
    """
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    per_epoch = -(-num_samples // batch_size)
    full = int(epochs)
    extra = round((epochs - full) * per_epoch)
    return full, extra


def local_train(
    weights: ModelWeights,
    x: np.ndarray,
    y: np.ndarray,
    epochs: float,
    cfg: TrainingConfig,
    stream: np.random.Generator,
) -> tuple[ModelWeights, float]:
    """Run mini-batch SGD for a (possibly fractional) number of epochs.

    Batches come from a fresh shuffle per pass, drawn from ``stream``.
    Returns the updated weights and the mean training loss measured at the
    input weights, before any update.
    """
    _check_dims(weights, x)
    pre_loss, _ = loss_and_accuracy(weights, x, y)
    n = len(y)
    full, extra = sgd_iterations(n, cfg.batch_size, epochs)
    if full == 0 and extra == 0:
        return weights, pre_loss

    w = weights.w.copy()
    b = weights.b.copy()
    lr = cfg.learning_rate
    bs = cfg.batch_size
    per_epoch = -(-n // bs)
    passes = full + (1 if extra else 0)
    for p in range(passes):
        perm = stream.permutation(n)
        iterations = per_epoch if p < full else extra
        for i in range(iterations):
            idx = perm[i * bs : (i + 1) * bs]
            xb = x[idx]
            logits = xb @ w.T + b
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            probs[np.arange(len(idx)), y[idx]] -= 1.0
            w -= (lr / len(idx)) * (probs.T @ xb)
            b -= lr * probs.mean(axis=0)
    return ModelWeights(w, b), pre_loss
