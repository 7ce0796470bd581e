"""Self-adaptive workload prediction.

Each client carries a task pair (easy, hard): it is asked to attempt the
hard workload, is guaranteed credit for the easy one, and drops out when
it cannot even afford that. Two update rules move the pair between rounds:

* inverse-ratio: grow both bounds by gain/bound on success, halve on drop
  (additive-increase / multiplicative-decrease with a shrinking increment);
* threshold: keep an exponential moving average of the client's reported
  capacity and grow fast below it, slowly above it, halving on drop.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

PARTIAL_RULES = ("symmetric", "halving")


@dataclass(frozen=True)
class TaskPair:
    """Per-client workload bounds in epochs, plus the EMA threshold."""

    easy: float
    hard: float
    threshold: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.easy <= self.hard:
            raise ValueError(f"need 0 < easy <= hard, got ({self.easy}, {self.hard})")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")


@dataclass(frozen=True)
class RoundOutcome:
    """What one client did with its assignment in one round."""

    completed_epochs: float
    uploaded: bool
    capacity: float  # the workload the client could actually afford

    def __post_init__(self) -> None:
        if self.uploaded and self.completed_epochs <= 0:
            raise ValueError("an upload implies positive completed epochs")
        if self.completed_epochs > self.capacity:
            raise ValueError("completed epochs cannot exceed capacity")


@dataclass(frozen=True)
class PredictorParams:
    gain: float = 10.0  # numerator of the inverse-ratio increment
    fast_step: float = 3.0  # additive increment below the threshold
    slow_step: float = 1.0  # additive increment above the threshold
    smoothing: float = 0.95  # EMA weight kept on the old threshold
    initial_easy: float = 1.0
    initial_hard: float = 2.0
    partial_rule: str = "symmetric"

    def __post_init__(self) -> None:
        if self.gain <= 0:
            raise ValueError("gain must be positive")
        if self.fast_step <= self.slow_step or self.slow_step <= 0:
            raise ValueError("need fast_step > slow_step > 0")
        if not 0 < self.smoothing < 1:
            raise ValueError("smoothing must lie in (0, 1)")
        if not 0 < self.initial_easy < self.initial_hard:
            raise ValueError("need 0 < initial_easy < initial_hard")
        if self.partial_rule not in PARTIAL_RULES:
            raise ValueError(f"partial_rule must be one of {PARTIAL_RULES}")


def initial_pair(params: PredictorParams) -> TaskPair:
    # The threshold starts at the easy bound, keeping round one in the
    # fast-growth stage.
    return TaskPair(params.initial_easy, params.initial_hard, params.initial_easy)


def execute_assignment(pair: TaskPair, capacity: float) -> RoundOutcome:
    """Resolve one round: finish hard, fall back to easy, or drop out.

    Capacity above the hard bound completes the hard workload; capacity in
    [easy, hard] uploads the easy workload; anything less uploads nothing.
    """
    if capacity > pair.hard:
        return RoundOutcome(pair.hard, True, capacity)
    if capacity >= pair.easy:
        return RoundOutcome(pair.easy, True, capacity)
    return RoundOutcome(0.0, False, capacity)


def _ordered(lo: float, hi: float, threshold: float) -> TaskPair:
    # Increments can invert the pair (e.g. gain/easy > gain/hard grows the
    # easy bound past the hard one); return the sorted pair so easy <= hard
    # always holds.
    return TaskPair(min(lo, hi), max(lo, hi), threshold)


def ira_update(pair: TaskPair, outcome: RoundOutcome, params: PredictorParams) -> TaskPair:
    """Inverse-ratio update: grow by gain/bound on success, halve on drop."""
    cap = outcome.capacity
    if cap > pair.hard:
        lo = pair.easy + params.gain / pair.easy
        hi = pair.hard + params.gain / pair.hard
    elif cap >= pair.easy:
        grown = pair.easy + params.gain / pair.easy
        lo = min(grown, pair.hard / 2)
        hi = max(grown, pair.hard / 2)
    else:
        lo = pair.easy / 2
        hi = pair.hard / 2
    return _ordered(lo, hi, pair.threshold)


def update_threshold(threshold: float, capacity: float, smoothing: float) -> float:
    """Exponential moving average of the client's reported capacity."""
    if not 0 < smoothing < 1:
        raise ValueError("smoothing must lie in (0, 1)")
    return smoothing * threshold + (1.0 - smoothing) * capacity


def fassa_update(pair: TaskPair, outcome: RoundOutcome, params: PredictorParams) -> TaskPair:
    """Two-stage update around the EMA threshold.

    ``pair.threshold`` must already include this round's capacity report
    (apply :func:`update_threshold` first). On a full completion, a bound
    below the threshold grows by ``fast_step`` and a bound at or above it
    by ``slow_step``. On a partial completion the grown easy bound is
    capped against half the hard bound, mirroring the inverse-ratio rule;
    with ``partial_rule="halving"``, a threshold already covering the easy
    bound instead pulls it down to half. A drop halves both bounds.
    """
    cap = outcome.capacity
    th = pair.threshold
    if cap > pair.hard:
        if th <= pair.easy:
            lo, hi = pair.easy + params.slow_step, pair.hard + params.slow_step
        elif th <= pair.hard:
            lo, hi = pair.easy + params.fast_step, pair.hard + params.slow_step
        else:
            lo, hi = pair.easy + params.fast_step, pair.hard + params.fast_step
    elif cap >= pair.easy:
        if params.partial_rule == "halving" and th >= pair.easy:
            lo = pair.easy / 2
            hi = max(pair.easy + params.slow_step, pair.hard / 2)
        else:
            step = params.slow_step if th >= pair.easy else params.fast_step
            grown = pair.easy + step
            lo = min(grown, pair.hard / 2)
            hi = max(grown, pair.hard / 2)
    else:
        lo, hi = pair.easy / 2, pair.hard / 2
    return _ordered(lo, hi, th)


def record_capacity(pair: TaskPair, capacity: float, params: PredictorParams) -> TaskPair:
    """Fold a capacity report into the pair's threshold."""
    return replace(pair, threshold=update_threshold(pair.threshold, capacity, params.smoothing))
