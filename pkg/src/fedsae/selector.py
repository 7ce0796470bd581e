"""Client selection: loss-driven weighting for the first rounds, uniform after.

A client's training value is sqrt(sample count) times its last reported
mean loss; selection probabilities are a scaled softmax over the values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass
class SelectionState:
    values: np.ndarray  # one training value per client
    scale: float  # multiplier applied to values before the softmax
    al_rounds: int  # rounds that use value-weighted selection
    clients_per_round: int

    def __post_init__(self) -> None:
        if self.clients_per_round < 1 or self.clients_per_round > len(self.values):
            raise ValueError("clients_per_round must lie in [1, num_clients]")
        if self.al_rounds < 0:
            raise ValueError("al_rounds must be non-negative")


def make_state(
    num_clients: int, scale: float, al_rounds: int, clients_per_round: int
) -> SelectionState:
    # Values start at zero, so the first weighted round is uniform.
    return SelectionState(np.zeros(num_clients), scale, al_rounds, clients_per_round)


def update_values(
    state: SelectionState, reports: Iterable[tuple[int, int, float]]
) -> SelectionState:
    """Refresh values from (client_id, num_samples, mean_loss) reports.

    Clients without a report keep their previous value.
    """
    for client_id, num_samples, mean_loss in reports:
        if not 0 <= client_id < len(state.values):
            raise ValueError(f"unknown client id {client_id}")
        state.values[client_id] = np.sqrt(num_samples) * mean_loss
    return state


def selection_probabilities(state: SelectionState) -> np.ndarray:
    """Softmax of the scaled values, computed with max-subtraction."""
    z = state.scale * state.values
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def select(
    state: SelectionState, round_index: int, stream: np.random.Generator
) -> np.ndarray:
    """Pick the round's participants; returns sorted distinct client ids.

    Rounds up to ``al_rounds`` sample without replacement from the value
    softmax (draw, zero out, renormalize); later rounds sample uniformly.
    """
    n = len(state.values)
    k = state.clients_per_round
    if round_index <= state.al_rounds:
        probs = selection_probabilities(state).copy()
        available = np.ones(n, dtype=bool)
        chosen = np.empty(k, dtype=int)
        for i in range(k):
            total = probs.sum()
            if total <= 0.0:
                # the remaining mass underflowed; remaining clients tie
                probs = available.astype(float)
                total = probs.sum()
            pick = int(stream.choice(n, p=probs / total))
            chosen[i] = pick
            probs[pick] = 0.0
            available[pick] = False
    else:
        chosen = stream.choice(n, size=k, replace=False)
    return np.sort(chosen.astype(int))
