"""h-step-ahead forecasting by Monte Carlo and by exact transition powers.

Trajectories evolve as joint pairs: each step draws one (state, state) pair
from the exact one-step joint conditional pmf given the trajectory's current
pair. Marginal forecast distributions then fall out by summation, which is
the same thing as drawing each margin from its own conditional. The exact
h-step pmf (dense transition-matrix powers) serves as the oracle for the
Monte Carlo path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Bdar1Params, transition_tensor

# Dense matrix powers become unreasonable past this many joint states.
MAX_EXACT_STATES = 10_000


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Per-step forecast frequencies and modal states from simulated trajectories.

    ``joint[h]`` marginalises exactly to ``marginal1[h]`` / ``marginal2[h]``
    (they are computed from the same counts). Modal entries break ties to the
    lowest state index (lexicographic on (z1, z2) for the joint mode), which
    keeps repeated runs stable.
    """

    horizon: int
    marginal1: np.ndarray  # (horizon, d1)
    marginal2: np.ndarray  # (horizon, d2)
    joint: np.ndarray      # (horizon, d1, d2)
    modal1: np.ndarray     # (horizon,)
    modal2: np.ndarray
    modal_joint: np.ndarray  # (horizon, 2)
    n_sims: int
    seed: int | None

    def to_json_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "n_sims": self.n_sims,
            "seed": self.seed,
            "marginal1": self.marginal1.tolist(),
            "marginal2": self.marginal2.tolist(),
            "joint": self.joint.tolist(),
            "modal1": self.modal1.tolist(),
            "modal2": self.modal2.tolist(),
            "modal_joint": self.modal_joint.tolist(),
        }


def _validate_last_state(params: Bdar1Params, last_state) -> tuple[int, int]:
    s, l = int(last_state[0]), int(last_state[1])
    if not (1 <= s <= params.d1 and 1 <= l <= params.d2):
        raise ValueError(f"last state {last_state} outside the state space")
    return s, l


def forecast(
    params: Bdar1Params,
    last_state: tuple[int, int],
    horizon: int,
    n_sims: int = 10_000,
    rng: int | np.random.Generator = 0,
) -> ForecastResult:
    """Monte Carlo forecast of the next ``horizon`` steps from ``last_state``.

    ``rng`` may be a seed (recorded in the result) or a prebuilt generator.
    Trajectory i consumes column i of the per-step uniform draws, so the
    aggregate is independent of how trajectories would be partitioned across
    workers, and a fixed seed reproduces the result exactly.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if n_sims < 1:
        raise ValueError("n_sims must be >= 1")
    s, l = _validate_last_state(params, last_state)
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        gen = np.random.default_rng(seed)
    else:
        seed = None
        gen = rng

    d1, d2 = params.d1, params.d2
    n_states = d1 * d2
    cum_rows = np.cumsum(transition_tensor(params).reshape(n_states, n_states), axis=1)
    cum_rows[:, -1] = 1.0

    current = np.full(n_sims, (s - 1) * d2 + (l - 1), dtype=np.int64)
    joint_counts = np.empty((horizon, d1, d2), dtype=np.int64)
    for h in range(horizon):
        u = gen.random(n_sims)
        nxt = np.empty(n_sims, dtype=np.int64)
        for k in np.unique(current):
            mask = current == k
            nxt[mask] = np.searchsorted(cum_rows[k], u[mask], side="right")
        joint_counts[h] = np.bincount(nxt, minlength=n_states).reshape(d1, d2)
        current = nxt

    joint = joint_counts / float(n_sims)
    marginal1 = joint.sum(axis=2)
    marginal2 = joint.sum(axis=1)
    modal1 = np.argmax(marginal1, axis=1) + 1
    modal2 = np.argmax(marginal2, axis=1) + 1
    flat_modes = np.argmax(joint.reshape(horizon, n_states), axis=1)
    modal_joint = np.stack([flat_modes // d2 + 1, flat_modes % d2 + 1], axis=1)
    return ForecastResult(
        horizon=horizon,
        marginal1=marginal1,
        marginal2=marginal2,
        joint=joint,
        modal1=modal1,
        modal2=modal2,
        modal_joint=modal_joint,
        n_sims=n_sims,
        seed=seed,
    )


def exact_forecast_pmf(
    params: Bdar1Params, last_state: tuple[int, int], horizon: int
) -> list[np.ndarray]:
    """Exact h-step joint pmfs: the point mass at ``last_state`` pushed through
    the one-step transition operator h times. Converges to the stationary
    joint pmf as h grows."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    s, l = _validate_last_state(params, last_state)
    d1, d2 = params.d1, params.d2
    n_states = d1 * d2
    if n_states > MAX_EXACT_STATES:
        raise ValueError(f"state space too large for dense powers ({n_states} joint states)")
    matrix = transition_tensor(params).reshape(n_states, n_states)
    dist = np.zeros(n_states)
    dist[(s - 1) * d2 + (l - 1)] = 1.0
    out = []
    for _ in range(horizon):
        dist = dist @ matrix
        out.append(dist.reshape(d1, d2).copy())
    return out
