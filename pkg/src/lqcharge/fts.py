"""Linear quadratic charging control with a fixed terminal state.

The user objective (target state of charge and charging duration) becomes
a hard terminal constraint on the battery state. An offline backward pass
produces, per step, a feedback gain on the state and a feedforward gain on
the terminal state; the online law is a plain gain lookup, so no real-time
optimization is needed.

The running state weight penalizes the inter-capacitor potential
difference (the health indicator) and grows over the horizon, tightening
health protection as the state of charge builds up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lqcharge.battery import (
    BatteryState,
    DiscreteSystem,
    RcParams,
    SocBounds,
    health_row,
    state_of_soc,
)
from lqcharge.errors import InvalidParameterError, PlanningError

# Above this condition number the terminal-constraint system is treated as
# numerically singular.
P_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ChargingObjective:
    """User-specified charging task: where to start, where to end, how long."""

    initial_soc: float
    target_soc: float
    duration: float  # seconds

    def __post_init__(self):
        if not 0.0 <= self.initial_soc < 1.0:
            raise InvalidParameterError("initial_soc must lie in [0, 1)")
        if not self.initial_soc < self.target_soc <= 1.0:
            raise InvalidParameterError("target_soc must exceed initial_soc and lie in (0, 1]")
        if not self.duration > 0:
            raise InvalidParameterError("duration must be positive")

    def horizon(self, ts: float) -> int:
        n = self.duration / ts
        n_int = round(n)
        if abs(n - n_int) > 1e-9 or n_int < 1:
            raise InvalidParameterError("duration must be a positive integer multiple of ts")
        return int(n_int)


@dataclass(frozen=True)
class FtsGainSchedule:
    """Per-step gains of the fixed-terminal-state charging law.

    The control at step k is u_k = -f[k] @ x - h[k] @ x_bar.
    ``p_condition`` is the worst condition number of the constraint matrix
    inverted during planning.
    """

    f: np.ndarray  # (N, 2) feedback gains
    h: np.ndarray  # (N, 2) feedforward gains on the terminal state
    x_bar: BatteryState
    horizon: int
    p_condition: float


def weight_schedule(n: int, q0: float, growth: float) -> np.ndarray:
    """Geometric per-step health weights q0 * growth^(k/n), k = 0..n-1.

    Monotone increasing for growth > 1, so health protection tightens as
    charging progresses.
    """
    if n < 1:
        raise InvalidParameterError("horizon must be at least 1")
    if not (q0 > 0 and growth > 0):
        raise InvalidParameterError("q0 and growth must be positive")
    return q0 * growth ** (np.arange(n) / n)


def plan_fts(
    sys: DiscreteSystem,
    objective: ChargingObjective,
    bounds: SocBounds,
    params: RcParams,
    weights,
    r: float = 0.1,
    s_terminal=None,
) -> FtsGainSchedule:
    """Offline backward pass of the fixed-terminal-state strategy.

    Runs the coupled recursions for the cost-to-go matrix S_k, the
    constraint transition T_k, the constraint Gramian P_k and the gains,
    then folds them into per-step feedback/feedforward gains. P_k is
    rank-deficient at the very last step for a scalar input (one step
    cannot reach an arbitrary planar state), so the final step uses the
    pseudo-inverse, which yields the exact optimal input whenever the
    constraint is still consistent. Rank deficiency at any earlier step
    means the terminal state is unreachable and raises a planning error.
    """
    n = objective.horizon(sys.ts)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (n,):
        raise InvalidParameterError("weight schedule length must equal the horizon")
    if n < 2:
        raise PlanningError(
            "terminal state unreachable: scalar input cannot fix a planar state in one step"
        )

    a, b = sys.a, sys.b
    g = health_row(params)
    x_bar = state_of_soc(objective.target_soc, bounds, params)

    s = np.zeros((2, 2)) if s_terminal is None else np.asarray(s_terminal, dtype=float)
    t = np.eye(2)
    p = np.zeros((2, 2))
    f = np.zeros((n, 2))
    h = np.zeros((n, 2))
    worst_cond = 0.0
    for k in range(n - 1, -1, -1):
        denom = (b.T @ s @ b).item() + r
        gain = (b.T @ s @ a) / denom          # K_k, (1, 2)
        gain_u = b.T / denom                  # K_k^u, (1, 2)
        p_k = p - (t.T @ b @ b.T @ t) / denom
        t_k = (a - b @ gain).T @ t

        sv = np.linalg.svd(p_k, compute_uv=False)
        cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
        if cond > P_CONDITION_LIMIT:
            if k < n - 1:
                raise PlanningError(
                    f"terminal state unreachable: constraint matrix singular at step {k}"
                )
            p_inv = np.linalg.pinv(p_k)
        else:
            worst_cond = max(worst_cond, cond)
            p_inv = np.linalg.inv(p_k)

        f[k] = (gain - gain_u @ t @ p_inv @ t_k.T).ravel()
        h[k] = (gain_u @ t @ p_inv).ravel()

        s = a.T @ s @ (a - b @ gain) + g.T * weights[k] @ g
        s = 0.5 * (s + s.T)
        t, p = t_k, p_k

    return FtsGainSchedule(f=f, h=h, x_bar=x_bar, horizon=n, p_condition=worst_cond)


def fts_control(schedule: FtsGainSchedule, x_hat, k: int) -> float:
    """Charging current at step k from the planned schedule and a state estimate."""
    if not 0 <= k < schedule.horizon:
        raise IndexError(f"step {k} outside horizon [0, {schedule.horizon})")
    x = x_hat.as_array() if isinstance(x_hat, BatteryState) else np.asarray(x_hat, dtype=float)
    return float(-schedule.f[k] @ x - schedule.h[k] @ schedule.x_bar.as_array())
