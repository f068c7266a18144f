"""Linear quadratic tracking of a reference charging path.

A reference trajectory of capacitor charges is generated from the user
objective by an exponential-saturation profile; with equal time constants
for both components the reference keeps the two capacitor voltages equal,
so the health indicator is zero along the whole path.

Two trackers are provided: the finite-horizon tracker with time-varying
gains, and the steady-state tracker whose gains come from the control and
filter DAREs. Both use the same affine law u_k = -K x + K^s s_{k+1},
where s is the reference-dependent feedforward sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lqcharge.battery import DiscreteSystem, RcParams, SocBounds, state_of_soc
from lqcharge.errors import InvalidParameterError, PlanningError
from lqcharge.fts import ChargingObjective
from lqcharge.riccati import DareSolution, solve_dare_control, solve_dare_filter


@dataclass(frozen=True)
class ReferenceTrajectory:
    """Reference charges r_0..r_N (shape (N+1, 2)) with their time constants."""

    r: np.ndarray
    tau_b: float
    tau_s: float

    @property
    def horizon(self) -> int:
        return self.r.shape[0] - 1


@dataclass(frozen=True)
class FiniteTrackingGains:
    """Time-varying tracker: per-step gains and the feedforward sequence."""

    k_fb: np.ndarray   # (N, 2) feedback gains
    k_ff: np.ndarray   # (N, 2) feedforward gains
    s_seq: np.ndarray  # (N+1, 2)
    horizon: int

    def feedback(self, k):
        return self.k_fb[k]

    def feedforward(self, k):
        return self.k_ff[k]


@dataclass(frozen=True)
class SteadyTrackingGains:
    """Steady-state tracker: DARE-derived constant gains plus the s sequence.

    ``s_seq`` is computed by the backward recursion with the steady
    feedback gain substituted; ``a_closed`` and ``q`` are retained so the
    forward recursion can regenerate s step by step when desired.
    """

    k_bar: np.ndarray    # (2,)
    ks_bar: np.ndarray   # (2,)
    l_bar: np.ndarray    # (2,)
    s_seq: np.ndarray    # (N+1, 2)
    a_closed: np.ndarray # (2, 2)
    q: np.ndarray        # (2, 2)
    control_dare: DareSolution
    filter_dare: DareSolution
    horizon: int

    def feedback(self, k):
        return self.k_bar

    def feedforward(self, k):
        return self.ks_bar


def make_reference(
    objective: ChargingObjective,
    bounds: SocBounds,
    params: RcParams,
    ts: float,
    tau_b: float | None = None,
    tau_s: float | None = None,
) -> ReferenceTrajectory:
    """Exponential-saturation charging path between equilibrium states.

    Default time constants are a quarter of the charging duration for both
    components, which keeps the capacitor voltages equal along the path.
    """
    n = objective.horizon(ts)
    if tau_b is None:
        tau_b = n * ts / 4.0
    if tau_s is None:
        tau_s = n * ts / 4.0
    if not (tau_b > 0 and tau_s > 0):
        raise InvalidParameterError("time constants must be positive")

    r0 = state_of_soc(objective.initial_soc, bounds, params).as_array()
    rn = state_of_soc(objective.target_soc, bounds, params).as_array()
    k = np.arange(n + 1)
    r = np.empty((n + 1, 2))
    for j, tau in enumerate((tau_b, tau_s)):
        frac = np.expm1(-k * ts / tau) / np.expm1(-n * ts / tau)
        r[:, j] = r0[j] + frac * (rn[j] - r0[j])
    return ReferenceTrajectory(r=r, tau_b=tau_b, tau_s=tau_s)


def plan_tracking(
    sys: DiscreteSystem,
    reference: ReferenceTrajectory,
    q,
    r: float,
    s_terminal=None,
) -> FiniteTrackingGains:
    """Backward pass of the finite-horizon tracker."""
    n = reference.horizon
    a, b = sys.a, sys.b
    q = np.asarray(q, dtype=float)
    s_n = q if s_terminal is None else np.asarray(s_terminal, dtype=float)

    k_fb = np.zeros((n, 2))
    k_ff = np.zeros((n, 2))
    s_seq = np.zeros((n + 1, 2))
    s_mat = s_n.copy()
    s_seq[n] = s_n @ reference.r[n]
    for k in range(n - 1, -1, -1):
        denom = (b.T @ s_mat @ b).item() + r
        gain = (b.T @ s_mat @ a) / denom
        k_fb[k] = gain.ravel()
        k_ff[k] = b.ravel() / denom
        s_seq[k] = (a - b @ gain).T @ s_seq[k + 1] + q @ reference.r[k]
        s_mat = a.T @ s_mat @ (a - b @ gain) + q
        s_mat = 0.5 * (s_mat + s_mat.T)
    return FiniteTrackingGains(k_fb=k_fb, k_ff=k_ff, s_seq=s_seq, horizon=n)


def tracking_control(gains, x_hat, k: int) -> float:
    """Tracking law u_k = -K_k x + K_k^s s_{k+1} for either tracker."""
    if not 0 <= k < gains.horizon:
        raise IndexError(f"step {k} outside horizon [0, {gains.horizon})")
    x = np.asarray(x_hat, dtype=float).reshape(2)
    return float(-gains.feedback(k) @ x + gains.feedforward(k) @ gains.s_seq[k + 1])


def plan_ss_tracking(
    sys: DiscreteSystem,
    reference: ReferenceTrajectory,
    q,
    r: float,
    w,
    v_meas: float,
    s_terminal=None,
) -> SteadyTrackingGains:
    """Steady-state tracker: DARE gains plus the backward s sequence.

    By default the terminal feedforward weight is the control-DARE
    solution itself, which keeps the constant gain K^s consistent with
    s_N; a mismatched (much larger) terminal weight would inject a current
    spike near the end of the horizon.
    """
    n = reference.horizon
    a, b = sys.a, sys.b
    q = np.asarray(q, dtype=float)
    r_mat = np.array([[float(r)]])

    ctrl = solve_dare_control(a, b, q, r_mat)
    filt = solve_dare_filter(a, sys.c, w, v_meas)
    k_bar = ctrl.gain.ravel()
    denom = (b.T @ ctrl.s @ b).item() + float(r)
    ks_bar = b.ravel() / denom
    a_cl = a - b @ ctrl.gain
    if abs(np.linalg.det(a_cl)) < 1e-300:
        raise PlanningError("closed-loop matrix singular; forward s recursion impossible")

    s_n_mat = ctrl.s if s_terminal is None else np.asarray(s_terminal, dtype=float)
    s_seq = np.zeros((n + 1, 2))
    s_seq[n] = s_n_mat @ reference.r[n]
    for k in range(n - 1, -1, -1):
        s_seq[k] = a_cl.T @ s_seq[k + 1] + q @ reference.r[k]

    return SteadyTrackingGains(
        k_bar=k_bar,
        ks_bar=ks_bar,
        l_bar=filt.gain.ravel(),
        s_seq=s_seq,
        a_closed=a_cl,
        q=q,
        control_dare=ctrl,
        filter_dare=filt,
        horizon=n,
    )


def forward_s_step(gains: SteadyTrackingGains, s_k, r_k) -> np.ndarray:
    """One forward step of the s recursion.

    Inverts the (expansive) transpose of the stable closed-loop matrix, so
    round-off grows along the horizon; the backward-computed sequence is
    preferred for long runs. Round trip: applying the backward map to the
    result recovers s_k exactly.
    """
    s_k = np.asarray(s_k, dtype=float).reshape(2)
    r_k = np.asarray(r_k, dtype=float).reshape(2)
    return np.linalg.solve(gains.a_closed.T, s_k - gains.q @ r_k)
