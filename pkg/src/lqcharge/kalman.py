"""One-step-ahead Kalman predictor for the battery plant.

The time-varying form propagates both the state estimate and its
covariance; the steady form reuses a fixed gain from the filter DARE.
The measurement-noise variance is called ``v_meas`` throughout to avoid
clashing with the terminal voltage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from lqcharge.battery import DiscreteSystem
from lqcharge.errors import InvalidParameterError


def _default_sigma0():
    return np.diag([100.0, 100.0])


@dataclass(frozen=True)
class EstimatorState:
    """State estimate, its covariance (C^2), and the current step index."""

    x_hat: np.ndarray
    sigma: np.ndarray = field(default_factory=_default_sigma0)
    k: int = 0


def _check_psd(sigma, tol=1e-10):
    if np.max(np.abs(sigma - sigma.T)) > tol:
        raise InvalidParameterError("estimator covariance must be symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (sigma + sigma.T))) < -tol:
        raise InvalidParameterError("estimator covariance must be positive semidefinite")


def predictor_step(
    sys: DiscreteSystem,
    est: EstimatorState,
    u: float,
    y: float,
    w,
    v_meas: float,
) -> EstimatorState:
    """Advance the time-varying one-step predictor.

    Computes the gain from the current covariance, corrects the model
    prediction with the innovation, and propagates the covariance (with
    explicit symmetrization).
    """
    sigma = np.asarray(est.sigma, dtype=float)
    _check_psd(sigma)
    w = np.asarray(w, dtype=float)
    a, b, c, d = sys.a, sys.b, sys.c, sys.d

    innov_var = (c @ sigma @ c.T).item() + v_meas
    gain = (a @ sigma @ c.T) / innov_var  # (2, 1)
    x_hat = np.asarray(est.x_hat, dtype=float)
    innovation = y - (c @ x_hat).item() - d * u
    x_next = a @ x_hat + b.ravel() * u + gain.ravel() * innovation
    sigma_next = a @ sigma @ a.T + w - (a @ sigma @ c.T) @ (c @ sigma @ a.T) / innov_var
    sigma_next = 0.5 * (sigma_next + sigma_next.T)
    return EstimatorState(x_hat=x_next, sigma=sigma_next, k=est.k + 1)


def steady_predictor_step(sys: DiscreteSystem, x_hat, u: float, y: float, l_bar) -> np.ndarray:
    """One predictor step with a fixed steady gain."""
    x_hat = np.asarray(x_hat, dtype=float)
    l_bar = np.asarray(l_bar, dtype=float).reshape(2)
    innovation = y - (sys.c @ x_hat).item() - sys.d * u
    return sys.a @ x_hat + sys.b.ravel() * u + l_bar * innovation
