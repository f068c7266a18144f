"""Riccati recursions: finite-horizon backward passes and steady-state DAREs.

Both the control-form and filter-form discrete algebraic Riccati equations
are solved by fixed-point iteration of the Riccati map, which is simple,
dependency-free, and self-certifying through the residual reported with
every solution. The filter form is handled by transpose duality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lqcharge.errors import ConvergenceError, InvalidParameterError

DARE_TOL = 1e-12
# The closed-loop spectral radius of the plant's filter DARE is ~0.9998,
# which needs ~6e4 fixed-point iterations to reach tolerance.
DARE_MAX_ITER = 200_000


@dataclass(frozen=True)
class DareSolution:
    """Stabilizing solution of a discrete algebraic Riccati equation.

    ``gain`` is the associated feedback gain (control form) or the steady
    one-step-predictor gain (filter form). ``residual`` is the max-abs
    defect of the fixed-point equation at the returned solution.
    """

    s: np.ndarray
    gain: np.ndarray
    iterations: int
    residual: float


def _sym(m):
    return 0.5 * (m + m.T)


def _control_residual(s, a, b, q, r):
    gain = np.linalg.solve(b.T @ s @ b + r, b.T @ s @ a)
    return float(np.max(np.abs(s - (a.T @ s @ (a - b @ gain) + q))))


def solve_dare_control(a, b, q, r, tol=DARE_TOL, max_iter=DARE_MAX_ITER) -> DareSolution:
    """Solve S = A'SA - A'SB (B'SB + R)^-1 B'SA + Q by fixed-point iteration.

    Requires (A, B) stabilizable, (A, Q^1/2) detectable, and R symmetric
    positive definite.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    q = _sym(np.asarray(q, dtype=float))
    r = _sym(np.atleast_2d(np.asarray(r, dtype=float)))
    if np.any(np.linalg.eigvalsh(r) <= 0):
        raise InvalidParameterError("input weight must be positive definite")

    s = q.copy()
    for it in range(1, max_iter + 1):
        gain = np.linalg.solve(b.T @ s @ b + r, b.T @ s @ a)
        s_next = _sym(a.T @ s @ (a - b @ gain) + q)
        step = np.max(np.abs(s_next - s)) / max(np.max(np.abs(s)), np.finfo(float).tiny)
        s = s_next
        if step < tol:
            break
    else:
        raise ConvergenceError(
            f"Riccati fixed-point iteration did not converge in {max_iter} steps",
            residual=_control_residual(s, a, b, q, r),
            iterations=max_iter,
        )
    gain = np.linalg.solve(b.T @ s @ b + r, b.T @ s @ a)
    return DareSolution(s=s, gain=gain, iterations=it, residual=_control_residual(s, a, b, q, r))


def solve_dare_filter(a, c, w, v, tol=DARE_TOL, max_iter=DARE_MAX_ITER) -> DareSolution:
    """Solve the filter DARE for the state-prediction covariance.

    Dual of the control form under transposition; the returned gain is the
    steady Kalman predictor gain A Sigma C' (C Sigma C' + V)^-1.
    """
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    dual = solve_dare_control(a.T, c.T, w, v, tol=tol, max_iter=max_iter)
    return DareSolution(
        s=dual.s,
        gain=dual.gain.T,
        iterations=dual.iterations,
        residual=dual.residual,
    )


def riccati_backward(a, b, q_schedule, r, s_terminal, horizon=None):
    """Finite-horizon backward Riccati pass.

    ``q_schedule`` holds one PSD state-weight matrix per step (length N).
    Returns (S_0..S_N, K_0..K_{N-1}); each S_k is symmetrized, and every
    gain uses S_{k+1} inside the inverse.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    r = np.atleast_2d(np.asarray(r, dtype=float))
    q_schedule = [np.asarray(qk, dtype=float) for qk in q_schedule]
    n = len(q_schedule) if horizon is None else int(horizon)
    if n < 1 or len(q_schedule) != n:
        raise InvalidParameterError("weight schedule length must equal the horizon")

    s_list = [None] * (n + 1)
    k_list = [None] * n
    s = _sym(np.asarray(s_terminal, dtype=float))
    s_list[n] = s
    for k in range(n - 1, -1, -1):
        gain = np.linalg.solve(b.T @ s @ b + r, b.T @ s @ a)
        s = _sym(a.T @ s @ (a - b @ gain) + q_schedule[k])
        k_list[k] = gain
        s_list[k] = s
    return s_list, k_list
