"""Closed-loop simulation harness: strategy x plant x estimator loops.

Runs one scenario deterministically (given its seed), records a full
per-step trace, derives summary metrics, and round-trips traces through
CSV. Every metric is recomputable from the emitted CSV alone.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from lqcharge import fts as fts_mod
from lqcharge import tracking as trk_mod
from lqcharge.battery import (
    NoiseSpec,
    discretize,
    health_indicator,
    plant_step,
    soc_of_state,
    state_of_soc,
)
from lqcharge.errors import PlanningError
from lqcharge.kalman import EstimatorState, predictor_step, steady_predictor_step
from lqcharge.scenario import Scenario

CSV_COLUMNS = (
    "k", "t_s", "u_A", "y_V", "qb_C", "qs_C",
    "qb_hat_C", "qs_hat_C", "soc", "health_V", "rb_C", "rs_C",
)


@dataclass(frozen=True)
class SimTrace:
    """Per-step closed-loop record, length N+1.

    Row k holds the state at step k and the input applied at step k
    (zero in the final row, where charging has ended). Reference columns
    are NaN for non-tracking strategies.
    """

    k: np.ndarray
    t: np.ndarray
    u: np.ndarray
    y: np.ndarray
    qb: np.ndarray
    qs: np.ndarray
    qb_hat: np.ndarray
    qs_hat: np.ndarray
    soc: np.ndarray
    health: np.ndarray
    rb: np.ndarray
    rs: np.ndarray

    def columns(self):
        return (self.k, self.t, self.u, self.y, self.qb, self.qs,
                self.qb_hat, self.qs_hat, self.soc, self.health, self.rb, self.rs)


@dataclass(frozen=True)
class Metrics:
    """Summary numbers for one run; all derivable from the trace."""

    final_soc: float
    target_soc: float
    soc_error: float
    max_abs_health: float
    mean_abs_health_quarters: tuple
    total_charge_c: float
    peak_current_a: float
    rms_tracking_error: float  # NaN for non-tracking strategies


def _plan(scenario: Scenario, sys):
    """Build the per-step control callable for the scenario's strategy."""
    obj = scenario.objective
    bounds = scenario.bounds
    n = obj.horizon(scenario.ts)

    if scenario.strategy == "constant-current":
        level = scenario.constant_current.current
        return (lambda x, k: level), None, "time-varying"

    if scenario.strategy == "lqcwfts":
        cfg = scenario.fts
        weights = fts_mod.weight_schedule(n, cfg.q0, cfg.growth)
        schedule = fts_mod.plan_fts(sys, obj, bounds, scenario.params, weights, r=cfg.r)
        return (lambda x, k: fts_mod.fts_control(schedule, x, k)), None, "time-varying"

    cfg = scenario.tracking
    reference = trk_mod.make_reference(obj, bounds, scenario.params, scenario.ts,
                                       tau_b=cfg.tau_b, tau_s=cfg.tau_s)
    q = np.diag(cfg.q_diag)
    if scenario.strategy == "lqt":
        gains = trk_mod.plan_tracking(sys, reference, q, cfg.r,
                                      s_terminal=cfg.s_terminal_scale * q)
        return (lambda x, k: trk_mod.tracking_control(gains, x, k)), reference, "time-varying"

    # ss-lqt
    w = scenario.noise.w_cov if scenario.noise is not None else NoiseSpec().w_cov
    v = scenario.noise.v_var if scenario.noise is not None else NoiseSpec().v_var
    gains = trk_mod.plan_ss_tracking(sys, reference, q, cfg.r, w, v)
    if cfg.forward_s:
        s_fwd = np.empty_like(gains.s_seq)
        s_fwd[0] = gains.s_seq[0]
        for k in range(reference.horizon):
            s_fwd[k + 1] = trk_mod.forward_s_step(gains, s_fwd[k], reference.r[k])
        gains = replace(gains, s_seq=s_fwd)
    control = lambda x, k: trk_mod.tracking_control(gains, x, k)
    return control, reference, gains.l_bar


def run_scenario(scenario: Scenario):
    """Run one closed-loop simulation; returns (SimTrace, Metrics)."""
    sys = discretize(scenario.params, scenario.ts)
    bounds = scenario.bounds
    n = scenario.objective.horizon(scenario.ts)
    rng = np.random.default_rng(scenario.seed)

    try:
        control, reference, estimator_gain = _plan(scenario, sys)
    except PlanningError as exc:
        raise PlanningError(
            f"planning failed for strategy {scenario.strategy!r} "
            f"(target {scenario.objective.target_soc:.0%}): {exc}"
        ) from exc

    x = state_of_soc(scenario.objective.initial_soc, bounds, scenario.params).as_array()
    est = EstimatorState(x_hat=x.copy(), sigma=np.asarray(scenario.sigma0, dtype=float))
    use_kalman = scenario.feedback == "kalman"
    steady_gain = estimator_gain if isinstance(estimator_gain, np.ndarray) else None

    w = scenario.noise.w_cov if scenario.noise is not None else np.zeros((2, 2))
    v = scenario.noise.v_var if scenario.noise is not None else 1e-12

    u_arr = np.zeros(n + 1)
    y_arr = np.zeros(n + 1)
    q_arr = np.zeros((n + 1, 2))
    qh_arr = np.zeros((n + 1, 2))
    q_arr[0] = x
    qh_arr[0] = est.x_hat
    for k in range(n):
        fb_state = est.x_hat if use_kalman else x
        u = control(fb_state, k)
        x_next, y = plant_step(sys, x, u, scenario.noise, rng)
        if steady_gain is not None:
            x_hat_next = steady_predictor_step(sys, est.x_hat, u, y, steady_gain)
            est = EstimatorState(x_hat=x_hat_next, sigma=est.sigma, k=est.k + 1)
        else:
            est = predictor_step(sys, est, u, y, w, v)
        x = x_next.as_array()
        u_arr[k] = u
        y_arr[k] = y
        q_arr[k + 1] = x
        qh_arr[k + 1] = est.x_hat
    y_arr[n] = (sys.c @ x).item()  # open-circuit reading after charging ends

    soc = np.array([soc_of_state(q_arr[i], bounds) for i in range(n + 1)])
    health = np.array([health_indicator(q_arr[i], scenario.params) for i in range(n + 1)])
    if reference is not None:
        rb, rs = reference.r[:, 0].copy(), reference.r[:, 1].copy()
    else:
        rb = np.full(n + 1, np.nan)
        rs = np.full(n + 1, np.nan)

    trace = SimTrace(
        k=np.arange(n + 1, dtype=float),
        t=np.arange(n + 1) * scenario.ts,
        u=u_arr,
        y=y_arr,
        qb=q_arr[:, 0],
        qs=q_arr[:, 1],
        qb_hat=qh_arr[:, 0],
        qs_hat=qh_arr[:, 1],
        soc=soc,
        health=health,
        rb=rb,
        rs=rs,
    )
    return trace, compute_metrics(trace, scenario.objective.target_soc)


def compute_metrics(trace: SimTrace, target_soc: float) -> Metrics:
    """Derive the summary metrics from a trace (nothing else needed)."""
    n = len(trace.k) - 1
    abs_health = np.abs(trace.health)
    quarters = tuple(
        float(np.mean(chunk)) if chunk.size else float("nan")
        for chunk in np.array_split(abs_health[:n], 4)
    )
    if np.all(np.isnan(trace.rb)):
        rms_err = float("nan")
    else:
        err = np.hypot(trace.qb - trace.rb, trace.qs - trace.rs)
        rms_err = float(np.sqrt(np.mean(err**2)))
    return Metrics(
        final_soc=float(trace.soc[-1]),
        target_soc=float(target_soc),
        soc_error=float(abs(trace.soc[-1] - target_soc)),
        max_abs_health=float(np.max(abs_health)),
        mean_abs_health_quarters=quarters,
        total_charge_c=float(trace.qb[-1] + trace.qs[-1] - trace.qb[0] - trace.qs[0]),
        peak_current_a=float(np.max(np.abs(trace.u[:n]))),
        rms_tracking_error=rms_err,
    )


def emit_csv(trace: SimTrace, path):
    """Write a trace as CSV with the documented column names.

    Floats are written with full precision (repr), so a parse/emit round
    trip is lossless.
    """
    cols = trace.columns()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in range(len(trace.k)):
            writer.writerow([repr(float(col[i])) for col in cols])


def parse_csv(path) -> SimTrace:
    """Read a trace previously written by emit_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows)
    return SimTrace(*[data[:, i] for i in range(len(CSV_COLUMNS))])


def compare_strategies(scenarios):
    """Run several scenarios and tabulate their metrics.

    Returns (rows, health_ratios): one metrics row per scenario in input
    order, and, when a constant-current baseline is present, the ratio of
    final-quarter mean |health| of each other strategy to the baseline's.
    """
    if not scenarios:
        raise ValueError("need at least one scenario to compare")
    rows = []
    for sc in scenarios:
        _, metrics = run_scenario(sc)
        label = sc.label or f"{sc.strategy}->{sc.objective.target_soc:.0%}"
        rows.append((label, sc.strategy, metrics))

    health_ratios = {}
    baseline = next((m for _, s, m in rows if s == "constant-current"), None)
    if baseline is not None and baseline.mean_abs_health_quarters[-1] > 0:
        for label, strategy, metrics in rows:
            if strategy != "constant-current":
                health_ratios[label] = (
                    metrics.mean_abs_health_quarters[-1]
                    / baseline.mean_abs_health_quarters[-1]
                )
    return rows, health_ratios


def format_summary(rows, health_ratios):
    """Plain-text table for the compare output."""
    header = (
        f"{'scenario':32s} {'strategy':16s} {'final_soc':>10s} {'soc_err':>9s} "
        f"{'max|h| V':>10s} {'h_q4 V':>10s} {'peak_A':>8s} {'h_q4/cc':>8s}"
    )
    lines = [header, "-" * len(header)]
    for label, strategy, m in rows:
        ratio = health_ratios.get(label)
        lines.append(
            f"{label:32s} {strategy:16s} {m.final_soc:10.4f} {m.soc_error:9.2e} "
            f"{m.max_abs_health:10.3e} {m.mean_abs_health_quarters[-1]:10.3e} "
            f"{m.peak_current_a:8.3f} "
            + (f"{ratio:8.3f}" if ratio is not None else f"{'-':>8s}")
        )
    return "\n".join(lines)
