"""Health-aware EV battery charging via linear quadratic control.

An RC equivalent-circuit battery plant, a fixed-terminal-state LQ charging
controller, finite-horizon and steady-state LQ trackers, a one-step Kalman
predictor, and a closed-loop simulation harness with a CLI front end.
"""

from lqcharge.battery import (
    BatteryState,
    DiscreteSystem,
    KibamParams,
    NoiseSpec,
    RcParams,
    SocBounds,
    continuous_matrices,
    discretize,
    health_indicator,
    kibam_of_rc,
    plant_step,
    soc_of_state,
    state_of_soc,
    terminal_voltage,
)
from lqcharge.errors import (
    ConvergenceError,
    InvalidParameterError,
    PlanningError,
)
from lqcharge.fts import ChargingObjective, FtsGainSchedule, fts_control, plan_fts, weight_schedule
from lqcharge.kalman import EstimatorState, predictor_step, steady_predictor_step
from lqcharge.riccati import DareSolution, riccati_backward, solve_dare_control, solve_dare_filter
from lqcharge.tracking import (
    FiniteTrackingGains,
    ReferenceTrajectory,
    SteadyTrackingGains,
    forward_s_step,
    make_reference,
    plan_ss_tracking,
    plan_tracking,
    tracking_control,
)

__all__ = [
    "BatteryState",
    "ChargingObjective",
    "ConvergenceError",
    "DareSolution",
    "DiscreteSystem",
    "EstimatorState",
    "FiniteTrackingGains",
    "FtsGainSchedule",
    "InvalidParameterError",
    "KibamParams",
    "NoiseSpec",
    "PlanningError",
    "RcParams",
    "ReferenceTrajectory",
    "SocBounds",
    "SteadyTrackingGains",
    "continuous_matrices",
    "discretize",
    "forward_s_step",
    "fts_control",
    "health_indicator",
    "kibam_of_rc",
    "make_reference",
    "plan_fts",
    "plan_ss_tracking",
    "plan_tracking",
    "plant_step",
    "predictor_step",
    "riccati_backward",
    "soc_of_state",
    "solve_dare_control",
    "solve_dare_filter",
    "state_of_soc",
    "steady_predictor_step",
    "terminal_voltage",
    "tracking_control",
    "weight_schedule",
]
