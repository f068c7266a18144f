"""Second-order RC equivalent-circuit battery model.

The plant is a two-capacitor circuit: a bulk capacitor (capacity storage)
and a surface capacitor (fast surface effects), coupled through their
series resistances. States are the charges held by the two capacitors,
the input is the charging current, the output is the terminal voltage.
The model conserves charge: one ampere for one sampling period deposits
exactly ``ts`` coulombs, split between the two capacitors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from lqcharge.errors import InvalidParameterError

# Saft lithium-ion pack constants; nominal capacity 7 Ah.
DEFAULT_CAPACITY_C = 7.0 * 3600.0


@dataclass(frozen=True)
class RcParams:
    """Equivalent-circuit constants (farads and ohms).

    The usual regime has the bulk capacitor and its resistance much larger
    than their surface counterparts; leaving that regime is allowed but
    flagged with a warning.
    """

    c_b: float = 82e3
    c_s: float = 4.074e3
    r_b: float = 1.1e-3
    r_s: float = 0.4e-3
    r_o: float = 1.2e-3

    def __post_init__(self):
        for name in ("c_b", "c_s", "r_b", "r_s", "r_o"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be strictly positive")
        if not (self.c_b > self.c_s and self.r_b > self.r_s):
            warnings.warn(
                "expected bulk-dominant regime c_b > c_s and r_b > r_s",
                stacklevel=2,
            )


@dataclass(frozen=True)
class KibamParams:
    """Two-well kinetic battery model parameters equivalent to the RC circuit."""

    s1: float  # available-charge well area
    s2: float  # bound-charge well area
    p: float   # inter-well flow coefficient
    c: float   # current split ratio, in (0, 1)

    def __post_init__(self):
        if not (self.s1 > 0 and self.s2 > 0 and self.p > 0):
            raise InvalidParameterError("well areas and flow coefficient must be positive")
        if not 0 < self.c < 1:
            raise InvalidParameterError("current split ratio must lie in (0, 1)")

    def state_matrix(self) -> np.ndarray:
        """Continuous-time state matrix of the two-well charge dynamics."""
        return np.array(
            [
                [-self.p / self.s1, self.p / self.s2],
                [self.p / self.s1, -self.p / self.s2],
            ]
        )

    def input_matrix(self) -> np.ndarray:
        return np.array([[self.c], [1.0 - self.c]])


@dataclass(frozen=True)
class BatteryState:
    """Charges (coulombs) held by the bulk and surface capacitors."""

    q_b: float
    q_s: float

    def as_array(self) -> np.ndarray:
        return np.array([self.q_b, self.q_s])

    @classmethod
    def from_array(cls, x) -> "BatteryState":
        return cls(float(x[0]), float(x[1]))


def _state_vec(x) -> np.ndarray:
    if isinstance(x, BatteryState):
        return x.as_array()
    return np.asarray(x, dtype=float).reshape(2)


@dataclass(frozen=True)
class SocBounds:
    """Unusable and maximum allowed charge per capacitor (coulombs)."""

    q_b_min: float
    q_b_max: float
    q_s_min: float
    q_s_max: float

    def __post_init__(self):
        if not (self.q_b_min >= 0 and self.q_s_min >= 0):
            raise InvalidParameterError("minimum charges must be non-negative")
        if not (self.q_b_max > self.q_b_min and self.q_s_max > self.q_s_min):
            raise InvalidParameterError("maximum charge must exceed minimum charge")

    @property
    def usable_capacity(self) -> float:
        return (self.q_b_max - self.q_b_min) + (self.q_s_max - self.q_s_min)

    @classmethod
    def from_capacity(cls, params: RcParams, capacity_c: float = DEFAULT_CAPACITY_C) -> "SocBounds":
        """Zero floors; usable capacity split proportionally to capacitance.

        The proportional split keeps the overall state of charge consistent
        with the equilibrium weighting c_b/(c_b+c_s), c_s/(c_b+c_s).
        """
        total = params.c_b + params.c_s
        return cls(
            q_b_min=0.0,
            q_b_max=capacity_c * params.c_b / total,
            q_s_min=0.0,
            q_s_max=capacity_c * params.c_s / total,
        )


@dataclass(frozen=True)
class DiscreteSystem:
    """Zero-order-hold discretization of the RC circuit.

    Invariants: [1 1] a = [1 1] and [1 1] b = ts (charge conservation).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: float
    ts: float


def _noise_cov_default():
    return np.diag([1e-4, 1e-4])


@dataclass(frozen=True)
class NoiseSpec:
    """Process covariance (C^2) and measurement variance (V^2) for the plant."""

    w_cov: np.ndarray = field(default_factory=_noise_cov_default)
    v_var: float = 1e-6  # (1 mV)^2


def continuous_matrices(params: RcParams):
    """State-space matrices (A_c, B_c, C_c, D_c) of the RC circuit.

    States are the capacitor charges, input is the charging current,
    output is the terminal voltage.
    """
    cb, cs, rb, rs, ro = params.c_b, params.c_s, params.r_b, params.r_s, params.r_o
    r = rb + rs
    a = np.array(
        [
            [-1.0 / (cb * r), 1.0 / (cs * r)],
            [1.0 / (cb * r), -1.0 / (cs * r)],
        ]
    )
    b = np.array([[rs / r], [rb / r]])
    c = np.array([[rs / (cb * r), rb / (cs * r)]])
    d = ro + rb * rs / r
    return a, b, c, d


def discretize(params: RcParams, ts: float) -> DiscreteSystem:
    """Exact zero-order-hold discretization with sampling period ts.

    Computed through the augmented matrix exponential, which preserves the
    charge-conservation row sums to machine precision.
    """
    if not ts > 0:
        raise InvalidParameterError("sampling period must be strictly positive")
    ac, bc, cc, dc = continuous_matrices(params)
    m = np.zeros((3, 3))
    m[:2, :2] = ac * ts
    m[:2, 2:] = bc * ts
    em = expm(m)
    return DiscreteSystem(a=em[:2, :2], b=em[:2, 2:], c=cc, d=dc, ts=ts)


def soc_of_state(x, bounds: SocBounds) -> float:
    """Overall state of charge of a battery state.

    Not clamped: values outside [0, 1] are returned as-is so that
    overshoot is visible to callers.
    """
    q = _state_vec(x)
    num = (q[0] - bounds.q_b_min) + (q[1] - bounds.q_s_min)
    return float(num / bounds.usable_capacity)


def state_of_soc(soc: float, bounds: SocBounds, params: RcParams) -> BatteryState:
    """Equilibrium state (equal capacitor voltages) at a given state of charge."""
    if not 0.0 <= soc <= 1.0:
        raise InvalidParameterError("state of charge must lie in [0, 1]")
    total_charge = soc * bounds.usable_capacity + bounds.q_b_min + bounds.q_s_min
    # Equal voltages: q_b / c_b = q_s / c_s, with q_b + q_s = total_charge.
    frac = params.c_b / (params.c_b + params.c_s)
    return BatteryState(q_b=frac * total_charge, q_s=(1.0 - frac) * total_charge)


def terminal_voltage(sys: DiscreteSystem, x, i: float) -> float:
    """Measured terminal voltage for state x under current i."""
    q = _state_vec(x)
    return float((sys.c @ q).item() + sys.d * i)


def health_row(params: RcParams) -> np.ndarray:
    """Row vector mapping a state to the inter-capacitor potential difference."""
    return np.array([[-1.0 / params.c_b, 1.0 / params.c_s]])


def health_indicator(x, params: RcParams) -> float:
    """Potential difference V_s - V_b, the charging-stress proxy.

    Large magnitudes correspond to steep internal concentration gradients
    and hence accelerated degradation.
    """
    q = _state_vec(x)
    return float(-q[0] / params.c_b + q[1] / params.c_s)


def kibam_of_rc(params: RcParams) -> KibamParams:
    """Kinetic-battery-model parameters whose two-well dynamics match the RC circuit."""
    r = params.r_b + params.r_s
    return KibamParams(s1=params.c_b, s2=params.c_s, p=1.0 / r, c=params.r_s / r)


def plant_step(sys: DiscreteSystem, x, u: float, noise: NoiseSpec | None, rng):
    """Advance the ground-truth plant one step and measure the output.

    Returns (next state, measured voltage at the current step). With
    ``noise=None`` the step is exact; otherwise zero-mean Gaussian process
    and measurement noise are drawn from ``rng``.
    """
    q = _state_vec(x)
    y = float((sys.c @ q).item() + sys.d * u)
    q_next = sys.a @ q + sys.b.ravel() * u
    if noise is not None:
        w_cov = np.asarray(noise.w_cov, dtype=float)
        y += rng.normal(scale=np.sqrt(noise.v_var))
        q_next = q_next + rng.multivariate_normal(np.zeros(2), w_cov)
    return BatteryState.from_array(q_next), y
