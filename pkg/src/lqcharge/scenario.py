"""Scenario configuration: typed settings plus a TOML file loader.

A scenario file is a flat, human-editable TOML document with sections
``[battery]``, ``[simulation]``, ``[objective]``, ``[strategy]`` and
``[noise]``; every key has a default except the strategy name and the
objective. See the repository README for the full key reference.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass, field, replace

import numpy as np

from lqcharge.battery import DEFAULT_CAPACITY_C, NoiseSpec, RcParams, SocBounds
from lqcharge.errors import InvalidParameterError
from lqcharge.fts import ChargingObjective

STRATEGIES = ("lqcwfts", "lqt", "ss-lqt", "constant-current")
FEEDBACK_MODES = ("true-state", "kalman")


@dataclass(frozen=True)
class FtsSettings:
    """Fixed-terminal-state strategy weights."""

    q0: float = 0.1
    growth: float = 5e7
    r: float = 0.1


@dataclass(frozen=True)
class TrackingSettings:
    """Weights and reference time constants for both trackers.

    ``tau_b``/``tau_s`` default to a quarter of the charging duration.
    ``s_terminal_scale`` sets S_N = scale * Q for the finite-horizon
    tracker; the steady-state tracker always uses its DARE solution.
    ``forward_s`` switches the steady-state tracker to the forward
    s recursion (round-off grows with the horizon; off by default).
    """

    q_diag: tuple = (1e-4, 1e-2)
    r: float = 0.1
    tau_b: float | None = None
    tau_s: float | None = None
    s_terminal_scale: float = 1e3
    forward_s: bool = False


@dataclass(frozen=True)
class ConstantCurrentSettings:
    """Open-loop baseline: a fixed current for the whole duration."""

    current: float = 2.275


@dataclass(frozen=True)
class Scenario:
    """Everything needed for one reproducible closed-loop run."""

    objective: ChargingObjective
    strategy: str
    params: RcParams = field(default_factory=RcParams)
    capacity_c: float = DEFAULT_CAPACITY_C
    ts: float = 1.0
    seed: int = 0
    feedback: str = "kalman"
    noise: NoiseSpec | None = field(default_factory=NoiseSpec)
    sigma0: np.ndarray = field(default_factory=lambda: np.diag([100.0, 100.0]))
    fts: FtsSettings = field(default_factory=FtsSettings)
    tracking: TrackingSettings = field(default_factory=TrackingSettings)
    constant_current: ConstantCurrentSettings = field(default_factory=ConstantCurrentSettings)
    label: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidParameterError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.feedback not in FEEDBACK_MODES:
            raise InvalidParameterError(f"unknown feedback mode {self.feedback!r}")
        self.objective.horizon(self.ts)  # validates integrality

    @property
    def bounds(self) -> SocBounds:
        return SocBounds.from_capacity(self.params, self.capacity_c)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=int(seed))


def load_scenario(path) -> Scenario:
    """Parse a scenario TOML file into a validated Scenario."""
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)

    bat = doc.get("battery", {})
    params = RcParams(
        c_b=bat.get("c_b", 82e3),
        c_s=bat.get("c_s", 4.074e3),
        r_b=bat.get("r_b", 1.1e-3),
        r_s=bat.get("r_s", 0.4e-3),
        r_o=bat.get("r_o", 1.2e-3),
    )
    capacity_c = bat.get("capacity_c", DEFAULT_CAPACITY_C)

    sim = doc.get("simulation", {})
    obj = doc.get("objective", {})
    try:
        objective = ChargingObjective(
            initial_soc=obj["initial_soc"],
            target_soc=obj["target_soc"],
            duration=obj["duration"],
        )
        strat = doc["strategy"]
        name = strat["name"]
    except KeyError as exc:
        raise InvalidParameterError(f"scenario file missing required key: {exc}") from exc

    fts = FtsSettings(
        q0=strat.get("q0", 0.1),
        growth=strat.get("growth", 5e7),
        r=strat.get("r", 0.1),
    )
    tracking = TrackingSettings(
        q_diag=tuple(strat.get("q_diag", (1e-4, 1e-2))),
        r=strat.get("r", 0.1),
        tau_b=strat.get("tau_b"),
        tau_s=strat.get("tau_s"),
        s_terminal_scale=strat.get("s_terminal_scale", 1e3),
        forward_s=strat.get("forward_s", False),
    )
    cc = ConstantCurrentSettings(current=strat.get("current", 2.275))

    noise_doc = doc.get("noise", {})
    if noise_doc.get("enabled", True):
        noise = NoiseSpec(
            w_cov=np.diag(noise_doc.get("w_diag", (1e-4, 1e-4))),
            v_var=noise_doc.get("v_var", 1e-6),
        )
    else:
        noise = None
    sigma0 = np.diag(noise_doc.get("sigma0_diag", (100.0, 100.0)))

    return Scenario(
        objective=objective,
        strategy=name,
        params=params,
        capacity_c=capacity_c,
        ts=sim.get("ts", 1.0),
        seed=sim.get("seed", 0),
        feedback=sim.get("feedback", "kalman"),
        noise=noise,
        sigma0=sigma0,
        fts=fts,
        tracking=tracking,
        constant_current=cc,
        label=doc.get("label", ""),
    )
