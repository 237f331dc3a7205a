"""Case-study simulator: a ground vehicle approaching a stationary target.

Planar model with longitudinal emphasis. A mode controller picks the
longitudinal action from the clearance to a stationary target vehicle
(cruise, follow, light brake, strong brake); brake-health states degrade
every braking command by a fixed delivery fraction. The four lateral
states are held near zero by a critically damped regulator, standing in
for the lane-keeping loop in this straight single-lane scenario.

State vector layout (order is fixed and shared with the discretization):
0 forward velocity [m/s], 1 sideward velocity [m/s], 2 yaw rate [rad/s],
3 x-position [m], 4 y-position [m], 5 yaw [rad].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .bpa import TopEvent
from .cellspace import SpaceSpec
from .configuration import ComponentMatrix, ConfigTransitionModel
from .mapper import DynamicsModel

__all__ = [
    "BrakeState",
    "CaseStudy",
    "ControllerMode",
    "GroundVehicleModel",
    "ScenarioParams",
    "VehicleState",
    "commanded_accel",
    "make_case_study",
    "mode_of",
]

IDX_V_FWD, IDX_V_SIDE, IDX_YAW_RATE, IDX_X, IDX_Y, IDX_YAW = range(6)

STATE_NAMES = ("Fwd Vel.", "Side Vel.", "Yaw Rate", "x-Pos", "y-Pos", "Yaw")


class BrakeState(enum.IntEnum):
    """Brake-system health; the value is the 1-based component state index."""

    NORMAL = 1
    MINOR_FAULT = 2
    MAJOR_FAULT = 3

    @property
    def delivery(self) -> float:
        """Fraction of a braking command the actuator actually delivers."""
        return {1: 1.0, 2: 0.5, 3: 0.25}[int(self)]


class ControllerMode(enum.Enum):
    LANE_TRACKING = "lane-tracking"
    VEHICLE_FOLLOWING = "vehicle-following"
    LIGHT_BRAKE = "light-brake"
    STRONG_BRAKE = "strong-brake"


@dataclass(eq=False)
class VehicleState:
    v_fwd: float
    v_side: float = 0.0
    yaw_rate: float = 0.0
    x_pos: float = 0.0
    y_pos: float = 0.0
    yaw: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.v_fwd, self.v_side, self.yaw_rate, self.x_pos, self.y_pos, self.yaw]
        )

    @classmethod
    def from_array(cls, x: np.ndarray) -> VehicleState:
        return cls(*(float(v) for v in x))


@dataclass(frozen=True)
class ScenarioParams:
    """Scenario geometry, contingency thresholds and controller tuning.

    Baseline thresholds scale with speed (light at t_gap_des * v, strong at
    half that); setting the fixed_* clearances freezes them instead, as the
    revised contingency does. Gains are tuning values, not scenario facts.
    """

    speed_limit: float = 15.0
    target_x: float = 500.0
    sensor_range: float = 100.0
    t_gap_des: float = 1.3
    light_brake_g: float = -0.3
    strong_brake_g: float = -0.8
    gravity: float = 9.81
    fixed_light_clearance: float | None = None
    fixed_strong_clearance: float | None = None
    comfort_g: float = 0.2
    k_speed: float = 0.5          # cruise speed-tracking gain [1/s]
    k_gap: float = 1.2            # approach-profile tracking gain [1/s]
    standstill_clearance: float = 2.0  # where the approach profile stops [m]
    lateral_omega: float = 1.0    # lateral regulator natural frequency [1/s]
    substeps: int = 16

    @property
    def comfort_accel(self) -> float:
        return self.comfort_g * self.gravity

    @property
    def light_accel(self) -> float:
        return self.light_brake_g * self.gravity

    @property
    def strong_accel(self) -> float:
        return self.strong_brake_g * self.gravity

    def thresholds(self, v_fwd: float) -> tuple[float, float]:
        """(light, strong) clearance thresholds at the given speed."""
        if self.fixed_light_clearance is not None:
            light = self.fixed_light_clearance
            strong = (
                self.fixed_strong_clearance
                if self.fixed_strong_clearance is not None
                else light / 2.0
            )
        else:
            light = self.t_gap_des * v_fwd
            strong = light / 2.0
        return light, strong


def mode_of(state: VehicleState, params: ScenarioParams) -> ControllerMode:
    """Controller mode from clearance alone; no hidden memory."""
    c = params.target_x - state.x_pos
    if c > params.sensor_range:
        return ControllerMode.LANE_TRACKING
    light, strong = params.thresholds(state.v_fwd)
    if c < strong:
        return ControllerMode.STRONG_BRAKE
    if c < light:
        return ControllerMode.LIGHT_BRAKE
    return ControllerMode.VEHICLE_FOLLOWING


def _approach_speed(c: float, params: ScenarioParams) -> float:
    """Comfort-braking speed profile that stops standstill_clearance short."""
    margin = max(0.0, c - params.standstill_clearance)
    return min(params.speed_limit, math.sqrt(2.0 * params.comfort_accel * margin))


def commanded_accel(
    state: VehicleState, mode: ControllerMode, params: ScenarioParams
) -> float:
    """Longitudinal acceleration the controller asks for in a given mode."""
    comf = params.comfort_accel
    if mode is ControllerMode.LANE_TRACKING:
        a = params.k_speed * (params.speed_limit - state.v_fwd)
        return float(np.clip(a, -comf, comf))
    if mode is ControllerMode.VEHICLE_FOLLOWING:
        c = params.target_x - state.x_pos
        a = params.k_gap * (_approach_speed(c, params) - state.v_fwd)
        return float(np.clip(a, -comf, comf))
    if mode is ControllerMode.LIGHT_BRAKE:
        return params.light_accel
    return params.strong_accel


class GroundVehicleModel(DynamicsModel):
    """Vectorized one-step integrator for the scenario vehicle."""

    def __init__(self, params: ScenarioParams, name: str = "agv"):
        self.params = params
        self.name = name

    def step(self, x: np.ndarray, n: tuple[int, ...], dt: float) -> np.ndarray:
        return self.step_many(np.asarray(x, dtype=float)[None, :], n, dt)[0]

    def step_many(self, xs: np.ndarray, n: tuple[int, ...], dt: float) -> np.ndarray:
        """Advance a batch of states one time step under a fixed brake state.

        The interval is sub-stepped with the mode re-evaluated each sub-step
        so trajectories can cross contingency thresholds mid-step. Braking
        commands (negative) are scaled by the brake delivery fraction;
        traction is unaffected. Forward velocity floors at zero and position
        advances by trapezoidal integration.
        """
        if dt <= 0:
            raise ValueError("dt must be positive")
        p = self.params
        delivery = BrakeState(n[0]).delivery
        out = np.array(xs, dtype=float)
        if out.ndim != 2 or out.shape[1] != 6:
            raise ValueError(f"state batch must be (N, 6), got {out.shape}")
        h = dt / p.substeps
        comf = p.comfort_accel
        omega = p.lateral_omega

        v = out[:, IDX_V_FWD]
        x = out[:, IDX_X]
        vs = out[:, IDX_V_SIDE]
        y = out[:, IDX_Y]
        yr = out[:, IDX_YAW_RATE]
        yaw = out[:, IDX_YAW]

        for _ in range(p.substeps):
            c = p.target_x - x
            if p.fixed_light_clearance is not None:
                light = np.full_like(c, p.fixed_light_clearance)
                strong = np.full_like(
                    c,
                    p.fixed_strong_clearance
                    if p.fixed_strong_clearance is not None
                    else p.fixed_light_clearance / 2.0,
                )
            else:
                light = p.t_gap_des * v
                strong = light / 2.0

            a_cruise = np.clip(p.k_speed * (p.speed_limit - v), -comf, comf)
            margin = np.maximum(0.0, c - p.standstill_clearance)
            v_des = np.minimum(p.speed_limit, np.sqrt(2.0 * comf * margin))
            a_follow = np.clip(p.k_gap * (v_des - v), -comf, comf)

            a_cmd = np.select(
                [c > p.sensor_range, c < strong, c < light],
                [a_cruise, np.full_like(c, p.strong_accel), np.full_like(c, p.light_accel)],
                default=a_follow,
            )
            a_app = np.where(a_cmd < 0.0, a_cmd * delivery, a_cmd)

            v_new = np.maximum(0.0, v + h * a_app)
            x += h * 0.5 * (v + v_new)
            v[:] = v_new

            # Critically damped pairs (y, v_side) and (yaw, yaw_rate),
            # semi-implicit Euler; stable at omega * h << 1.
            vs += h * (-(omega**2) * y - 2.0 * omega * vs)
            y += h * vs
            yr += h * (-(omega**2) * yaw - 2.0 * omega * yr)
            yaw += h * yr

        if not np.all(np.isfinite(out)):
            raise FloatingPointError("vehicle integration produced non-finite state")
        return out

    def simulate_to_rest(
        self,
        state: VehicleState,
        brake: BrakeState,
        dt: float,
        max_steps: int = 10_000,
        stop_speed: float = 1e-6,
    ) -> VehicleState:
        """Step until the vehicle stops or passes the target; returns the end state."""
        x = state.as_array()
        for _ in range(max_steps):
            x = self.step(x, (int(brake),), dt)
            if x[IDX_V_FWD] <= stop_speed or x[IDX_X] > self.params.target_x + 100.0:
                break
        return VehicleState.from_array(x)


BRAKE_STEP_MATRIX = (
    (1.0 - 4e-7, 2e-7, 2e-7),
    (0.0, 1.0, 0.0),
    (0.0, 0.0, 1.0),
)


@dataclass(frozen=True)
class CaseStudy:
    model: GroundVehicleModel
    spec: SpaceSpec
    config_model: ConfigTransitionModel
    event: TopEvent
    dt: float
    depth: int
    truncation: float
    params: ScenarioParams


def make_case_study(variant: str = "baseline") -> CaseStudy:
    """Assemble the full collision scenario for a named contingency variant.

    baseline: speed-scaled brake thresholds (1.3 s time gap), search depth 2.
    modified: 2 s time gap with fixed 30 m / 15 m thresholds, search depth 3.
    """
    if variant not in ("baseline", "modified"):
        raise ValueError(f"unknown variant {variant!r}")
    pi = math.pi
    spec = SpaceSpec(
        names_x=STATE_NAMES,
        names_n=("Brake State",),
        lower=(0.0, -5.0, -0.5, 0.0, -6.0, -pi / 3),
        upper=(20.0, 5.0, 0.5, 600.0, 6.0, pi / 3),
        partitions=(5, 1, 1, 150, 1, 1),
        states=(3,),
    )
    config_model = ConfigTransitionModel(
        matrices=(ComponentMatrix(0, np.array(BRAKE_STEP_MATRIX)),)
    )
    event = TopEvent(
        lower=(0.0, -0.5, -0.5, 500.0, -6.0, -pi / 3),
        upper=(20.0, 0.5, 0.5, 600.0, 6.0, pi / 3),
        configs=frozenset({(1,), (2,), (3,)}),
    )
    if variant == "baseline":
        params = ScenarioParams(t_gap_des=1.3)
        depth = 2
    else:
        params = ScenarioParams(
            t_gap_des=2.0, fixed_light_clearance=30.0, fixed_strong_clearance=15.0
        )
        depth = 3
    model = GroundVehicleModel(params, name=f"agv-{variant}")
    return CaseStudy(
        model=model,
        spec=spec,
        config_model=config_model,
        event=event,
        dt=2.0 / 3.0,
        depth=depth,
        truncation=1e-8,
        params=params,
    )
