"""Handle-force generation: open-loop profiles and a closed-loop virtual caregiver.

The caregiver is a clamped proportional tracker on position and velocity
error, reacting to plant state delayed by a fixed reaction time.  It is the
simplest model that reproduces start/overshoot/settling phenomena; its gains
are artifact choices, not measured human parameters, and reports should treat
them as such.

Scenarios come in two reference flavours:

* ``velocity``: a piecewise-linear velocity profile (trapezoids/triangles)
  that the caregiver tracks, with the position target integrated from it.
* ``force``: a piecewise-constant handle-force profile applied open loop,
  used for held-force studies (steady-state curves, comfort tuning,
  direction reversal) where a feedback user would blur the property under
  test.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, replace

from .controllers import DEFAULT_B0, ControllerConfig
from .dynamics import FrictionParams, PlantParams, PlantState

__all__ = [
    "UserModel",
    "ReferenceProfile",
    "TaskScenario",
    "user_force",
    "scenario_library",
    "comfort_step_scenario",
    "trapezoid_points",
    "triangle_points_for_distance",
    "DEFAULT_REFERENCE_ACCEL",
    "MAX_PATIENT_MASS",
]

# Reference trapezoid ramp rate [m/s^2].  Gentle enough that the tracked
# scenarios keep assisted handle forces inside the ISO 10535 drive limit.
DEFAULT_REFERENCE_ACCEL = 0.2
MAX_PATIENT_MASS = 272.0


@dataclass(frozen=True)
class UserModel:
    """Clamped proportional caregiver with a reaction delay.

    Kp_u: force per velocity error [N/(m/s)].
    Kx_u: force per position error [N/m]; supplies the integral action that
        lets the tracker hold cruise speed against steady drag.
    F_user_max: clamp on the applied handle force [N].
    reaction_delay: age of the plant state the caregiver acts on [s].
    """

    Kp_u: float = 100.0
    Kx_u: float = 50.0
    F_user_max: float = 200.0
    reaction_delay: float = 0.1

    def __post_init__(self) -> None:
        if not (self.Kp_u >= 0 and self.Kx_u >= 0 and self.F_user_max > 0
                and self.reaction_delay >= 0):
            raise ValueError(f"invalid user model: {self}")


@dataclass(frozen=True)
class ReferenceProfile:
    """Piecewise reference: velocity (linear segments) or force (zero-order hold).

    ``points`` are (time, value) breakpoints with strictly increasing times;
    the first value holds before the first breakpoint and the last one after
    the last.
    """

    kind: str
    points: tuple[tuple[float, float], ...]
    _times: tuple[float, ...] = field(default=(), repr=False)
    _positions: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("velocity", "force"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        pts = tuple((float(t), float(v)) for t, v in self.points)
        if not pts:
            raise ValueError("reference profile needs at least one point")
        times = tuple(t for t, _ in pts)
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ValueError("reference breakpoint times must strictly increase")
        if not all(math.isfinite(t) and math.isfinite(v) for t, v in pts):
            raise ValueError("reference profile contains non-finite entries")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_times", times)
        if self.kind == "velocity":
            # Cumulative trapezoid areas give the integrated position target.
            xs = [0.0]
            for (t1, v1), (t2, v2) in zip(pts, pts[1:]):
                xs.append(xs[-1] + 0.5 * (v1 + v2) * (t2 - t1))
            object.__setattr__(self, "_positions", tuple(xs))

    def value(self, t: float) -> float:
        """Reference value at time ``t`` (velocity or force, by kind)."""
        pts = self.points
        i = bisect_right(self._times, t) - 1
        if i < 0:
            return pts[0][1]
        if self.kind == "force" or i == len(pts) - 1:
            return pts[i][1]
        t1, v1 = pts[i]
        t2, v2 = pts[i + 1]
        return v1 + (v2 - v1) * (t - t1) / (t2 - t1)

    def position(self, t: float) -> float:
        """Integrated position target; only defined for velocity profiles."""
        if self.kind != "velocity":
            raise ValueError("position target requires a velocity profile")
        pts = self.points
        i = bisect_right(self._times, t) - 1
        if i < 0:
            return pts[0][1] * (t - pts[0][0])
        t1, v1 = pts[i]
        if i == len(pts) - 1:
            return self._positions[i] + v1 * (t - t1)
        t2, v2 = pts[i + 1]
        dt_ = t - t1
        slope = (v2 - v1) / (t2 - t1)
        return self._positions[i] + v1 * dt_ + 0.5 * slope * dt_ * dt_

    def final_position(self) -> float:
        return self.position(self._times[-1])


@dataclass(frozen=True)
class TaskScenario:
    """One benchmark task: plant configuration, reference motion and timing."""

    name: str
    patient_mass: float
    friction: FrictionParams
    reference: ReferenceProfile
    duration: float
    dt: float = 1e-3
    controller: ControllerConfig | None = None
    lift_mass: float = 100.0
    pendulum_length: float = 0.5
    gravity: float = 9.81
    user: UserModel = UserModel()
    initial_velocity: float = 0.0
    target_position: float | None = None
    settle_band: float = 0.05

    def __post_init__(self) -> None:
        if not self.duration > 0:
            raise ValueError(f"scenario duration must be positive, got {self.duration}")
        if not (0.0 <= self.patient_mass <= MAX_PATIENT_MASS):
            raise ValueError(
                f"patient mass must lie in [0, {MAX_PATIENT_MASS}] kg,"
                f" got {self.patient_mass}")
        if not (0.0 < self.dt <= 0.01):
            raise ValueError(f"dt must be in (0, 0.01] s, got {self.dt}")

    def plant_params(self) -> PlantParams:
        return PlantParams(m=self.lift_mass, M_p=self.patient_mass,
                           L=self.pendulum_length, g=self.gravity)


def user_force(t: float, state: PlantState, model: UserModel,
               reference: ReferenceProfile) -> float:
    """Handle force applied by the virtual caregiver at time ``t``.

    For velocity references this is the clamped proportional law
    ``Kx_u (x_ref - x) + Kp_u (v_ref - v)``; the caller is responsible for
    passing the reaction-delayed plant state.  Force references are applied
    open loop (still clamped).
    """
    if reference.kind == "force":
        f = reference.value(t)
    else:
        f = (model.Kx_u * (reference.position(t) - state.x)
             + model.Kp_u * (reference.value(t) - state.v))
    if f > model.F_user_max:
        return model.F_user_max
    if f < -model.F_user_max:
        return -model.F_user_max
    return f


def trapezoid_points(v_peak: float, hold_time: float,
                     accel: float = DEFAULT_REFERENCE_ACCEL,
                     t_start: float = 0.0) -> tuple[tuple[float, float], ...]:
    """Velocity trapezoid: ramp to ``v_peak``, hold, ramp back to rest."""
    ramp = abs(v_peak) / accel
    return ((t_start, 0.0), (t_start + ramp, v_peak),
            (t_start + ramp + hold_time, v_peak),
            (t_start + 2.0 * ramp + hold_time, 0.0))


def triangle_points_for_distance(distance: float,
                                 accel: float = DEFAULT_REFERENCE_ACCEL
                                 ) -> tuple[tuple[float, float], ...]:
    """Symmetric velocity triangle covering ``distance`` metres."""
    v_peak = math.sqrt(distance * accel)
    ramp = v_peak / accel
    return ((0.0, 0.0), (ramp, v_peak), (2.0 * ramp, 0.0))


def comfort_step_scenario(M_p: float, b0: float = DEFAULT_B0, *,
                          lift_mass: float = 100.0, pendulum_length: float = 0.5,
                          gravity: float = 9.81,
                          friction: FrictionParams = FrictionParams(),
                          v_max: float = 0.8, duration: float = 20.0,
                          dt: float = 1e-3, name: str = "comfort_step"
                          ) -> TaskScenario:
    """Held-force step sized to command the speed cap: the tuning scenario."""
    force = b0 * v_max
    return TaskScenario(
        name=name, patient_mass=M_p, friction=friction,
        reference=ReferenceProfile("force", ((0.0, force),)),
        duration=duration, dt=dt, lift_mass=lift_mass,
        pendulum_length=pendulum_length, gravity=gravity)


def scenario_library(friction: FrictionParams = FrictionParams(),
                     patient_mass: float = 130.0,
                     user: UserModel = UserModel()) -> dict[str, TaskScenario]:
    """Named benchmark scenarios, each runnable against every controller preset.

    cruise           closed-loop 0 -> 0.8 m/s -> hold -> stop.
    reversal         open-loop +30 N cruise, then -30 N held: +0.8 -> -0.8 m/s.
    point_to_point   closed-loop move 3 m and settle (overshoot task).
    sensitivity_A    30 N held, 90 kg patient, 50 N s/m floor (concrete).
    sensitivity_B    30 N held, 272 kg patient, 100 N s/m floor (carpet).
    comfort_step     30 N held from rest for the comfort-tuning check.
    """
    v_max = 0.8
    hold_force = DEFAULT_B0 * v_max
    cruise_ref = ReferenceProfile("velocity", trapezoid_points(v_max, 10.0))
    p2p_ref = ReferenceProfile("velocity", triangle_points_for_distance(3.0))
    return {
        "cruise": TaskScenario(
            name="cruise", patient_mass=patient_mass, friction=friction,
            reference=cruise_ref, duration=20.0, user=user),
        "reversal": TaskScenario(
            name="reversal", patient_mass=patient_mass, friction=friction,
            reference=ReferenceProfile("force", ((0.0, hold_force),
                                                 (1.0, -hold_force))),
            duration=20.0, user=user, initial_velocity=v_max),
        "point_to_point": TaskScenario(
            name="point_to_point", patient_mass=patient_mass, friction=friction,
            reference=p2p_ref, duration=15.0, user=user,
            target_position=p2p_ref.final_position()),
        "sensitivity_A": TaskScenario(
            name="sensitivity_A", patient_mass=90.0,
            friction=replace(friction, b_visc=50.0),
            reference=ReferenceProfile("force", ((0.0, hold_force),)),
            duration=30.0, user=user),
        "sensitivity_B": TaskScenario(
            name="sensitivity_B", patient_mass=272.0,
            friction=replace(friction, b_visc=100.0),
            reference=ReferenceProfile("force", ((0.0, hold_force),)),
            duration=30.0, user=user),
        "comfort_step": comfort_step_scenario(patient_mass, friction=friction),
    }
