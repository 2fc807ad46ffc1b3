"""Motorized-wheel inner loops: bounded force source tracking a desired velocity.

The electrical side of the wheel is abstracted into an ideal force source
saturating at ``F_max``.  Two velocity-loop modes are provided:

* ``"pi"``: discrete PI with clamped (anti-windup) integral state.  Default
  gains put the inner loop well above any admittance time constant so the
  virtual-dynamics outer loop stays valid.
* ``"ideal"``: solves, by bisection on the plant's own RK4 step, for the force
  that lands the next-step velocity exactly on the command.  Used to test
  controller-level properties without inner-loop artifacts.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dynamics import FrictionParams, PlantParams, PlantState, _rk4_raw

__all__ = [
    "MotorLimits",
    "VelocityLoopParams",
    "PlantContext",
    "clamp_speed",
    "cut_at_speed_cap",
    "velocity_loop_force",
    "ideal_tracking_force",
]

_IDEAL_TOL = 1e-12
_IDEAL_MAX_ITER = 80


@dataclass(frozen=True)
class MotorLimits:
    """Peak wheel force [N] and software speed cap [m/s]."""

    F_max: float = 250.0
    v_max: float = 0.8

    def __post_init__(self) -> None:
        if not (self.F_max > 0 and self.v_max > 0):
            raise ValueError(f"invalid motor limits: {self}")


@dataclass(frozen=True)
class VelocityLoopParams:
    """Inner velocity-loop configuration.

    mode: "pi" or "ideal".
    Kp: proportional gain [N per m/s].
    Ki: integral gain [N per m].
    integral_limit: anti-windup clamp on the integral state [N].
    """

    mode: str = "pi"
    Kp: float = 2000.0
    Ki: float = 4000.0
    integral_limit: float = 250.0

    def __post_init__(self) -> None:
        if self.mode not in ("pi", "ideal"):
            raise ValueError(f"unknown velocity loop mode {self.mode!r}")
        if not (self.Kp >= 0 and self.Ki >= 0 and self.integral_limit >= 0):
            raise ValueError(f"invalid velocity loop params: {self}")


@dataclass(frozen=True)
class PlantContext:
    """Plant-side information the ideal-tracking mode needs to invert a step."""

    state: PlantState
    f_user: float
    params: PlantParams
    friction: FrictionParams


def clamp_speed(v_desired: float, limits: MotorLimits) -> float:
    """Clamp a desired velocity to [-v_max, +v_max]."""
    if v_desired > limits.v_max:
        return limits.v_max
    if v_desired < -limits.v_max:
        return -limits.v_max
    return v_desired


def cut_at_speed_cap(F_d: float, v: float, limits: MotorLimits) -> float:
    """Zero any force that would push the wheel past the speed cap.

    Force-mode assistance (amplification, friction compensation) has no
    velocity command to clamp, so the cap is enforced by cutting drive force
    in the over-speed direction; braking force is always allowed.
    """
    if v >= limits.v_max and F_d > 0.0:
        return 0.0
    if v <= -limits.v_max and F_d < 0.0:
        return 0.0
    return F_d


def _clamp(value: float, bound: float) -> float:
    if value > bound:
        return bound
    if value < -bound:
        return -bound
    return value


def velocity_loop_force(v_desired: float, v_actual: float, i_term: float,
                        params: VelocityLoopParams, limits: MotorLimits,
                        dt: float, plant: PlantContext | None = None
                        ) -> tuple[float, float]:
    """One velocity-loop update; returns (motor force, next integral state).

    PI mode computes ``clamp(Kp*e + i_term, +-F_max)`` with ``e = v_desired -
    v_actual`` using the integral state as passed in, then accumulates
    ``Ki*e*dt`` into it under the anti-windup clamp.  Ideal mode requires a
    :class:`PlantContext` and returns the exact force for the next step to
    land on ``v_desired`` (integral state passes through unchanged).
    """
    if params.mode == "ideal":
        if plant is None:
            raise ValueError("ideal-tracking mode needs a PlantContext")
        force = ideal_tracking_force(v_desired, plant.state, plant.f_user,
                                     plant.params, plant.friction, limits, dt)
        return force, i_term
    e = v_desired - v_actual
    force = _clamp(params.Kp * e + i_term, limits.F_max)
    i_next = _clamp(i_term + params.Ki * e * dt, params.integral_limit)
    return force, i_next


def ideal_tracking_force(v_desired: float, state: PlantState, f_user: float,
                         params: PlantParams, friction: FrictionParams,
                         limits: MotorLimits, dt: float) -> float:
    """Motor force whose RK4 step lands the lift velocity on ``v_desired``.

    The next-step velocity is continuous and non-decreasing in the motor
    force, so bisection over the saturated force range converges; if the
    target is unreachable within +-F_max the saturated endpoint is returned.
    """
    def v_next(f_motor: float) -> float:
        return _rk4_raw(state.x, state.v, state.theta, state.omega,
                        f_user + f_motor, params.m, params.M_p, params.L,
                        params.g, friction.b_visc, friction.F_coulomb,
                        friction.v_eps, dt)[1]

    lo, hi = -limits.F_max, limits.F_max
    r_lo = v_next(lo) - v_desired
    r_hi = v_next(hi) - v_desired
    if r_lo >= 0.0:
        return lo
    if r_hi <= 0.0:
        return hi
    for _ in range(_IDEAL_MAX_ITER):
        mid = 0.5 * (lo + hi)
        r_mid = v_next(mid) - v_desired
        if abs(r_mid) < _IDEAL_TOL:
            return mid
        if r_mid < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
