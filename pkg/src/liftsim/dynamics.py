"""Longitudinal lift/patient plant: a driven cart with a hanging point-mass pendulum.

The lift body (mass ``m``) translates along one axis under user, motor and
floor-friction forces.  The patient (mass ``M_p``) hangs from the boom and is
modelled as a point mass on a massless rod of length ``L``.  The coupled
equations of motion are

    M_p L^2 th'' + M_p L x'' cos(th) + M_p g L sin(th) = 0
    (m + M_p) x'' + M_p L th'' cos(th) - M_p L w^2 sin(th) = F_ext

which solve to

    x''  = (F_ext + M_p sin(th) (g cos(th) + L w^2)) / (m + M_p sin(th)^2)
    th'' = -(x'' cos(th) + g sin(th)) / L

Integration is fixed-step classical RK4, so identical inputs always produce
bit-identical trajectories.  The applied (user + motor) force is held constant
over a step while friction is re-evaluated at every stage from the stage
velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "InvalidStateError",
    "SimulationDiverged",
    "PlantParams",
    "FrictionParams",
    "PlantState",
    "ForceBreakdown",
    "friction_force",
    "plant_derivatives",
    "step",
    "pendulum_energy",
    "THETA_LIMIT",
]

# Beyond this angle the sling model stops making sense; simulations abort.
THETA_LIMIT = math.pi / 2


class InvalidStateError(ValueError):
    """A state or input is non-finite or outside the model's domain."""


class SimulationDiverged(RuntimeError):
    """The pendulum angle left (-pi/2, pi/2) during integration."""


@dataclass(frozen=True)
class PlantParams:
    """Physical constants of the lift and suspended patient.

    Attributes:
        m: lift mass [kg], > 0.
        M_p: patient mass [kg], >= 0 (0 means an empty sling).
        L: pendulum length from boom to patient centre of mass [m], > 0.
        g: gravitational acceleration [m/s^2], > 0.
    """

    m: float = 100.0
    M_p: float = 130.0
    L: float = 0.5
    g: float = 9.81

    def __post_init__(self) -> None:
        if not (self.m > 0 and self.M_p >= 0 and self.L > 0 and self.g > 0):
            raise InvalidStateError(f"invalid plant parameters: {self}")


@dataclass(frozen=True)
class FrictionParams:
    """Floor resistance model: viscous + regularized Coulomb with stiction.

    ``v_eps`` is the regularization velocity of the tanh() dry-friction term
    and the stiction window half-width.
    """

    b_visc: float = 50.0
    F_coulomb: float = 30.0
    v_eps: float = 1e-3

    def __post_init__(self) -> None:
        if not (self.b_visc >= 0 and self.F_coulomb >= 0 and self.v_eps > 0):
            raise InvalidStateError(f"invalid friction parameters: {self}")


@dataclass(frozen=True)
class PlantState:
    """Lift position/velocity and pendulum angle/angular velocity at time t.

    ``theta`` is measured from the hanging vertical, positive toward +x.
    """

    x: float = 0.0
    v: float = 0.0
    theta: float = 0.0
    omega: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class ForceBreakdown:
    """Horizontal forces acting on the lift body [N]."""

    F_user: float = 0.0
    F_motor: float = 0.0
    F_friction: float = 0.0


def friction_force(v: float, F_applied: float, friction: FrictionParams) -> float:
    """Floor reaction force for lift velocity ``v`` under applied force ``F_applied``.

    Inside the stiction window (|v| < v_eps) with the applied force below the
    dry-friction threshold, friction exactly cancels the applied force and the
    lift stays at rest.  Otherwise the force is viscous plus tanh-regularized
    Coulomb drag, always opposing motion.
    """
    if abs(v) < friction.v_eps and abs(F_applied) <= friction.F_coulomb:
        return -F_applied
    return -friction.b_visc * v - friction.F_coulomb * math.tanh(v / friction.v_eps)


def _accel(v: float, theta: float, omega: float, f_ext: float,
           m: float, M_p: float, L: float, g: float) -> tuple[float, float]:
    """Solve the 2x2 mass matrix for (x'', th'') given total external force."""
    s = math.sin(theta)
    c = math.cos(theta)
    xdd = (f_ext + M_p * s * (g * c + L * omega * omega)) / (m + M_p * s * s)
    thdd = -(xdd * c + g * s) / L
    return xdd, thdd


def plant_derivatives(state: PlantState, forces: ForceBreakdown,
                      params: PlantParams, pinned: bool = False
                      ) -> tuple[float, float, float, float]:
    """Time derivative (x', v', th', w') of the plant state.

    ``forces`` are summed as given; no friction is recomputed here.  With
    ``pinned`` the cart is held fixed (x' = v' = 0) and only the pendulum
    evolves, which is the configuration the energy oracle is valid for.

    Raises:
        InvalidStateError: any input is non-finite or |theta| >= pi/2.
    """
    vals = (state.x, state.v, state.theta, state.omega,
            forces.F_user, forces.F_motor, forces.F_friction)
    if not all(math.isfinite(val) for val in vals):
        raise InvalidStateError(f"non-finite state or force: {state}, {forces}")
    if abs(state.theta) >= THETA_LIMIT:
        raise InvalidStateError(f"|theta| >= pi/2: theta={state.theta}")
    if pinned:
        thdd = -params.g * math.sin(state.theta) / params.L
        return 0.0, 0.0, state.omega, thdd
    f_ext = forces.F_user + forces.F_motor + forces.F_friction
    xdd, thdd = _accel(state.v, state.theta, state.omega, f_ext,
                       params.m, params.M_p, params.L, params.g)
    return state.v, xdd, state.omega, thdd


def _rk4_raw(x: float, v: float, theta: float, omega: float, f_app: float,
             m: float, M_p: float, L: float, g: float,
             b_visc: float, F_c: float, v_eps: float, dt: float,
             pinned: bool = False) -> tuple[float, float, float, float]:
    """One classical RK4 step on raw floats.

    ``f_app`` (user + motor) is zero-order held; friction is re-evaluated at
    every stage from the stage velocity.  Shared by :func:`step` and the
    simulation engine so both advance the plant with bit-identical arithmetic.
    """
    def deriv(vv: float, th: float, om: float) -> tuple[float, float, float, float]:
        if pinned:
            return 0.0, 0.0, om, -g * math.sin(th) / L
        if abs(vv) < v_eps and abs(f_app) <= F_c:
            f_fric = -f_app
        else:
            f_fric = -b_visc * vv - F_c * math.tanh(vv / v_eps)
        xdd, thdd = _accel(vv, th, om, f_app + f_fric, m, M_p, L, g)
        return vv, xdd, om, thdd

    h = dt
    k1 = deriv(v, theta, omega)
    k2 = deriv(v + 0.5 * h * k1[1], theta + 0.5 * h * k1[2], omega + 0.5 * h * k1[3])
    k3 = deriv(v + 0.5 * h * k2[1], theta + 0.5 * h * k2[2], omega + 0.5 * h * k2[3])
    k4 = deriv(v + h * k3[1], theta + h * k3[2], omega + h * k3[3])
    x_n = x + (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    v_n = v + (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    th_n = theta + (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    om_n = omega + (h / 6.0) * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    return x_n, v_n, th_n, om_n


def step(state: PlantState, forces: ForceBreakdown, params: PlantParams,
         friction: FrictionParams, dt: float, pinned: bool = False) -> PlantState:
    """Advance the plant by one RK4 step of size ``dt``.

    Only ``forces.F_user`` and ``forces.F_motor`` are used; friction is
    recomputed per stage from the stage velocity (``forces.F_friction`` is
    ignored).  Deterministic: identical inputs give bit-identical outputs.

    Raises:
        InvalidStateError: dt outside (0, 0.01] or invalid inputs.
        SimulationDiverged: |theta| >= pi/2 after the step.
    """
    if not (0.0 < dt <= 0.01):
        raise InvalidStateError(f"dt must be in (0, 0.01] s, got {dt}")
    plant_derivatives(state, forces, params, pinned=pinned)  # input validation
    f_app = forces.F_user + forces.F_motor
    x_n, v_n, th_n, om_n = _rk4_raw(
        state.x, state.v, state.theta, state.omega, f_app,
        params.m, params.M_p, params.L, params.g,
        friction.b_visc, friction.F_coulomb, friction.v_eps, dt, pinned=pinned)
    if not (abs(th_n) < THETA_LIMIT and math.isfinite(x_n) and math.isfinite(v_n)
            and math.isfinite(om_n)):
        raise SimulationDiverged(
            f"pendulum angle left (-pi/2, pi/2) at t={state.t + dt:.6f} s")
    return PlantState(x=x_n, v=v_n, theta=th_n, omega=om_n, t=state.t + dt)


def pendulum_energy(state: PlantState, params: PlantParams) -> float:
    """Mechanical energy of the pendulum in the cart frame [J].

    0.5 M_p L^2 w^2 + M_p g L (1 - cos(theta)); a conservation oracle that is
    only exact while the cart is pinned.
    """
    kinetic = 0.5 * params.M_p * params.L ** 2 * state.omega ** 2
    potential = params.M_p * params.g * params.L * (1.0 - math.cos(state.theta))
    return kinetic + potential
