"""Assistance control laws for the motorized wheel and their tuning.

Five laws are implemented:

* ``no_assist``: motor force identically zero.
* ``friction_comp``: feeds an estimate of the floor resistance forward from
  measured velocity.  Unstable when the estimate exceeds the true friction,
  which is exactly why it is excluded from the benchmark presets.
* ``force_amp``: motor force proportional to the measured handle force.
* ``admittance``: handle force drives a virtual mass-damper
  ``M_v v_d' = F - b0 v_d`` whose output is the wheel velocity command.  Gain
  ``K = 1/b0`` sets the force needed per unit speed, time constant
  ``tau = M_v/b0`` the transient response.
* ``variable_admittance``: same structure with the damping re-evaluated from
  the instantaneous force/velocity alignment,
  ``b = 6 b0 - sign(V) (5 b0 / F0) F`` for |F| <= F0 and ``b = b0`` above,
  so the lift brakes hard on direction reversals and stays finely
  controllable at low speed while keeping the same 30 N -> 0.8 m/s endpoint.
* ``second_order``: critically damped ``K / (1 + tau2 s)^2`` velocity shaping
  with the same DC gain; its zero initial slope cuts the swing excitation of
  the suspended patient.

All step functions integrate with the same fixed-step RK4 scheme as the plant
and are pure: state in, state out.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

from .actuation import MotorLimits, VelocityLoopParams
from .dynamics import FrictionParams

__all__ = [
    "AdmittanceParams",
    "VariableAdmittanceParams",
    "SecondOrderParams",
    "ForceAmpParams",
    "FrictionCompParams",
    "ControllerState",
    "ControllerConfig",
    "CONTROLLER_KINDS",
    "DEFAULT_B0",
    "DEFAULT_F0",
    "DEFAULT_TAU",
    "SIGN_DEADBAND",
    "SECOND_ORDER_TAU_RATIO",
    "InfeasibleTimeConstant",
    "admittance_step",
    "variable_damping",
    "variable_admittance_step",
    "second_order_step",
    "steady_state_velocity",
    "force_amplification",
    "friction_compensation",
    "tune_time_constant",
    "matched_force_amp_gain",
    "presets",
]

# Damping that makes 30 N of handle force command the 0.8 m/s speed cap
# (gain K = 1/b0 ~ 0.027 m/(s N)).
DEFAULT_B0 = 37.5
# Force breakpoint of the variable law: full speed at 30 N, same as above.
DEFAULT_F0 = 30.0
# Velocity command treated as "at rest" when picking sign(V); at rest the
# variable law sits at its stiffest aligned value 6*b0 so starts are smooth.
SIGN_DEADBAND = 1e-3
# tau2 = ratio * tau matches the 95% settling time of the first-order law:
# first order settles at 3*tau, the critically damped pair at 4.744*tau2.
SECOND_ORDER_TAU_RATIO = 3.0 / 4.744
# Comfort-tuned default time constant for a mid-range (130 kg) patient,
# reproducible via tune_time_constant(130.0).
DEFAULT_TAU = 0.711

CONTROLLER_KINDS = ("no_assist", "force_amp", "friction_comp",
                    "admittance", "variable_admittance", "second_order")


class InfeasibleTimeConstant(RuntimeError):
    """No time constant in the search range satisfies the comfort limit."""

    def __init__(self, message: str, a_w_at_max: float):
        super().__init__(message)
        self.a_w_at_max = a_w_at_max


@dataclass(frozen=True)
class AdmittanceParams:
    """Virtual mass [kg] and damping [N s/m] of the fixed admittance law."""

    M_v: float = DEFAULT_TAU * DEFAULT_B0
    b0: float = DEFAULT_B0

    def __post_init__(self) -> None:
        if not (self.M_v > 0 and self.b0 > 0):
            raise ValueError(f"invalid admittance params: {self}")

    @property
    def K(self) -> float:
        """Force-to-speed gain [m/(s N)]."""
        return 1.0 / self.b0

    @property
    def tau(self) -> float:
        """Time constant [s]."""
        return self.M_v / self.b0


@dataclass(frozen=True)
class VariableAdmittanceParams:
    """Variable-damping admittance parameters.

    ``alpha`` and ``beta`` are the affine damping coefficients
    ``b = alpha + beta * sign(V) * F`` and are pinned to ``6*b0`` and
    ``5*b0/F0`` so the law meets the fixed controller at the F0 operating
    point; they are stored explicitly and validated rather than accepted
    freely.
    """

    M_v: float = DEFAULT_TAU * DEFAULT_B0
    b0: float = DEFAULT_B0
    F0: float = DEFAULT_F0
    alpha: float = field(default=0.0)
    beta: float = field(default=0.0)

    def __post_init__(self) -> None:
        if not (self.M_v > 0 and self.b0 > 0 and self.F0 > 0):
            raise ValueError(f"invalid variable admittance params: {self}")
        if self.alpha == 0.0:
            object.__setattr__(self, "alpha", 6.0 * self.b0)
        if self.beta == 0.0:
            object.__setattr__(self, "beta", 5.0 * self.b0 / self.F0)
        if not math.isclose(self.alpha, 6.0 * self.b0, rel_tol=1e-12):
            raise ValueError("alpha must equal 6*b0")
        if not math.isclose(self.beta, 5.0 * self.b0 / self.F0, rel_tol=1e-12):
            raise ValueError("beta must equal 5*b0/F0")


@dataclass(frozen=True)
class SecondOrderParams:
    """Gain [m/(s N)] and time constant [s] of the critically damped pair."""

    K: float = 1.0 / DEFAULT_B0
    tau2: float = DEFAULT_TAU * SECOND_ORDER_TAU_RATIO

    def __post_init__(self) -> None:
        if not (self.K > 0 and self.tau2 > 0):
            raise ValueError(f"invalid second-order params: {self}")


@dataclass(frozen=True)
class ForceAmpParams:
    """Dimensionless amplification gain: motor force = G * handle force."""

    G: float = 1.0

    def __post_init__(self) -> None:
        if not self.G >= 0:
            raise ValueError(f"invalid force amplification gain: {self}")


@dataclass(frozen=True)
class FrictionCompParams:
    """Estimated viscous [N s/m] and dry [N] resistance fed forward."""

    b_hat: float = 50.0
    Fc_hat: float = 0.0
    v_eps: float = 1e-3

    def __post_init__(self) -> None:
        if not (self.b_hat >= 0 and self.Fc_hat >= 0 and self.v_eps > 0):
            raise ValueError(f"invalid friction compensation params: {self}")


@dataclass(frozen=True)
class ControllerState:
    """Explicit controller state threaded through the step functions.

    v_d: current velocity command [m/s].
    aux: first-stage state of the second-order law [m/s].
    i_term: inner velocity-loop integral [N].
    """

    v_d: float = 0.0
    aux: float = 0.0
    i_term: float = 0.0


@dataclass(frozen=True)
class ControllerConfig:
    """Tagged union selecting one control law and its parameters."""

    kind: str = "no_assist"
    admittance: AdmittanceParams | None = None
    variable: VariableAdmittanceParams | None = None
    second_order: SecondOrderParams | None = None
    force_amp: ForceAmpParams | None = None
    friction_comp: FrictionCompParams | None = None
    velocity_loop: VelocityLoopParams = VelocityLoopParams()
    limits: MotorLimits = MotorLimits()

    def __post_init__(self) -> None:
        if self.kind not in CONTROLLER_KINDS:
            raise ValueError(f"unknown controller kind {self.kind!r}")
        needed = {"admittance": self.admittance, "variable_admittance": self.variable,
                  "second_order": self.second_order, "force_amp": self.force_amp,
                  "friction_comp": self.friction_comp}
        if self.kind in needed and needed[self.kind] is None:
            raise ValueError(f"controller kind {self.kind!r} is missing its parameters")


def _clamp(value: float, bound: float) -> float:
    if value > bound:
        return bound
    if value < -bound:
        return -bound
    return value


def _sign_deadband(v: float) -> float:
    if v > SIGN_DEADBAND:
        return 1.0
    if v < -SIGN_DEADBAND:
        return -1.0
    return 0.0


def variable_damping(F: float, V: float, p: VariableAdmittanceParams) -> float:
    """Instantaneous damping of the variable law [N s/m].

    For |F| <= F0 the affine law applies with sign(V) taken through a small
    deadband (0 at rest, so the damping is 6*b0 when stationary); above F0
    the damping saturates at b0.  The result always lies in [b0, 11*b0],
    continuously meeting b0 at |F| = F0 on the force/velocity-aligned side.
    """
    if abs(F) <= p.F0:
        return p.alpha - _sign_deadband(V) * p.beta * F
    return p.b0


def _admittance_rk4(v_d: float, f: float, M_v: float, b0: float, dt: float) -> float:
    def dv(vd: float) -> float:
        return (f - b0 * vd) / M_v
    k1 = dv(v_d)
    k2 = dv(v_d + 0.5 * dt * k1)
    k3 = dv(v_d + 0.5 * dt * k2)
    k4 = dv(v_d + dt * k3)
    return v_d + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _variable_rk4(v_d: float, f: float, p: VariableAdmittanceParams, dt: float) -> float:
    def dv(vd: float) -> float:
        return (f - variable_damping(f, vd, p) * vd) / p.M_v
    k1 = dv(v_d)
    k2 = dv(v_d + 0.5 * dt * k1)
    k3 = dv(v_d + 0.5 * dt * k2)
    k4 = dv(v_d + dt * k3)
    return v_d + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _second_order_rk4(v_d: float, aux: float, f: float, K: float, tau2: float,
                      dt: float) -> tuple[float, float]:
    # Cascade of two first-order lags: aux' = (K f - aux)/tau2, v' = (aux - v)/tau2.
    def dv(vd: float, au: float) -> tuple[float, float]:
        return (au - vd) / tau2, (K * f - au) / tau2
    k1 = dv(v_d, aux)
    k2 = dv(v_d + 0.5 * dt * k1[0], aux + 0.5 * dt * k1[1])
    k3 = dv(v_d + 0.5 * dt * k2[0], aux + 0.5 * dt * k2[1])
    k4 = dv(v_d + dt * k3[0], aux + dt * k3[1])
    v_n = v_d + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    a_n = aux + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    return v_n, a_n


def admittance_step(F_user: float, st: ControllerState, p: AdmittanceParams,
                    dt: float) -> ControllerState:
    """Advance ``M_v v_d' = F_user - b0 v_d`` by one RK4 step.

    Steady state for a held force is F_user / b0.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return replace(st, v_d=_admittance_rk4(st.v_d, F_user, p.M_v, p.b0, dt))


def variable_admittance_step(F_user: float, st: ControllerState,
                             p: VariableAdmittanceParams, dt: float) -> ControllerState:
    """Advance ``M_v v_d' = F_user - b(F_user, v_d) v_d`` by one RK4 step.

    The damping is re-evaluated at every integration stage from the stage
    velocity command.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return replace(st, v_d=_variable_rk4(st.v_d, F_user, p, dt))


def second_order_step(F_user: float, st: ControllerState, p: SecondOrderParams,
                      dt: float) -> ControllerState:
    """Advance the critically damped ``K/(1 + tau2 s)^2`` law by one RK4 step."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    v_n, a_n = _second_order_rk4(st.v_d, st.aux, F_user, p.K, p.tau2, dt)
    return replace(st, v_d=v_n, aux=a_n)


def steady_state_velocity(F: float, controller: str,
                          params: AdmittanceParams | VariableAdmittanceParams,
                          limits: MotorLimits = MotorLimits()) -> float:
    """Terminal velocity for a held handle force, clamped to the speed cap.

    controller: "fixed" gives F / b0; "variable" solves the self-consistent
    damping with sign(V) = sign(F), which for |F| <= F0 is
    F / (6 b0 - 5 b0 |F| / F0) and F / b0 above.
    """
    if controller == "fixed":
        v = F / params.b0
    elif controller == "variable":
        if not isinstance(params, VariableAdmittanceParams):
            raise TypeError("variable steady state needs VariableAdmittanceParams")
        if abs(F) <= params.F0:
            v = F / (params.alpha - params.beta * abs(F))
        else:
            v = F / params.b0
    else:
        raise ValueError(f"unknown controller family {controller!r}")
    return _clamp(v, limits.v_max)


def force_amplification(F_user: float, p: ForceAmpParams,
                        limits: MotorLimits) -> float:
    """Motor force proportional to the handle force, saturated at F_max."""
    return _clamp(p.G * F_user, limits.F_max)


def friction_compensation(v: float, p: FrictionCompParams,
                          limits: MotorLimits) -> float:
    """Feed the estimated floor resistance forward from measured velocity."""
    return _clamp(p.b_hat * v + p.Fc_hat * math.tanh(v / p.v_eps), limits.F_max)


def matched_force_amp_gain(friction: FrictionParams | None = None,
                           b0: float = DEFAULT_B0,
                           v_max: float = 0.8) -> float:
    """Amplification gain giving the admittance operating point on a reference floor.

    Solves (1 + G) * b0 * v_max = friction drag at v_max, so a b0*v_max handle
    force reaches the speed cap on the floor the gain was matched to (and only
    there, which is the scheme's documented sensitivity).
    """
    fr = friction if friction is not None else FrictionParams()
    drag = fr.b_visc * v_max + fr.F_coulomb * math.tanh(v_max / fr.v_eps)
    return drag / (b0 * v_max) - 1.0


def presets(tau: float = DEFAULT_TAU, b0: float = DEFAULT_B0,
            F0: float = DEFAULT_F0,
            friction: FrictionParams | None = None,
            limits: MotorLimits = MotorLimits(),
            velocity_loop: VelocityLoopParams = VelocityLoopParams()
            ) -> dict[str, ControllerConfig]:
    """Benchmark controller presets sharing one comfort-tuned time constant.

    ``friction_comp`` is deliberately absent: over-estimated compensation is
    unstable, so it only exists for explicit configuration in studies of that
    failure mode.
    """
    M_v = tau * b0
    return {
        "no_assist": ControllerConfig(kind="no_assist", limits=limits),
        "force_amp": ControllerConfig(
            kind="force_amp",
            force_amp=ForceAmpParams(G=matched_force_amp_gain(friction, b0, limits.v_max)),
            limits=limits),
        "admittance": ControllerConfig(
            kind="admittance", admittance=AdmittanceParams(M_v=M_v, b0=b0),
            velocity_loop=velocity_loop, limits=limits),
        "variable_admittance": ControllerConfig(
            kind="variable_admittance",
            variable=VariableAdmittanceParams(M_v=M_v, b0=b0, F0=F0),
            velocity_loop=velocity_loop, limits=limits),
        "second_order": ControllerConfig(
            kind="second_order",
            second_order=SecondOrderParams(K=1.0 / b0, tau2=tau * SECOND_ORDER_TAU_RATIO),
            velocity_loop=velocity_loop, limits=limits),
    }


def tune_time_constant(M_p: float, b0: float = DEFAULT_B0,
                       comfort_limit: float = 0.315, *,
                       lift_mass: float = 100.0, pendulum_length: float = 0.5,
                       gravity: float = 9.81,
                       friction: FrictionParams | None = None,
                       limits: MotorLimits = MotorLimits(),
                       velocity_loop: VelocityLoopParams = VelocityLoopParams(),
                       duration: float = 20.0, dt: float = 1e-3,
                       tau_lo: float = 0.05, tau_hi: float = 10.0,
                       tol: float = 1e-3) -> float:
    """Smallest admittance time constant keeping a held-force start comfortable.

    Simulates the comfort-step task (handle force b0*v_max held from rest, so
    the command reaches the speed cap) for candidate time constants and
    returns, to ``tol`` by bisection over [tau_lo, tau_hi], the smallest tau
    whose weighted rms patient acceleration stays at or under
    ``comfort_limit``.  The patient acceleration is the suspended mass's
    kinematic acceleration; with M_p = 0 the lift's own acceleration stands in
    for it.

    The rms is checked for monotone non-increase in tau on a coarse grid
    first; isolated rises (possible under motor saturation with very heavy
    patients) produce a warning and the crossing closest to the feasible side
    is refined.

    Raises:
        InfeasibleTimeConstant: the limit cannot be met even at tau_hi.
    """
    from .metrics import comfort_a_w
    from .simulate import simulate
    from .virtual_user import comfort_step_scenario

    fr = friction if friction is not None else FrictionParams()
    scenario = comfort_step_scenario(
        M_p=M_p, b0=b0, lift_mass=lift_mass, pendulum_length=pendulum_length,
        gravity=gravity, friction=fr, v_max=limits.v_max,
        duration=duration, dt=dt)

    def a_w_for(tau: float) -> float:
        cfg = ControllerConfig(
            kind="admittance", admittance=AdmittanceParams(M_v=tau * b0, b0=b0),
            velocity_loop=velocity_loop, limits=limits)
        traj = simulate(scenario, cfg)
        return comfort_a_w(traj, scenario.plant_params())

    if a_w_for(tau_lo) <= comfort_limit:
        return tau_lo

    n_grid = 7
    ratio = (tau_hi / tau_lo) ** (1.0 / (n_grid - 1))
    taus = [tau_lo * ratio ** i for i in range(1, n_grid)]
    taus[-1] = tau_hi
    a_ws = [a_w_for(t) for t in taus]

    prev = None
    for t, a in zip(taus, a_ws):
        if prev is not None and a > prev * 1.05:
            warnings.warn(
                f"comfort rms not monotone in tau near tau={t:.3f}"
                " (refining the final crossing)", RuntimeWarning, stacklevel=2)
        prev = a

    all_taus = [tau_lo] + taus
    all_aws = [float("inf")] + a_ws  # tau_lo known infeasible here
    bracket = None
    for i in range(len(all_taus) - 1):
        if all_aws[i] > comfort_limit >= all_aws[i + 1]:
            bracket = (all_taus[i], all_taus[i + 1])
    if bracket is None:
        raise InfeasibleTimeConstant(
            f"comfort limit {comfort_limit} m/s^2 unreachable for M_p={M_p} kg:"
            f" a_w({tau_hi}) = {a_ws[-1]:.4f} m/s^2", a_ws[-1])

    lo, hi = bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if a_w_for(mid) <= comfort_limit:
            hi = mid
        else:
            lo = mid
    return hi
