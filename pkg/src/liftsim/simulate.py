"""Deterministic simulation loop tying user, controller, motor and plant together.

Each time step applies, in order: virtual-user force (from reaction-delayed
plant state), controller velocity command, inner-loop motor force, then one
RK4 plant step with the user and motor forces held constant.  Everything is
scalar float arithmetic with no randomness, so a configuration always
reproduces the same trajectory bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import controllers as ctl
from .actuation import MotorLimits, ideal_tracking_force
from .controllers import ControllerConfig
from .dynamics import (THETA_LIMIT, FrictionParams, PlantParams, PlantState,
                       SimulationDiverged, _accel, _rk4_raw)
from .metrics import (RunMetrics, TimeSeries, comfort_class, comfort_a_w,
                      count_overshoots, effort_integrals, patient_acceleration,
                      start_and_drive_forces, overall_rms_acceleration,
                      ComfortWeights)
from .version import TOOL_VERSION
from .virtual_user import TaskScenario

__all__ = ["Trajectory", "RunResult", "simulate", "compute_metrics", "run"]

_NO_ASSIST, _FORCE_AMP, _FRICTION_COMP, _ADMITTANCE, _VARIABLE, _SECOND_ORDER = range(6)
_KIND_CODES = {
    "no_assist": _NO_ASSIST,
    "force_amp": _FORCE_AMP,
    "friction_comp": _FRICTION_COMP,
    "admittance": _ADMITTANCE,
    "variable_admittance": _VARIABLE,
    "second_order": _SECOND_ORDER,
}
_ADMITTANCE_FAMILY = (_ADMITTANCE, _VARIABLE, _SECOND_ORDER)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled simulation output (one entry per time step)."""

    dt: float
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    xdd: np.ndarray
    thetadd: np.ndarray
    f_user: np.ndarray
    f_motor: np.ndarray
    v_d: np.ndarray


@dataclass(frozen=True)
class RunResult:
    """Metrics plus optional full time series for one (scenario, controller) run."""

    scenario: str
    controller: str
    metrics: RunMetrics
    series: Trajectory | None = None
    config_echo: dict = field(default_factory=dict)
    tool_version: str = TOOL_VERSION


def simulate(scenario: TaskScenario, controller: ControllerConfig | None = None
             ) -> Trajectory:
    """Run one scenario under one controller and return the full trajectory.

    ``controller`` overrides any controller attached to the scenario.  Raises
    :class:`SimulationDiverged` (naming the scenario) if the pendulum leaves
    the valid angle range.
    """
    cfg = controller if controller is not None else scenario.controller
    if cfg is None:
        raise ValueError(f"scenario {scenario.name!r} has no controller attached")

    plant = scenario.plant_params()
    m, Mp, L, g = plant.m, plant.M_p, plant.L, plant.g
    fr = scenario.friction
    bv, Fc, veps = fr.b_visc, fr.F_coulomb, fr.v_eps
    lim = cfg.limits
    f_max, v_max = lim.F_max, lim.v_max
    dt = scenario.dt
    n = int(round(scenario.duration / dt))

    code = _KIND_CODES[cfg.kind]
    loop = cfg.velocity_loop
    ideal = loop.mode == "ideal"
    kp, ki, ilim = loop.Kp, loop.Ki, loop.integral_limit

    if code == _ADMITTANCE:
        ap = cfg.admittance
        mv, b0 = ap.M_v, ap.b0
    elif code == _VARIABLE:
        vp = cfg.variable
    elif code == _SECOND_ORDER:
        sp = cfg.second_order
        k_gain, tau2 = sp.K, sp.tau2
    elif code == _FORCE_AMP:
        gain = cfg.force_amp.G
    elif code == _FRICTION_COMP:
        fcp = cfg.friction_comp
        b_hat, fc_hat, veps_c = fcp.b_hat, fcp.Fc_hat, fcp.v_eps

    ref = scenario.reference
    force_ref = ref.kind == "force"
    user = scenario.user
    kxu, kpu, fu_max = user.Kx_u, user.Kp_u, user.F_user_max
    dsteps = int(round(user.reaction_delay / dt))

    # Initial conditions: the run may begin mid-cruise, in which case the
    # velocity command and the inner-loop integral start consistent with it.
    v0 = scenario.initial_velocity
    x = 0.0
    v = v0
    th = 0.0
    om = 0.0
    v_d = min(max(v0, -v_max), v_max)
    aux = v_d
    i_term = bv * v0 + Fc * math.tanh(v0 / veps) if v0 != 0.0 else 0.0
    i_next = i_term

    hx = [x]
    hv = [v]
    rows = []
    tanh = math.tanh
    value = ref.value
    position = ref.position if not force_ref else None

    for i in range(n + 1):
        t = i * dt
        j = i - dsteps
        if j < 0:
            j = 0

        if force_ref:
            fu = value(t)
        else:
            fu = kxu * (position(t) - hx[j]) + kpu * (value(t) - hv[j])
        if fu > fu_max:
            fu = fu_max
        elif fu < -fu_max:
            fu = -fu_max

        if code == _NO_ASSIST:
            fm = 0.0
        elif code == _FORCE_AMP:
            fm = gain * fu
            if fm > f_max:
                fm = f_max
            elif fm < -f_max:
                fm = -f_max
            if (v >= v_max and fm > 0.0) or (v <= -v_max and fm < 0.0):
                fm = 0.0
        elif code == _FRICTION_COMP:
            fm = b_hat * v + fc_hat * tanh(v / veps_c)
            if fm > f_max:
                fm = f_max
            elif fm < -f_max:
                fm = -f_max
            if (v >= v_max and fm > 0.0) or (v <= -v_max and fm < 0.0):
                fm = 0.0
        elif ideal:
            fm = ideal_tracking_force(
                v_d, PlantState(x=x, v=v, theta=th, omega=om, t=t), fu,
                plant, fr, lim, dt)
        else:
            e = v_d - v
            fm = kp * e + i_term
            if fm > f_max:
                fm = f_max
            elif fm < -f_max:
                fm = -f_max
            i_next = i_term + ki * e * dt
            if i_next > ilim:
                i_next = ilim
            elif i_next < -ilim:
                i_next = -ilim

        f_app = fu + fm
        if abs(v) < veps and abs(f_app) <= Fc:
            ffr = -f_app
        else:
            ffr = -bv * v - Fc * tanh(v / veps)
        xdd, thdd = _accel(v, th, om, f_app + ffr, m, Mp, L, g)
        rows.append((t, x, v, th, om, fu, fm, v_d, xdd, thdd))
        if i == n:
            break

        x, v, th, om = _rk4_raw(x, v, th, om, f_app, m, Mp, L, g,
                                bv, Fc, veps, dt)
        if not (-THETA_LIMIT < th < THETA_LIMIT) or v != v:
            raise SimulationDiverged(
                f"scenario {scenario.name!r} diverged at t={t + dt:.3f} s"
                f" (theta={th!r})")

        if code == _ADMITTANCE:
            v_d = ctl._admittance_rk4(v_d, fu, mv, b0, dt)
        elif code == _VARIABLE:
            v_d = ctl._variable_rk4(v_d, fu, vp, dt)
        elif code == _SECOND_ORDER:
            v_d, aux = ctl._second_order_rk4(v_d, aux, fu, k_gain, tau2, dt)
        if code in _ADMITTANCE_FAMILY:
            if v_d > v_max:
                v_d = v_max
            elif v_d < -v_max:
                v_d = -v_max
            i_term = i_next

        hx.append(x)
        hv.append(v)

    data = np.asarray(rows, dtype=float)
    return Trajectory(dt=dt, t=data[:, 0], x=data[:, 1], v=data[:, 2],
                      theta=data[:, 3], omega=data[:, 4], f_user=data[:, 5],
                      f_motor=data[:, 6], v_d=data[:, 7], xdd=data[:, 8],
                      thetadd=data[:, 9])


def _settle_time(x: np.ndarray, t: np.ndarray, target: float, band: float,
                 duration: float) -> float:
    outside = np.abs(x - target) > band
    if not outside.any():
        return 0.0
    last = int(np.nonzero(outside)[0][-1])
    if last == len(x) - 1:
        return duration
    return float(t[last + 1])


def compute_metrics(traj: Trajectory, scenario: TaskScenario) -> RunMetrics:
    """Evaluate all run metrics from a recorded trajectory."""
    plant = scenario.plant_params()
    f_series = TimeSeries(traj.dt, traj.f_user, "N")
    v_series = TimeSeries(traj.dt, traj.v, "m/s")
    torque = TimeSeries(traj.dt, np.zeros_like(traj.f_user), "N m")

    ax, az = patient_acceleration(traj, plant)
    ay = TimeSeries(ax.dt, np.zeros(len(ax)), "m/s^2")
    a_w = overall_rms_acceleration(ax, ay, az, ComfortWeights())
    int_f2, int_t2 = effort_integrals(f_series, torque)
    start_f, drive_f, (start_ok, drive_ok) = start_and_drive_forces(f_series, v_series)

    if scenario.target_position is not None:
        x_series = TimeSeries(traj.dt, traj.x, "m")
        overshoots = count_overshoots(x_series, scenario.target_position,
                                      scenario.settle_band)
        task_time = _settle_time(traj.x, traj.t, scenario.target_position,
                                 scenario.settle_band, scenario.duration)
    else:
        overshoots = 0
        task_time = scenario.duration

    return RunMetrics(
        a_w=a_w, comfort_class=comfort_class(a_w), int_F2=int_f2,
        int_T2=int_t2, task_time=task_time, overshoots=overshoots,
        start_force=start_f, peak_drive_force=drive_f,
        iso_start_pass=start_ok, iso_drive_pass=drive_ok)


def run(scenario: TaskScenario, controller: ControllerConfig | None = None, *,
        keep_series: bool = False, config_echo: dict | None = None,
        controller_name: str | None = None) -> RunResult:
    """Simulate one run and package its metrics (and optionally the series)."""
    cfg = controller if controller is not None else scenario.controller
    traj = simulate(scenario, cfg)
    metrics = compute_metrics(traj, scenario)
    return RunResult(
        scenario=scenario.name,
        controller=controller_name if controller_name is not None else cfg.kind,
        metrics=metrics,
        series=traj if keep_series else None,
        config_echo=config_echo if config_echo is not None else {},
    )
