"""Evaluation criteria: patient comfort, caregiver effort, ISO force checks.

Comfort is the weighted overall rms acceleration

    a_w = sqrt(kx^2 awx^2 + ky^2 awy^2 + kz^2 awz^2)

with seated-person factors kx = ky = 1.4, kz = 1.0, classified against the
ISO 2631-1 comfort table.  The rms window is the whole run and no frequency
weighting filters are applied; only the k multipliers.  Effort is the
integral of the squared handle force (and torque, identically zero in this
longitudinal model but kept in the data model).  ISO 10535 bounds the
starting force at 160 N and the driving force at 65 N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ComfortWeights",
    "TimeSeries",
    "RunMetrics",
    "COMFORT_LIMIT",
    "COMFORT_BANDS",
    "ISO_START_FORCE_LIMIT",
    "ISO_DRIVE_FORCE_LIMIT",
    "START_VELOCITY_THRESHOLD",
    "OVERSHOOT_BAND",
    "patient_acceleration",
    "overall_rms_acceleration",
    "comfort_class",
    "effort_integrals",
    "emulate_sensors",
    "count_overshoots",
    "start_and_drive_forces",
    "comfort_a_w",
]

_trapz = getattr(np, "trapezoid", None) or np.trapz

# ISO 2631-1 "not uncomfortable" bound the admittance tuning targets [m/s^2].
COMFORT_LIMIT = 0.315
# Disjoint comfort bands: each row's upper bound is inclusive.
COMFORT_BANDS = (
    (0.315, "Not uncomfortable"),
    (0.63, "A little uncomfortable"),
    (0.8, "Fairly uncomfortable"),
    (1.25, "Uncomfortable"),
    (2.5, "Very uncomfortable"),
)
COMFORT_TOP_LABEL = "Extremely uncomfortable"

# ISO 10535 handle-force limits [N].
ISO_START_FORCE_LIMIT = 160.0
ISO_DRIVE_FORCE_LIMIT = 65.0
# The lift counts as "moving" above this speed [m/s].
START_VELOCITY_THRESHOLD = 0.05
# Default position-overshoot band [m].
OVERSHOOT_BAND = 0.05


@dataclass(frozen=True)
class ComfortWeights:
    """Axis multipliers of the overall rms acceleration (seated person)."""

    kx: float = 1.4
    ky: float = 1.4
    kz: float = 1.0


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled signal: sample spacing, values and a unit tag."""

    dt: float
    samples: np.ndarray
    unit: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise ValueError("a time series needs at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("time series contains non-finite samples")

    def __len__(self) -> int:
        return int(self.samples.size)


@dataclass(frozen=True)
class RunMetrics:
    """All per-run evaluation results."""

    a_w: float
    comfort_class: str
    int_F2: float
    int_T2: float
    task_time: float
    overshoots: int
    start_force: float
    peak_drive_force: float
    iso_start_pass: bool
    iso_drive_pass: bool

    def __post_init__(self) -> None:
        if self.a_w < 0 or self.int_F2 < 0 or self.int_T2 < 0 or self.overshoots < 0:
            raise ValueError(f"negative metric: {self}")


def patient_acceleration(trajectory, params) -> tuple[TimeSeries, TimeSeries]:
    """Kinematic acceleration of the suspended patient along x and z.

    The patient sits at (x + L sin(theta), -L cos(theta)); differentiating
    twice gives

        ax = x'' + L (th'' cos(theta) - w^2 sin(theta))
        az = L (th'' sin(theta) + w^2 cos(theta))

    evaluated from the recorded analytic accelerations (gravity excluded).
    With M_p = 0 nothing swings, so the lift's own acceleration stands in:
    ax = x'', az = 0.

    ``trajectory`` must expose uniformly sampled arrays ``theta``, ``omega``,
    ``xdd``, ``thetadd`` and the spacing ``dt``.
    """
    theta = np.asarray(trajectory.theta, dtype=float)
    if theta.size < 2:
        raise ValueError("patient acceleration needs at least 2 samples")
    xdd = np.asarray(trajectory.xdd, dtype=float)
    if params.M_p == 0.0:
        return (TimeSeries(trajectory.dt, xdd, "m/s^2"),
                TimeSeries(trajectory.dt, np.zeros_like(xdd), "m/s^2"))
    omega = np.asarray(trajectory.omega, dtype=float)
    thetadd = np.asarray(trajectory.thetadd, dtype=float)
    s, c = np.sin(theta), np.cos(theta)
    L = params.L
    ax = xdd + L * (thetadd * c - omega ** 2 * s)
    az = L * (thetadd * s + omega ** 2 * c)
    return (TimeSeries(trajectory.dt, ax, "m/s^2"),
            TimeSeries(trajectory.dt, az, "m/s^2"))


def overall_rms_acceleration(ax: TimeSeries, ay: TimeSeries, az: TimeSeries,
                             w: ComfortWeights = ComfortWeights()) -> float:
    """Weighted overall rms acceleration over the full series [m/s^2]."""
    if not (len(ax) == len(ay) == len(az) and ax.dt == ay.dt == az.dt):
        raise ValueError("acceleration series must share length and dt")
    rx = math.sqrt(float(np.mean(ax.samples ** 2)))
    ry = math.sqrt(float(np.mean(ay.samples ** 2)))
    rz = math.sqrt(float(np.mean(az.samples ** 2)))
    return math.sqrt((w.kx * rx) ** 2 + (w.ky * ry) ** 2 + (w.kz * rz) ** 2)


def comfort_class(a_w: float) -> str:
    """ISO 2631-1 comfort label for an overall rms acceleration."""
    if a_w < 0:
        raise ValueError(f"a_w must be non-negative, got {a_w}")
    for bound, label in COMFORT_BANDS:
        if a_w <= bound:
            return label
    return COMFORT_TOP_LABEL


def effort_integrals(F: TimeSeries, T: TimeSeries) -> tuple[float, float]:
    """Trapezoidal integrals of squared handle force and torque."""
    int_f2 = float(_trapz(F.samples ** 2, dx=F.dt))
    int_t2 = float(_trapz(T.samples ** 2, dx=T.dt))
    return int_f2, int_t2


def _decimate(series: TimeSeries, target_rate: float) -> TimeSeries:
    sim_rate = 1.0 / series.dt
    if sim_rate < target_rate:
        raise ValueError(
            f"simulation rate {sim_rate:.1f} Hz below target {target_rate} Hz")
    stride = sim_rate / target_rate
    n = len(series)
    picked = []
    k = 0
    while True:
        idx = int(math.floor(k * stride + 1e-9))
        if idx >= n:
            break
        picked.append(series.samples[idx])
        k += 1
    return TimeSeries(1.0 / target_rate, np.asarray(picked), series.unit)


def _moving_average(samples: np.ndarray, n_points: int) -> np.ndarray:
    # Trailing window, growing from 1 sample at the start to n_points.
    csum = np.cumsum(samples)
    out = np.empty_like(samples)
    head = min(n_points, samples.size)
    out[:head] = csum[:head] / np.arange(1, head + 1)
    if samples.size > n_points:
        out[n_points:] = (csum[n_points:] - csum[:-n_points]) / n_points
    return out


def emulate_sensors(F: TimeSeries, acc: TimeSeries,
                    force_rate: float = 10.0, acc_rate: float = 200.0,
                    ma_points: int = 50) -> tuple[TimeSeries, TimeSeries]:
    """Replay signals through the prototype's acquisition chain.

    The handle force is sampled-and-held down to 10 Hz (load-cell amplifier
    rate) and the acceleration to 200 Hz (IMU rate) followed by a trailing
    50-point moving average.  Requires the simulation rate to be at least
    1 kHz and above both target rates.
    """
    for series in (F, acc):
        if 1.0 / series.dt < 1000.0 - 1e-6:
            raise ValueError("sensor emulation expects a >= 1 kHz simulation rate")
    f_out = _decimate(F, force_rate)
    a_out = _decimate(acc, acc_rate)
    averaged = _moving_average(a_out.samples, ma_points)
    return f_out, TimeSeries(a_out.dt, averaged, a_out.unit)


def count_overshoots(x: TimeSeries, target: float, band: float = OVERSHOOT_BAND) -> int:
    """Number of excursions past ``target + band``.

    Counts every transition from inside (x <= target + band) to outside,
    including one for a series that starts outside; re-entries followed by
    new excursions count again.
    """
    if not band > 0:
        raise ValueError(f"band must be positive, got {band}")
    outside = x.samples > target + band
    count = int(outside[0])
    count += int(np.sum(outside[1:] & ~outside[:-1]))
    return count


def start_and_drive_forces(F_user: TimeSeries, v: TimeSeries,
                           v_threshold: float = START_VELOCITY_THRESHOLD
                           ) -> tuple[float, float, tuple[bool, bool]]:
    """Peak handle force while starting and while driving, with ISO flags.

    The start phase is the initial prefix with |v| below the threshold; its
    peak |force| is checked against 160 N.  Everything after first reaching
    the threshold is the drive phase, checked against 65 N.  An empty phase
    contributes 0 N.
    """
    if len(F_user) != len(v) or F_user.dt != v.dt:
        raise ValueError("force and velocity series must be aligned")
    moving = np.abs(v.samples) >= v_threshold
    idx = np.argmax(moving) if moving.any() else len(v)
    abs_f = np.abs(F_user.samples)
    start_force = float(abs_f[:idx].max()) if idx > 0 else 0.0
    peak_drive = float(abs_f[idx:].max()) if idx < len(v) else 0.0
    flags = (start_force <= ISO_START_FORCE_LIMIT,
             peak_drive <= ISO_DRIVE_FORCE_LIMIT)
    return start_force, peak_drive, flags


def comfort_a_w(trajectory, params, weights: ComfortWeights = ComfortWeights()) -> float:
    """Overall rms acceleration of the patient for a simulated trajectory.

    The planar model has no lateral motion, so ay enters as zero.
    """
    ax, az = patient_acceleration(trajectory, params)
    ay = TimeSeries(ax.dt, np.zeros(len(ax)), "m/s^2")
    return overall_rms_acceleration(ax, ay, az, weights)
