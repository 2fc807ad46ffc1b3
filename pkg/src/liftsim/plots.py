"""Figure rendering for run reports: time-series panels and metric comparisons.

Rendering is file-only (Agg backend); figures land next to the delimited
output when plotting is enabled.  The CSVs remain the machine-readable
contract; these are for eyeballs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import patient_acceleration  # noqa: E402
from .simulate import RunResult  # noqa: E402
from .virtual_user import TaskScenario  # noqa: E402

__all__ = ["render_series_figure", "render_compare_figure"]

_DPI = 140


def render_series_figure(result: RunResult, scenario: TaskScenario,
                         path: str | Path) -> Path:
    """Four stacked panels: velocities, position, swing angle and forces."""
    traj = result.series
    if traj is None:
        raise ValueError("run result carries no time series to plot")
    ax_p, _ = patient_acceleration(traj, scenario.plant_params())

    fig, axes = plt.subplots(4, 1, sharex=True, figsize=(8.0, 9.0))
    title = f"{result.scenario} / {result.controller}"
    fig.suptitle(title)

    axes[0].plot(traj.t, traj.v, label="lift v", lw=1.2)
    axes[0].plot(traj.t, traj.v_d, label="command v_d", lw=1.0, ls="--")
    axes[0].set_ylabel("velocity [m/s]")
    axes[0].legend(loc="best", fontsize=8)

    axes[1].plot(traj.t, traj.x, lw=1.2, color="tab:green")
    if scenario.target_position is not None:
        axes[1].axhline(scenario.target_position, color="k", lw=0.8, ls=":")
    axes[1].set_ylabel("position [m]")

    axes[2].plot(traj.t, traj.theta, lw=1.0, color="tab:purple")
    axes[2].set_ylabel("swing [rad]")

    axes[3].plot(traj.t, traj.f_user, label="handle", lw=1.0)
    axes[3].plot(traj.t, traj.f_motor, label="motor", lw=1.0, alpha=0.8)
    axes[3].plot(traj.t, ax_p.samples, label="patient ax", lw=0.8, alpha=0.6)
    axes[3].set_ylabel("force [N] / accel [m/s$^2$]")
    axes[3].set_xlabel("time [s]")
    axes[3].legend(loc="best", fontsize=8)

    for ax in axes:
        ax.grid(True, alpha=0.3)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def render_compare_figure(results: list[RunResult], path: str | Path) -> Path:
    """Grouped bars of comfort, effort and start force per (scenario, controller)."""
    scenarios = sorted({r.scenario for r in results})
    controllers = sorted({r.controller for r in results})
    metrics = (("a_w", "comfort a_w [m/s$^2$]"),
               ("int_F2", "effort $\\int F^2 dt$ [N$^2$ s]"),
               ("start_force", "start force [N]"))

    fig, axes = plt.subplots(len(metrics), 1, figsize=(8.0, 9.0), sharex=True)
    width = 0.8 / max(len(controllers), 1)
    lookup = {(r.scenario, r.controller): r.metrics for r in results}

    for ax, (metric, label) in zip(axes, metrics):
        for ci, controller in enumerate(controllers):
            xs, ys = [], []
            for si, scenario in enumerate(scenarios):
                met = lookup.get((scenario, controller))
                if met is None:
                    continue
                xs.append(si + (ci - (len(controllers) - 1) / 2.0) * width)
                ys.append(getattr(met, metric))
            ax.bar(xs, ys, width=width * 0.9, label=controller)
        ax.set_ylabel(label)
        ax.grid(True, axis="y", alpha=0.3)
    axes[0].legend(loc="best", fontsize=8)
    axes[-1].set_xticks(range(len(scenarios)))
    axes[-1].set_xticklabels(scenarios, rotation=20, ha="right")
    fig.suptitle("controller comparison")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path
