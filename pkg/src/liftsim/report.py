"""Delimited report output: per-run summary tables and comparison tables.

Numbers are serialized with 9 significant digits and a "." decimal separator;
rows follow the deterministic scenario-major, controller-minor order of the
configured grid, so identical configurations always produce byte-identical
files.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .metrics import patient_acceleration
from .simulate import RunResult
from .virtual_user import TaskScenario

__all__ = ["SUMMARY_COLUMNS", "format_number", "summary_row", "summary_csv",
           "compare_csv", "series_csv", "write_text"]

SUMMARY_COLUMNS = ("scenario", "controller", "a_w", "comfort_class", "int_F2",
                   "int_T2", "task_time", "overshoots", "start_force",
                   "peak_drive_force", "iso_start_pass", "iso_drive_pass")

# Metrics that get a percentage-delta column in comparison tables.
_DELTA_METRICS = ("a_w", "int_F2", "int_T2", "task_time", "overshoots",
                  "start_force", "peak_drive_force")


def format_number(value: float) -> str:
    """Serialize a float with 9 significant digits."""
    return f"{value:.9g}"


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def summary_row(result: RunResult) -> dict[str, str]:
    met = result.metrics
    values = (result.scenario, result.controller, met.a_w, met.comfort_class,
              met.int_F2, met.int_T2, met.task_time, met.overshoots,
              met.start_force, met.peak_drive_force, met.iso_start_pass,
              met.iso_drive_pass)
    return {col: _format_cell(val) for col, val in zip(SUMMARY_COLUMNS, values)}


def _csv_text(columns: tuple[str, ...], rows: list[dict[str, str]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def summary_csv(results: list[RunResult]) -> str:
    """Summary table with one row per (scenario, controller) run."""
    return _csv_text(SUMMARY_COLUMNS, [summary_row(r) for r in results])


def compare_csv(results: list[RunResult], baseline: str) -> str:
    """Summary table extended with percentage deltas against a baseline controller.

    Deltas are computed within each scenario; a zero-valued baseline metric
    leaves the delta blank unless the compared value is also zero.
    """
    scenarios = {r.scenario for r in results}
    base_by_scenario = {r.scenario: r for r in results if r.controller == baseline}
    missing = scenarios - set(base_by_scenario)
    if missing:
        raise ValueError(
            f"baseline {baseline!r} missing for scenarios: {sorted(missing)}")

    columns = SUMMARY_COLUMNS + tuple(f"delta_{m}_pct" for m in _DELTA_METRICS)
    rows = []
    for result in results:
        row = summary_row(result)
        base = base_by_scenario[result.scenario].metrics
        for metric in _DELTA_METRICS:
            value = float(getattr(result.metrics, metric))
            ref = float(getattr(base, metric))
            if ref == 0.0:
                row[f"delta_{metric}_pct"] = "0" if value == 0.0 else ""
            else:
                row[f"delta_{metric}_pct"] = format_number(
                    100.0 * (value - ref) / ref)
        rows.append(row)
    return _csv_text(columns, rows)


def series_csv(result: RunResult, scenario: TaskScenario) -> str:
    """Per-run time series table (t, states, forces, command, patient accel)."""
    traj = result.series
    if traj is None:
        raise ValueError("run result carries no time series")
    ax, az = patient_acceleration(traj, scenario.plant_params())
    buf = io.StringIO()
    buf.write("t,x,v,theta,omega,F_user,F_motor,v_d,ax,az\n")
    fmt = format_number
    for i in range(len(traj.t)):
        buf.write(",".join((
            fmt(traj.t[i]), fmt(traj.x[i]), fmt(traj.v[i]), fmt(traj.theta[i]),
            fmt(traj.omega[i]), fmt(traj.f_user[i]), fmt(traj.f_motor[i]),
            fmt(traj.v_d[i]), fmt(ax.samples[i]), fmt(az.samples[i]))))
        buf.write("\n")
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
