"""Run execution: sequential or parallel simulation of a configured grid.

Parallel runs use a process pool but results are always assembled in the
deterministic grid order (scenario-major, controller-minor), never by
completion order, so ``--jobs 1`` and ``--jobs 8`` write identical bytes.
"""

from __future__ import annotations

import multiprocessing
import warnings

from .config import RunSpec
from .controllers import InfeasibleTimeConstant, tune_time_constant
from .metrics import COMFORT_LIMIT, comfort_a_w
from .simulate import RunResult, run, simulate
from .report import compare_csv, summary_csv

__all__ = ["execute_runs", "seedless_check", "tune_report"]

DEFAULT_TUNE_MASSES = (80.0, 130.0, 180.0, 272.0)


def _execute_one(args: tuple[RunSpec, bool]) -> RunResult:
    spec, keep_series = args
    return run(spec.scenario, spec.controller, keep_series=keep_series,
               controller_name=spec.controller_name,
               config_echo={"scenario": spec.scenario_name,
                            "controller": spec.controller_name})


def execute_runs(specs: list[RunSpec], jobs: int = 1,
                 keep_series: bool = False) -> list[RunResult]:
    """Simulate every spec, optionally across processes, in stable grid order."""
    tasks = [(spec, keep_series) for spec in specs]
    if jobs <= 1 or len(specs) <= 1:
        return [_execute_one(task) for task in tasks]
    with multiprocessing.Pool(processes=min(jobs, len(specs))) as pool:
        return pool.map(_execute_one, tasks, chunksize=1)


def seedless_check(specs: list[RunSpec], baseline: str | None = None) -> tuple[bool, str]:
    """Execute the grid twice and compare the serialized reports byte for byte.

    There is no randomness anywhere to seed; this guards against accidental
    nondeterminism (iteration-order dependence, environment leakage).
    """
    def render(results: list[RunResult]) -> str:
        if baseline is not None:
            return compare_csv(results, baseline)
        return summary_csv(results)

    first = render(execute_runs(specs, jobs=1))
    second = render(execute_runs(specs, jobs=1))
    if first == second:
        return True, "determinism check passed: two executions byte-identical"
    return False, "determinism check FAILED: executions differ"


def tune_report(masses: tuple[float, ...] = DEFAULT_TUNE_MASSES,
                b0: float = 37.5, comfort_limit: float = COMFORT_LIMIT,
                duration: float = 20.0, tau_lo: float = 0.05,
                tau_hi: float = 10.0) -> dict:
    """Tune the admittance time constant per patient mass and verify the binding one.

    Returns per-mass rows (tau or infeasibility), the binding (largest) tau,
    a verification re-run of the binding tau at every mass, and a warning when
    a heavier patient tuned to a smaller tau than a lighter one.
    """
    from .controllers import AdmittanceParams, ControllerConfig
    from .virtual_user import comfort_step_scenario

    rows = []
    for mass in masses:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                tau = tune_time_constant(mass, b0, comfort_limit,
                                         duration=duration, tau_lo=tau_lo,
                                         tau_hi=tau_hi)
            rows.append({"mass": mass, "tau": tau, "feasible": True,
                         "a_w_at_max": None})
        except InfeasibleTimeConstant as exc:
            rows.append({"mass": mass, "tau": None, "feasible": False,
                         "a_w_at_max": exc.a_w_at_max})

    feasible = [row for row in rows if row["feasible"]]
    binding = max((row["tau"] for row in feasible), default=None)

    monotone_warning = None
    taus = [(row["mass"], row["tau"]) for row in feasible]
    for (m1, t1), (m2, t2) in zip(taus, taus[1:]):
        if m2 > m1 and t2 < t1 - 1e-3:
            monotone_warning = (
                f"tau decreased from {t1:.3f} s at {m1:g} kg"
                f" to {t2:.3f} s at {m2:g} kg")

    verification = []
    if binding is not None:
        for mass in masses:
            scenario = comfort_step_scenario(mass, b0, duration=duration)
            cfg = ControllerConfig(
                kind="admittance",
                admittance=AdmittanceParams(M_v=binding * b0, b0=b0))
            traj = simulate(scenario, cfg)
            a_w = comfort_a_w(traj, scenario.plant_params())
            verification.append({"mass": mass, "a_w": a_w,
                                 "pass": a_w <= comfort_limit})

    return {"rows": rows, "binding_tau": binding,
            "verification": verification, "monotone_warning": monotone_warning,
            "comfort_limit": comfort_limit, "b0": b0}
