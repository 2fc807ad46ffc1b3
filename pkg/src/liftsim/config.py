"""Configuration files: YAML schema, validation and run-list construction.

A config names scenarios and controllers (library presets by name, or inline
definitions) and the harness runs their cartesian product.  The structural
schema is enforced with jsonschema; semantic rules (known preset names,
parameter ranges) are checked while building the runs.  The schema is
versioned via the required ``schema_version`` key and documented in
``docs/config_schema.md``.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Any

import jsonschema
import yaml

from .actuation import MotorLimits, VelocityLoopParams
from .controllers import (CONTROLLER_KINDS, DEFAULT_B0, DEFAULT_F0, DEFAULT_TAU,
                          AdmittanceParams, ControllerConfig, ForceAmpParams,
                          FrictionCompParams, SecondOrderParams,
                          VariableAdmittanceParams, matched_force_amp_gain,
                          presets, SECOND_ORDER_TAU_RATIO)
from .dynamics import FrictionParams
from .virtual_user import (ReferenceProfile, TaskScenario, UserModel,
                           scenario_library)

__all__ = ["ConfigError", "CONFIG_SCHEMA", "SCHEMA_VERSION", "load_config",
           "build_runs", "build_user", "RunSpec"]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A configuration file is structurally or semantically invalid."""


_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

_FRICTION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "b_visc": {"type": "number", "minimum": 0},
        "F_coulomb": {"type": "number", "minimum": 0},
        "v_eps": _POSITIVE,
    },
}

_REFERENCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind", "points"],
    "properties": {
        "kind": {"enum": ["velocity", "force"]},
        "points": {
            "type": "array",
            "minItems": 1,
            "items": {"type": "array", "minItems": 2, "maxItems": 2,
                      "items": _NUMBER},
        },
    },
}

_USER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "Kp_u": {"type": "number", "minimum": 0},
        "Kx_u": {"type": "number", "minimum": 0},
        "F_user_max": _POSITIVE,
        "reaction_delay": {"type": "number", "minimum": 0},
    },
}

_SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "duration", "reference"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "patient_mass": {"type": "number", "minimum": 0, "maximum": 272},
        "friction": _FRICTION_SCHEMA,
        "reference": _REFERENCE_SCHEMA,
        "duration": _POSITIVE,
        "dt": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.01},
        "initial_velocity": _NUMBER,
        "target_position": _NUMBER,
        "settle_band": _POSITIVE,
        "lift_mass": _POSITIVE,
        "pendulum_length": _POSITIVE,
        "gravity": _POSITIVE,
        "user": _USER_SCHEMA,
    },
}

_CONTROLLER_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": list(CONTROLLER_KINDS)},
        "name": {"type": "string", "minLength": 1},
        "params": {"type": "object"},
        "velocity_loop": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["pi", "ideal"]},
                "Kp": {"type": "number", "minimum": 0},
                "Ki": {"type": "number", "minimum": 0},
                "integral_limit": {"type": "number", "minimum": 0},
            },
        },
        "limits": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"F_max": _POSITIVE, "v_max": _POSITIVE},
        },
    },
}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenarios": {
            "type": "array", "minItems": 1,
            "items": {"oneOf": [{"type": "string", "minLength": 1},
                                _SCENARIO_SCHEMA]},
        },
        "controllers": {
            "type": "array", "minItems": 1,
            "items": {"oneOf": [{"type": "string", "minLength": 1},
                                _CONTROLLER_SCHEMA]},
        },
        "baseline": {"type": "string", "minLength": 1},
        "tau": _POSITIVE,
        "dt": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.01},
        "duration": _POSITIVE,
        "user": _USER_SCHEMA,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"series": {"type": "boolean"},
                           "plots": {"type": "boolean"}},
        },
        "tune": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "masses": {"type": "array", "minItems": 1,
                           "items": {"type": "number", "minimum": 0,
                                     "maximum": 272}},
                "comfort_limit": _POSITIVE,
                "b0": _POSITIVE,
                "duration": _POSITIVE,
                "tau_lo": _POSITIVE,
                "tau_hi": _POSITIVE,
            },
        },
    },
}


class RunSpec:
    """One resolved (scenario, controller) pair ready to simulate."""

    __slots__ = ("scenario", "controller", "scenario_name", "controller_name")

    def __init__(self, scenario: TaskScenario, controller: ControllerConfig,
                 scenario_name: str, controller_name: str):
        self.scenario = scenario
        self.controller = controller
        self.scenario_name = scenario_name
        self.controller_name = controller_name


def load_config(path: str | Path) -> dict:
    """Read and structurally validate a YAML config file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} is not a mapping")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(part) for part in exc.absolute_path) or "<root>"
        raise ConfigError(f"config {path} invalid at {where}: {exc.message}") from exc
    return raw


def build_user(spec: dict | None, base: UserModel | None = None) -> UserModel:
    model = base if base is not None else UserModel()
    if spec:
        model = replace(model, **spec)
    return model


def _build_scenario(entry: str | dict, config: dict,
                    library: dict[str, TaskScenario]) -> tuple[str, TaskScenario]:
    if isinstance(entry, str):
        if entry not in library:
            raise ConfigError(
                f"unknown scenario {entry!r}; presets: {sorted(library)}")
        scenario = library[entry]
    else:
        spec = dict(entry)
        try:
            reference = ReferenceProfile(
                spec["reference"]["kind"],
                tuple((p[0], p[1]) for p in spec["reference"]["points"]))
            friction = FrictionParams(**spec.get("friction", {}))
            scenario = TaskScenario(
                name=spec["name"],
                patient_mass=spec.get("patient_mass", 130.0),
                friction=friction,
                reference=reference,
                duration=spec["duration"],
                dt=spec.get("dt", 1e-3),
                lift_mass=spec.get("lift_mass", 100.0),
                pendulum_length=spec.get("pendulum_length", 0.5),
                gravity=spec.get("gravity", 9.81),
                user=build_user(spec.get("user")),
                initial_velocity=spec.get("initial_velocity", 0.0),
                target_position=spec.get("target_position"),
                settle_band=spec.get("settle_band", 0.05),
            )
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"invalid scenario definition: {exc}") from exc
    overrides = {}
    if "dt" in config:
        overrides["dt"] = config["dt"]
    if "duration" in config:
        overrides["duration"] = config["duration"]
    if "user" in config:
        overrides["user"] = build_user(config["user"], scenario.user)
    if overrides:
        try:
            scenario = replace(scenario, **overrides)
        except ValueError as exc:
            raise ConfigError(f"invalid scenario override: {exc}") from exc
    return scenario.name, scenario


def _build_controller(entry: str | dict, config: dict,
                      preset_map: dict[str, ControllerConfig]
                      ) -> tuple[str, ControllerConfig]:
    if isinstance(entry, str):
        if entry in preset_map:
            return entry, preset_map[entry]
        if entry == "friction_comp":
            return entry, ControllerConfig(kind="friction_comp",
                                           friction_comp=FrictionCompParams())
        raise ConfigError(
            f"unknown controller {entry!r}; presets:"
            f" {sorted(preset_map) + ['friction_comp']}")
    spec = dict(entry)
    kind = spec["kind"]
    params = dict(spec.get("params", {}))
    tau = config.get("tau", DEFAULT_TAU)
    try:
        loop = VelocityLoopParams(**spec.get("velocity_loop", {}))
        limits = MotorLimits(**spec.get("limits", {}))
        kwargs: dict[str, Any] = {"kind": kind, "velocity_loop": loop,
                                  "limits": limits}
        if kind == "admittance":
            b0 = params.get("b0", DEFAULT_B0)
            m_v = params.get("M_v", params.get("tau", tau) * b0)
            kwargs["admittance"] = AdmittanceParams(M_v=m_v, b0=b0)
        elif kind == "variable_admittance":
            b0 = params.get("b0", DEFAULT_B0)
            m_v = params.get("M_v", params.get("tau", tau) * b0)
            kwargs["variable"] = VariableAdmittanceParams(
                M_v=m_v, b0=b0, F0=params.get("F0", DEFAULT_F0))
        elif kind == "second_order":
            kwargs["second_order"] = SecondOrderParams(
                K=params.get("K", 1.0 / DEFAULT_B0),
                tau2=params.get("tau2", tau * SECOND_ORDER_TAU_RATIO))
        elif kind == "force_amp":
            gain = params.get("G", matched_force_amp_gain(v_max=limits.v_max))
            kwargs["force_amp"] = ForceAmpParams(G=gain)
        elif kind == "friction_comp":
            kwargs["friction_comp"] = FrictionCompParams(
                b_hat=params.get("b_hat", 50.0),
                Fc_hat=params.get("Fc_hat", 0.0),
                v_eps=params.get("v_eps", 1e-3))
        controller = ControllerConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid controller definition: {exc}") from exc
    name = spec.get("name", kind)
    return name, controller


def build_runs(config: dict) -> list[RunSpec]:
    """Resolve a validated config into the ordered (scenario, controller) grid."""
    if "scenarios" not in config or "controllers" not in config:
        raise ConfigError("config needs 'scenarios' and 'controllers' lists")
    base_user = build_user(config.get("user"))
    library = scenario_library(user=base_user)
    preset_map = presets(tau=config.get("tau", DEFAULT_TAU))

    scenarios = [_build_scenario(e, config, library) for e in config["scenarios"]]
    controllers = [_build_controller(e, config, preset_map)
                   for e in config["controllers"]]

    seen_s = [name for name, _ in scenarios]
    seen_c = [name for name, _ in controllers]
    if len(set(seen_s)) != len(seen_s):
        raise ConfigError(f"duplicate scenario names: {seen_s}")
    if len(set(seen_c)) != len(seen_c):
        raise ConfigError(f"duplicate controller names: {seen_c}")
    baseline = config.get("baseline")
    if baseline is not None and baseline not in seen_c:
        raise ConfigError(f"baseline {baseline!r} is not among the controllers")

    return [RunSpec(scenario, controller, s_name, c_name)
            for s_name, scenario in scenarios
            for c_name, controller in controllers]
