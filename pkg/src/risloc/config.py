"""Experiment configuration: JSON schema, validation, defaults, builders.

Configurations are plain JSON documents validated against
:data:`CONFIG_SCHEMA` before any computation runs.  Every default is spelled
out in the schema itself; validation fills absent fields in, so downstream
code always sees a fully populated document.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .channel import ChannelConfig, MultipathTap
from .codes import BinaryCode, CodeSchedule
from .errors import ConfigError
from .patterns import SPEED_OF_LIGHT, RisConfig
from .scenarios import SCENARIOS, ReceiverSettings, RisPose, ScenarioWorld

__all__ = ["CONFIG_SCHEMA", "load_config", "validate_config", "default_config",
           "build_ris", "build_code", "build_schedule", "build_channel",
           "build_receiver_settings", "build_world"]

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"},
         "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "risloc experiment configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "ris": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "num_columns": {"type": "integer", "minimum": 1, "default": 16},
                "num_rows": {"type": "integer", "minimum": 1, "default": 16},
                "carrier_frequency_hz": {"type": "number",
                                         "exclusiveMinimum": 0,
                                         "default": 5.385e9},
                "spacing_wavelengths": {"type": ["number", "null"],
                                        "exclusiveMinimum": 0, "default": 0.5},
                "spacing_m": {"type": ["number", "null"],
                              "exclusiveMinimum": 0, "default": None},
                "reflection_off": {**_COMPLEX, "default": 0.0},
                "reflection_on": {**_COMPLEX, "default": 1.0},
            },
            "default": {},
        },
        "code": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bits": {"type": ["string", "null"],
                         "pattern": "^[01]+$", "default": None},
                "bit_duration_s": {"type": "number", "exclusiveMinimum": 0,
                                   "default": 1.87e-3},
            },
            "default": {},
        },
        "schedule": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "column_shifts": {
                    "type": ["array", "null"],
                    "items": {"type": "integer"},
                    "default": None,
                },
            },
            "default": {},
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "snr_db": {"type": ["number", "null"], "default": None},
                "carrier_leak": {"type": "number", "minimum": 0, "default": 0.0},
                "multipath": {
                    "type": "array",
                    "default": [],
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["delay_s", "gain", "angle_deg"],
                        "properties": {
                            "delay_s": {"type": "number", "minimum": 0},
                            "gain": _COMPLEX,
                            "angle_deg": {"type": "number",
                                          "minimum": -90, "maximum": 90},
                        },
                    },
                },
                "seed": {"type": "integer", "minimum": 0, "default": 0},
            },
            "default": {},
        },
        "receiver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "window_periods": {"type": "integer", "minimum": 1, "default": 8},
                "overlap_fraction": {"type": "number", "minimum": 0,
                                     "exclusiveMaximum": 1, "default": 0.0},
                "window": {"enum": ["rect", "hann"], "default": "rect"},
                "exclude_orders": {"type": "array",
                                   "items": {"type": "integer"},
                                   "default": [0]},
                "use_f0_hint": {"type": "boolean", "default": True},
                "confidence_threshold": {"type": "number", "minimum": 0,
                                         "maximum": 1, "default": 0.2},
                "power_domain": {"type": "boolean", "default": False},
                "normalize_patterns": {"type": "boolean", "default": False},
            },
            "default": {},
        },
        "pattern": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grid_step_deg": {"type": "number", "exclusiveMinimum": 0,
                                  "maximum": 5, "default": 0.1},
                "element_taper": {"enum": ["none", "cosine"], "default": "none"},
            },
            "default": {},
        },
        "simulate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rx_angle_deg": {"type": "number", "minimum": -90,
                                 "maximum": 90, "default": 20.0},
                "duration_periods": {"type": "number", "exclusiveMinimum": 0,
                                     "default": 16.0},
                "samples_per_period": {"type": ["integer", "null"],
                                       "minimum": 2, "default": None},
                "mode": {"enum": ["harmonic", "time"], "default": "harmonic"},
            },
            "default": {},
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "angle_start_deg": {"type": "number", "minimum": -90,
                                    "maximum": 90, "default": -60.0},
                "angle_stop_deg": {"type": "number", "minimum": -90,
                                   "maximum": 90, "default": 60.0},
                "angle_step_deg": {"type": "number", "exclusiveMinimum": 0,
                                   "default": 5.0},
                "num_seeds": {"type": "integer", "minimum": 1, "default": 1},
                "base_seed": {"type": "integer", "minimum": 0, "default": 0},
            },
            "default": {},
        },
        "scenario": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "name": {"enum": list(SCENARIOS), "default": "user_side"},
                "poses": {
                    "type": "array",
                    "default": [{"position_m": [0.0, 0.0],
                                 "boresight_deg": 90.0}],
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["position_m", "boresight_deg"],
                        "properties": {
                            "position_m": {"type": "array", "minItems": 2,
                                           "maxItems": 2,
                                           "items": {"type": "number"}},
                            "boresight_deg": {"type": "number", "minimum": 0,
                                              "exclusiveMaximum": 360},
                            "modulation_frequency_hz": {
                                "type": ["number", "null"],
                                "exclusiveMinimum": 0, "default": None},
                        },
                    },
                },
                "user_position_m": {"type": ["array", "null"], "minItems": 2,
                                    "maxItems": 2, "items": {"type": "number"},
                                    "default": [3.0, 4.0]},
                "base_position_m": {"type": ["array", "null"], "minItems": 2,
                                    "maxItems": 2, "items": {"type": "number"},
                                    "default": None},
                "min_conditioning": {"type": "number", "exclusiveMinimum": 0,
                                     "maximum": 1, "default": 0.05},
            },
            "default": {},
        },
    },
}


def _extend_with_defaults(validator_class):
    """jsonschema validator that writes schema defaults into the instance."""
    validate_properties = validator_class.VALIDATORS["properties"]

    def set_defaults(validator, properties, instance, schema):
        for name, subschema in properties.items():
            if isinstance(instance, dict) and "default" in subschema:
                instance.setdefault(name, json.loads(json.dumps(
                    subschema["default"])))
        yield from validate_properties(validator, properties, instance, schema)

    return jsonschema.validators.extend(validator_class,
                                        {"properties": set_defaults})


_DefaultFillingValidator = _extend_with_defaults(
    jsonschema.validators.validator_for(CONFIG_SCHEMA))


def validate_config(document: Mapping[str, Any]) -> dict:
    """Validate a configuration and fill in every schema default.

    Raises :class:`ConfigError` with a path-qualified message on failure.
    """
    doc = json.loads(json.dumps(document))  # deep copy, JSON types only
    validator = _DefaultFillingValidator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        lines = []
        for err in errors[:10]:
            where = "/".join(str(p) for p in err.path) or "<root>"
            lines.append(f"{where}: {err.message}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines))
    _cross_validate(doc)
    return doc


def _cross_validate(doc: dict) -> None:
    # explicit spacing_m wins over spacing_wavelengths when both are present
    ris = doc["ris"]
    if ris.get("spacing_m") is None and ris.get("spacing_wavelengths") is None:
        raise ConfigError("ris: one of spacing_m or spacing_wavelengths required")
    sweep = doc["sweep"]
    if sweep["angle_stop_deg"] < sweep["angle_start_deg"]:
        raise ConfigError("sweep: angle_stop_deg must be >= angle_start_deg")


def default_config() -> dict:
    """A fully populated configuration built purely from schema defaults."""
    return validate_config({})


def load_config(path: Path | str | None) -> dict:
    """Read, validate and default-fill a JSON configuration file."""
    if path is None:
        return default_config()
    try:
        with open(path) as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return validate_config(document)


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(value[0], value[1])
    return complex(value)


def build_ris(doc: dict) -> RisConfig:
    cfg = doc["ris"]
    wavelength = SPEED_OF_LIGHT / cfg["carrier_frequency_hz"]
    spacing = (cfg["spacing_m"] if cfg.get("spacing_m") is not None
               else cfg["spacing_wavelengths"] * wavelength)
    return RisConfig(
        num_columns=cfg["num_columns"],
        num_rows=cfg["num_rows"],
        spacing=spacing,
        carrier_frequency=cfg["carrier_frequency_hz"],
        reflection_map={0: _as_complex(cfg["reflection_off"]),
                        1: _as_complex(cfg["reflection_on"])},
    )


def build_code(doc: dict) -> BinaryCode:
    cfg = doc["code"]
    if cfg["bits"] is not None:
        return BinaryCode.from_string(cfg["bits"], cfg["bit_duration_s"])
    return BinaryCode.single_bit(doc["ris"]["num_columns"], 0,
                                 cfg["bit_duration_s"])


def build_schedule(doc: dict) -> CodeSchedule:
    code = build_code(doc)
    shifts = doc["schedule"]["column_shifts"]
    if shifts is None:
        return CodeSchedule.with_unit_shifts(code, doc["ris"]["num_columns"])
    return CodeSchedule(code, tuple(shifts))


def build_channel(doc: dict, seed_override: int | None = None) -> ChannelConfig:
    cfg = doc["channel"]
    taps = tuple(
        MultipathTap(delay=t["delay_s"], gain=_as_complex(t["gain"]),
                     arrival_angle_deg=t["angle_deg"])
        for t in cfg["multipath"])
    return ChannelConfig(
        snr_db=cfg["snr_db"],
        carrier_leak=cfg["carrier_leak"],
        multipath_taps=taps,
        rng_seed=seed_override if seed_override is not None else cfg["seed"],
    )


def build_receiver_settings(doc: dict) -> ReceiverSettings:
    rx = doc["receiver"]
    sim = doc["simulate"]
    return ReceiverSettings(
        window_periods=rx["window_periods"],
        overlap_fraction=rx["overlap_fraction"],
        exclude_orders=frozenset(rx["exclude_orders"]),
        grid_step_deg=doc["pattern"]["grid_step_deg"],
        duration_periods=sim["duration_periods"],
        samples_per_period=sim["samples_per_period"],
        use_f0_hint=rx["use_f0_hint"],
    )


def build_world(doc: dict) -> ScenarioWorld:
    cfg = doc["scenario"]
    code = doc["code"]
    length = (len(code["bits"]) if code["bits"] is not None
              else doc["ris"]["num_columns"])
    base_f0 = 1.0 / (length * code["bit_duration_s"])
    n_max = length // 2
    comb_ratio = 2 * n_max + 2  # keeps neighbouring surfaces' combs disjoint
    poses = []
    for index, pose in enumerate(cfg["poses"]):
        f0 = pose.get("modulation_frequency_hz")
        if f0 is None:
            f0 = base_f0 * comb_ratio ** index
        poses.append(RisPose(position=tuple(pose["position_m"]),
                             boresight_deg=pose["boresight_deg"],
                             modulation_frequency=f0))
    user = cfg["user_position_m"]
    base = cfg["base_position_m"]
    return ScenarioWorld(
        poses=tuple(poses),
        user_position=tuple(user) if user is not None else None,
        base_position=tuple(base) if base is not None else None,
    )
