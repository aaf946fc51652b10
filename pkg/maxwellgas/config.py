"""Scenario configuration: strict JSON parsing and schema validation.

A scenario document names a mode and the blocks that mode needs. The
document is checked against SCENARIO_SCHEMA (JSON Schema, draft 7); every
violation is collected, phrased with its dotted path, and raised as one
ConfigError. Unknown keys get a close-match suggestion.
"""

import difflib
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from jsonschema import Draft7Validator
from jsonschema.exceptions import ValidationError

from .errors import ConfigError, DomainError
from .fields import BOUNDARY_CONDITIONS, MIN_CELLS, Grid
from .fluid import DEFAULT_CFL, DEFAULT_DIFFUSION_NUMBER, SCHEMES
from .latticesim import DEFAULT_BINS, DEFAULT_MAX_NEWTON, DEFAULT_NEWTON_TOL
from .thermostatics import KineticConstants
from .transport import DEFAULT_KAPPA_MAX, DEFAULT_QUAD_TOL

MODES = ("transport", "fluid", "lattice", "verify")

# Environment variable capping worker threads
THREADS_ENV = "MAXWELLGAS_THREADS"

PHYSICAL_CONSTANTS = ("m", "k_B", "sigma", "a", "epsilon")

# Blocks each mode cannot run without
REQUIRED_SECTIONS = {
    "transport": ("constants",),
    "fluid": ("constants", "grid", "initial", "run"),
    "lattice": ("constants", "lattice"),
    "verify": ("constants",),
}


def _number(positive: bool = False, **keywords) -> dict:
    schema = {"type": "number", **keywords}
    if positive:
        schema["exclusiveMinimum"] = 0
    return schema


def _integer(minimum: int | None = None, **keywords) -> dict:
    schema = {"type": "integer", **keywords}
    if minimum is not None:
        schema["minimum"] = minimum
    return schema


def _list_of(item: dict, max_items: int | None = None, **keywords) -> dict:
    """A list of item, or a bare item standing for a one-entry list."""
    many = {"items": item, "minItems": 1}
    if max_items is not None:
        many["maxItems"] = max_items
    return {"if": {"type": "array"}, "then": many, "else": item, **keywords}


def _is_list(schema: dict) -> bool:
    return schema.get("if") == {"type": "array"}


def _block(properties: dict, required=()) -> dict:
    schema = {"type": "object", "properties": properties, "additionalProperties": False}
    if required:
        schema["required"] = list(required)
    return schema


def _when(key: str, value, then: dict) -> dict:
    return {"if": {"properties": {key: {"const": value}}, "required": [key]}, "then": then}


PROFILE_SCHEMAS = {
    "uniform": _block({
        "rho": _number(positive=True),
        "theta": _number(positive=True),
        "u": _list_of(_number(), max_items=3, default=[0.0, 0.0, 0.0]),
    }, required=("rho", "theta")),
    "gaussian-bump": _block({
        "rho": _number(positive=True),
        "theta": _number(positive=True),
        "amplitude": _number(),
        "width": _number(positive=True),
        "field": {"enum": ["rho", "theta"], "default": "theta"},
        "isobaric": {"type": "boolean", "default": False},
        "center": _list_of(_number(), max_items=3),
    }, required=("rho", "theta", "amplitude", "width")),
    "shear-layer": _block({
        "rho": _number(positive=True),
        "theta": _number(positive=True),
        "velocity": _number(),
        "thickness": _number(positive=True),
        "perturbation": _number(default=0.0),
    }, required=("rho", "theta", "velocity", "thickness")),
    "sod-like": _block({
        "rho_left": _number(positive=True),
        "rho_right": _number(positive=True),
        "theta_left": _number(positive=True),
        "theta_right": _number(positive=True),
        "interface": _number(positive=True, default=0.5),
        "smoothing": _number(positive=True),
    }, required=("rho_left", "rho_right", "theta_left", "theta_right")),
    "sinusoid": _block({
        "rho": _number(positive=True),
        "theta": _number(positive=True),
        "amplitude": _number(),
        "wavelength": _number(positive=True),
        "field": {"enum": ["rho", "theta", "ux", "uy", "uz"], "default": "rho"},
        "axis": {"enum": [0, 1, 2], "default": 0},
        "u": _list_of(_number(), max_items=3, default=[0.0, 0.0, 0.0]),
    }, required=("rho", "theta", "amplitude", "wavelength")),
}

SECTION_SCHEMAS = {
    "constants": {
        **_block({
            "nondimensional": {"type": "boolean", "default": False},
            **{name: _number(positive=True) for name in PHYSICAL_CONSTANTS},
        }),
        "if": {"properties": {"nondimensional": {"const": True}}, "required": ["nondimensional"]},
        "else": {"required": list(PHYSICAL_CONSTANTS)},
    },
    "grid": _block({
        "cells": _list_of(_integer(minimum=MIN_CELLS), max_items=3),
        "length": _list_of(_number(positive=True), max_items=3),
        "boundary": _list_of({"enum": list(BOUNDARY_CONDITIONS)}, max_items=3, default=["periodic"]),
    }, required=("cells", "length")),
    "initial": {
        "type": "object",
        "required": ["profile"],
        "properties": {"profile": {"enum": list(PROFILE_SCHEMAS)}},
        "allOf": [
            _when("profile", name, {**schema, "properties": {"profile": {}, **schema["properties"]}})
            for name, schema in PROFILE_SCHEMAS.items()
        ],
    },
    "run": _block({
        "t_end": _number(positive=True),
        "output_every": _integer(minimum=1, default=10),
        "cfl": _number(positive=True, default=DEFAULT_CFL),
        "diffusion_number": _number(positive=True, default=DEFAULT_DIFFUSION_NUMBER),
        "scheme": {"enum": list(SCHEMES), "default": "ssprk2"},
        "dt": _number(positive=True),
    }, required=("t_end",)),
    "lattice": _block({
        "sites": _integer(minimum=4),
        "occupation": _number(positive=True, exclusiveMaximum=1),
        "theta": _number(positive=True),
        "steps": _integer(minimum=1),
        "amplitude": _number(default=0.0),
        "width": _number(positive=True, default=4.0),
        "bins": _integer(minimum=2, default=DEFAULT_BINS),
        "dt": _number(positive=True, default=0.25),
        "output_every": _integer(minimum=1, default=1),
        "newton_tol": _number(positive=True, default=DEFAULT_NEWTON_TOL),
        "max_newton": _integer(minimum=1, default=DEFAULT_MAX_NEWTON),
        "stochastic": {"type": "boolean", "default": False},
        "replicas": _integer(minimum=1, default=64),
    }, required=("sites", "occupation", "theta", "steps")),
    "quadrature": _block({
        "quad_tol": _number(positive=True, default=DEFAULT_QUAD_TOL),
        "kappa_max": _number(minimum=10, default=DEFAULT_KAPPA_MAX),
    }),
    "transport": _block({
        "viscosity": _number(),
        "conductivity": _number(),
        "dufour": _number(),
    }),
    "verify": _block({
        "checks": _list_of({"type": "string"}),
    }),
}

SCENARIO_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "maxwellgas scenario",
    "type": "object",
    "required": ["mode"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "seed": _integer(minimum=0),
        **SECTION_SCHEMAS,
    },
    "additionalProperties": False,
    "allOf": [_when("mode", mode, {"required": list(sections)})
              for mode, sections in REQUIRED_SECTIONS.items()],
}

VALIDATOR = Draft7Validator(SCENARIO_SCHEMA)

_TYPE_NAMES = {
    "number": "a number",
    "integer": "an integer",
    "boolean": "true or false",
    "string": "a string",
    "object": "an object",
}


@dataclass
class ConstantsConfig:
    """Physical constants block."""
    nondimensional: bool = False
    m: float | None = None
    k_B: float | None = None
    sigma: float | None = None
    a: float | None = None
    epsilon: float | None = None

    def to_constants(self) -> KineticConstants:
        if self.nondimensional:
            return KineticConstants.nondimensional_units()
        return KineticConstants(m=self.m, k_B=self.k_B, sigma=self.sigma, a=self.a, epsilon=self.epsilon)


@dataclass
class GridConfig:
    """Grid block; scalar length and boundary broadcast over the axes."""
    cells: list[int]
    length: list[float]
    boundary: list[str] = field(default_factory=lambda: ["periodic"])

    def to_grid(self) -> Grid:
        d = len(self.cells)
        length = self.length * d if len(self.length) == 1 else self.length
        boundary = self.boundary * d if len(self.boundary) == 1 else self.boundary
        return Grid.uniform(self.cells, length, boundary)


@dataclass
class InitialConfig:
    """Named initial-condition profile and its parameters."""
    profile: str
    params: dict[str, Any]


@dataclass
class RunConfig:
    """Fluid run block."""
    t_end: float
    output_every: int = 10
    cfl: float = DEFAULT_CFL
    diffusion_number: float = DEFAULT_DIFFUSION_NUMBER
    scheme: str = "ssprk2"
    dt: float | None = None


@dataclass
class LatticeConfig:
    """Lattice simulator block."""
    sites: int
    occupation: float
    theta: float
    steps: int
    amplitude: float = 0.0
    width: float = 4.0
    bins: int = DEFAULT_BINS
    dt: float = 0.25
    output_every: int = 1
    newton_tol: float = DEFAULT_NEWTON_TOL
    max_newton: int = DEFAULT_MAX_NEWTON
    stochastic: bool = False
    replicas: int = 64


@dataclass
class QuadratureConfig:
    """Quadrature knobs for the transport moments."""
    quad_tol: float = DEFAULT_QUAD_TOL
    kappa_max: float = DEFAULT_KAPPA_MAX


@dataclass
class TransportOverrides:
    """Coefficients replacing the computed ones (Euler-limit comparisons)."""
    viscosity: float | None = None
    conductivity: float | None = None
    dufour: float | None = None


@dataclass
class ScenarioConfig:
    """A validated scenario."""
    mode: str
    constants: ConstantsConfig
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    grid: GridConfig | None = None
    initial: InitialConfig | None = None
    run: RunConfig | None = None
    lattice: LatticeConfig | None = None
    transport: TransportOverrides | None = None
    checks: list[str] | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)



def _suggest(key: str, known) -> str:
    matches = difflib.get_close_matches(key, [str(k) for k in known], n=1)
    return f" (did you mean '{matches[0]}'?)" if matches else ""


def _join(path) -> str:
    text = ""
    for part in path:
        text += f"[{part}]" if isinstance(part, int) else (f".{part}" if text else str(part))
    return text


def _describe(error: ValidationError) -> list[str]:
    """Phrase one schema violation as 'path: problem' lines."""
    path = _join(error.absolute_path)
    prefix = f"{path}." if path else ""
    value = error.instance
    kind = error.validator
    if kind == "additionalProperties":
        known = error.schema.get("properties", {})
        return [f"{prefix}{key}: unknown key{_suggest(key, known)}" for key in value if key not in known]
    if kind == "required":
        missing = [key for key in error.validator_value if key not in value]
        if not path and isinstance(value.get("mode"), str):
            return [f"{key}: required for mode '{value['mode']}'" for key in missing]
        return [f"{prefix}{key}: required" for key in missing]
    if kind == "type":
        return [f"{path}: expected {_TYPE_NAMES.get(error.validator_value, error.validator_value)}, "
                f"got {json.dumps(value)}"]
    if kind == "enum":
        noun = next((p for p in reversed(error.absolute_path) if isinstance(p, str)), "value")
        choices = error.validator_value
        hint = _suggest(value, choices) if isinstance(value, str) else ""
        return [f"{path}: unknown {noun} {json.dumps(value)}. "
                f"Must be one of: {', '.join(map(str, choices))}{hint}"]
    if error.schema.get("type") == "number" and not isinstance(value, bool):
        value = float(value)
    if kind == "exclusiveMinimum" and error.validator_value == 0:
        return [f"{path}: must be strictly positive, got {value}"]
    if kind == "exclusiveMinimum":
        return [f"{path}: must exceed {error.validator_value}, got {value}"]
    if kind == "minimum":
        return [f"{path}: must be at least {error.validator_value}, got {value}"]
    if kind == "exclusiveMaximum":
        return [f"{path}: must be below {error.validator_value}, got {value}"]
    if kind == "minItems":
        return [f"{path}: must not be empty"]
    if kind == "maxItems":
        return [f"{path}: at most {error.validator_value} entries, got {len(value)}"]
    return [f"{path or 'document'}: {error.message}"]


def schema_problems(raw) -> list[str]:
    """Every violation of SCENARIO_SCHEMA in a decoded document, in path order."""
    errors = sorted(VALIDATOR.iter_errors(raw), key=lambda e: [str(p) for p in e.absolute_path])
    problems = [line for error in errors for line in _describe(error)]
    return list(dict.fromkeys(problems))


def _coerce(value, schema: dict):
    if value is None:
        return None
    if _is_list(schema):
        items = value if isinstance(value, list) else [value]
        return [_coerce(item, schema["else"]) for item in items]
    if schema.get("type") == "number":
        return float(value)
    return value


def _fill(raw: dict, schema: dict) -> dict:
    """Block values with schema defaults applied and numbers made float."""
    return {key: _coerce(raw.get(key, sub.get("default")), sub)
            for key, sub in schema["properties"].items()}


def _cross_checks(config: "ScenarioConfig", problems: list[str]):
    """Rules that span several keys."""
    constants = config.constants
    given = [name for name in PHYSICAL_CONSTANTS if getattr(constants, name) is not None]
    if constants.nondimensional and given:
        problems.append(f"constants: nondimensional units fix {', '.join(given)}; remove them")
    if config.grid is not None:
        d = len(config.grid.cells)
        for key in ("length", "boundary"):
            if len(getattr(config.grid, key)) not in (1, d):
                problems.append(f"grid.{key}: give one entry or one per axis ({d})")


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Args:
        text: JSON document

    Returns:
        Validated ScenarioConfig with numerical defaults applied

    Raises:
        ConfigError: listing every syntax or validation problem found
    """
    def no_duplicates(pairs):
        seen = {}
        for key, value in pairs:
            if key in seen:
                raise ConfigError(f"duplicate key {json.dumps(key)}")
            seen[key] = value
        return seen

    try:
        raw = json.loads(text, object_pairs_hook=no_duplicates)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise ConfigError("Scenario document must be a JSON object")

    problems = schema_problems(raw)
    if problems:
        raise ConfigError(problems)

    sections = SECTION_SCHEMAS
    config = ScenarioConfig(
        mode=raw["mode"],
        constants=ConstantsConfig(**_fill(raw.get("constants", {}), sections["constants"])),
        quadrature=QuadratureConfig(**_fill(raw.get("quadrature", {}), sections["quadrature"])),
        seed=raw.get("seed"),
    )
    if "grid" in raw:
        config.grid = GridConfig(**_fill(raw["grid"], sections["grid"]))
    if "initial" in raw:
        profile = raw["initial"]["profile"]
        params = _fill(raw["initial"], PROFILE_SCHEMAS[profile])
        config.initial = InitialConfig(profile=profile, params=params)
    if "run" in raw:
        config.run = RunConfig(**_fill(raw["run"], sections["run"]))
    if "lattice" in raw:
        config.lattice = LatticeConfig(**_fill(raw["lattice"], sections["lattice"]))
    if "transport" in raw:
        config.transport = TransportOverrides(**_fill(raw["transport"], sections["transport"]))
    if "verify" in raw:
        config.checks = _fill(raw["verify"], sections["verify"])["checks"]

    _cross_checks(config, problems)
    if not problems:
        try:
            config.constants.to_constants()
            if config.grid is not None:
                config.grid.to_grid()
        except DomainError as e:
            problems.append(str(e))

    if problems:
        raise ConfigError(problems)
    return config



def load_config(path: str | Path) -> ScenarioConfig:
    """Read and parse a scenario file.

    Raises:
        ConfigError: if the file cannot be read or fails validation
    """
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}") from e
    return parse_config(text)


def config_hash(config: ScenarioConfig) -> str:
    """SHA-256 of the canonical JSON of a validated config."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def get_thread_count() -> int:
    """Worker thread cap from MAXWELLGAS_THREADS (default 1)."""
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return 1
    try:
        count = int(value)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
    if count < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {value!r}")
    return count
