"""Strict line-oriented config parsing for the experiment runner.

Format: one `key = value` per line, `#` starts a comment, blank lines are
ignored.  Every experiment declares its full key schema; unknown keys,
duplicate keys, type mismatches, and missing required keys are all rejected
with line-numbered messages, collected into a single error list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigParseError

_MAX_UINT64 = 2**64 - 1


def _parse_int(text):
    try:
        return int(text, 0)
    except ValueError:
        raise ValueError(f"{text!r} is not an integer")


def _parse_float(text):
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"{text!r} is not a number")


def _parse_floats(text):
    return tuple(_parse_float(part.strip()) for part in text.split(",") if part.strip())


def _parse_ints(text):
    return tuple(_parse_int(part.strip()) for part in text.split(",") if part.strip())


_PARSERS = {
    "int": _parse_int,
    "float": _parse_float,
    "str": lambda s: s,
    "floats": _parse_floats,
    "ints": _parse_ints,
}


@dataclass(frozen=True)
class KeySpec:
    type: str
    default: object = None
    required: bool = False
    choices: tuple = ()


# Shared grid keys for the field-theory experiments.
def _grid_keys(box_length: float, grid_points: int) -> dict:
    return {
        "mass": KeySpec("float", 1.0),
        "box_length": KeySpec("float", box_length),
        "grid_points": KeySpec("int", grid_points),
    }


SCHEMAS: dict = {
    "tails": {
        **_grid_keys(40.0, 1024),
        "center": KeySpec("float", 0.0),
        "window_lo": KeySpec("float", 5.0),   # Compton units
        "window_hi": KeySpec("float", 10.0),
    },
    "project": {
        **_grid_keys(40.0, 1024),
        "bump_radius": KeySpec("float", 5.0),
    },
    "fragility": {
        **_grid_keys(40.0, 1024),
        "packet_width": KeySpec("float", 2.0),
        "packet_momentum": KeySpec("float", 0.0),
        "shape": KeySpec("str", "box", choices=("box", "gaussian")),
        "potential_center": KeySpec("float", 0.0),
        "potential_half_width": KeySpec("float", 1.0),
        "strengths": KeySpec("floats", (0.01, 0.02, 0.05, 0.1)),
        "total_time": KeySpec("float", 2.0),
        "dt": KeySpec("float", 0.0),  # 0 = automatic (dx/2 fitted to total_time)
    },
    "causality": {
        **_grid_keys(40.0, 1024),
        "bump_width": KeySpec("float", 1.0),
        "time": KeySpec("float", 0.0),  # 0 = automatic (box_length / 8)
        "eps_supp": KeySpec("float", 1e-8),
    },
    "minloc": {
        **_grid_keys(8.0, 64),
        "region_half_width": KeySpec("float", 0.5),
        "shrink_factors": KeySpec("floats", (1.0, 0.75, 0.5)),
    },
    "commutator": {
        **_grid_keys(24.0, 128),
        "region_width": KeySpec("float", 2.0),
        "gaps": KeySpec("floats", (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
        "kind": KeySpec("str", "both", choices=("indicator", "projected", "both")),
    },
    "belljump": {
        "sites": KeySpec("int", 8),
        "n_max": KeySpec("int", 2),
        "hopping": KeySpec("float", 1.0),
        "coupling": KeySpec("float", 0.3),
        "source_site": KeySpec("int", 0),
        "total_time": KeySpec("float", 4.0),
        "dt": KeySpec("float", 0.005),
        "n_trajectories": KeySpec("int", 100000),
        "burn_time": KeySpec("float", 1.0),
    },
    "jointclick": {
        "sites": KeySpec("int", 8),
        "n_max": KeySpec("int", 2),
        "hopping": KeySpec("float", 1.0),
        "couplings": KeySpec("floats", (0.1, 0.2, 0.3)),
        "source_site": KeySpec("int", 0),
        "initial_site": KeySpec("int", 2),
        "total_time": KeySpec("float", 3.0),
        "region_a": KeySpec("ints", (0, 1)),
        "region_b": KeySpec("ints", (4, 5)),
    },
}

_COMMON_KEYS = {
    "seed": KeySpec("int", 0),
    "output_dir": KeySpec("str", "."),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description: name, flat parameter map, seed, output dir."""

    experiment: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "."


def experiment_names() -> tuple:
    return tuple(sorted(SCHEMAS))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; raises ConfigParseError listing every problem."""
    errors: list = []
    entries: dict = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        if key in entries:
            errors.append(
                f"duplicate key '{key}' (lines {entries[key][0]} and {lineno})"
            )
            continue
        entries[key] = (lineno, value)

    if "experiment" not in entries:
        errors.append("missing required key 'experiment'")
        raise ConfigParseError(errors)

    exp_line, exp_name = entries.pop("experiment")
    if exp_name not in SCHEMAS:
        errors.append(
            f"line {exp_line}: unknown experiment '{exp_name}' "
            f"(choose from {', '.join(experiment_names())})"
        )
        raise ConfigParseError(errors)

    schema = {**SCHEMAS[exp_name], **_COMMON_KEYS}
    values: dict = {}
    for key, (lineno, value) in entries.items():
        if key not in schema:
            errors.append(f"line {lineno}: unknown key '{key}' for experiment '{exp_name}'")
            continue
        spec = schema[key]
        try:
            parsed = _PARSERS[spec.type](value)
        except ValueError as exc:
            errors.append(f"line {lineno}: key '{key}': {exc}")
            continue
        if spec.choices and parsed not in spec.choices:
            errors.append(
                f"line {lineno}: key '{key}' must be one of {', '.join(spec.choices)}, "
                f"got '{parsed}'"
            )
            continue
        values[key] = parsed

    for key, spec in schema.items():
        if key in values:
            continue
        if spec.required:
            errors.append(f"missing required key '{key}' for experiment '{exp_name}'")
        else:
            values[key] = spec.default

    seed = values.pop("seed")
    if not (0 <= seed <= _MAX_UINT64):
        errors.append(f"seed must be an unsigned 64-bit integer, got {seed}")
    output_dir = values.pop("output_dir")

    if errors:
        raise ConfigParseError(errors)
    return ExperimentConfig(
        experiment=exp_name, parameters=values, seed=seed, output_dir=output_dir
    )
