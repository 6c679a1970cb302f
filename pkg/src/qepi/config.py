"""Run configuration: JSON schema, validation and expansion into sweep points."""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import os
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .errors import BudgetExceeded, ConfigInvalid

SCHEMA_VERSION = 1
CHECKS = ("epi", "monotonicity", "debruijn", "fisher-stam", "qc-epi", "liftproof")
COLLECTIONS = ("singletons", "pairs", "leave-one-out", "full")
FAMILIES = (
    "vacuum", "fock", "thermal", "coherent", "cat", "phase_mixed_coherent",
    "fock_mixture", "random_full_support", "displaced_thermal", "mixture",
)
DEFAULT_MAX_CUTOFF = 80
ENV_MAX_CUTOFF = "QEPI_MAX_CUTOFF"

_number = {"type": "number"}
_number_or_list = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 1}]}
_int_or_list = {
    "oneOf": [
        {"type": "integer", "minimum": 1},
        {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    ]
}
_mu = {
    "oneOf": [
        {"const": "optimal"},
        {"const": "uniform"},
        {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    ]
}


def _section(**props):
    return {"type": "object", "additionalProperties": False, "properties": props}


SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "qepi verification run",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "checks", "states"],
    "$defs": {
        "state": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": list(FAMILIES)},
                "params": {"type": "object"},
                "grid": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "minItems": 1},
                },
                "cutoff": {"type": "integer", "minimum": 0},
                "components": {"type": "array", "items": {"$ref": "#/$defs/state"}, "minItems": 1},
            },
        },
        "variable": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["gaussian", "finite"]},
                "h": {"type": "number", "minimum": 0},
                "mean": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "points": {"type": "array", "minItems": 1},
                "probs": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
        "collections": {"type": "array", "items": {"enum": list(COLLECTIONS)}, "minItems": 1},
    },
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "cutoff": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "checks": {
            "type": "array",
            "items": {"enum": [*CHECKS, "all"]},
            "minItems": 1,
            "uniqueItems": True,
        },
        "states": {"type": "array", "items": {"$ref": "#/$defs/state"}, "minItems": 1},
        "epi": _section(eta=_number_or_list),
        "monotonicity": _section(n_max=_int_or_list),
        "debruijn": _section(),
        "fisher-stam": _section(
            n=_int_or_list,
            collections={"$ref": "#/$defs/collections"},
            mu=_mu,
            ensembles={
                "type": "array",
                "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
            },
        ),
        "qc-epi": _section(
            n=_int_or_list,
            n_classical=_int_or_list,
            collections={"$ref": "#/$defs/collections"},
            mu=_mu,
            variables={"type": "array", "items": {"$ref": "#/$defs/variable"}, "minItems": 1},
        ),
        "liftproof": _section(
            state_cutoff={"type": "integer", "minimum": 1},
            nodes={"type": "integer", "minimum": 4},
            subsets={"type": "array", "items": {"type": "array", "items": {"enum": [1, 2]}}},
        ),
        "tolerances": _section(
            entropy={"type": "number", "minimum": 0},
            fisher={"type": "number", "minimum": 0},
            debruijn={"type": "number", "minimum": 0},
            lift={"type": "number", "minimum": 0},
            projector={"type": "number", "minimum": 0},
        ),
        "gates": _section(
            trace_deficit={"type": "number", "minimum": 0},
            quad_error={"type": "number", "minimum": 0},
            lift_quad_error={"type": "number", "minimum": 0},
            tail={"type": "number", "minimum": 0},
        ),
        "quadrature": _section(
            nodes={"type": "integer", "minimum": 2},
            max_terms={"type": "integer", "minimum": 1},
        ),
        "budget": _section(max_points={"type": "integer", "minimum": 1}),
    },
}

DEFAULTS = {
    "cutoff": 30,
    "seed": 0,
    "epi": {"eta": 0.5},
    "monotonicity": {"n_max": 4},
    "debruijn": {},
    "fisher-stam": {"n": 2, "collections": ["singletons"], "mu": "optimal"},
    "qc-epi": {
        "n": 2, "n_classical": 2, "collections": ["singletons"], "mu": "optimal",
        "variables": [{"kind": "gaussian", "h": 1.0}],
    },
    "liftproof": {"state_cutoff": 5, "nodes": 80, "subsets": [[1], [1, 2]]},
    "tolerances": {"entropy": 1e-6, "fisher": 1e-5, "debruijn": 1e-3, "lift": 1e-3, "projector": 1e-9},
    "gates": {"trace_deficit": 1e-6, "quad_error": 1e-6, "lift_quad_error": 0.1, "tail": 1e-8},
    "quadrature": {"nodes": 20, "max_terms": 10000},
    "budget": {"max_points": 2000},
}


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration with defaults filled in."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def checks(self) -> tuple:
        requested = self.data["checks"]
        if "all" in requested:
            return CHECKS
        return tuple(c for c in CHECKS if c in requested)

    def canonical(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def max_cutoff() -> int:
    raw = os.environ.get(ENV_MAX_CUTOFF)
    if raw is None:
        return DEFAULT_MAX_CUTOFF
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigInvalid(f"{ENV_MAX_CUTOFF}={raw!r} is not an integer") from exc


def _merge(defaults: dict, given: dict) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _state_cutoffs(spec: dict):
    if "cutoff" in spec:
        yield spec["cutoff"]
    for comp in spec.get("components", []):
        yield from _state_cutoffs(comp)


def validate(data: dict, seed: int | None = None) -> RunConfig:
    """Validate raw configuration data and fill defaults.

    ``seed`` overrides the configured seed.  Raises :class:`ConfigInvalid`
    on schema violations or cutoffs above the ``QEPI_MAX_CUTOFF`` cap.
    """
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigInvalid(f"{where}: {exc.message}") from exc
    full = _merge(DEFAULTS, data)
    if seed is not None:
        full["seed"] = int(seed)
    cap = max_cutoff()
    cutoffs = [full["cutoff"], full["liftproof"]["state_cutoff"]]
    for spec in full["states"]:
        cutoffs.extend(_state_cutoffs(spec))
    if max(cutoffs) > cap:
        raise ConfigInvalid(f"cutoff {max(cutoffs)} exceeds the {ENV_MAX_CUTOFF} cap of {cap}")
    for spec in full["qc-epi"]["variables"]:
        if spec["kind"] == "finite" and "points" not in spec:
            raise ConfigInvalid("finite classical variables need 'points'")
    return RunConfig(full)


def load(path, seed: int | None = None) -> RunConfig:
    """Read and validate a JSON configuration file.

    Raises ``OSError`` when the file cannot be read and :class:`ConfigInvalid`
    when it is not valid JSON or fails validation.
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a JSON object")
    return validate(data, seed)


def as_list(value) -> list:
    return list(value) if isinstance(value, list) else [value]


def grid(**axes) -> list[dict]:
    """Cartesian product of the given axes, one dict per point."""
    keys = sorted(axes)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(as_list(axes[k]) for k in keys))]


def expand_states(specs) -> list[dict]:
    """Expand each state spec's ``grid`` into fixed ``params`` entries."""
    out = []
    for spec in specs:
        axes = spec.get("grid", {})
        points = grid(**axes) if axes else [{}]
        for point in points:
            item = {k: v for k, v in spec.items() if k != "grid"}
            item["params"] = {**spec.get("params", {}), **point}
            out.append(item)
    return out


def check_budget(count: int, cfg: RunConfig):
    limit = cfg["budget"]["max_points"]
    if count > limit:
        raise BudgetExceeded(f"sweep has {count} points, budget is {limit}")
