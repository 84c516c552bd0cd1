"""Scenario configs: JSON schema, validation and construction of model objects."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from . import library
from .currents import Divisor, ParametrizedVariety, SmoothPotential
from .jets import log_field
from .manifold import DefiningSystem
from .polynomial import Polynomial
from .regions import convex_body

SCHEMA_VERSION = 1

TASKS = ["tube-mass", "monotone", "convex", "zeros", "hausdorff", "potential", "expint",
         "verify-forms"]

_poly = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["exponents"],
        "additionalProperties": False,
        "properties": {
            "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "coeff_re": {"type": "number"},
            "coeff_im": {"type": "number"},
        },
    },
}

_matrix = {
    "type": "object",
    "required": ["re"],
    "additionalProperties": False,
    "properties": {
        "re": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "im": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
    },
}

_grid = {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "tubemass scenario",
    "type": "object",
    "required": ["schema_version", "task", "seed", "n"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "task": {"enum": TASKS},
        "seed": {"type": "integer", "minimum": 0},
        "n": {"type": "integer", "minimum": 1, "maximum": 6},
        "m": {"type": "integer", "minimum": 1},
        "manifold": {
            "type": "object",
            "required": ["kind"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["real_space", "coordinate_subspace", "graph", "library"]},
                "name": {"type": "string"},
                "zero_coords": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                "dependent": {"type": "object", "additionalProperties": _poly},
                "half": {"type": "number", "exclusiveMinimum": 0},
                "domain_radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "current": {
            "type": "object",
            "required": ["type"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["divisor", "smooth", "variety", "log_modulus"]},
                "f": _poly,
                "phi": _poly,
                "maps": {"type": "array", "items": _poly},
                "domain": {"type": "object"},
                "name": {"type": "string"},
            },
        },
        "region": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "r": {"type": "number", "exclusiveMinimum": 0},
                "t_grid": _grid,
                "t_points": {"type": "integer", "minimum": 3},
                "eps_grid": _grid,
                "K": {
                    "type": "object",
                    "required": ["lo", "hi"],
                    "additionalProperties": False,
                    "properties": {"lo": {"type": "array", "items": {"type": "number"}},
                                   "hi": {"type": "array", "items": {"type": "number"}}},
                },
                "body": {"type": "object"},
            },
        },
        "sampling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "samples": {"type": "integer", "minimum": 100},
                "batches": {"type": "integer", "minimum": 2},
                "grid": {"type": "integer", "minimum": 10},
            },
        },
        "weight": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "A": {"type": ["number", "null"], "minimum": 0},
                "inner_radius": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "potential": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["prop42", "kernel"]},
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "ball_radius": {"type": "number", "exclusiveMinimum": 0},
                "spacing": {"type": "number", "exclusiveMinimum": 0},
                "z_count": {"type": "integer", "minimum": 1},
                "z_radius": {"type": "number", "exclusiveMinimum": 0},
                "d_grid": _grid,
                "clip_levels": _grid,
            },
        },
        "forms": {"type": "array", "items": _matrix},
        "expect": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "violation": {"type": "boolean"},
                "reference": {"enum": ["hyperplane_r2"]},
                "value": {"type": "number"},
                "rtol": {"type": "number", "exclusiveMinimum": 0},
                "C_max": {"type": "number", "exclusiveMinimum": 0},
                "slope": {"type": "number"},
                "slope_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


class ScenarioError(ValueError):
    """Config does not parse or does not validate."""


def content_hash(raw: bytes) -> str:
    """Git blob hash of the config bytes."""
    return hashlib.sha1(b"blob %d\0" % len(raw) + raw).hexdigest()


@dataclass(frozen=True)
class Scenario:
    config: dict
    hash: str
    path: Path | None = None

    @property
    def task(self) -> str:
        return self.config["task"]

    @property
    def seed(self) -> int:
        return self.config["seed"]

    @property
    def n(self) -> int:
        return self.config["n"]

    @property
    def name(self) -> str:
        return self.config.get("name") or (self.path.stem if self.path else self.task)

    def section(self, key: str) -> dict:
        return self.config.get(key, {})

    def sampling(self, key: str, default):
        return self.section("sampling").get(key, default)

    def poly(self, terms) -> Polynomial:
        for t in terms:
            if len(t["exponents"]) != 2 * self.n:
                raise ScenarioError(f"polynomial exponents need {2 * self.n} entries")
        return Polynomial.from_terms(terms, self.n)

    def manifold(self) -> DefiningSystem:
        ds = self._build_manifold()
        if "m" in self.config and self.config["m"] != ds.m:
            raise ScenarioError(f"m = {self.config['m']} but the manifold has codimension {ds.m}")
        if ds.n != self.n:
            raise ScenarioError(f"manifold lives in C^{ds.n}, scenario says n = {self.n}")
        return ds

    def _build_manifold(self) -> DefiningSystem:
        spec = self.section("manifold")
        if not spec:
            raise ScenarioError("task needs a manifold")
        kind, n = spec["kind"], self.n
        half = spec.get("half", 1.0)
        radius = spec.get("domain_radius", 1.0)
        if kind == "real_space":
            return library.real_space(n, half, radius)
        if kind == "coordinate_subspace":
            return library.coordinate_subspace(n, spec["zero_coords"], half, radius,
                                               spec.get("name", ""))
        if kind == "graph":
            dep = {int(k): self.poly(v) for k, v in spec["dependent"].items()}
            return library.graph_manifold(n, dep, half, radius, spec.get("name", "graph"))
        name = spec.get("name", "")
        builders = {"curved_totally_real": library.curved_totally_real,
                    "small_graph": library.small_graph,
                    "paraboloid_hypersurface": library.paraboloid_hypersurface,
                    "complex_line_c2": library.complex_line_c2,
                    "counterexample_c3": library.counterexample_c3}
        if name not in builders:
            raise ScenarioError(f"unknown library manifold {name!r}")
        return builders[name]()

    def current(self):
        spec = self.section("current")
        if not spec:
            raise ScenarioError("task needs a current")
        label = spec.get("name", "")
        kind = spec["type"]
        if kind == "divisor":
            return Divisor(self.poly(spec["f"]), label)
        if kind == "smooth":
            return SmoothPotential(self.poly(spec["phi"]), label)
        if kind == "log_modulus":
            f = self.poly(spec["f"])
            return SmoothPotential(0.5 * log_field(f * f.conj()), label or "log|f|")
        maps = [Polynomial.from_terms(m, self.n - 1) for m in spec["maps"]]
        return ParametrizedVariety(tuple(maps), spec["domain"], label)

    def K(self):
        k = self.section("region").get("K")
        return None if k is None else (np.asarray(k["lo"], float), np.asarray(k["hi"], float))

    def body(self):
        spec = self.section("region").get("body")
        if spec is None:
            raise ScenarioError("convex task needs region.body")
        return convex_body(spec, self.n)


def validate(config: dict) -> None:
    try:
        jsonschema.validate(config, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioError(f"{where}: {exc.message}") from None


def load(path) -> Scenario:
    path = Path(path)
    try:
        raw = path.read_bytes()
        config = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(str(exc)) from None
    validate(config)
    return Scenario(config, content_hash(raw), path)


def bundled_dir() -> Path:
    return Path(__file__).parent / "scenarios"


def bundled() -> list[Path]:
    return sorted(bundled_dir().glob("*.json"))
