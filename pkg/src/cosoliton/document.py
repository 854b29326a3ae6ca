"""Manifold spec documents: the JSON input format, validation and conversion.

A document is a JSON object with the fields

    name          str
    dimension     positive int
    coordinates   list of n identifier strings
    parameters    {name: number}; must include "alpha" for any suite that
                  depends on the structure constant
    frame         n x n array of expression strings (row i = coordinate
                  components of the i-th frame vector)
    metric_frame  "orthonormal" or an n x n array of expression strings
    phi           n x n array of expression strings (column j = frame
                  components of phi applied to the j-th frame vector)
    xi_index      1-based frame index of the Reeb field,  OR
    xi            list of n expression strings (frame components)
    sample        {"points": [[...], ...]} or {"count": N, "box": [[lo, hi] x n],
                  "seed": S};  a seed is required for box sampling
    checks        optional list of suite names (default ["all"])
    soliton       optional {"rho", "q", "lambda", "mu", "preset",
                  "vector_field", "theta"}

Validation errors name the offending field path.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from . import expr
from .contact import AlmostContactStructure
from .errors import SpecError
from .fixtures import Fixture
from .manifold import FrameManifold, SamplePlan
from .solitons import PRESETS


def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise SpecError(f"{path}: missing required field {key!r}")
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _check_expression(text, path: str, known_names: set) -> str:
    if not isinstance(text, str):
        raise SpecError(f"{path}: expected an expression string, got {text!r}")
    try:
        tree = expr.parse_expression(text)
    except expr.ParseError as err:
        raise SpecError(f"{path}: {err}") from None
    unknown = expr.variables(tree) - known_names
    if unknown:
        raise SpecError(f"{path}: undeclared identifiers {sorted(unknown)}")
    return text


def _expression_matrix(rows, n: int, path: str, known_names: set) -> list:
    if not isinstance(rows, list) or len(rows) != n:
        got = len(rows) if isinstance(rows, list) else type(rows).__name__
        raise SpecError(f"{path}: expected {n} rows, got {got}")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise SpecError(f"{path}[{i}]: expected {n} entries")
        out.append([_check_expression(e, f"{path}[{i}][{j}]", known_names)
                    for j, e in enumerate(row)])
    return out


@dataclass(frozen=True)
class SolitonConfig:
    rho: float
    q: float
    lam: float | None
    mu: float | None
    preset: str
    vector_field: tuple | None  # expression strings; None means the Reeb field
    theta: float | None


@dataclass(frozen=True)
class ManifoldSpecDocument:
    raw: dict
    name: str
    dimension: int
    coordinates: tuple
    parameters: dict
    frame: tuple
    metric_frame: object
    phi: tuple
    xi_index: int | None  # 1-based, as in the document
    xi: tuple | None
    sample: dict
    checks: tuple
    soliton: SolitonConfig | None

    def to_fixture(self) -> Fixture:
        m = FrameManifold.create(self.dimension, self.coordinates, self.parameters,
                                 self.frame, metric=self.metric_frame)
        s = AlmostContactStructure.create(
            self.phi, self.parameters.get("alpha", 0.0),
            xi_index=None if self.xi_index is None else self.xi_index - 1,
            xi_components=self.xi)
        return Fixture(self.name, m, s)

    def to_plan(self) -> SamplePlan:
        if "points" in self.sample:
            return SamplePlan.explicit(self.sample["points"])
        return SamplePlan.random_box(self.sample["count"], self.sample["box"],
                                     self.sample["seed"])

    def with_overrides(self, *, alpha=None, rho=None, q=None, lam=None, mu=None,
                       seed=None, points=None) -> "ManifoldSpecDocument":
        """Command-line overrides take precedence over the document values."""
        raw = copy.deepcopy(self.raw)
        if alpha is not None:
            raw.setdefault("parameters", {})["alpha"] = float(alpha)
        soliton_overrides = {"rho": rho, "q": q, "lambda": lam, "mu": mu}
        if any(v is not None for v in soliton_overrides.values()):
            section = raw.setdefault("soliton", {})
            for key, value in soliton_overrides.items():
                if value is not None:
                    section[key] = float(value)
                    if key in ("rho", "q"):
                        section["preset"] = "custom"
        if seed is not None or points is not None:
            sample = raw.get("sample", {})
            if "points" in sample:
                raise SpecError("sample overrides need box sampling, "
                                "but the document lists explicit points")
            if seed is not None:
                sample["seed"] = int(seed)
            if points is not None:
                sample["count"] = int(points)
            raw["sample"] = sample
        return parse_document(raw, source=self.name)


def parse_document(data: dict, source: str = "document") -> ManifoldSpecDocument:
    """Validate a raw document dict; every expression is parsed here."""
    from .suites import SUITE_NAMES

    if not isinstance(data, dict):
        raise SpecError(f"{source}: expected a JSON object at the top level")
    name = _require(data, "name", source)
    if not isinstance(name, str) or not name:
        raise SpecError(f"{source}.name: expected a non-empty string")
    n = _require(data, "dimension", source)
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise SpecError(f"{source}.dimension: expected an integer >= 2, got {n!r}")

    coords = _require(data, "coordinates", source)
    if not isinstance(coords, list) or len(coords) != n:
        raise SpecError(f"{source}.coordinates: expected {n} names")
    for i, c in enumerate(coords):
        if not isinstance(c, str) or not c:
            raise SpecError(f"{source}.coordinates[{i}]: expected a name string")
        if c in expr.CONSTANTS:
            raise SpecError(f"{source}.coordinates[{i}]: {c!r} is a reserved constant")
    if len(set(coords)) != n:
        raise SpecError(f"{source}.coordinates: names must be unique")

    raw_params = data.get("parameters", {})
    if not isinstance(raw_params, dict):
        raise SpecError(f"{source}.parameters: expected an object")
    parameters = {}
    for k, v in raw_params.items():
        if k in expr.CONSTANTS:
            raise SpecError(f"{source}.parameters.{k}: {k!r} is a reserved constant")
        parameters[k] = _number(v, f"{source}.parameters.{k}")
    known = set(coords) | set(parameters)

    frame = _expression_matrix(_require(data, "frame", source), n, f"{source}.frame", known)
    metric_raw = data.get("metric_frame", "orthonormal")
    if metric_raw == "orthonormal":
        metric = "orthonormal"
    else:
        metric = _expression_matrix(metric_raw, n, f"{source}.metric_frame", known)
    phi = _expression_matrix(_require(data, "phi", source), n, f"{source}.phi", known)

    xi_index = data.get("xi_index")
    xi = data.get("xi")
    if (xi_index is None) == (xi is None):
        raise SpecError(f"{source}: give exactly one of 'xi_index' or 'xi'")
    if xi_index is not None:
        if isinstance(xi_index, bool) or not isinstance(xi_index, int) or not 1 <= xi_index <= n:
            raise SpecError(f"{source}.xi_index: expected an integer in 1..{n}")
    if xi is not None:
        if not isinstance(xi, list) or len(xi) != n:
            raise SpecError(f"{source}.xi: expected {n} expression strings")
        xi = tuple(_check_expression(e, f"{source}.xi[{i}]", known) for i, e in enumerate(xi))

    sample = _require(data, "sample", source)
    if not isinstance(sample, dict):
        raise SpecError(f"{source}.sample: expected an object")
    if "points" in sample:
        pts = sample["points"]
        if not isinstance(pts, list) or not pts:
            raise SpecError(f"{source}.sample.points: expected a non-empty list")
        for i, p in enumerate(pts):
            if not isinstance(p, list) or len(p) != n:
                raise SpecError(f"{source}.sample.points[{i}]: expected {n} coordinates")
            for j, x in enumerate(p):
                _number(x, f"{source}.sample.points[{i}][{j}]")
    else:
        count = _require(sample, "count", f"{source}.sample")
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise SpecError(f"{source}.sample.count: expected an integer >= 1")
        box = _require(sample, "box", f"{source}.sample")
        if not isinstance(box, list) or len(box) != n:
            raise SpecError(f"{source}.sample.box: expected {n} [lo, hi] intervals")
        for i, pair in enumerate(box):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SpecError(f"{source}.sample.box[{i}]: expected [lo, hi]")
            lo = _number(pair[0], f"{source}.sample.box[{i}][0]")
            hi = _number(pair[1], f"{source}.sample.box[{i}][1]")
            if hi < lo:
                raise SpecError(f"{source}.sample.box[{i}]: lo must not exceed hi")
        seed = _require(sample, "seed", f"{source}.sample")  # reproducibility
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise SpecError(f"{source}.sample.seed: expected an integer")

    checks = data.get("checks", ["all"])
    if not isinstance(checks, list) or not checks:
        raise SpecError(f"{source}.checks: expected a non-empty list of suite names")
    valid = set(SUITE_NAMES) | {"all"}
    for i, c in enumerate(checks):
        if c not in valid:
            raise SpecError(f"{source}.checks[{i}]: unknown suite {c!r}")

    soliton = None
    if "soliton" in data:
        sec = data["soliton"]
        if not isinstance(sec, dict):
            raise SpecError(f"{source}.soliton: expected an object")
        preset = sec.get("preset", "custom")
        if preset != "custom" and preset not in PRESETS:
            raise SpecError(f"{source}.soliton.preset: unknown preset {preset!r}")
        rho = sec.get("rho")
        q = sec.get("q")
        if preset != "custom":
            preset_rho, preset_q = PRESETS[preset]
            if rho is not None and float(rho) != preset_rho:
                raise SpecError(f"{source}.soliton.rho: preset {preset!r} forces rho={preset_rho}")
            if q is not None and float(q) != preset_q:
                raise SpecError(f"{source}.soliton.q: preset {preset!r} forces q={preset_q}")
            rho, q = preset_rho, preset_q
        rho = 1.0 if rho is None else _number(rho, f"{source}.soliton.rho")
        q = 0.0 if q is None else _number(q, f"{source}.soliton.q")
        lam = sec.get("lambda")
        mu = sec.get("mu")
        lam = None if lam is None else _number(lam, f"{source}.soliton.lambda")
        mu = None if mu is None else _number(mu, f"{source}.soliton.mu")
        vf = sec.get("vector_field")
        if vf is not None and vf != "xi":
            if not isinstance(vf, list) or len(vf) != n:
                raise SpecError(f"{source}.soliton.vector_field: expected {n} expressions or 'xi'")
            vf = tuple(_check_expression(e, f"{source}.soliton.vector_field[{i}]", known)
                       for i, e in enumerate(vf))
        else:
            vf = None
        theta = sec.get("theta")
        theta = None if theta is None else _number(theta, f"{source}.soliton.theta")
        soliton = SolitonConfig(rho, q, lam, mu, preset, vf, theta)

    frozen = tuple(tuple(row) for row in frame)
    metric_frozen = metric if metric == "orthonormal" else tuple(tuple(r) for r in metric)
    return ManifoldSpecDocument(
        raw=copy.deepcopy(data), name=name, dimension=n, coordinates=tuple(coords),
        parameters=parameters, frame=frozen, metric_frame=metric_frozen,
        phi=tuple(tuple(r) for r in phi), xi_index=xi_index, xi=xi,
        sample=copy.deepcopy(sample), checks=tuple(checks), soliton=soliton)


def load_spec(path) -> ManifoldSpecDocument:
    """Load and validate a spec document from a JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise SpecError(f"cannot read {path}: {err}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(f"{path}: not valid JSON: {err}") from None
    return parse_document(data, source=str(path))


# ---------------------------------------------------------------------------
# Built-in documents

def builtin_documents() -> dict:
    """The two documents shipped with the tool, keyed by name."""
    scale = "exp(alpha*v)"
    zero, one = "0", "1"
    frame = [
        [scale, zero, zero, zero, zero],
        [zero, scale, zero, zero, zero],
        [zero, zero, scale, zero, zero],
        [zero, zero, zero, scale, zero],
        [zero, zero, zero, zero, "-1"],
    ]
    phi = [
        [zero, one, zero, zero, zero],
        ["-1", zero, zero, zero, zero],
        [zero, zero, zero, one, zero],
        [zero, zero, "-1", zero, zero],
        [zero, zero, zero, zero, zero],
    ]
    base = {
        "dimension": 5,
        "coordinates": ["x", "y", "z", "u", "v"],
        "frame": frame,
        "metric_frame": "orthonormal",
        "phi": phi,
        "xi_index": 5,
        "sample": {"count": 16, "box": [[-1.0, 1.0]] * 5, "seed": 7},
        "checks": ["all"],
        "soliton": {"rho": 1.0, "q": 1.0},
    }
    five_d = dict(base, name="alpha_cosymplectic_5d", parameters={"alpha": 0.7})
    flat = dict(copy.deepcopy(base), name="cosymplectic_flat_5d", parameters={"alpha": 0.0})
    return {"alpha_cosymplectic_5d": five_d, "cosymplectic_flat_5d": flat}


def builtin_document(name: str) -> ManifoldSpecDocument:
    docs = builtin_documents()
    if name not in docs:
        raise SpecError(f"unknown built-in fixture {name!r}; available: {sorted(docs)}")
    return parse_document(docs[name], source=name)
