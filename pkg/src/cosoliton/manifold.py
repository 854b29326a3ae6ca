"""Charts carrying a frame of vector fields, with numerical derivative machinery.

A manifold here is a single n-dimensional coordinate chart together with a
frame of n vector fields.  The frame is stored as an n x n matrix of
expressions whose row i holds the coordinate components of the i-th frame
vector.  All tensor work downstream happens in frame components; a vector
with frame components c has coordinate components E(p)^T c.

Derivatives are central finite differences.  First derivatives use a step
of 1e-6 * max(1, |coordinate|); quantities that are themselves produced by
finite differences (connection coefficients, bracket fields) are
differentiated with the larger step 1e-4 * max(1, |coordinate|) so the
inner noise does not dominate the quotient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr
from .errors import NumericalError, SpecError

DERIV_STEP = 1e-6
OUTER_DERIV_STEP = 1e-4

# Frames are user input and may degenerate; refuse to invert past this.
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class FrameVector:
    """Frame components of a tangent vector attached to a point."""

    components: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.components)):
            raise NumericalError(f"non-finite frame vector components {self.components!r}")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


class VectorField:
    """A vector field given by its frame components as a function of the point."""

    def __init__(self, fn):
        self._fn = fn

    def __call__(self, p: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(p), dtype=float)

    @classmethod
    def constant(cls, components) -> "VectorField":
        c = np.asarray(components, dtype=float).copy()
        return cls(lambda p: c)

    @classmethod
    def frame_basis(cls, i: int, n: int) -> "VectorField":
        c = np.zeros(n)
        c[i] = 1.0
        return cls(lambda p: c)

    @classmethod
    def from_expressions(cls, exprs, manifold: "FrameManifold") -> "VectorField":
        parsed = tuple(expr.parse_expression(e) if isinstance(e, str) else e for e in exprs)

        def components(p):
            b = manifold.bindings(p)
            return np.array([expr.evaluate(e, b) for e in parsed])

        return cls(components)


def as_field(v, n: int) -> VectorField:
    """Coerce a VectorField, FrameVector or component array to a VectorField."""
    if isinstance(v, VectorField):
        return v
    if isinstance(v, FrameVector):
        return VectorField.constant(v.components)
    return VectorField.constant(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class SamplePlan:
    """Where to evaluate: an explicit point list, or a seeded box sample."""

    points: tuple | None = None
    count: int | None = None
    box: tuple | None = None
    seed: int | None = None

    @classmethod
    def explicit(cls, points) -> "SamplePlan":
        pts = tuple(tuple(float(x) for x in p) for p in points)
        if not pts:
            raise SpecError("sample plan needs at least one point")
        return cls(points=pts)

    @classmethod
    def random_box(cls, count: int, box, seed: int) -> "SamplePlan":
        if count < 1:
            raise SpecError("sample count must be >= 1")
        bx = tuple((float(lo), float(hi)) for lo, hi in box)
        for lo, hi in bx:
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
                raise SpecError(f"bad box interval [{lo}, {hi}]")
        return cls(count=count, box=bx, seed=int(seed))

    def sample(self, dimension: int) -> np.ndarray:
        """Points as an array of shape (N, dimension); reproducible for a fixed seed."""
        if self.points is not None:
            pts = np.asarray(self.points, dtype=float)
            if pts.ndim != 2 or pts.shape[1] != dimension:
                raise SpecError(f"explicit points must have {dimension} coordinates")
            return pts
        if len(self.box) != dimension:
            raise SpecError(f"box must have {dimension} intervals, got {len(self.box)}")
        rng = np.random.default_rng(self.seed)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return rng.uniform(lo, hi, size=(self.count, dimension))


def _parse_matrix(rows, n, what):
    if len(rows) != n:
        raise SpecError(f"{what} must have {n} rows, got {len(rows)}")
    out = []
    for i, row in enumerate(rows):
        if len(row) != n:
            raise SpecError(f"{what} row {i + 1} must have {n} entries, got {len(row)}")
        out.append(tuple(expr.parse_expression(e) if isinstance(e, str) else e for e in row))
    return tuple(out)


@dataclass(frozen=True)
class FrameManifold:
    """Immutable chart + frame.  Safe to evaluate from many threads."""

    dimension: int
    coordinates: tuple
    parameters: dict
    frame: tuple          # frame[i][a]: Expression, coordinate component a of e_i
    metric: object = "orthonormal"  # "orthonormal" or n x n tuple of Expression

    @classmethod
    def create(cls, dimension, coordinates, parameters, frame, metric="orthonormal"):
        n = int(dimension)
        coords = tuple(coordinates)
        if len(coords) != n:
            raise SpecError(f"need {n} coordinate names, got {len(coords)}")
        if len(set(coords)) != n:
            raise SpecError("coordinate names must be unique")
        params = {str(k): float(v) for k, v in dict(parameters).items()}
        for name in list(coords) + list(params):
            if name in expr.CONSTANTS:
                raise SpecError(f"{name!r} is a reserved constant name")
        overlap = set(coords) & set(params)
        if overlap:
            raise SpecError(f"names used as both coordinate and parameter: {sorted(overlap)}")
        frame_exprs = _parse_matrix(frame, n, "frame")
        metric_exprs = metric if metric == "orthonormal" else _parse_matrix(metric, n, "metric")
        return cls(n, coords, params, frame_exprs, metric_exprs)

    def bindings(self, p: np.ndarray) -> dict:
        b = dict(zip(self.coordinates, (float(x) for x in p)))
        b.update(self.parameters)
        return b

    def with_parameters(self, **overrides) -> "FrameManifold":
        params = dict(self.parameters)
        params.update({k: float(v) for k, v in overrides.items()})
        return FrameManifold(self.dimension, self.coordinates, params, self.frame, self.metric)


# ---------------------------------------------------------------------------
# Pointwise evaluation

def evaluate_frame(m: FrameManifold, p) -> np.ndarray:
    """Frame matrix E(p); row i holds the coordinate components of e_i."""
    p = np.asarray(p, dtype=float)
    if p.shape != (m.dimension,) or not np.all(np.isfinite(p)):
        raise NumericalError(f"point must have {m.dimension} finite coordinates, got {p!r}")
    b = m.bindings(p)
    E = np.array([[expr.evaluate(e, b) for e in row] for row in m.frame])
    if not np.all(np.isfinite(E)):
        raise NumericalError(f"frame matrix has non-finite entries at {p!r}")
    if np.linalg.cond(E) > MAX_CONDITION:
        raise NumericalError(f"frame matrix is numerically singular at {p!r}")
    return E


def metric_at(m: FrameManifold, p) -> np.ndarray:
    """Metric in the frame, G_ij = g(e_i, e_j), checked symmetric positive definite."""
    p = np.asarray(p, dtype=float)
    if m.metric == "orthonormal":
        return np.eye(m.dimension)
    b = m.bindings(p)
    G = np.array([[expr.evaluate(e, b) for e in row] for row in m.metric])
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.T)) > 1e-12 * scale:
        raise NumericalError(f"metric is not symmetric at {p!r}")
    G = 0.5 * (G + G.T)
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise NumericalError(f"metric is not positive definite at {p!r}") from None
    return G


def orthonormal_frame(G: np.ndarray) -> np.ndarray:
    """Rows are frame components of a g-orthonormal basis (B @ G @ B.T = I).

    Lower-triangular, i.e. the Gram-Schmidt orthonormalization of the frame
    taken in order.
    """
    n = G.shape[0]
    if np.allclose(G, np.eye(n), atol=1e-14):
        return np.eye(n)
    L = np.linalg.cholesky(G)
    return np.linalg.inv(L)


# ---------------------------------------------------------------------------
# Derivatives

def _steps(p: np.ndarray, h: float) -> np.ndarray:
    return h * np.maximum(1.0, np.abs(p))


def partial_derivative(f, p: np.ndarray, axis: int, step: float = DERIV_STEP) -> float:
    """Central-difference coordinate partial of a scalar function."""
    h = step * max(1.0, abs(float(p[axis])))
    dp = np.zeros_like(p)
    dp[axis] = h
    return (f(p + dp) - f(p - dp)) / (2.0 * h)


def directional_derivative(m: FrameManifold, f, i: int, p, step: float = DERIV_STEP) -> float:
    """e_i(f)(p) = sum_a E_i^a(p) * df/dx^a(p)."""
    p = np.asarray(p, dtype=float)
    E = evaluate_frame(m, p)
    grad = np.array([partial_derivative(f, p, a, step) for a in range(m.dimension)])
    return float(E[i] @ grad)


def frame_coordinate_partials(m: FrameManifold, p, step: float = DERIV_STEP) -> np.ndarray:
    """dE[a, i, b] = d(E_i^b)/dx^a at p, one central difference per axis."""
    p = np.asarray(p, dtype=float)
    n = m.dimension
    h = _steps(p, step)
    dE = np.empty((n, n, n))
    for a in range(n):
        dp = np.zeros(n)
        dp[a] = h[a]
        dE[a] = (evaluate_frame(m, p + dp) - evaluate_frame(m, p - dp)) / (2.0 * h[a])
    return dE


def metric_directional_derivatives(m: FrameManifold, p, step: float = DERIV_STEP) -> np.ndarray:
    """dG[i, j, k] = e_i(g_jk) at p; zero for an orthonormal metric."""
    p = np.asarray(p, dtype=float)
    n = m.dimension
    if m.metric == "orthonormal":
        return np.zeros((n, n, n))
    E = evaluate_frame(m, p)
    h = _steps(p, step)
    dG_coord = np.empty((n, n, n))
    for a in range(n):
        dp = np.zeros(n)
        dp[a] = h[a]
        dG_coord[a] = (metric_at(m, p + dp) - metric_at(m, p - dp)) / (2.0 * h[a])
    return np.einsum("ia,ajk->ijk", E, dG_coord)


def _solve_into_frame(E: np.ndarray, coord_components: np.ndarray) -> np.ndarray:
    """Frame components c of a vector with coordinate components v: E^T c = v."""
    try:
        return np.linalg.solve(E.T, coord_components)
    except np.linalg.LinAlgError:
        raise NumericalError("singular frame matrix") from None


def lie_bracket(m: FrameManifold, i: int, j: int, p, step: float = DERIV_STEP) -> FrameVector:
    """[e_i, e_j] at p, expressed in the frame basis."""
    p = np.asarray(p, dtype=float)
    if i == j:
        return FrameVector(np.zeros(m.dimension), p)
    E = evaluate_frame(m, p)
    dE = frame_coordinate_partials(m, p, step)
    # [e_i, e_j]^a = e_i(E_j^a) - e_j(E_i^a), with e_i(f) = E_i^b d_b f
    bracket = E[i] @ dE[:, j, :] - E[j] @ dE[:, i, :]
    return FrameVector(_solve_into_frame(E, bracket), p)


def structure_constants(m: FrameManifold, p, step: float = DERIV_STEP) -> np.ndarray:
    """c[k, i, j] with [e_i, e_j] = sum_k c^k_ij e_k, antisymmetric in (i, j) by construction."""
    p = np.asarray(p, dtype=float)
    n = m.dimension
    E = evaluate_frame(m, p)
    dE = frame_coordinate_partials(m, p, step)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            bracket = E[i] @ dE[:, j, :] - E[j] @ dE[:, i, :]
            comps = _solve_into_frame(E, bracket)
            c[:, i, j] = comps
            c[:, j, i] = -comps
    return c


def field_coordinate_components(m: FrameManifold, V: VectorField, p) -> np.ndarray:
    """Coordinate components of the field at p: E(p)^T V(p)."""
    p = np.asarray(p, dtype=float)
    return evaluate_frame(m, p).T @ V(p)


def lie_bracket_fields(m: FrameManifold, V, W, p, step: float = OUTER_DERIV_STEP) -> FrameVector:
    """[V, W] at p for general fields given by frame components.

    Components of V and W may themselves come out of finite differences, so
    the default step is the coarser one.
    """
    p = np.asarray(p, dtype=float)
    n = m.dimension
    V = as_field(V, n)
    W = as_field(W, n)
    h = _steps(p, step)
    v0 = field_coordinate_components(m, V, p)
    w0 = field_coordinate_components(m, W, p)
    bracket = np.zeros(n)
    for b in range(n):
        dp = np.zeros(n)
        dp[b] = h[b]
        dw = (field_coordinate_components(m, W, p + dp)
              - field_coordinate_components(m, W, p - dp)) / (2.0 * h[b])
        dv = (field_coordinate_components(m, V, p + dp)
              - field_coordinate_components(m, V, p - dp)) / (2.0 * h[b])
        bracket += v0[b] * dw - w0[b] * dv
    return FrameVector(_solve_into_frame(evaluate_frame(m, p), bracket), p)


def scalar_field_derivative(m: FrameManifold, X, f, p, step: float = DERIV_STEP) -> float:
    """X(f)(p) for a vector X given in frame components and a scalar function f."""
    p = np.asarray(p, dtype=float)
    X = as_field(X, m.dimension)
    xc = field_coordinate_components(m, X, p)
    grad = np.array([partial_derivative(f, p, a, step) for a in range(m.dimension)])
    return float(xc @ grad)


def g_norm(G: np.ndarray, v) -> float:
    """Length of a frame-component vector in the metric G."""
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(max(0.0, v @ G @ v)))
