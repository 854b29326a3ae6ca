"""Almost contact metric structures and their axiom checks.

The structure is (phi, xi, eta, g): a (1,1)-tensor phi stored as a matrix of
frame-component expressions (column j holds the components of phi applied to
the j-th frame vector), a distinguished vector field xi (a frame index by
default), and the 1-form eta, which is always derived from the metric as
eta(X) = g(X, xi) rather than supplied by the user.

The axioms checked on random vectors at sampled points:

    phi^2 X = -X + eta(X) xi,   eta(xi) = 1,   eta(phi X) = 0,   phi xi = 0,
    g(phi X, phi Y) = g(X, Y) - eta(X) eta(Y),
    g(X, phi Y) = -g(phi X, Y),
    g(X, xi) = eta(X),

together with antisymmetry of the fundamental 2-form g(phi X, Y).

The structure is alpha-cosymplectic when the Levi-Civita connection
satisfies (with X, Y arbitrary):

    (nabla_X phi) Y = alpha * (g(phi X, Y) xi - eta(Y) phi X)
    nabla_X  xi     = alpha * (X - eta(X) xi)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr
from .errors import SpecError
from .manifold import (
    DERIV_STEP,
    FrameManifold,
    FrameVector,
    SamplePlan,
    VectorField,
    as_field,
    g_norm,
    lie_bracket_fields,
    metric_at,
    scalar_field_derivative,
)


@dataclass(frozen=True)
class AlmostContactStructure:
    phi: tuple               # phi[k][j]: Expression, frame component k of phi(e_j)
    alpha: float
    xi_index: int | None = None        # 0-based frame index
    xi_components: tuple | None = None

    @classmethod
    def create(cls, phi, alpha, xi_index=None, xi_components=None):
        n = len(phi)
        rows = []
        for i, row in enumerate(phi):
            if len(row) != n:
                raise SpecError(f"phi row {i + 1} must have {n} entries, got {len(row)}")
            rows.append(tuple(expr.parse_expression(e) if isinstance(e, str) else e for e in row))
        if (xi_index is None) == (xi_components is None):
            raise SpecError("give exactly one of xi_index or xi_components")
        if xi_index is not None and not 0 <= xi_index < n:
            raise SpecError(f"xi_index out of range for dimension {n}")
        comps = None
        if xi_components is not None:
            if len(xi_components) != n:
                raise SpecError(f"xi needs {n} components, got {len(xi_components)}")
            comps = tuple(expr.parse_expression(e) if isinstance(e, str) else e
                          for e in xi_components)
        return cls(tuple(rows), float(alpha), xi_index, comps)

    @property
    def dimension(self) -> int:
        return len(self.phi)

    def phi_at(self, m: FrameManifold, p) -> np.ndarray:
        b = m.bindings(np.asarray(p, dtype=float))
        return np.array([[expr.evaluate(e, b) for e in row] for row in self.phi])

    def xi_at(self, m: FrameManifold, p) -> np.ndarray:
        if self.xi_index is not None:
            xi = np.zeros(self.dimension)
            xi[self.xi_index] = 1.0
            return xi
        b = m.bindings(np.asarray(p, dtype=float))
        return np.array([expr.evaluate(e, b) for e in self.xi_components])

    def eta_at(self, m: FrameManifold, p) -> np.ndarray:
        """Covector components: eta_i = g(e_i, xi), so eta(X) = eta_i X^i."""
        return metric_at(m, p) @ self.xi_at(m, p)

    def xi_field(self, m: FrameManifold) -> VectorField:
        return VectorField(lambda p: self.xi_at(m, p))

    def phi_applied(self, m: FrameManifold, V) -> VectorField:
        Vf = as_field(V, self.dimension)
        return VectorField(lambda p: self.phi_at(m, p) @ Vf(p))


@dataclass(frozen=True)
class StructureCheckReport:
    """Per-axiom max residuals over sample points and random vector pairs."""

    residuals: dict
    tolerance: float
    sample_count: int

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def _random_vectors(rng, count, n):
    return rng.uniform(-1.0, 1.0, size=(count, n))


def check_axioms(s: AlmostContactStructure, m: FrameManifold, plan: SamplePlan,
                 tol: float = 1e-10, pairs_per_point: int = 4,
                 seed: int | None = None) -> StructureCheckReport:
    """Evaluate the structure axioms on random vector pairs at sampled points."""
    if s.dimension != m.dimension:
        raise SpecError(f"structure dimension {s.dimension} != manifold dimension {m.dimension}")
    points = plan.sample(m.dimension)
    rng = np.random.default_rng(plan.seed if seed is None else seed)
    names = ["phi_square", "eta_xi", "eta_circ_phi", "phi_xi",
             "metric_phi_compat", "phi_skew", "eta_from_metric", "two_form_antisym"]
    res = dict.fromkeys(names, 0.0)
    for p in points:
        G = metric_at(m, p)
        Phi = s.phi_at(m, p)
        xi = s.xi_at(m, p)
        eta = G @ xi
        res["eta_xi"] = max(res["eta_xi"], abs(float(eta @ xi) - 1.0))
        res["phi_xi"] = max(res["phi_xi"], g_norm(G, Phi @ xi))
        for X, Y in zip(_random_vectors(rng, pairs_per_point, m.dimension),
                        _random_vectors(rng, pairs_per_point, m.dimension)):
            pX, pY = Phi @ X, Phi @ Y
            res["phi_square"] = max(res["phi_square"],
                                    g_norm(G, Phi @ pX + X - (eta @ X) * xi))
            res["eta_circ_phi"] = max(res["eta_circ_phi"], abs(float(eta @ pX)))
            res["metric_phi_compat"] = max(
                res["metric_phi_compat"],
                abs(float(pX @ G @ pY) - float(X @ G @ Y) + float(eta @ X) * float(eta @ Y)))
            res["phi_skew"] = max(res["phi_skew"],
                                  abs(float(X @ G @ pY) + float(pX @ G @ Y)))
            res["eta_from_metric"] = max(res["eta_from_metric"],
                                         abs(float(X @ G @ xi) - float(eta @ X)))
            res["two_form_antisym"] = max(res["two_form_antisym"],
                                          abs(float(pX @ G @ Y) + float(pY @ G @ X)))
    return StructureCheckReport(res, tol, len(points))


def nijenhuis(s: AlmostContactStructure, m: FrameManifold, X, Y, p,
              step: float = DERIV_STEP) -> FrameVector:
    """Nijenhuis tensor with the 2*d(eta) term:

    N(X, Y) = [phiX, phiY] - phi[phiX, Y] - phi[X, phiY] + phi^2 [X, Y]
              + 2 d(eta)(X, Y) xi
    """
    p = np.asarray(p, dtype=float)
    n = m.dimension
    Xf, Yf = as_field(X, n), as_field(Y, n)
    pXf, pYf = s.phi_applied(m, Xf), s.phi_applied(m, Yf)
    Phi = s.phi_at(m, p)
    xi = s.xi_at(m, p)

    b_pp = lie_bracket_fields(m, pXf, pYf, p, step).components
    b_pY = lie_bracket_fields(m, pXf, Yf, p, step).components
    b_Xp = lie_bracket_fields(m, Xf, pYf, p, step).components
    b_XY = lie_bracket_fields(m, Xf, Yf, p, step).components

    def eta_of(Vf):
        return lambda q: float(Vf(q) @ metric_at(m, q) @ s.xi_at(m, q))

    d_eta = 0.5 * (scalar_field_derivative(m, Xf, eta_of(Yf), p, step)
                   - scalar_field_derivative(m, Yf, eta_of(Xf), p, step)
                   - float((metric_at(m, p) @ xi) @ b_XY))
    value = (b_pp - Phi @ b_pY - Phi @ b_Xp + Phi @ (Phi @ b_XY) + 2.0 * d_eta * xi)
    return FrameVector(value, p)


def verify_alpha_cosymplectic(s: AlmostContactStructure, m: FrameManifold, conn,
                              plan: SamplePlan, tol: float = 1e-5,
                              vectors_per_point: int = 4,
                              seed: int | None = None) -> StructureCheckReport:
    """Check the defining covariant-derivative relations against conn (Levi-Civita)."""
    from .connections import covariant_derivative

    points = plan.sample(m.dimension)
    rng = np.random.default_rng(plan.seed if seed is None else seed)
    alpha = s.alpha
    res = {"covariant_phi": 0.0, "covariant_xi": 0.0}
    xi_f = s.xi_field(m)
    for p in points:
        G = metric_at(m, p)
        Phi = s.phi_at(m, p)
        xi = s.xi_at(m, p)
        eta = G @ xi
        gamma = conn.coefficients(p)
        for X, Y in zip(_random_vectors(rng, vectors_per_point, m.dimension),
                        _random_vectors(rng, vectors_per_point, m.dimension)):
            nabla_xi = covariant_derivative(conn, X, xi_f, p).components
            res["covariant_xi"] = max(
                res["covariant_xi"],
                g_norm(G, nabla_xi - alpha * (X - float(eta @ X) * xi)))
            # (nabla_X phi)Y = nabla_X(phi Y) - phi(nabla_X Y)
            nabla_phiY = covariant_derivative(conn, X, s.phi_applied(m, Y), p).components
            nabla_Y = np.einsum("kil,i,l->k", gamma, X, Y)
            lhs = nabla_phiY - Phi @ nabla_Y
            rhs = alpha * (float((Phi @ X) @ G @ Y) * xi - float(eta @ Y) * (Phi @ X))
            res["covariant_phi"] = max(res["covariant_phi"], g_norm(G, lhs - rhs))
    return StructureCheckReport(res, tol, len(points))
