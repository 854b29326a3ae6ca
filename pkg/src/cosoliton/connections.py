"""Levi-Civita and quarter-symmetric metric connections in frame components.

Connection coefficients follow the convention

    nabla_{e_i} e_j = Gamma^k_ij e_k,   stored as gamma[k, i, j].

The Levi-Civita coefficients come from the Koszul formula written for a
frame (derivative terms of the metric plus bracket terms):

    2 g(nabla_{e_i} e_j, e_k) = e_i(g_jk) + e_j(g_ki) - e_k(g_ij)
        - g(e_i, [e_j, e_k]) - g(e_j, [e_i, e_k]) + g(e_k, [e_i, e_j])

followed by a solve against the metric Gram matrix.  The quarter-symmetric
metric connection is the Levi-Civita connection corrected by the structure:

    qs_nabla_X Y = nabla_X Y - eta(X) phi(Y)

whose torsion is eta(Y) phi(X) - eta(X) phi(Y).  Connections are kept as
point-evaluable coefficient functions because curvature differentiates them
on a finite-difference stencil.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional

import numpy as np

from .errors import NumericalError
from .manifold import (
    DERIV_STEP,
    MAX_CONDITION,
    FrameManifold,
    FrameVector,
    as_field,
    evaluate_frame,
    metric_at,
    metric_directional_derivatives,
    structure_constants,
)

if TYPE_CHECKING:
    from .contact import AlmostContactStructure

LEVI_CIVITA = "levi_civita"
QUARTER_SYMMETRIC = "quarter_symmetric"


@dataclass(frozen=True)
class ConnectionField:
    """A connection as a point-evaluable coefficient function gamma[k, i, j]."""

    kind: str
    manifold: FrameManifold
    coefficients: Callable[[np.ndarray], np.ndarray]
    structure: Optional["AlmostContactStructure"] = None
    base: Optional["ConnectionField"] = None  # underlying Levi-Civita field, if derived


def levi_civita_coefficients(m: FrameManifold, p, step: float = DERIV_STEP) -> np.ndarray:
    """Koszul-formula coefficients gamma[k, i, j] at p."""
    p = np.asarray(p, dtype=float)
    n = m.dimension
    G = metric_at(m, p)
    if np.linalg.cond(G) > MAX_CONDITION:
        raise NumericalError(f"metric Gram matrix is ill conditioned at {p!r}")
    c = structure_constants(m, p, step)
    dG = metric_directional_derivatives(m, p, step)
    Gc = np.einsum("il,ljk->ijk", G, c)  # Gc[i,j,k] = g(e_i, [e_j, e_k])
    K = 0.5 * (dG
               + np.transpose(dG, (2, 0, 1))   # [i,j,k] -> e_j(g_ki)
               - np.transpose(dG, (1, 2, 0))   # [i,j,k] -> e_k(g_ij)
               - Gc
               - np.transpose(Gc, (1, 0, 2))   # [i,j,k] -> g(e_j, [e_i, e_k])
               + np.transpose(Gc, (1, 2, 0)))  # [i,j,k] -> g(e_k, [e_i, e_j])
    # gamma[l, i, j] solves G gamma[:, i, j] = K[i, j, :]
    rhs = K.reshape(n * n, n).T
    try:
        gamma = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        raise NumericalError(f"singular metric Gram matrix at {p!r}") from None
    return gamma.reshape(n, n, n)


def levi_civita(m: FrameManifold, p) -> np.ndarray:
    """Spec-level operation: Levi-Civita gamma[k, i, j] at a point."""
    return levi_civita_coefficients(m, p)


def levi_civita_connection(m: FrameManifold) -> ConnectionField:
    return ConnectionField(LEVI_CIVITA, m, lambda p: levi_civita_coefficients(m, p))


def quarter_symmetric_coefficients(gamma: np.ndarray, s, m: FrameManifold, p) -> np.ndarray:
    """gamma[k,i,j] - eta(e_i) * (phi e_j)^k, evaluated componentwise."""
    p = np.asarray(p, dtype=float)
    eta = s.eta_at(m, p)
    Phi = s.phi_at(m, p)
    return gamma - np.einsum("i,kj->kij", eta, Phi)


def quarter_symmetric(lc: ConnectionField, s, p) -> np.ndarray:
    """Spec-level operation: quarter-symmetric gamma at a point, from a Levi-Civita field."""
    return quarter_symmetric_coefficients(lc.coefficients(p), s, lc.manifold, p)


def quarter_symmetric_connection(lc: ConnectionField, s) -> ConnectionField:
    m = lc.manifold
    return ConnectionField(
        QUARTER_SYMMETRIC, m,
        lambda p: quarter_symmetric_coefficients(lc.coefficients(p), s, m, p),
        structure=s, base=lc)


def covariant_derivative_matrix(conn: ConnectionField, W, p,
                                step: float = DERIV_STEP) -> np.ndarray:
    """D[i, m] = (nabla_{e_i} W)^m = e_i(W^m) + Gamma^m_il W^l for all frame directions.

    The derivatives of the component functions of W are central differences.
    """
    p = np.asarray(p, dtype=float)
    m = conn.manifold
    n = m.dimension
    Wf = as_field(W, n)
    w0 = Wf(p)
    E = evaluate_frame(m, p)
    h = step * np.maximum(1.0, np.abs(p))
    dW = np.empty((n, n))  # dW[a, m] = d(W^m)/dx^a
    for a in range(n):
        dp = np.zeros(n)
        dp[a] = h[a]
        dW[a] = (Wf(p + dp) - Wf(p - dp)) / (2.0 * h[a])
    gamma = conn.coefficients(p)
    return E @ dW + np.einsum("mil,l->im", gamma, w0)


def covariant_derivative(conn: ConnectionField, X, W, p, step: float = DERIV_STEP) -> FrameVector:
    """nabla_X W at p, for X a vector (frame components) and W a vector field."""
    p = np.asarray(p, dtype=float)
    Xv = as_field(X, conn.manifold.dimension)(p)
    D = covariant_derivative_matrix(conn, W, p, step)
    return FrameVector(Xv @ D, p)


def torsion(conn: ConnectionField, i: int, j: int, p) -> FrameVector:
    """T(e_i, e_j) = nabla_{e_i} e_j - nabla_{e_j} e_i - [e_i, e_j] in frame components."""
    p = np.asarray(p, dtype=float)
    gamma = conn.coefficients(p)
    c = structure_constants(conn.manifold, p)
    return FrameVector(gamma[:, i, j] - gamma[:, j, i] - c[:, i, j], p)


def torsion_tensor(conn: ConnectionField, p) -> np.ndarray:
    """T[k, i, j] for all frame pairs at once."""
    p = np.asarray(p, dtype=float)
    gamma = conn.coefficients(p)
    c = structure_constants(conn.manifold, p)
    return gamma - np.transpose(gamma, (0, 2, 1)) - c


def metric_compatibility(conn: ConnectionField, p, step: float = DERIV_STEP) -> float:
    """max_{i,j,k} | e_i(g_jk) - g(nabla_{e_i} e_j, e_k) - g(e_j, nabla_{e_i} e_k) |."""
    p = np.asarray(p, dtype=float)
    m = conn.manifold
    G = metric_at(m, p)
    dG = metric_directional_derivatives(m, p, step)
    gamma = conn.coefficients(p)
    lowered = np.einsum("mij,mk->ijk", gamma, G)  # g(nabla_{e_i} e_j, e_k)
    residual = dG - lowered - np.transpose(lowered, (0, 2, 1))
    return float(np.max(np.abs(residual)))
