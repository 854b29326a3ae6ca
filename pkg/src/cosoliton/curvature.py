"""Curvature tensors, Ricci contractions, and the curvature identity suite.

Index conventions:

    R[m, i, j, k]  = frame component m of R(e_i, e_j) e_k
    R(X, Y) Z      = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_{[X,Y]} Z

expanded in the frame as

    R^m_ijk = e_i(G^m_jk) - e_j(G^m_ik)
              + G^l_jk G^m_il - G^l_ik G^m_jl - c^l_ij G^m_lk

with G the connection coefficients and c the structure constants.  The
outer derivatives e_i(G^m_jk) are central differences with the coarse step,
since the coefficients themselves come out of finite differences.

Contractions use a g-orthonormal frame (Gram-Schmidt per point when the
configured frame is not orthonormal):

    S(Y, Z) = sum_a g(R(u_a, Y) Z, u_a),      r = sum_a S(u_a, u_a).

This contraction sign is pinned by the regression fixtures; the opposite
convention flips the sign of S and fails them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import ConnectionField
from .manifold import (
    OUTER_DERIV_STEP,
    FrameVector,
    as_field,
    evaluate_frame,
    g_norm,
    metric_at,
    orthonormal_frame,
    structure_constants,
)


@dataclass(frozen=True)
class CurvatureReport:
    """One named identity with its max residual over sampled points and vectors."""

    name: str
    max_residual: float
    sample_count: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


@dataclass(frozen=True)
class ScalarPair:
    """Scalar curvature of both connections plus the star-scalar curvature."""

    r: float
    r_qs: float
    r_star: float


def curvature_tensor(conn: ConnectionField, p, step: float = OUTER_DERIV_STEP) -> np.ndarray:
    """Full frame curvature tensor R[m, i, j, k] at p."""
    p = np.asarray(p, dtype=float)
    m = conn.manifold
    n = m.dimension
    E = evaluate_frame(m, p)
    gamma = conn.coefficients(p)
    c = structure_constants(m, p)
    h = step * np.maximum(1.0, np.abs(p))
    d_coord = np.empty((n, n, n, n))  # d_coord[a] = d(gamma)/dx^a
    for a in range(n):
        dp = np.zeros(n)
        dp[a] = h[a]
        d_coord[a] = (conn.coefficients(p + dp) - conn.coefficients(p - dp)) / (2.0 * h[a])
    d_frame = np.einsum("ia,amjk->imjk", E, d_coord)  # d_frame[i] = e_i(gamma)
    first = np.moveaxis(d_frame, 0, 1)                # first[m,i,j,k] = e_i(G^m_jk)
    first = first - first.transpose(0, 2, 1, 3)       # minus e_j(G^m_ik)
    quad = (np.einsum("ljk,mil->mijk", gamma, gamma)
            - np.einsum("lik,mjl->mijk", gamma, gamma))
    bracket = np.einsum("lij,mlk->mijk", c, gamma)
    return first + quad - bracket


def curvature(conn: ConnectionField, X, Y, Z, p, tensor: np.ndarray | None = None) -> FrameVector:
    """R(X, Y) Z at p; X, Y, Z may be component arrays, FrameVectors or fields."""
    p = np.asarray(p, dtype=float)
    n = conn.manifold.dimension
    if tensor is None:
        tensor = curvature_tensor(conn, p)
    Xv, Yv, Zv = (as_field(v, n)(p) for v in (X, Y, Z))
    return FrameVector(np.einsum("mijk,i,j,k->m", tensor, Xv, Yv, Zv), p)


def curvature_qs_direct(qs: ConnectionField, X, Y, Z, p,
                        tensor: np.ndarray | None = None) -> FrameVector:
    """Quarter-symmetric curvature by the same recursion, run on the corrected coefficients."""
    return curvature(qs, X, Y, Z, p, tensor=tensor)


def curvature_qs_via_formula(R_value, s, m, X, Y, Z, p) -> FrameVector:
    """Quarter-symmetric curvature from the Levi-Civita value plus structure terms:

    qsR(X,Y)Z = R(X,Y)Z + a eta(X) g(phiY, Z) xi - a eta(Y) g(phiX, Z) xi
                - a eta(X) eta(Z) phiY + a eta(Y) eta(Z) phiX
    """
    p = np.asarray(p, dtype=float)
    n = m.dimension
    Xv, Yv, Zv = (as_field(v, n)(p) for v in (X, Y, Z))
    G = metric_at(m, p)
    Phi = s.phi_at(m, p)
    xi = s.xi_at(m, p)
    eta = G @ xi
    a = s.alpha
    eX, eY, eZ = float(eta @ Xv), float(eta @ Yv), float(eta @ Zv)
    pX, pY = Phi @ Xv, Phi @ Yv
    value = (np.asarray(R_value, dtype=float)
             + a * eX * float(pY @ G @ Zv) * xi
             - a * eY * float(pX @ G @ Zv) * xi
             - a * eX * eZ * pY
             + a * eY * eZ * pX)
    return FrameVector(value, p)


def quarter_symmetric_curvature_formula_tensor(R_lc: np.ndarray, s, m, p) -> np.ndarray:
    """The structure-term formula applied to every frame triple at once."""
    p = np.asarray(p, dtype=float)
    G = metric_at(m, p)
    Phi = s.phi_at(m, p)
    xi = s.xi_at(m, p)
    eta = G @ xi
    a = s.alpha
    PG = Phi.T @ G  # PG[j,k] = g(phi e_j, e_k)
    return (R_lc
            + a * np.einsum("i,jk,m->mijk", eta, PG, xi)
            - a * np.einsum("j,ik,m->mijk", eta, PG, xi)
            - a * np.einsum("i,k,mj->mijk", eta, eta, Phi)
            + a * np.einsum("j,k,mi->mijk", eta, eta, Phi))


def ricci_tensor(conn: ConnectionField, p, tensor: np.ndarray | None = None) -> np.ndarray:
    """S[j, k] = sum_a g(R(u_a, e_j) e_k, u_a) over a g-orthonormal frame."""
    p = np.asarray(p, dtype=float)
    if tensor is None:
        tensor = curvature_tensor(conn, p)
    G = metric_at(conn.manifold, p)
    B = orthonormal_frame(G)
    return np.einsum("ai,mijk,ml,al->jk", B, tensor, G, B)


def ricci(conn: ConnectionField, Y, Z, p, tensor: np.ndarray | None = None) -> float:
    p = np.asarray(p, dtype=float)
    n = conn.manifold.dimension
    S = ricci_tensor(conn, p, tensor=tensor)
    Yv, Zv = as_field(Y, n)(p), as_field(Z, n)(p)
    return float(Yv @ S @ Zv)


def scalar_from_ricci(S: np.ndarray, G: np.ndarray) -> float:
    B = orthonormal_frame(G)
    return float(np.einsum("aj,jk,ak->", B, S, B))


def scalar_curvatures(lc: ConnectionField, qs: ConnectionField, s, p) -> ScalarPair:
    """r, qs-r and star-r at p; star-r = r + alpha^2 (n-1)^2."""
    p = np.asarray(p, dtype=float)
    n = lc.manifold.dimension
    G = metric_at(lc.manifold, p)
    r = scalar_from_ricci(ricci_tensor(lc, p), G)
    r_qs = scalar_from_ricci(ricci_tensor(qs, p), G)
    return ScalarPair(r, r_qs, r + s.alpha ** 2 * (n - 1) ** 2)


def star_ricci(S_value: float, s, m, Y, Z, p) -> float:
    """S*(Y,Z) = S(Y,Z) + alpha^2 (n-2) g(Y,Z) + alpha^2 eta(Y) eta(Z)."""
    p = np.asarray(p, dtype=float)
    n = m.dimension
    G = metric_at(m, p)
    eta = G @ s.xi_at(m, p)
    Yv, Zv = as_field(Y, n)(p), as_field(Z, n)(p)
    a2 = s.alpha ** 2
    return float(S_value) + a2 * (n - 2) * float(Yv @ G @ Zv) + a2 * float(eta @ Yv) * float(eta @ Zv)


def star_ricci_tensor(S: np.ndarray, s, m, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    n = m.dimension
    G = metric_at(m, p)
    eta = G @ s.xi_at(m, p)
    a2 = s.alpha ** 2
    return S + a2 * (n - 2) * G + a2 * np.outer(eta, eta)


def first_bianchi_residual(tensor: np.ndarray) -> float:
    """max | R(X,Y)Z + R(Y,Z)X + R(Z,X)Y | over frame triples (torsion-free connections)."""
    cyc = (tensor
           + np.einsum("mjki->mijk", tensor)
           + np.einsum("mkij->mijk", tensor))
    return float(np.max(np.abs(cyc)))


def check_identities(fixture, plan, tol: float = 1e-3, witness_tol: float = 1e-2,
                     vectors_per_point: int = 4, seed: int | None = None) -> list:
    """Evaluate the curvature identity suite over sampled points and random vectors.

    Returns one CurvatureReport per identity.  The asymmetry witness compares
    |qsS(Y,Z) - qsS(Z,Y)| against 2 alpha |g(phi Y, Z)| and is held to the
    looser witness tolerance.
    """
    from .connections import levi_civita_connection, quarter_symmetric_connection

    m, s = fixture.manifold, fixture.structure
    n = m.dimension
    a = s.alpha
    lc = levi_civita_connection(m)
    qs = quarter_symmetric_connection(lc, s)
    points = plan.sample(n)
    rng = np.random.default_rng(plan.seed if seed is None else seed)

    names = ["curvature_into_reeb", "curvature_reeb_first", "curvature_reeb_sandwich",
             "eta_of_curvature", "ricci_reeb",
             "qs_skew_last_pair", "qs_skew_first_pair", "qs_ricci_reeb",
             "qs_ricci_asymmetry_witness", "qs_scalar_equals_scalar",
             "qs_curvature_formula", "qs_curvature_formula_lowered", "qs_ricci_formula",
             "first_bianchi"]
    res = dict.fromkeys(names, 0.0)

    for p in points:
        G = metric_at(m, p)
        Phi = s.phi_at(m, p)
        xi = s.xi_at(m, p)
        eta = G @ xi
        R = curvature_tensor(lc, p)
        Rq = curvature_tensor(qs, p)
        S = ricci_tensor(lc, p, tensor=R)
        Sq = ricci_tensor(qs, p, tensor=Rq)
        r = scalar_from_ricci(S, G)
        r_q = scalar_from_ricci(Sq, G)
        R38 = quarter_symmetric_curvature_formula_tensor(R, s, m, p)

        res["qs_scalar_equals_scalar"] = max(res["qs_scalar_equals_scalar"], abs(r_q - r))
        res["qs_curvature_formula"] = max(res["qs_curvature_formula"], float(np.max(np.abs(Rq - R38))))
        res["qs_ricci_formula"] = max(res["qs_ricci_formula"], float(np.max(np.abs(Sq - S - a * Phi.T @ G))))
        res["first_bianchi"] = max(res["first_bianchi"], first_bianchi_residual(R))

        def val(tensor, X, Y, Z):
            return np.einsum("mijk,i,j,k->m", tensor, X, Y, Z)

        def lowered(tensor, X, Y, Z, W):
            return float(val(tensor, X, Y, Z) @ G @ W)

        draws = rng.uniform(-1.0, 1.0, size=(vectors_per_point, 4, n))
        for X, Y, Z, W in draws:
            eX, eY, eZ, eW = (float(eta @ v) for v in (X, Y, Z, W))
            gphi = lambda u, v: float((Phi @ u) @ G @ v)

            res["curvature_into_reeb"] = max(res["curvature_into_reeb"], g_norm(G, val(R, X, Y, xi) - a * a * (eX * Y - eY * X)))
            res["curvature_reeb_first"] = max(res["curvature_reeb_first"], g_norm(
                G, val(R, xi, X, Y) - a * a * (eY * X - float(X @ G @ Y) * xi)))
            res["curvature_reeb_sandwich"] = max(res["curvature_reeb_sandwich"], g_norm(
                G, val(R, xi, X, xi) - a * a * (X - eX * xi)))
            res["eta_of_curvature"] = max(res["eta_of_curvature"], abs(
                float(eta @ val(R, X, Y, Z))
                - a * a * (eY * float(X @ G @ Z) - eX * float(Y @ G @ Z))))
            res["ricci_reeb"] = max(res["ricci_reeb"], abs(float(X @ S @ xi) + a * a * (n - 1) * eX))
            res["qs_skew_last_pair"] = max(res["qs_skew_last_pair"], abs(
                lowered(Rq, X, Y, Z, W) + lowered(Rq, X, Y, W, Z)))
            res["qs_skew_first_pair"] = max(res["qs_skew_first_pair"], abs(
                lowered(Rq, X, Y, Z, W) + lowered(Rq, Y, X, Z, W)))
            res["qs_ricci_reeb"] = max(res["qs_ricci_reeb"], abs(float(Y @ Sq @ xi) + a * a * (n - 1) * eY))
            res["qs_ricci_asymmetry_witness"] = max(res["qs_ricci_asymmetry_witness"], abs(
                abs(float(Y @ Sq @ Z) - float(Z @ Sq @ Y)) - 2.0 * abs(a) * abs(gphi(Y, Z))))
            res["qs_curvature_formula_lowered"] = max(res["qs_curvature_formula_lowered"], abs(
                lowered(Rq, X, Y, Z, W)
                - (lowered(R, X, Y, Z, W)
                   + a * eX * eW * gphi(Y, Z) - a * eY * eW * gphi(X, Z)
                   - a * eX * eZ * gphi(Y, W) + a * eY * eZ * gphi(X, W))))

    count = len(points)
    return [CurvatureReport(name, res[name], count,
                            witness_tol if name == "qs_ricci_asymmetry_witness" else tol)
            for name in names]
