"""Soliton residuals, soliton-constant solvers, the Laplacian bound and classifications.

The central object is the star-eta soliton equation with Ricci-Yamabe
weights (rho, q) on an almost contact metric manifold.  Under the
Levi-Civita connection the residual tensor is

    (L_V g)(Y,Z) + 2 rho S*(Y,Z) + (2 Lam - q r*) g(Y,Z) + 2 mu eta(Y) eta(Z)

and under the quarter-symmetric connection the expanded form

    (qsL_V g)(Y,Z) + 2 rho qsS(Y,Z)
        + (2 Lam + 2 a^2 rho (n-2) - q qsr - q a^2 (n-1)^2) g(Y,Z)
        + (2 mu + 2 a^2 rho) eta(Y) eta(Z)

where qsL is the Lie derivative taken with the quarter-symmetric covariant
derivative.  A soliton is classified from the sign of the constant Lam;
following the source convention this package labels Lam < 0 expanding,
Lam = 0 steady and Lam > 0 shrinking by default (`convention="paper"`),
the reverse of the more common usage (`convention="standard"`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .connections import (
    ConnectionField,
    covariant_derivative_matrix,
)
from .curvature import ricci_tensor, scalar_from_ricci, star_ricci_tensor
from .errors import NumericalError, SpecError
from .manifold import (
    SamplePlan,
    as_field,
    g_norm,
    metric_at,
    orthonormal_frame,
)

PRESETS = {"ricci": (1.0, 0.0), "yamabe": (0.0, 1.0), "einstein": (1.0, -1.0)}

SOLVE_MODES = ("sum", "split", "split_alternate")

CONVENTIONS = ("paper", "standard")


class SolitonWeightWarning(UserWarning):
    """The weight pair does not define the soliton structure being evaluated."""


@dataclass(frozen=True)
class SolitonParameters:
    lam: float
    mu: float
    rho: float
    q: float
    preset: str = "custom"

    @classmethod
    def create(cls, lam=0.0, mu=0.0, rho=None, q=None, preset="custom"):
        if preset != "custom":
            if preset not in PRESETS:
                raise SpecError(f"unknown soliton preset {preset!r}; "
                                f"choose one of {sorted(PRESETS)} or 'custom'")
            preset_rho, preset_q = PRESETS[preset]
            if rho is not None and float(rho) != preset_rho:
                raise SpecError(f"preset {preset!r} forces rho={preset_rho}, got {rho}")
            if q is not None and float(q) != preset_q:
                raise SpecError(f"preset {preset!r} forces q={preset_q}, got {q}")
            rho, q = preset_rho, preset_q
        rho = 1.0 if rho is None else float(rho)
        q = 0.0 if q is None else float(q)
        return cls(float(lam), float(mu), rho, q, preset)

    def check_weights(self):
        """Warn when rho = 0: the star-eta soliton equation requires a nonzero rho."""
        if self.rho == 0.0:
            warnings.warn(
                "rho = 0 does not define a star-eta soliton with Ricci-Yamabe weights; "
                "residuals are still computed but should not be read as a soliton check",
                SolitonWeightWarning, stacklevel=3)
            return False
        return True


def classify_soliton(lam: float, threshold: float = 1e-12, convention: str = "paper") -> str:
    """Expanding / steady / shrinking from the sign of the soliton constant."""
    if convention not in CONVENTIONS:
        raise SpecError(f"unknown convention {convention!r}")
    if abs(lam) <= threshold:
        return "steady"
    negative = lam < 0.0
    if convention == "paper":
        return "expanding" if negative else "shrinking"
    return "shrinking" if negative else "expanding"


# ---------------------------------------------------------------------------
# Lie derivatives of the metric

def lie_derivative_matrix(conn: ConnectionField, V, p) -> np.ndarray:
    """L[j,k] = g(nabla_{e_j} V, e_k) + g(e_j, nabla_{e_k} V) on frame pairs."""
    p = np.asarray(p, dtype=float)
    G = metric_at(conn.manifold, p)
    DG = covariant_derivative_matrix(conn, V, p) @ G
    return DG + DG.T


def lie_derivative_metric(conn: ConnectionField, V, Y, Z, p) -> float:
    """(L_V g)(Y, Z) at p via the connection's covariant derivative."""
    p = np.asarray(p, dtype=float)
    n = conn.manifold.dimension
    L = lie_derivative_matrix(conn, V, p)
    Yv, Zv = as_field(Y, n)(p), as_field(Z, n)(p)
    return float(Yv @ L @ Zv)


def lie_derivative_matrix_qs(qs: ConnectionField, V, p,
                             cross_check_tol: float = 1e-9) -> np.ndarray:
    """Quarter-symmetric Lie derivative matrix, by the correction formula

        qsL[j,k] = L[j,k] - eta_j g(phi V, e_k) - eta_k g(e_j, phi V)

    cross-checked against the direct evaluation with the corrected
    coefficients; disagreement beyond rounding is an internal error.
    """
    p = np.asarray(p, dtype=float)
    if qs.base is None or qs.structure is None:
        raise SpecError("quarter-symmetric Lie derivative needs a derived connection field")
    m, s = qs.manifold, qs.structure
    G = metric_at(m, p)
    eta = G @ s.xi_at(m, p)
    phi_v = s.phi_at(m, p) @ as_field(V, m.dimension)(p)
    L = lie_derivative_matrix(qs.base, V, p)
    correction = np.outer(eta, G @ phi_v)
    formula = L - correction - correction.T
    direct = lie_derivative_matrix(qs, V, p)
    scale = max(1.0, float(np.max(np.abs(formula))))
    if np.max(np.abs(formula - direct)) > cross_check_tol * scale:
        raise NumericalError("quarter-symmetric Lie derivative routes disagree")
    return formula


def lie_derivative_metric_qs(qs: ConnectionField, s, V, Y, Z, p) -> float:
    """(qsL_V g)(Y, Z) at p; `s` must match the structure the field was built with."""
    p = np.asarray(p, dtype=float)
    if qs.structure is not None and qs.structure is not s:
        raise SpecError("structure does not match the connection field")
    n = qs.manifold.dimension
    L = lie_derivative_matrix_qs(qs, V, p)
    Yv, Zv = as_field(Y, n)(p), as_field(Z, n)(p)
    return float(Yv @ L @ Zv)


# ---------------------------------------------------------------------------
# Soliton residuals

def soliton_residual_matrix(params: SolitonParameters, fixture, V, connection_kind: str, p,
                            *, lc: ConnectionField | None = None,
                            qs: ConnectionField | None = None,
                            S: np.ndarray | None = None,
                            S_qs: np.ndarray | None = None) -> np.ndarray:
    """Residual of the soliton equation on all frame pairs at p."""
    from .connections import levi_civita_connection, quarter_symmetric_connection

    params.check_weights()
    m, s = fixture.manifold, fixture.structure
    n = m.dimension
    p = np.asarray(p, dtype=float)
    if lc is None:
        lc = levi_civita_connection(m)
    G = metric_at(m, p)
    eta = G @ s.xi_at(m, p)
    a2 = s.alpha ** 2
    lam, mu, rho, q = params.lam, params.mu, params.rho, params.q

    if connection_kind == "levi_civita":
        if S is None:
            S = ricci_tensor(lc, p)
        r = scalar_from_ricci(S, G)
        r_star = r + a2 * (n - 1) ** 2
        L = lie_derivative_matrix(lc, V, p)
        S_star = star_ricci_tensor(S, s, m, p)
        return (L + 2.0 * rho * S_star + (2.0 * lam - q * r_star) * G
                + 2.0 * mu * np.outer(eta, eta))
    if connection_kind == "quarter_symmetric":
        if qs is None:
            qs = quarter_symmetric_connection(lc, s)
        if S_qs is None:
            S_qs = ricci_tensor(qs, p)
        r_qs = scalar_from_ricci(S_qs, G)
        L = lie_derivative_matrix_qs(qs, V, p)
        return (L + 2.0 * rho * S_qs
                + (2.0 * lam + 2.0 * a2 * rho * (n - 2) - q * r_qs - q * a2 * (n - 1) ** 2) * G
                + (2.0 * mu + 2.0 * a2 * rho) * np.outer(eta, eta))
    raise SpecError(f"unknown connection kind {connection_kind!r}")


def soliton_residual(params: SolitonParameters, fixture, V, connection_kind: str,
                     Y, Z, p, **precomputed) -> float:
    """Residual of the soliton equation evaluated on one vector pair."""
    p = np.asarray(p, dtype=float)
    n = fixture.manifold.dimension
    M = soliton_residual_matrix(params, fixture, V, connection_kind, p, **precomputed)
    Yv, Zv = as_field(Y, n)(p), as_field(Z, n)(p)
    return float(Yv @ M @ Zv)


@dataclass(frozen=True)
class SolitonReport:
    """Residual sweep summary for one connection kind."""

    connection_kind: str
    max_residual: float          # over sampled points and vector pairs
    reeb_pair_residual: float    # restricted to pairs (Y, xi)
    sum_relation_residual: float
    classification: str
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.reeb_pair_residual <= self.tolerance


def sweep_soliton(params: SolitonParameters, fixture, connection_kind: str,
                  plan: SamplePlan, tol: float = 1e-2, vectors_per_point: int = 4,
                  seed: int | None = None, convention: str = "paper") -> SolitonReport:
    """Evaluate the soliton residual with V = xi over a sample plan.

    The pass criterion is the residual on pairs (Y, xi): for a structure
    satisfying the covariant-derivative relations, the constants solve the
    equation exactly on those pairs whenever lam + mu matches the sum
    relation.  The unrestricted max residual is reported alongside.
    """
    from .connections import levi_civita_connection, quarter_symmetric_connection

    m, s = fixture.manifold, fixture.structure
    n = m.dimension
    lc = levi_civita_connection(m)
    qs = quarter_symmetric_connection(lc, s)
    points = plan.sample(n)
    rng = np.random.default_rng(plan.seed if seed is None else seed)
    xi_f = s.xi_field(m)
    max_res = 0.0
    reeb_res = 0.0
    relation_res = 0.0
    for p in points:
        G = metric_at(m, p)
        xi = s.xi_at(m, p)
        S = ricci_tensor(lc, p)
        S_qs = ricci_tensor(qs, p) if connection_kind == "quarter_symmetric" else None
        M = soliton_residual_matrix(params, fixture, xi_f, connection_kind, p,
                                    lc=lc, qs=qs, S=S, S_qs=S_qs)
        r = scalar_from_ricci(S, G)
        relation = params.lam + params.mu - (params.q * r / 2.0
                                             + params.q * s.alpha ** 2 * (n - 1) ** 2 / 2.0)
        relation_res = max(relation_res, abs(relation))
        for Y in rng.uniform(-1.0, 1.0, size=(vectors_per_point, n)):
            reeb_res = max(reeb_res, abs(float(Y @ M @ xi)))
            Z = rng.uniform(-1.0, 1.0, size=n)
            max_res = max(max_res, abs(float(Y @ M @ Z)))
    return SolitonReport(connection_kind, max_res, reeb_res, relation_res,
                         classify_soliton(params.lam, convention=convention), tol)


# ---------------------------------------------------------------------------
# Soliton constants

@dataclass(frozen=True)
class SolitonConstants:
    mode: str
    lam_plus_mu: float
    lam: float | None = None
    mu: float | None = None
    sum_relation_residual: float = 0.0

    @property
    def satisfies_sum_relation(self) -> bool:
        scale = max(1.0, abs(self.lam_plus_mu))
        return self.sum_relation_residual <= 1e-12 * scale


def solve_constants(fixture, rho: float, q: float, mode: str, r: float,
                    div_xi: float | None = None) -> SolitonConstants:
    """Solve for the soliton constants from the trace identities.

    Modes:
      "sum"             the constraint on lam + mu alone,
                        lam + mu = q r / 2 + q a^2 (n-1)^2 / 2
      "split"           individual lam, mu (consistent with the sum relation)
      "split_alternate" the variant with the opposite sign on the
                        q a^2 (n-1)^2 / 2 term of lam; its documented
                        deviation from the sum relation is exactly
                        q a^2 (n-1)^2
    """
    n = fixture.manifold.dimension
    a2 = fixture.structure.alpha ** 2
    if n <= 1:
        raise SpecError("constant solver needs dimension >= 2")
    if mode not in SOLVE_MODES:
        raise SpecError(f"unknown solve mode {mode!r}; choose one of {SOLVE_MODES}")
    sum_relation = q * r / 2.0 + q * a2 * (n - 1) ** 2 / 2.0
    if mode == "sum":
        return SolitonConstants("sum", sum_relation)
    if div_xi is None:
        raise SpecError(f"mode {mode!r} needs the divergence of the Reeb field")
    mu = a2 * rho * (n - 1) + (div_xi + rho * r) / (n - 1)
    if mode == "split":
        lam = sum_relation - mu
        return SolitonConstants("split", lam + mu, lam, mu,
                                abs(lam + mu - sum_relation))
    lam = q * r / 2.0 - q * a2 * (n - 1) ** 2 / 2.0 - mu
    return SolitonConstants("split_alternate", lam + mu, lam, mu,
                            abs(lam + mu - sum_relation))


def divergence(conn: ConnectionField, V, p) -> float:
    """div V = sum_a g(nabla_{u_a} V, u_a) over a g-orthonormal frame."""
    p = np.asarray(p, dtype=float)
    G = metric_at(conn.manifold, p)
    B = orthonormal_frame(G)
    D = covariant_derivative_matrix(conn, V, p)
    return float(np.einsum("ai,im,ml,al->", B, D, G, B))


# ---------------------------------------------------------------------------
# Laplacian bound and harmonic classification

def laplacian_bound(params: SolitonParameters, n: int, alpha: float, r: float) -> float:
    """Laplacian of the potential forced by the trace of the soliton equation:

    lap f = -n (Lam + a^2 rho (n-2) - q r / 2 - q a^2 (n-1)^2 / 2)
            - mu - rho (a^2 + r)
    """
    a2 = alpha ** 2
    return (-n * (params.lam + a2 * params.rho * (n - 2)
                  - params.q * r / 2.0 - params.q * a2 * (n - 1) ** 2 / 2.0)
            - params.mu - params.rho * (a2 + r))


@dataclass(frozen=True)
class HarmonicClassification:
    """Both classification routes for a harmonic potential, with witnesses."""

    classification: str          # threshold route: compare lhs against rhs
    lhs: float                   # (q/2)(r + a^2 (n-1)^2)
    rhs: float                   # mu + rho(a^2 + r) + a^2 rho (n-2)
    lam_at_harmonic: float       # lam solving the Laplacian bound = 0
    lam_classification: str      # sign route on lam_at_harmonic
    preset_assertion: str | None
    assertion_matches_threshold: bool | None
    assertion_matches_lam: bool | None
    convention: str


# Unconditional conclusions stated for the preset weights.
PRESET_ASSERTIONS = {"ricci": "shrinking", "einstein": "shrinking"}


def classify_harmonic(params: SolitonParameters, n: int, alpha: float, r: float,
                      threshold: float = 1e-12,
                      convention: str = "paper") -> HarmonicClassification:
    """Classify the soliton assuming the potential is harmonic.

    Two routes are computed and both reported: the threshold comparison of
    (q/2)(r + a^2 (n-1)^2) against mu + rho(a^2 + r) + a^2 rho (n-2), and
    the sign of the lam value obtained by solving the Laplacian bound at
    zero.  The routes can disagree (the threshold comparison carries no 1/n
    normalization); neither is silently preferred.  Preset weights carry an
    unconditional asserted conclusion, checked against both routes.
    """
    a2 = alpha ** 2
    lhs = params.q / 2.0 * (r + a2 * (n - 1) ** 2)
    rhs = params.mu + params.rho * (a2 + r) + a2 * params.rho * (n - 2)
    scale = max(abs(lhs), abs(rhs))
    if abs(lhs - rhs) <= threshold * scale:
        label = "steady"
    elif lhs > rhs:
        label = "expanding"
    else:
        label = "shrinking"
    lam_h = lhs - a2 * params.rho * (n - 2) - (params.mu + params.rho * (a2 + r)) / n
    lam_label = classify_soliton(lam_h, threshold=threshold * max(1.0, scale),
                                 convention=convention)
    assertion = PRESET_ASSERTIONS.get(params.preset)
    return HarmonicClassification(
        classification=label, lhs=lhs, rhs=rhs,
        lam_at_harmonic=lam_h, lam_classification=lam_label,
        preset_assertion=assertion,
        assertion_matches_threshold=None if assertion is None else assertion == label,
        assertion_matches_lam=None if assertion is None else assertion == lam_label,
        convention=convention)


# ---------------------------------------------------------------------------
# Conformal Killing fields

@dataclass(frozen=True)
class ConformalKillingResult:
    """Least-squares conformal factor and the forced relation between phi(V) and xi."""

    theta: float
    theta_deviation: float       # spread of per-point estimates
    kappa: float                 # 2 theta + 2 lam + 2 mu - q r - q a^2 (n-1)^2
    fit_residual: float          # max | L_V g - 2 theta g |
    vector_residual: float       # max || phi V - kappa xi ||
    paired_residual: float       # max | g(Y, phi V) - kappa eta(Y) |
    is_conformal: bool
    is_killing: bool
    is_homothetic: bool
    r_mean: float
    r_deviation: float


def conformal_killing(fixture, params: SolitonParameters, V, theta: float | None,
                      plan: SamplePlan, tol: float = 1e-2, vectors_per_point: int = 4,
                      seed: int | None = None,
                      killing_floor: float = 1e-8) -> ConformalKillingResult:
    """Estimate the conformal factor of V and check the phi(V) = kappa xi relation.

    When `theta` is not supplied it is fit per point by least squares from
    (L_V g) ~ 2 theta g; a nonzero fit residual means V is not conformal
    Killing, in which case the relation checks are vacuous but still
    reported.  A field with |L_V g| below `killing_floor` is flagged
    Killing with theta = 0.
    """
    from .connections import levi_civita_connection

    m, s = fixture.manifold, fixture.structure
    n = m.dimension
    lc = levi_civita_connection(m)
    points = plan.sample(n)
    rng = np.random.default_rng(plan.seed if seed is None else seed)
    Vf = as_field(V, n)

    thetas, fit_max, lie_max, rs = [], 0.0, 0.0, []
    for p in points:
        G = metric_at(m, p)
        L = lie_derivative_matrix(lc, Vf, p)
        lie_max = max(lie_max, float(np.max(np.abs(L))))
        t = float(theta) if theta is not None else float(np.sum(L * G) / (2.0 * np.sum(G * G)))
        thetas.append(t)
        fit_max = max(fit_max, float(np.max(np.abs(L - 2.0 * t * G))))
        rs.append(scalar_from_ricci(ricci_tensor(lc, p), G))

    is_killing = theta is None and lie_max <= killing_floor
    theta_mean = 0.0 if is_killing else float(np.mean(thetas))
    theta_dev = 0.0 if is_killing else float(np.max(np.abs(np.array(thetas) - theta_mean)))
    r_mean = float(np.mean(rs))
    r_dev = float(np.max(np.abs(np.array(rs) - r_mean)))
    is_conformal = is_killing or fit_max <= tol
    is_homothetic = is_conformal and not is_killing and theta_dev <= tol * max(1.0, abs(theta_mean))

    kappa = (2.0 * theta_mean + 2.0 * params.lam + 2.0 * params.mu
             - params.q * r_mean - params.q * s.alpha ** 2 * (n - 1) ** 2)
    if not np.isfinite(kappa):
        raise NumericalError(f"non-finite conformal constant {kappa!r}")

    vector_res = 0.0
    paired_res = 0.0
    for p in points:
        G = metric_at(m, p)
        xi = s.xi_at(m, p)
        eta = G @ xi
        phi_v = s.phi_at(m, p) @ Vf(p)
        vector_res = max(vector_res, g_norm(G, phi_v - kappa * xi))
        for Y in rng.uniform(-1.0, 1.0, size=(vectors_per_point, n)):
            paired_res = max(paired_res,
                             abs(float(Y @ G @ phi_v) - kappa * float(eta @ Y)))
    return ConformalKillingResult(
        theta=theta_mean, theta_deviation=theta_dev, kappa=kappa,
        fit_residual=fit_max, vector_residual=vector_res, paired_residual=paired_res,
        is_conformal=is_conformal, is_killing=is_killing, is_homothetic=is_homothetic,
        r_mean=r_mean, r_deviation=r_dev)
