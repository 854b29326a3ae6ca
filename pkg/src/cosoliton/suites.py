"""Check-suite runner: executes named suites on a spec document, collects reports.

Suites run sequentially in dependency order.  A numerical failure inside one
suite is recorded on that suite's result and does not abort the others.
Given the same document, overrides and seed, two runs produce identical
reports (sampling and random vector draws are all seeded).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .connections import (
    levi_civita_connection,
    metric_compatibility,
    quarter_symmetric_connection,
    torsion_tensor,
)
from .contact import check_axioms, nijenhuis, verify_alpha_cosymplectic
from .curvature import check_identities, ricci_tensor, scalar_from_ricci
from .errors import CosolitonError, NumericalError, SpecError
from .expr import EvaluationError
from .manifold import VectorField, g_norm, metric_at, structure_constants
from .solitons import (
    SolitonParameters,
    classify_harmonic,
    classify_soliton,
    conformal_killing,
    divergence,
    laplacian_bound,
    soliton_residual_matrix,
    solve_constants,
)

# Dependency order; "all" expands to exactly this.
SUITE_NAMES = (
    "axioms",
    "nijenhuis",
    "alpha_cosymplectic",
    "connection",
    "torsion",
    "curvature_identities",
    "theorem_3_1",
    "constants",
    "soliton",
    "laplacian",
    "classify",
    "conformal_killing",
)

DEFAULT_TOLERANCES = {
    "axioms": 1e-10,
    "nijenhuis": 1e-5,
    "alpha_cosymplectic": 1e-5,
    "connection": 1e-5,
    "torsion": 1e-5,
    "curvature_identities": 1e-3,
    "theorem_3_1": 1e-3,
    "constants": 1e-12,
    "soliton": 1e-2,
    "laplacian": 1e-9,
    "classify": 1e-12,
    "conformal_killing": 1e-2,
}

# Suites whose formulas involve the structure constant; the document must
# then declare the "alpha" parameter explicitly.
ALPHA_REQUIRED = frozenset({
    "alpha_cosymplectic", "curvature_identities", "theorem_3_1",
    "constants", "soliton", "laplacian", "classify", "conformal_killing",
})

CURVATURE_IDENTITY_LABELS = (
    "curvature_into_reeb", "curvature_reeb_first", "curvature_reeb_sandwich",
    "eta_of_curvature", "ricci_reeb", "qs_curvature_formula",
    "qs_curvature_formula_lowered", "qs_ricci_formula", "first_bianchi",
)

THEOREM_3_1_LABELS = (
    "qs_skew_last_pair", "qs_skew_first_pair", "qs_ricci_reeb",
    "qs_ricci_asymmetry_witness", "qs_scalar_equals_scalar",
)

WITNESS_TOLERANCE = 1e-2


@dataclass
class SuiteResult:
    name: str
    max_residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)
    error: str | None = None
    error_kind: str | None = None  # "numerical" when the failure was exit-code-3 material

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": self.details,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


@dataclass
class RunReport:
    version: str
    fixture: str
    parameters: dict
    suites: list
    passed: bool
    wall_time: float | None = None

    def to_dict(self) -> dict:
        out = {
            "version": self.version,
            "fixture": self.fixture,
            "parameters": self.parameters,
            "suites": [s.to_dict() for s in self.suites],
            "pass": self.passed,
        }
        if self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    def to_text(self) -> str:
        lines = [f"fixture: {self.fixture}"]
        params = " ".join(f"{k}={v:g}" for k, v in sorted(self.parameters.items()))
        lines.append(f"parameters: {params or '(none)'}")
        lines.append(f"{'suite':<24} {'max_residual':>14} {'tolerance':>11} status")
        for s in self.suites:
            status = "pass" if s.passed else "FAIL"
            lines.append(f"{s.name:<24} {s.max_residual:>14.4e} {s.tolerance:>11.1e} {status}")
            if s.error:
                lines.append(f"    error: {s.error}")
        if self.wall_time is not None:
            lines.append(f"wall_time: {self.wall_time:.3f}s")
        lines.append(f"overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def resolve_suites(requested) -> list:
    """Expand "all", validate names, return suites in dependency order without duplicates."""
    wanted = set()
    for name in requested:
        if name == "all":
            wanted.update(SUITE_NAMES)
        elif name in SUITE_NAMES:
            wanted.add(name)
        else:
            raise SpecError(f"unknown suite {name!r}; valid: {', '.join(SUITE_NAMES)} or 'all'")
    return [name for name in SUITE_NAMES if name in wanted]


class _RunContext:
    """Shared fixture, plan and lazily computed per-point tensors."""

    def __init__(self, doc, convention: str):
        self.doc = doc
        self.convention = convention
        self.fixture = doc.to_fixture()
        self.plan = doc.to_plan()
        self.manifold = self.fixture.manifold
        self.structure = self.fixture.structure
        self.points = self.plan.sample(self.manifold.dimension)
        self.lc = levi_civita_connection(self.manifold)
        self.qs = quarter_symmetric_connection(self.lc, self.structure)
        self.seed = self.plan.seed if self.plan.seed is not None else 0
        self._point_data = {}
        self._identity_reports = None
        self._scalar_summary = None
        self._resolved = None

    def rng(self, suite: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, SUITE_NAMES.index(suite)])

    def data(self, idx: int) -> dict:
        if idx not in self._point_data:
            p = self.points[idx]
            G = metric_at(self.manifold, p)
            xi = self.structure.xi_at(self.manifold, p)
            S = ricci_tensor(self.lc, p)
            S_qs = ricci_tensor(self.qs, p)
            self._point_data[idx] = {
                "G": G,
                "Phi": self.structure.phi_at(self.manifold, p),
                "xi": xi,
                "eta": G @ xi,
                "S": S,
                "S_qs": S_qs,
                "r": scalar_from_ricci(S, G),
                "r_qs": scalar_from_ricci(S_qs, G),
            }
        return self._point_data[idx]

    def identity_reports(self) -> list:
        if self._identity_reports is None:
            self._identity_reports = check_identities(
                self.fixture, self.plan,
                tol=DEFAULT_TOLERANCES["curvature_identities"],
                witness_tol=WITNESS_TOLERANCE, seed=self.seed)
        return self._identity_reports

    def scalar_summary(self) -> dict:
        """Point-averaged scalar inputs with their spread across the sample."""
        if self._scalar_summary is None:
            rs = np.array([self.data(i)["r"] for i in range(len(self.points))])
            rqs = np.array([self.data(i)["r_qs"] for i in range(len(self.points))])
            divs = np.array([
                divergence(self.lc, self.structure.xi_field(self.manifold), p)
                for p in self.points])
            self._scalar_summary = {
                "r_mean": float(rs.mean()),
                "r_deviation": float(np.max(np.abs(rs - rs.mean()))),
                "r_qs_mean": float(rqs.mean()),
                "div_xi_mean": float(divs.mean()),
                "div_xi_deviation": float(np.max(np.abs(divs - divs.mean()))),
            }
        return self._scalar_summary

    def soliton_params(self) -> tuple:
        """(params, source): document values, completed by the constant solver."""
        if self._resolved is None:
            cfg = self.doc.soliton
            rho = cfg.rho if cfg else 1.0
            q = cfg.q if cfg else 0.0
            preset = cfg.preset if cfg else "custom"
            lam = cfg.lam if cfg else None
            mu = cfg.mu if cfg else None
            if lam is not None and mu is not None:
                self._resolved = (SolitonParameters.create(lam, mu, rho, q, preset), "document")
            else:
                scal = self.scalar_summary()
                constants = solve_constants(self.fixture, rho, q, "split",
                                            scal["r_mean"], scal["div_xi_mean"])
                if lam is None and mu is None:
                    lam, mu = constants.lam, constants.mu
                elif lam is None:
                    lam = constants.lam_plus_mu - mu
                else:
                    mu = constants.lam_plus_mu - lam
                self._resolved = (SolitonParameters.create(lam, mu, rho, q, preset), "solved")
        return self._resolved

    def vector_field(self) -> VectorField:
        cfg = self.doc.soliton
        if cfg is not None and cfg.vector_field is not None:
            return VectorField.from_expressions(cfg.vector_field, self.manifold)
        return self.structure.xi_field(self.manifold)


# ---------------------------------------------------------------------------
# Suite implementations: each returns (max_residual, details)

def _suite_axioms(ctx: _RunContext, tol: float):
    report = check_axioms(ctx.structure, ctx.manifold, ctx.plan, tol, seed=ctx.seed)
    return report.max_residual, dict(report.residuals)


def _suite_nijenhuis(ctx: _RunContext, tol: float, pairs_per_point: int = 2):
    rng = ctx.rng("nijenhuis")
    worst = 0.0
    for i, p in enumerate(ctx.points):
        G = ctx.data(i)["G"]
        for _ in range(pairs_per_point):
            X = rng.uniform(-1.0, 1.0, size=ctx.manifold.dimension)
            Y = rng.uniform(-1.0, 1.0, size=ctx.manifold.dimension)
            value = nijenhuis(ctx.structure, ctx.manifold, X, Y, p)
            worst = max(worst, g_norm(G, value.components))
    return worst, {"pairs_per_point": pairs_per_point}


def _suite_alpha_cosymplectic(ctx: _RunContext, tol: float):
    report = verify_alpha_cosymplectic(ctx.structure, ctx.manifold, ctx.lc, ctx.plan,
                                       tol, seed=ctx.seed)
    return report.max_residual, dict(report.residuals)


def _suite_connection(ctx: _RunContext, tol: float):
    frame_torsion = 0.0
    compat_lc = 0.0
    compat_qs = 0.0
    for p in ctx.points:
        gamma = ctx.lc.coefficients(p)
        c = structure_constants(ctx.manifold, p)
        frame_torsion = max(frame_torsion, float(np.max(np.abs(
            gamma - np.transpose(gamma, (0, 2, 1)) - c))))
        compat_lc = max(compat_lc, metric_compatibility(ctx.lc, p))
        compat_qs = max(compat_qs, metric_compatibility(ctx.qs, p))
    details = {"levi_civita_frame_torsion": frame_torsion,
               "metric_compatibility_levi_civita": compat_lc,
               "metric_compatibility_quarter_symmetric": compat_qs}
    return max(details.values()), details


def _suite_torsion(ctx: _RunContext, tol: float):
    lc_res = 0.0
    qs_res = 0.0
    for i, p in enumerate(ctx.points):
        d = ctx.data(i)
        lc_res = max(lc_res, float(np.max(np.abs(torsion_tensor(ctx.lc, p)))))
        expected = (np.einsum("j,ki->kij", d["eta"], d["Phi"])
                    - np.einsum("i,kj->kij", d["eta"], d["Phi"]))
        qs_res = max(qs_res, float(np.max(np.abs(torsion_tensor(ctx.qs, p) - expected))))
    details = {"levi_civita_torsion": lc_res, "quarter_symmetric_torsion_vs_formula": qs_res}
    return max(details.values()), details


def _suite_curvature_identities(ctx: _RunContext, tol: float):
    residuals = {r.name: r.max_residual for r in ctx.identity_reports()
                 if r.name in CURVATURE_IDENTITY_LABELS}
    details = dict(residuals)
    details.update(ctx.scalar_summary())
    n = ctx.manifold.dimension
    details["r_star_mean"] = details["r_mean"] + ctx.structure.alpha ** 2 * (n - 1) ** 2
    return max(residuals.values()), details


def _suite_theorem_3_1(ctx: _RunContext, tol: float):
    residuals = {r.name: r.max_residual for r in ctx.identity_reports()
                 if r.name in THEOREM_3_1_LABELS}
    # The asymmetry witness is a comparison of two O(alpha) quantities and
    # carries its own, looser tolerance.
    witness = residuals["qs_ricci_asymmetry_witness"]
    strict = {k: v for k, v in residuals.items() if k != "qs_ricci_asymmetry_witness"}
    worst = max(strict.values())
    if witness > max(tol, WITNESS_TOLERANCE):
        worst = max(worst, witness)
    return worst, dict(residuals)


def _suite_constants(ctx: _RunContext, tol: float):
    cfg = ctx.doc.soliton
    rho = cfg.rho if cfg else 1.0
    q = cfg.q if cfg else 0.0
    scal = ctx.scalar_summary()
    n = ctx.manifold.dimension
    a2 = ctx.structure.alpha ** 2
    c_sum = solve_constants(ctx.fixture, rho, q, "sum", scal["r_mean"])
    c_split = solve_constants(ctx.fixture, rho, q, "split",
                              scal["r_mean"], scal["div_xi_mean"])
    c_alt = solve_constants(ctx.fixture, rho, q, "split_alternate",
                            scal["r_mean"], scal["div_xi_mean"])
    scale = max(1.0, abs(c_sum.lam_plus_mu))
    split_res = c_split.sum_relation_residual / scale
    alt_dev = c_sum.lam_plus_mu - c_alt.lam_plus_mu
    alt_res = abs(alt_dev - q * a2 * (n - 1) ** 2) / max(1.0, abs(alt_dev))
    details = {
        "rho": rho, "q": q,
        "lam_plus_mu": c_sum.lam_plus_mu,
        "lam": c_split.lam, "mu": c_split.mu,
        "split_satisfies_sum_relation": c_split.satisfies_sum_relation,
        "alternate_lam": c_alt.lam,
        "alternate_deviation": alt_dev,
        "expected_alternate_deviation": q * a2 * (n - 1) ** 2,
        **scal,
    }
    return max(split_res, alt_res), details


def _suite_soliton(ctx: _RunContext, tol: float, vectors_per_point: int = 4):
    params, source = ctx.soliton_params()
    rng = ctx.rng("soliton")
    m, s = ctx.manifold, ctx.structure
    n = m.dimension
    xi_f = s.xi_field(m)
    a, rho = s.alpha, params.rho
    reeb_lc = reeb_qs = full_lc = full_qs = discrepancy = relation = 0.0
    for i, p in enumerate(ctx.points):
        d = ctx.data(i)
        M_lc = soliton_residual_matrix(params, ctx.fixture, xi_f, "levi_civita", p,
                                       lc=ctx.lc, qs=ctx.qs, S=d["S"])
        M_qs = soliton_residual_matrix(params, ctx.fixture, xi_f, "quarter_symmetric", p,
                                       lc=ctx.lc, qs=ctx.qs, S=d["S"], S_qs=d["S_qs"])
        expected_gap = 2.0 * a * rho * d["Phi"].T @ d["G"]
        discrepancy = max(discrepancy, float(np.max(np.abs(M_qs - M_lc - expected_gap))))
        relation = max(relation, abs(
            params.lam + params.mu - (params.q * d["r"] / 2.0
                                      + params.q * a ** 2 * (n - 1) ** 2 / 2.0)))
        xi = d["xi"]
        for Y in rng.uniform(-1.0, 1.0, size=(vectors_per_point, n)):
            reeb_lc = max(reeb_lc, abs(float(Y @ M_lc @ xi)))
            reeb_qs = max(reeb_qs, abs(float(Y @ M_qs @ xi)))
            Z = rng.uniform(-1.0, 1.0, size=n)
            full_lc = max(full_lc, abs(float(Y @ M_lc @ Z)))
            full_qs = max(full_qs, abs(float(Y @ M_qs @ Z)))
    details = {
        "lam": params.lam, "mu": params.mu, "rho": params.rho, "q": params.q,
        "constants_source": source,
        "classification": classify_soliton(params.lam, convention=ctx.convention),
        "reeb_pair_residual_levi_civita": reeb_lc,
        "reeb_pair_residual_quarter_symmetric": reeb_qs,
        "full_pair_residual_levi_civita": full_lc,
        "full_pair_residual_quarter_symmetric": full_qs,
        "connection_gap_residual": discrepancy,
        "sum_relation_residual": relation,
    }
    return max(reeb_lc, reeb_qs, discrepancy), details


def _suite_laplacian(ctx: _RunContext, tol: float):
    params, source = ctx.soliton_params()
    n = ctx.manifold.dimension
    alpha = ctx.structure.alpha
    r = ctx.scalar_summary()["r_mean"]
    value = laplacian_bound(params, n, alpha, r)
    # The bound is affine in lam, mu and r; finite-differencing the
    # implementation itself pins the slopes at -n, -1 and n q / 2 - rho.
    h = 0.5
    lam_hi = SolitonParameters.create(params.lam + h, params.mu, params.rho, params.q)
    lam_lo = SolitonParameters.create(params.lam - h, params.mu, params.rho, params.q)
    mu_hi = SolitonParameters.create(params.lam, params.mu + h, params.rho, params.q)
    mu_lo = SolitonParameters.create(params.lam, params.mu - h, params.rho, params.q)
    slope_lam = (laplacian_bound(lam_hi, n, alpha, r) - laplacian_bound(lam_lo, n, alpha, r)) / (2 * h)
    slope_mu = (laplacian_bound(mu_hi, n, alpha, r) - laplacian_bound(mu_lo, n, alpha, r)) / (2 * h)
    slope_r = (laplacian_bound(params, n, alpha, r + h) - laplacian_bound(params, n, alpha, r - h)) / (2 * h)
    expected_r = n * params.q / 2.0 - params.rho
    residual = max(
        abs(slope_lam + n) / max(1.0, n),
        abs(slope_mu + 1.0),
        abs(slope_r - expected_r) / max(1.0, abs(expected_r)),
    )
    details = {
        "laplacian": value, "lam": params.lam, "mu": params.mu,
        "rho": params.rho, "q": params.q, "r": r, "constants_source": source,
        "slope_lam": slope_lam, "slope_mu": slope_mu, "slope_r": slope_r,
    }
    return residual, details


def _suite_classify(ctx: _RunContext, tol: float):
    params, source = ctx.soliton_params()
    n = ctx.manifold.dimension
    r = ctx.scalar_summary()["r_mean"]
    hc = classify_harmonic(params, n, ctx.structure.alpha, r,
                           threshold=tol, convention=ctx.convention)
    details = {
        "classification": hc.classification,
        "lhs": hc.lhs, "rhs": hc.rhs,
        "lam_at_harmonic": hc.lam_at_harmonic,
        "lam_classification": hc.lam_classification,
        "preset_assertion": hc.preset_assertion,
        "assertion_matches_threshold": hc.assertion_matches_threshold,
        "assertion_matches_lam": hc.assertion_matches_lam,
        "convention": hc.convention,
        "constants_source": source,
    }
    return 0.0, details


def _suite_conformal_killing(ctx: _RunContext, tol: float):
    params, source = ctx.soliton_params()
    cfg = ctx.doc.soliton
    theta = cfg.theta if cfg else None
    result = conformal_killing(ctx.fixture, params, ctx.vector_field(), theta,
                               ctx.plan, tol, seed=ctx.seed)
    details = {
        "theta": result.theta, "theta_deviation": result.theta_deviation,
        "kappa": result.kappa, "fit_residual": result.fit_residual,
        "vector_residual": result.vector_residual,
        "paired_residual": result.paired_residual,
        "is_conformal": result.is_conformal, "is_killing": result.is_killing,
        "is_homothetic": result.is_homothetic,
        "constants_source": source,
    }
    # The relation phi(V) = kappa xi is asserted only for conformal fields.
    residual = max(result.vector_residual, result.paired_residual) if result.is_conformal else 0.0
    return residual, details


_SUITE_FUNCTIONS = {
    "axioms": _suite_axioms,
    "nijenhuis": _suite_nijenhuis,
    "alpha_cosymplectic": _suite_alpha_cosymplectic,
    "connection": _suite_connection,
    "torsion": _suite_torsion,
    "curvature_identities": _suite_curvature_identities,
    "theorem_3_1": _suite_theorem_3_1,
    "constants": _suite_constants,
    "soliton": _suite_soliton,
    "laplacian": _suite_laplacian,
    "classify": _suite_classify,
    "conformal_killing": _suite_conformal_killing,
}


def run(document, suites=("all",), tol: float | None = None,
        deterministic: bool = False, convention: str = "paper") -> RunReport:
    """Execute the requested suites on a validated document.

    `tol` overrides every suite's default tolerance.  Suite failures and
    numerical errors are collected per suite; spec-level problems (unknown
    suites, missing alpha, rejected soliton weights) raise SpecError.
    """
    started = time.perf_counter()
    names = resolve_suites(suites)
    if not names:
        raise SpecError("no suites requested")
    needs_alpha = [s for s in names if s in ALPHA_REQUIRED]
    if needs_alpha and "alpha" not in document.parameters:
        raise SpecError(
            f"parameters must declare 'alpha' for suites {needs_alpha}")
    ctx = _RunContext(document, convention)
    if "soliton" in names:
        cfg = document.soliton
        if cfg is not None and cfg.rho == 0.0:
            raise SpecError(
                "soliton suite rejected: rho = 0 does not define the soliton "
                "equation being checked (the Ricci-type term vanishes); drop "
                "the suite or choose a nonzero rho")
    results = []
    for name in names:
        tolerance = tol if tol is not None else DEFAULT_TOLERANCES[name]
        try:
            residual, details = _SUITE_FUNCTIONS[name](ctx, tolerance)
            results.append(SuiteResult(name, residual, tolerance,
                                       residual <= tolerance, details))
        except (NumericalError, EvaluationError) as err:
            results.append(SuiteResult(name, math.inf, tolerance, False,
                                       error=str(err), error_kind="numerical"))
        except CosolitonError as err:
            results.append(SuiteResult(name, math.inf, tolerance, False,
                                       error=str(err), error_kind="input"))
    report = RunReport(
        version=__version__,
        fixture=document.name,
        parameters=dict(document.parameters),
        suites=results,
        passed=all(r.passed for r in results),
        wall_time=None if deterministic else time.perf_counter() - started,
    )
    return report
