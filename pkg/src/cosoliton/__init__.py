"""Numerical frame-based tensor calculus and soliton verification.

The package computes Levi-Civita and quarter-symmetric metric connections,
their curvature, Ricci and scalar data on almost contact metric manifolds
given by explicit frame fields, and verifies the structure axioms, the
curvature identities and the star-eta soliton relations numerically at
sampled points.
"""

from ._version import __version__
from .contact import (
    AlmostContactStructure,
    StructureCheckReport,
    check_axioms,
    nijenhuis,
    verify_alpha_cosymplectic,
)
from .connections import (
    ConnectionField,
    covariant_derivative,
    levi_civita,
    levi_civita_connection,
    metric_compatibility,
    quarter_symmetric,
    quarter_symmetric_connection,
    torsion,
)
from .curvature import (
    CurvatureReport,
    ScalarPair,
    check_identities,
    curvature,
    curvature_qs_direct,
    curvature_qs_via_formula,
    curvature_tensor,
    ricci,
    ricci_tensor,
    scalar_curvatures,
    star_ricci,
)
from .document import ManifoldSpecDocument, builtin_document, load_spec, parse_document
from .errors import CosolitonError, NumericalError, SpecError
from .fixtures import Fixture, build_alpha_cosymplectic_5d, build_conformal_3d, build_flat_5d
from .manifold import (
    FrameManifold,
    FrameVector,
    SamplePlan,
    VectorField,
    directional_derivative,
    evaluate_frame,
    lie_bracket,
    structure_constants,
)
from .solitons import (
    ConformalKillingResult,
    HarmonicClassification,
    SolitonParameters,
    SolitonReport,
    classify_harmonic,
    classify_soliton,
    conformal_killing,
    divergence,
    laplacian_bound,
    lie_derivative_metric,
    lie_derivative_metric_qs,
    soliton_residual,
    solve_constants,
    sweep_soliton,
)
from .suites import RunReport, SuiteResult, run

__all__ = [name for name in dir() if not name.startswith("_")]
