"""Built-in fixtures: manifold + structure bundles used by tests, demos and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

from .contact import AlmostContactStructure
from .manifold import FrameManifold


@dataclass(frozen=True)
class Fixture:
    name: str
    manifold: FrameManifold
    structure: AlmostContactStructure


def build_alpha_cosymplectic_5d(alpha: float = 0.7) -> Fixture:
    """Five-dimensional chart with frame e_1..e_4 = exp(alpha*v) d/dx_i, e_5 = -d/dv.

    The frame is orthonormal, phi rotates the pairs (e_1, e_2) and
    (e_3, e_4), and the Reeb field is e_5.  Every connection and curvature
    quantity has a closed form, which makes this the main regression
    fixture: the nonzero Levi-Civita coefficients are
    nabla_{e_i} e_i = -alpha e_5 and nabla_{e_i} e_5 = alpha e_i (i <= 4),
    the diagonal Ricci entries are -4 alpha^2 and the scalar curvature is
    -20 alpha^2.
    """
    zero, one = "0", "1"
    scale = "exp(alpha*v)"
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
    m = FrameManifold.create(5, ["x", "y", "z", "u", "v"], {"alpha": float(alpha)}, frame)
    s = AlmostContactStructure.create(phi, float(alpha), xi_index=4)
    return Fixture("alpha_cosymplectic_5d", m, s)


def build_flat_5d() -> Fixture:
    """The alpha = 0 degeneration: a flat cosymplectic chart, all curvature zero."""
    f = build_alpha_cosymplectic_5d(0.0)
    return Fixture("cosymplectic_flat_5d", f.manifold, f.structure)


def build_conformal_3d() -> Fixture:
    """Synthetic fixture with position-dependent connection coefficients.

    Coordinate frame on a 3d chart with the conformal metric
    g = exp(x^2) * delta, so the Levi-Civita coefficients vary with x and
    curvature exercises the nested-difference path.  phi rotates the first
    two frame vectors (skew for any conformal factor) and the third frame
    vector is distinguished; the structure is not almost contact metric,
    but torsion, metric compatibility and the Bianchi identity are still
    meaningful checks here.
    """
    zero, one = "0", "1"
    conf = "exp(x^2)"
    frame = [[one, zero, zero], [zero, one, zero], [zero, zero, one]]
    metric = [[conf, zero, zero], [zero, conf, zero], [zero, zero, conf]]
    phi = [[zero, "-1", zero], [one, zero, zero], [zero, zero, zero]]
    m = FrameManifold.create(3, ["x", "y", "z"], {}, frame, metric=metric)
    s = AlmostContactStructure.create(phi, 0.0, xi_index=2)
    return Fixture("conformal_3d", m, s)
