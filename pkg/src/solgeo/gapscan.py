"""Pointwise gap predicates for CMC surfaces and the closed-surface integral audit.

The auditor evaluates hypotheses; it never searches for surfaces that
satisfy them.  Predicates use plain IEEE comparisons with no tolerance band,
and reports carry the min/max of each governing expression so near misses
stay visible.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .immersion import Chart, SurfacePointData, sample
from .simons import IdentityFields
from .surfcalc import integrate, laplace_beltrami

__all__ = [
    "E_term",
    "thm41_predicate",
    "thm42_predicate",
    "thm43_quartic",
    "thm43_predicate",
    "thm44_predicate",
    "thm42_branch_solutions",
    "constrained_identity_check",
    "ConstraintError",
    "GapReport",
    "TheoremStats",
    "FLAGS",
    "scan",
]

UNIT_TOL = 1e-12
DISC_ULPS = 8

FLAGS = {
    "quartic_factor": "E equals (1/2) * quartic by full expansion; a factor 8 is not reproduced. "
                      "The sign of the quartic predicate is unaffected.",
    "angle_substitution_squared": "the substitution eliminating the angle reads "
                                  "2 c3^2 = K + 1 - 2 f^2 + |A|^2 / 2 (c3 squared).",
    "constrained_AE3_norm": "with grad c3 = 0, |A E3T|^2 = 1 - c3^2 - (c1^2 - c2^2)^2 "
                            "(c3 squared), from the Gram matrix of the E_kT.",
}


class ConstraintError(ValueError):
    pass


def _c3(d: SurfacePointData):
    return d.c[..., 2]


def E_term(d: SurfacePointData) -> np.ndarray:
    """2K(|A|^2 - 2f^2) - 8 c3^2 (1 - c3^2)."""
    c3 = _c3(d)
    return 2.0 * d.K * (d.normA2 - 2.0 * d.f**2) - 8.0 * c3**2 * (1.0 - c3**2)


def thm41_predicate(d=None, *, f=None, S=None) -> np.ndarray:
    """2f^2 + 2 <= |A|^2 <= 4f^2 - 2."""
    if d is not None:
        f, S = d.f, d.normA2
    f, S = np.asarray(f, dtype=float), np.asarray(S, dtype=float)
    return (2 * f**2 + 2 <= S) & (S <= 4 * f**2 - 2)


def thm42_predicate(d=None, *, K=None, f=None, S=None) -> np.ndarray:
    """K(|A|^2 - 2f^2) >= 1."""
    if d is not None:
        K, f, S = d.K, d.f, d.normA2
    return np.asarray(K) * (np.asarray(S) - 2 * np.asarray(f) ** 2) >= 1


def thm43_quartic(K, S, f) -> np.ndarray:
    """4K^2 + 8KS + S^2 - 24 f^2 K - 8 f^2 S + 16 f^4 - 4."""
    K, S, f = (np.asarray(a, dtype=float) for a in (K, S, f))
    f2 = f * f
    return 4 * K**2 + 8 * K * S + S**2 - 24 * f2 * K - 8 * f2 * S + 16 * f2**2 - 4


def thm43_predicate(d: SurfacePointData) -> np.ndarray:
    return thm43_quartic(d.K, d.normA2, d.f) >= 0


def thm44_predicate(d: SurfacePointData) -> np.ndarray:
    """Pointwise half of the last gap statement; |A|^2 constancy is reported separately."""
    return thm43_quartic(d.K, d.normA2, d.f) <= 0


def thm42_branch_solutions(f: float) -> Optional[Tuple[Tuple[float, float], Tuple[float, float]]]:
    """Roots of (4f^2 - S)(S - 2f^2) = 2 with 2K = 4f^2 - S.

    Returns ``((S_plus, K_plus), (S_minus, K_minus))`` or ``None`` when
    f^4 < 2 by more than rounding.  ``K_plus`` pairs with ``S_plus`` and equals (f^2 - sqrt(f^4 - 2))/2.
    """
    f2 = float(f) ** 2
    disc = f2 * f2 - 2.0
    # f = 2**0.25 rounds to f^4 a few ulps below 2; treat that as the double root
    if disc < -DISC_ULPS * 2.0 * np.finfo(float).eps:
        return None
    r = math.sqrt(max(disc, 0.0))
    return (3 * f2 + r, 0.5 * (f2 - r)), (3 * f2 - r, 0.5 * (f2 + r))


def constrained_identity_check(a: float, b: float, c: float) -> Tuple[float, float]:
    """Check the grad c3 = 0 algebra, where A E3T = a E1T - b E2T.

    (a, b, c) are the angles <xi, E_k> and must be a unit triple.  Inner
    products go through the Gram matrix <E_kT, E_lT> = delta_kl - c_k c_l.
    Returns the residuals against |A E3T|^2 = (a^2 + b^2) - (a^2 - b^2)^2 and
    <A E3T, E3T> = c (b^2 - a^2).
    """
    v = np.array([a, b, c], dtype=float)
    if abs(float(v @ v) - 1.0) > UNIT_TOL:
        raise ConstraintError(f"angles must satisfy a^2+b^2+c^2 = 1, got {float(v @ v)!r}")
    gram = np.eye(3) - np.outer(v, v)
    AE3 = np.array([a, -b, 0.0])
    E3 = np.array([0.0, 0.0, 1.0])
    r1 = abs(AE3 @ gram @ AE3 - ((a * a + b * b) - (a * a - b * b) ** 2))
    r2 = abs(AE3 @ gram @ E3 - c * (b * b - a * a))
    return float(r1), float(r2)


@dataclass
class TheoremStats:
    fraction: float
    expr_min: float
    expr_max: float


@dataclass
class GapReport:
    surface: str
    params: Dict[str, float]
    resolution: int
    closed: bool
    valid_nodes: int
    total_nodes: int
    theorems: Dict[str, TheoremStats]
    E_min: float
    E_max: float
    normA2_range: Tuple[float, float]
    area: Optional[float] = None
    integrals: Optional[Dict[str, float]] = None
    laplacian_tolerance: Optional[float] = None
    laplacian_integral_ok: Optional[bool] = None
    flags: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _stats(pred, expr) -> TheoremStats:
    ok = np.isfinite(expr)
    return TheoremStats(
        fraction=float(np.count_nonzero(pred[ok])) / max(int(np.count_nonzero(ok)), 1),
        expr_min=float(np.min(expr[ok])),
        expr_max=float(np.max(expr[ok])),
    )


def scan(chart: Chart, resolution: int, rel_tol: float = 1e-6) -> GapReport:
    """Audit every gap hypothesis on a sampled chart.

    Integrals are computed only on doubly periodic charts; elsewhere they are
    omitted and a flag says so.
    """
    grid = sample(chart, resolution)
    d = grid.data
    valid = grid.mask
    S, f, K = d.normA2, d.f, d.K
    quartic = thm43_quartic(K, S, f)
    # signed margin of the two-sided bound: >= 0 iff both inequalities hold
    margin41 = np.minimum(S - 2 * f**2 - 2, 4 * f**2 - 2 - S)
    theorems = {
        "thm41": _stats(thm41_predicate(d), margin41),
        "thm42": _stats(thm42_predicate(d), K * (S - 2 * f**2) - 1),
        "thm43": _stats(thm43_predicate(d), quartic),
        "thm44": _stats(thm44_predicate(d), quartic),
    }
    E = E_term(d)
    report = GapReport(
        surface=chart.name,
        params=dict(chart.params),
        resolution=int(resolution),
        closed=chart.closed,
        valid_nodes=int(np.count_nonzero(valid)),
        total_nodes=int(valid.size),
        theorems=theorems,
        E_min=float(np.nanmin(E)),
        E_max=float(np.nanmax(E)),
        normA2_range=(float(np.nanmin(S)), float(np.nanmax(S))),
        flags=dict(FLAGS),
    )
    if not chart.closed:
        report.flags["integrals"] = "omitted: chart is not doubly periodic"
        return report

    F = IdentityFields(grid)
    g = F.g
    area = integrate(grid.field(np.ones_like(S)), g)
    lap = laplace_beltrami(grid.field(S), g)
    report.area = area
    report.integrals = {
        "E": integrate(grid.field(E), g),
        "nablaA2": integrate(grid.field(F.nablaA2), g),
        "laplacian_normA2": integrate(lap, g),
        "div_A_grad_f": integrate(grid.field(F.div_A_gradf), g),
        "nablaA2_plus_E": integrate(grid.field(F.nablaA2 + E), g),
    }
    report.laplacian_tolerance = rel_tol * area
    report.laplacian_integral_ok = abs(report.integrals["laplacian_normA2"]) <= rel_tol * area
    return report
