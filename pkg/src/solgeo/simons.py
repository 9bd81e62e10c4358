"""Simons-type identities for surfaces in Sol3 and their residual harness.

Each identity is checked as ``|LHS - RHS|`` on a sampled chart.  Left-hand
sides are finite-difference objects (Laplacians, divergences, covariant
derivatives of grid fields); right-hand sides are closed forms in the
pointwise data, plus first-order differences for grad f and the divergence
terms that appear explicitly.

Notation in this module: ``c1, c2, c3`` are <xi, E_k>, ``T1, T2, T3`` the
tangent parts of E_k in chart components, ``S = |A|^2`` and ``f`` the mean
curvature.
"""

from __future__ import annotations

import enum
from functools import cached_property
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from .immersion import Chart, SurfaceGrid, SurfacePointData, sample
from .surfcalc import (
    GridField,
    ResidualReport,
    covariant_derivative_A,
    induced_christoffels,
    laplace_beltrami,
    surface_divergence,
    surface_gradient,
    tensor_norm,
    vector_norm,
)

__all__ = [
    "IdentityId",
    "ANCHORS",
    "FD_IDENTITIES",
    "ALGEBRAIC_IDENTITIES",
    "NotCMCError",
    "pointwise_terms",
    "IdentityFields",
    "identity_residual",
    "residual_suite",
    "consistency_delta_combination",
    "frame_independence_check",
    "frame_residual",
    "commutator_trace",
]


class IdentityId(str, enum.Enum):
    CODAZZI = "CODAZZI"
    TRACE_NABLA_A = "TRACE_NABLA_A"
    NABLA_E3 = "NABLA_E3"
    GRAD_ANGLE = "GRAD_ANGLE"
    LEMMA_DIVF = "LEMMA_DIVF"
    LEMMA_DIVA = "LEMMA_DIVA"
    DELTA2 = "DELTA2"
    DELTA3 = "DELTA3"
    DELTA_CMC = "DELTA_CMC"
    DELTA_ANGLE = "DELTA_ANGLE"
    DELTA_A_ANGLE = "DELTA_A_ANGLE"
    REMARK = "REMARK"
    FRAME_INDEP = "FRAME_INDEP"


ANCHORS: Dict[IdentityId, str] = {
    IdentityId.CODAZZI: "(nabla_X A)Y - (nabla_Y A)X = 2 c3 (<Y,T3>X - <X,T3>Y)",
    IdentityId.TRACE_NABLA_A: "sum_i (nabla_Xi A)Xi = 2 grad f + 2 c3 T3",
    IdentityId.NABLA_E3: "nabla_Y T3 = c3 AY + <Y,T1>T1 - <Y,T2>T2",
    IdentityId.GRAD_ANGLE: "grad c3 = -A T3 + c1 T1 - c2 T2",
    IdentityId.LEMMA_DIVF: "div(f c3 T3)",
    IdentityId.LEMMA_DIVA: "div(c3 A T3)",
    IdentityId.DELTA2: "1/2 Lap |A|^2, general surface",
    IdentityId.DELTA3: "1/2 Lap |A|^2, divergence form",
    IdentityId.DELTA_CMC: "1/2 Lap |A|^2, constant mean curvature",
    IdentityId.DELTA_ANGLE: "1/2 Lap c3^2",
    IdentityId.DELTA_A_ANGLE: "1/2 Lap (|A|^2 + 2 c3^2)",
    IdentityId.REMARK: "2f<AT3,T3> = |AT3|^2 + 1/2 (1 - c3^2)(4f^2 - |A|^2)",
    IdentityId.FRAME_INDEP: "sum_ij <[R(Xi,Xj),A]Xi, AXj> = 2K(|A|^2 - 2f^2)",
}

FD_IDENTITIES = (
    IdentityId.CODAZZI,
    IdentityId.TRACE_NABLA_A,
    IdentityId.NABLA_E3,
    IdentityId.GRAD_ANGLE,
    IdentityId.LEMMA_DIVF,
    IdentityId.LEMMA_DIVA,
    IdentityId.DELTA2,
    IdentityId.DELTA3,
    IdentityId.DELTA_CMC,
    IdentityId.DELTA_ANGLE,
    IdentityId.DELTA_A_ANGLE,
)
ALGEBRAIC_IDENTITIES = (IdentityId.REMARK, IdentityId.FRAME_INDEP)


class NotCMCError(ValueError):
    """DELTA_CMC requested on a chart whose mean curvature is not constant."""


def pointwise_terms(d: SurfacePointData, grad_f: Optional[np.ndarray] = None) -> Dict[str, np.ndarray]:
    """Every scalar that occurs on a right-hand side, computed once."""
    c1, c2, c3 = d.c[..., 0], d.c[..., 1], d.c[..., 2]
    T1, T2, T3 = d.Etop[..., 0, :], d.Etop[..., 1, :], d.Etop[..., 2, :]
    AT1, AT2, AT3 = d.apply_A(T1), d.apply_A(T2), d.apply_A(T3)
    S, f = d.normA2, d.f
    t = {
        "c1": c1, "c2": c2, "c3": c3, "f": f, "S": S, "K": d.K,
        "AT3_AT3": d.ip(AT3, AT3),
        "AT3_T3": d.ip(AT3, T3),
        "AT1_T1": d.ip(AT1, T1),
        "AT2_T2": d.ip(AT2, T2),
        "AT3_T1": d.ip(AT3, T1),
        "AT3_T2": d.ip(AT3, T2),
        "T3_T3": d.ip(T3, T3),
        "c3sq_1mc3sq": c3**2 * (1.0 - c3**2),
        "c2sq_m_c1sq": c2**2 - c1**2,
        "K_S_2f2": d.K * (S - 2.0 * f**2),
    }
    if grad_f is not None:
        t["gradf_gradf"] = d.ip(grad_f, grad_f)
        t["gradf_T3"] = d.ip(grad_f, T3)
    return t


class IdentityFields:
    """Lazily assembled grid quantities for one sampled chart."""

    def __init__(self, grid: SurfaceGrid):
        self.grid = grid
        self.d = grid.data
        self.lat = grid.lattice

    def field(self, values) -> GridField:
        return self.grid.field(values)

    @cached_property
    def g(self) -> GridField:
        return self.grid.metric

    @cached_property
    def grad_f(self) -> np.ndarray:
        return surface_gradient(self.field(self.d.f), self.g).values

    @cached_property
    def terms(self) -> Dict[str, np.ndarray]:
        return pointwise_terms(self.d, self.grad_f)

    @cached_property
    def T(self):
        return self.d.Etop[..., 0, :], self.d.Etop[..., 1, :], self.d.Etop[..., 2, :]

    @cached_property
    def christoffels(self) -> GridField:
        return induced_christoffels(self.g)

    @cached_property
    def _nablaA(self):
        return covariant_derivative_A(self.field(self.d.A), self.christoffels, self.g)

    @property
    def nablaA(self) -> np.ndarray:
        return self._nablaA[0].values

    @property
    def nablaA2(self) -> np.ndarray:
        return self._nablaA[1].values

    def div(self, V) -> np.ndarray:
        return surface_divergence(self.field(V), self.g).values

    def half_laplacian(self, u) -> np.ndarray:
        return 0.5 * laplace_beltrami(self.field(u), self.g).values

    @cached_property
    def div_A_gradf(self) -> np.ndarray:
        return self.div(self.d.apply_A(self.grad_f))

    @cached_property
    def div_c3_AT3(self) -> np.ndarray:
        c3 = self.terms["c3"]
        return self.div(c3[..., None] * self.d.apply_A(self.T[2]))

    @cached_property
    def div_f_c3_T3(self) -> np.ndarray:
        fc3 = self.terms["f"] * self.terms["c3"]
        return self.div(fc3[..., None] * self.T[2])

    def use_closed_divergences(self) -> "IdentityFields":
        """Replace div(c3 A T3) and div(f c3 T3) by their closed forms.

        Right-hand sides assembled afterwards are free of second differences,
        so algebraic relations between them hold to rounding.
        """
        self.div_c3_AT3 = self.rhs_divA()
        self.div_f_c3_T3 = self.rhs_divf()
        return self

    # -- closed-form right-hand sides ------------------------------------

    def rhs_divf(self) -> np.ndarray:
        t = self.terms
        return (2 * t["f"] * t["c3"] * t["c2sq_m_c1sq"] - t["f"] * t["AT3_T3"]
                + 2 * t["f"] ** 2 * t["c3"] ** 2 + t["c3"] * t["gradf_T3"])

    def rhs_divA(self) -> np.ndarray:
        t = self.terms
        c3 = t["c3"]
        return (-t["AT3_AT3"] + 2 * c3 * t["gradf_T3"] + c3**2 * t["S"]
                + 2 * t["c3sq_1mc3sq"] + c3 * t["AT1_T1"] - c3 * t["AT2_T2"]
                + t["c1"] * t["AT3_T1"] - t["c2"] * t["AT3_T2"])

    def rhs_delta2(self) -> np.ndarray:
        t = self.terms
        c1, c2, c3, f, S = t["c1"], t["c2"], t["c3"], t["f"], t["S"]
        return (self.nablaA2 + 2 * self.div_A_gradf - 4 * t["gradf_gradf"]
                - 4 * c3 * t["gradf_T3"]
                + 2 * t["K_S_2f2"] + 4 * c3**2 * (S - 2 * f**2)
                - 8 * f * c3 * t["c2sq_m_c1sq"] + 4 * f * t["AT3_T3"]
                + 4 * c3 * t["AT1_T1"] - 4 * c3 * t["AT2_T2"]
                + 4 * c1 * t["AT3_T1"] - 4 * c2 * t["AT3_T2"] - 4 * t["AT3_AT3"])

    def rhs_delta3(self) -> np.ndarray:
        t = self.terms
        return (self.nablaA2 - 4 * t["gradf_gradf"] - 8 * t["c3"] * t["gradf_T3"]
                + 2 * self.div_A_gradf + 4 * self.div_c3_AT3 - 4 * self.div_f_c3_T3
                + 2 * t["K_S_2f2"] - 8 * t["c3sq_1mc3sq"])

    def rhs_delta_cmc(self) -> np.ndarray:
        t = self.terms
        return (self.nablaA2 + 4 * self.div_c3_AT3 - 4 * self.div_f_c3_T3
                + 2 * t["K_S_2f2"] - 8 * t["c3sq_1mc3sq"])

    def rhs_delta_angle(self, literal: bool = False) -> np.ndarray:
        """Right-hand side for 1/2 Lap c3^2.

        ``literal=True`` reads two pairings exactly as printed: <grad f, E3 normal>
        and <xi, E_k tangent>, both of which vanish identically.  The default
        uses the tangential pairing <grad f, T3> and the angles c_k.
        """
        t = self.terms
        c1, c2, c3, f, S = t["c1"], t["c2"], t["c3"], t["f"], t["S"]
        gradf_pair = 0.0 if literal else t["gradf_T3"]
        quartic = 0.0 if literal else t["c2sq_m_c1sq"] ** 2
        return (-self.div_f_c3_T3 - c3 * gradf_pair
                + 2 * c3 * t["AT2_T2"] - 2 * c3 * t["AT1_T1"]
                + 2 * c2 * t["AT3_T2"] - 2 * c1 * t["AT3_T1"]
                + c3**2 * (2 * f**2 - 3 - S) - f * t["AT3_T3"] + t["AT3_AT3"]
                + 1 - quartic)

    def rhs_delta_a_angle(self) -> np.ndarray:
        t = self.terms
        c3, f, S = t["c3"], t["f"], t["S"]
        return (self.nablaA2 - 4 * t["gradf_gradf"] - 2 * c3 * t["gradf_T3"]
                + 2 * self.div_A_gradf - 6 * self.div_f_c3_T3
                + 2 * t["K_S_2f2"] + 2 * c3**2 * (S + 2 * f**2 - 3)
                - 2 * t["AT3_AT3"] - 2 * f * t["AT3_T3"]
                + 2 - 2 * t["c2sq_m_c1sq"] ** 2)

    # -- residual fields --------------------------------------------------

    def residual(self, identity: IdentityId) -> np.ndarray:
        identity = IdentityId(identity)
        d, t = self.d, self.terms
        T1, T2, T3 = self.T
        g = d.g
        if identity is IdentityId.CODAZZI:
            nab = self.nablaA
            lhs = nab[..., 0, :, 1] - nab[..., 1, :, 0]
            gT3 = np.einsum("...ij,...j->...i", g, T3)
            es = np.broadcast_to([1.0, 0.0], lhs.shape)
            et = np.broadcast_to([0.0, 1.0], lhs.shape)
            rhs = 2 * t["c3"][..., None] * (gT3[..., 1, None] * es - gT3[..., 0, None] * et)
            return vector_norm(lhs - rhs, g)
        if identity is IdentityId.TRACE_NABLA_A:
            lhs = np.einsum("...ij,...ikj->...k", d.g_inv, self.nablaA)
            rhs = 2 * self.grad_f + 2 * t["c3"][..., None] * T3
            return vector_norm(lhs - rhs, g)
        if identity is IdentityId.NABLA_E3:
            dT3 = np.stack([self.lat.d(T3, 0), self.lat.d(T3, 1)], axis=-2)  # [..., i, k]
            gam = self.christoffels.values
            lhs = np.swapaxes(dT3, -1, -2) + np.einsum("...kip,...p->...ki", gam, T3)
            gT1 = np.einsum("...ij,...j->...i", g, T1)
            gT2 = np.einsum("...ij,...j->...i", g, T2)
            rhs = (t["c3"][..., None, None] * d.A
                   + T1[..., :, None] * gT1[..., None, :]
                   - T2[..., :, None] * gT2[..., None, :])
            return tensor_norm(lhs - rhs, g)
        if identity is IdentityId.GRAD_ANGLE:
            lhs = surface_gradient(self.field(t["c3"]), self.g).values
            rhs = (-d.apply_A(T3) + t["c1"][..., None] * T1 - t["c2"][..., None] * T2)
            return vector_norm(lhs - rhs, g)
        if identity is IdentityId.LEMMA_DIVF:
            return np.abs(self.div_f_c3_T3 - self.rhs_divf())
        if identity is IdentityId.LEMMA_DIVA:
            return np.abs(self.div_c3_AT3 - self.rhs_divA())
        if identity is IdentityId.DELTA2:
            return np.abs(self.half_laplacian(t["S"]) - self.rhs_delta2())
        if identity is IdentityId.DELTA3:
            return np.abs(self.half_laplacian(t["S"]) - self.rhs_delta3())
        if identity is IdentityId.DELTA_CMC:
            if not self.grid.chart.cmc:
                raise NotCMCError(f"{self.grid.chart.name} does not have constant mean curvature")
            return np.abs(self.half_laplacian(t["S"]) - self.rhs_delta_cmc())
        if identity is IdentityId.DELTA_ANGLE:
            return np.abs(self.half_laplacian(t["c3"] ** 2) - self.rhs_delta_angle())
        if identity is IdentityId.DELTA_A_ANGLE:
            lhs = self.half_laplacian(t["S"] + 2 * t["c3"] ** 2)
            return np.abs(lhs - self.rhs_delta_a_angle())
        if identity is IdentityId.REMARK:
            lhs = 2 * t["f"] * t["AT3_T3"]
            rhs = t["AT3_AT3"] + 0.5 * (1 - t["c3"] ** 2) * (4 * t["f"] ** 2 - t["S"])
            return np.abs(lhs - rhs)
        if identity is IdentityId.FRAME_INDEP:
            return frame_residual(d, d.K)
        raise ValueError(f"unhandled identity {identity}")  # pragma: no cover


def _resolutions(resolution) -> Sequence[int]:
    if np.isscalar(resolution):
        return [int(resolution)]
    return [int(n) for n in resolution]


def identity_residual(identity, chart: Chart, resolution) -> ResidualReport:
    """Residual of one identity on ``chart`` at one or more resolutions."""
    identity = IdentityId(identity)
    if identity is IdentityId.DELTA_CMC and not chart.cmc:
        raise NotCMCError(f"{chart.name} does not have constant mean curvature")
    report = ResidualReport(identity.value, chart.name)
    for n in _resolutions(resolution):
        fields = IdentityFields(sample(chart, n))
        report.add(n, max(fields.lat.spacing), fields.residual(identity))
    return report


def residual_suite(chart: Chart, identities: Iterable, resolutions) -> Dict[IdentityId, ResidualReport]:
    """Like :func:`identity_residual` for several identities, sampling each resolution once."""
    identities = [IdentityId(i) for i in identities]
    if IdentityId.DELTA_CMC in identities and not chart.cmc:
        raise NotCMCError(f"{chart.name} does not have constant mean curvature")
    reports = {i: ResidualReport(i.value, chart.name) for i in identities}
    for n in _resolutions(resolutions):
        fields = IdentityFields(sample(chart, n))
        h = max(fields.lat.spacing)
        for i in identities:
            reports[i].add(n, h, fields.residual(i))
    return reports


def consistency_delta_combination(chart: Chart, resolution) -> ResidualReport:
    """Node-wise |RHS(A_ANGLE) - RHS(DELTA2) - 2 RHS(ANGLE)|; no left-hand sides involved."""
    report = ResidualReport("DELTA_COMBINATION", chart.name)
    for n in _resolutions(resolution):
        F = IdentityFields(sample(chart, n)).use_closed_divergences()
        r = F.rhs_delta_a_angle() - F.rhs_delta2() - 2 * F.rhs_delta_angle()
        report.add(n, max(F.lat.spacing), r)
    return report


def _orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns: the g-orthonormal frame from Gram-Schmidt on (d_s, d_t)."""
    g11, g12, g22 = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    e1 = np.stack([1 / np.sqrt(g11), np.zeros_like(g11)], -1)
    det = g11 * g22 - g12**2
    e2 = np.stack([-g12, g11], -1) / np.sqrt(g11 * det)[..., None]
    return np.stack([e1, e2], axis=-1)


def _rotation(theta) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def commutator_trace(d: SurfacePointData, K, theta) -> np.ndarray:
    """sum_{i,j} <[R(X_i,X_j), A] X_i, A X_j> in the orthonormal frame rotated by ``theta``.

    The surface curvature operator is R(X,Y)Z = K(<Y,Z>X - <X,Z>Y).  A is
    expressed once in the Gram-Schmidt frame and then rotated exactly, which
    keeps the two-frame comparison at rounding level.
    """
    Q = _orthonormal_frame(d.g)
    A0 = np.einsum("...ai,...ab,...bc,...cj->...ij", Q, d.g, d.A, Q)
    rot = _rotation(np.asarray(theta, dtype=float))
    Ahat = np.swapaxes(rot, -1, -2) @ A0 @ rot
    K = np.asarray(K)[..., None, None]
    eye = np.eye(2)
    total = 0.0
    for i in range(2):
        for j in range(2):
            R = K * (np.outer(eye[i], eye[j]) - np.outer(eye[j], eye[i]))
            C = R @ Ahat - Ahat @ R
            total = total + np.einsum("...a,...a->...", C[..., :, i], Ahat[..., :, j])
    return total


def frame_residual(d: SurfacePointData, K, seed: int = 0) -> np.ndarray:
    """Node-wise max of the two-frame discrepancy and the closed-form discrepancy."""
    rng = np.random.default_rng(seed)
    shape = np.shape(d.f)
    th1, th2 = rng.uniform(0, 2 * np.pi, shape), rng.uniform(0, 2 * np.pi, shape)
    a, b = commutator_trace(d, K, th1), commutator_trace(d, K, th2)
    closed = 2 * np.asarray(K) * (d.normA2 - 2 * d.f**2)
    return np.maximum(np.abs(a - b), np.abs(a - closed))


def frame_independence_check(grid: SurfaceGrid, K=None, seed: int = 0) -> ResidualReport:
    """Commutator trace in two random frames per node against 2K(|A|^2 - 2f^2).

    ``K`` defaults to the pointwise curvature of the sampled data; pass an
    intrinsic curvature field to use that instead.
    """
    K = grid.data.K if K is None else np.asarray(getattr(K, "values", K))
    report = ResidualReport(IdentityId.FRAME_INDEP.value, grid.chart.name)
    report.add(grid.lattice.shape[0], max(grid.lattice.spacing), frame_residual(grid.data, K, seed))
    return report
