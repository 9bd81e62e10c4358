"""Parametric surfaces in Sol3 and their pointwise second-order data."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np

from . import ambient
from .surfcalc import GridField, Lattice

__all__ = [
    "Jet2",
    "Chart",
    "SurfacePointData",
    "SurfaceGrid",
    "DegeneratePointError",
    "evaluate_point",
    "sample",
    "gaussian_curvature_extrinsic",
    "gaussian_curvature_intrinsic",
    "gaussian_curvature_gauss_equation",
]

RANK_TOL = 1e-10


class DegeneratePointError(ValueError):
    """The chart differential drops rank at some evaluated point."""


@dataclass(frozen=True)
class Jet2:
    """Position and coordinate partials up to order two, arrays with last axis 3."""

    position: np.ndarray
    phi_s: np.ndarray
    phi_t: np.ndarray
    phi_ss: np.ndarray
    phi_st: np.ndarray
    phi_tt: np.ndarray


@dataclass(frozen=True)
class Chart:
    """A parametrized surface patch phi: [s0,s1] x [t0,t1] -> Sol3.

    ``evaluator(s, t)`` must broadcast over array arguments and return a
    :class:`Jet2` with closed-form derivatives.  ``exclude(s, t, hs, ht)``
    optionally returns a boolean array of nodes to drop (pole bands).
    """

    name: str
    domain: Tuple[float, float, float, float]
    periodic: Tuple[bool, bool]
    evaluator: Callable[[np.ndarray, np.ndarray], Jet2]
    cmc: bool = False
    orientation: str = ""
    params: dict = field(default_factory=dict)
    exclude: Optional[Callable[..., np.ndarray]] = None

    @property
    def closed(self) -> bool:
        return all(self.periodic)

    def lattice(self, n) -> Lattice:
        ns, nt = (n, n) if np.isscalar(n) else n
        return Lattice(self.domain, (int(ns), int(nt)), self.periodic)

    def __call__(self, s, t) -> Jet2:
        return self.evaluator(np.asarray(s, dtype=float), np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SurfacePointData:
    """Pointwise data; every field carries arbitrary leading (grid) axes.

    Chart-basis conventions: vectors are (..., 2) arrays of components on
    d/ds, d/dt; ``A[..., k, j]`` is the k-th component of A(d_j); ``Etop[..., k, :]``
    holds the tangent part of E_{k+1}; ``c[..., k] = <xi, E_{k+1}>``.
    """

    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det_g: np.ndarray
    xi: np.ndarray
    h: np.ndarray
    A: np.ndarray
    f: np.ndarray
    normA2: np.ndarray
    K: np.ndarray
    Etop: np.ndarray
    c: np.ndarray
    tangents: np.ndarray  # frame components of phi_s, phi_t, shape (..., 2, 3)

    def flipped(self) -> "SurfacePointData":
        """The same surface with the opposite unit normal."""
        return replace(self, xi=-self.xi, h=-self.h, A=-self.A, f=-self.f, c=-self.c)

    def ip(self, u, v) -> np.ndarray:
        """g-inner product of chart vectors."""
        return np.einsum("...i,...ij,...j->...", u, self.g, v)

    def apply_A(self, v) -> np.ndarray:
        return np.einsum("...kj,...j->...k", self.A, v)


def gaussian_curvature_extrinsic(d: SurfacePointData) -> np.ndarray:
    c3 = d.c[..., 2]
    return 2.0 * c3**2 - 1.0 + 2.0 * d.f**2 - 0.5 * d.normA2


def _frame_scale_dz(z):
    z = np.asarray(z, dtype=float)
    return np.stack([np.exp(z), -np.exp(-z), np.zeros_like(z)], axis=-1)


def _point_data(jet: Jet2) -> Tuple[SurfacePointData, np.ndarray]:
    p = jet.position
    z = p[..., 2]
    F, dF = ambient.frame_scale(z), _frame_scale_dz(z)
    a = np.stack([F * jet.phi_s, F * jet.phi_t], axis=-2)  # (..., 2, 3)
    zd = np.stack([jet.phi_s[..., 2], jet.phi_t[..., 2]], axis=-1)  # dz/ds, dz/dt

    sv = np.linalg.svd(np.swapaxes(a, -1, -2), compute_uv=False)
    ratio = sv[..., -1] / np.where(sv[..., 0] > 0, sv[..., 0], 1.0)

    g = np.einsum("...ik,...jk->...ij", a, a)
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        g_inv = np.stack([
            np.stack([g[..., 1, 1], -g[..., 0, 1]], axis=-1),
            np.stack([-g[..., 1, 0], g[..., 0, 0]], axis=-1),
        ], axis=-2) / det[..., None, None]
        n = np.cross(a[..., 0, :], a[..., 1, :])
        xi = n / np.linalg.norm(n, axis=-1, keepdims=True)

    second = {(0, 0): jet.phi_ss, (0, 1): jet.phi_st, (1, 0): jet.phi_st, (1, 1): jet.phi_tt}
    first = (jet.phi_s, jet.phi_t)
    h = np.empty(g.shape)
    for i in range(2):
        for j in range(2):
            # d_i of frame components of phi_j, then the connection term
            da = F * second[i, j] + dF * zd[..., i, None] * first[j]
            nab = ambient.ambient_covariant_derivative(a[..., i, :], a[..., j, :], da)
            h[..., i, j] = ambient.inner(nab, xi)

    A = np.einsum("...ik,...kj->...ij", g_inv, h)
    f = 0.5 * (A[..., 0, 0] + A[..., 1, 1])
    normA2 = np.einsum("...ij,...ji->...", A, A)
    # <E_k, phi_j> = a[..., j, k]
    Etop = np.einsum("...ij,...kj->...ki", g_inv, np.swapaxes(a, -1, -2))
    c = xi
    d = SurfacePointData(
        g=g, g_inv=g_inv, sqrt_det_g=np.sqrt(det), xi=xi, h=h, A=A, f=f,
        normA2=normA2, K=np.zeros_like(f), Etop=Etop, c=c, tangents=a,
    )
    d = replace(d, K=gaussian_curvature_extrinsic(d))
    return d, ratio


def evaluate_point(chart: Chart, s, t) -> SurfacePointData:
    """Full second-order data of ``chart`` at (s, t); broadcasts over arrays."""
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
        raise ValueError("non-finite chart parameters")
    d, ratio = _point_data(chart(s, t))
    if np.any(~(ratio >= RANK_TOL)):
        raise DegeneratePointError(f"{chart.name}: differential rank-deficient at some point")
    return d


@dataclass(frozen=True)
class SurfaceGrid:
    """A chart sampled on a lattice; masked nodes hold NaN in every field."""

    chart: Chart
    lattice: Lattice
    data: SurfacePointData
    mask: np.ndarray  # True where the node is valid

    def field(self, values) -> GridField:
        values = np.asarray(values, dtype=float)
        return GridField(np.where(self._bmask(values), values, np.nan), self.lattice)

    def _bmask(self, values):
        return self.mask.reshape(self.mask.shape + (1,) * (values.ndim - 2))

    @property
    def metric(self) -> GridField:
        return self.field(self.data.g)


def sample(chart: Chart, n) -> SurfaceGrid:
    """Evaluate ``chart`` on its lattice with ``n`` nodes per direction."""
    lat = chart.lattice(n)
    S, T = lat.mesh()
    mask = np.ones(S.shape, dtype=bool)
    if chart.exclude is not None:
        mask &= ~np.asarray(chart.exclude(S, T, lat.hs, lat.ht), dtype=bool)
    with np.errstate(all="ignore"):
        d, ratio = _point_data(chart(S, T))
    if np.any(~(ratio[mask] >= RANK_TOL)):
        raise DegeneratePointError(f"{chart.name}: differential rank-deficient on unmasked node")

    def blank(x):
        m = mask.reshape(mask.shape + (1,) * (x.ndim - 2))
        return np.where(m, x, np.nan)

    d = SurfacePointData(**{k: blank(getattr(d, k)) for k in d.__dataclass_fields__})
    return SurfaceGrid(chart, lat, d, mask)


def gaussian_curvature_intrinsic(chart: Chart, n) -> GridField:
    """Gaussian curvature from finite differences of g alone (Brioschi formula).

    Non-periodic edges lose one ring of nodes (NaN).
    """
    grid = chart if isinstance(chart, SurfaceGrid) else sample(chart, n)
    lat = grid.lattice
    g = grid.data.g
    E, F, G = g[..., 0, 0], g[..., 0, 1], g[..., 1, 1]
    Es, Et = lat.d(E, 0), lat.d(E, 1)
    Fs, Ft = lat.d(F, 0), lat.d(F, 1)
    Gs, Gt = lat.d(G, 0), lat.d(G, 1)
    Ett, Gss, Fst = lat.d2(E, 1), lat.d2(G, 0), lat.d2_mixed(F)

    m1 = np.stack([
        np.stack([-0.5 * Ett + Fst - 0.5 * Gss, 0.5 * Es, Fs - 0.5 * Et], -1),
        np.stack([Ft - 0.5 * Gs, E, F], -1),
        np.stack([0.5 * Gt, F, G], -1),
    ], -2)
    m2 = np.stack([
        np.stack([np.zeros_like(E), 0.5 * Et, 0.5 * Gs], -1),
        np.stack([0.5 * Et, E, F], -1),
        np.stack([0.5 * Gs, F, G], -1),
    ], -2)
    with np.errstate(invalid="ignore"):
        K = (np.linalg.det(m1) - np.linalg.det(m2)) / (E * G - F**2) ** 2
    return GridField(K, lat)


def gaussian_curvature_gauss_equation(d: SurfacePointData) -> np.ndarray:
    """K = (<R(phi_s,phi_t)phi_t, phi_s> + det h) / det g, straight from the Gauss equation."""
    X, Y = d.tangents[..., 0, :], d.tangents[..., 1, :]
    amb = ambient.inner(ambient.curvature_tensor(X, Y, Y), X)
    det_h = d.h[..., 0, 0] * d.h[..., 1, 1] - d.h[..., 0, 1] * d.h[..., 1, 0]
    return (amb + det_h) / d.sqrt_det_g**2
