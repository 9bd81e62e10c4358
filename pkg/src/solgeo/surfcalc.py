"""Intrinsic differential operators on rectangular chart lattices.

All derivatives are 3-point central differences.  Periodic directions wrap;
along a non-periodic direction the outermost ring of an operator's output is
NaN, so every nested derivative shrinks the valid interior by one more ring
and invalid nodes propagate instead of being read silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

__all__ = [
    "Lattice",
    "GridField",
    "ResidualReport",
    "GridMismatchError",
    "surface_gradient",
    "surface_divergence",
    "laplace_beltrami",
    "induced_christoffels",
    "covariant_derivative_A",
    "integrate",
    "vector_norm",
    "tensor_norm",
]


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Lattice:
    """Node layout of a chart rectangle.

    Periodic directions use N nodes with spacing L/N (the endpoint is the
    first node again); non-periodic directions include both endpoints.
    """

    domain: Tuple[float, float, float, float]
    shape: Tuple[int, int]
    periodic: Tuple[bool, bool]

    def __post_init__(self):
        if min(self.shape) < 3:
            raise ValueError(f"lattice too small: {self.shape}")
        if self.spacing[0] <= 0 or self.spacing[1] <= 0:
            raise ValueError(f"degenerate domain {self.domain}")

    @property
    def spacing(self) -> Tuple[float, float]:
        s0, s1, t0, t1 = self.domain
        out = []
        for (a, b), n, per in zip(((s0, s1), (t0, t1)), self.shape, self.periodic):
            out.append((b - a) / (n if per else n - 1))
        return tuple(out)

    @property
    def hs(self) -> float:
        return self.spacing[0]

    @property
    def ht(self) -> float:
        return self.spacing[1]

    def axis_nodes(self, axis: int) -> np.ndarray:
        a = self.domain[2 * axis]
        return a + self.spacing[axis] * np.arange(self.shape[axis])

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis_nodes(0), self.axis_nodes(1), indexing="ij")

    def d(self, u, axis: int) -> np.ndarray:
        """Central first difference along chart axis 0 (s) or 1 (t)."""
        u = np.asarray(u, dtype=float)
        h = self.spacing[axis]
        if self.periodic[axis]:
            return (np.roll(u, -1, axis) - np.roll(u, 1, axis)) / (2.0 * h)
        out = np.full(u.shape, np.nan)
        hi = [slice(None)] * u.ndim
        lo = [slice(None)] * u.ndim
        mid = [slice(None)] * u.ndim
        hi[axis], lo[axis], mid[axis] = slice(2, None), slice(None, -2), slice(1, -1)
        out[tuple(mid)] = (u[tuple(hi)] - u[tuple(lo)]) / (2.0 * h)
        return out

    def d2(self, u, axis: int) -> np.ndarray:
        """Compact 3-point second difference."""
        u = np.asarray(u, dtype=float)
        h = self.spacing[axis]
        if self.periodic[axis]:
            return (np.roll(u, -1, axis) - 2.0 * u + np.roll(u, 1, axis)) / h**2
        out = np.full(u.shape, np.nan)
        sl = [[slice(None)] * u.ndim for _ in range(3)]
        sl[0][axis], sl[1][axis], sl[2][axis] = slice(2, None), slice(1, -1), slice(None, -2)
        out[tuple(sl[1])] = (u[tuple(sl[0])] - 2.0 * u[tuple(sl[1])] + u[tuple(sl[2])]) / h**2
        return out

    def d2_mixed(self, u) -> np.ndarray:
        return self.d(self.d(u, 0), 1)


@dataclass(frozen=True)
class GridField:
    """Samples on a lattice: scalar (Ns, Nt), vector (Ns, Nt, 2), tensor (Ns, Nt, 2, 2)...

    NaN marks a masked node.
    """

    values: np.ndarray
    lattice: Lattice

    def __post_init__(self):
        if tuple(self.values.shape[:2]) != tuple(self.lattice.shape):
            raise GridMismatchError(
                f"values {self.values.shape} do not match lattice {self.lattice.shape}")

    @property
    def rank(self) -> int:
        return self.values.ndim - 2

    @property
    def mask(self) -> np.ndarray:
        """True on valid nodes."""
        v = self.values.reshape(self.lattice.shape + (-1,))
        return np.all(np.isfinite(v), axis=-1)

    def with_values(self, values) -> "GridField":
        return GridField(np.asarray(values, dtype=float), self.lattice)


def _check(u: GridField, g: GridField, rank: int):
    if u.lattice != g.lattice:
        raise GridMismatchError("fields live on different lattices")
    if g.rank != 2 or g.values.shape[-2:] != (2, 2):
        raise GridMismatchError("metric must be a (2, 2) tensor field")
    if u.rank != rank or (rank and u.values.shape[2:] != (2,) * rank):
        raise GridMismatchError(f"expected a rank-{rank} field, got shape {u.values.shape}")


def _inv(g: np.ndarray) -> np.ndarray:
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 1, 1] = g[..., 0, 0]
    inv[..., 0, 1] = -g[..., 0, 1]
    inv[..., 1, 0] = -g[..., 1, 0]
    return inv / det[..., None, None]


def _sqrt_det(g: np.ndarray) -> np.ndarray:
    return np.sqrt(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0])


def surface_gradient(u: GridField, g: GridField) -> GridField:
    """Chart components g^{ij} d_j u."""
    _check(u, g, 0)
    lat = u.lattice
    du = np.stack([lat.d(u.values, 0), lat.d(u.values, 1)], axis=-1)
    return GridField(np.einsum("...ij,...j->...i", _inv(g.values), du), lat)


def surface_divergence(V: GridField, g: GridField) -> GridField:
    """(1/sqrt(det g)) d_i (sqrt(det g) V^i)."""
    _check(V, g, 1)
    lat = V.lattice
    w = _sqrt_det(g.values)
    flux = w[..., None] * V.values
    div = lat.d(flux[..., 0], 0) + lat.d(flux[..., 1], 1)
    return GridField(div / w, lat)


def laplace_beltrami(u: GridField, g: GridField) -> GridField:
    return surface_divergence(surface_gradient(u, g), g)


def induced_christoffels(g: GridField) -> GridField:
    """Gamma[..., k, i, j] = Gamma^k_{ij} from central differences of g."""
    if g.rank != 2:
        raise GridMismatchError("metric must be a (2, 2) tensor field")
    G = g.values
    valid = g.mask
    det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
    if np.any(~((G[..., 0, 0] > 0) & (det > 0))[valid]):
        raise ValueError("metric is not positive definite at some node")
    lat = g.lattice
    dg = np.stack([lat.d(G, 0), lat.d(G, 1)], axis=-3)  # dg[..., l, i, j] = d_l g_ij
    # first kind: [ij, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (np.einsum("...ijl->...ijl", dg)
                   + np.einsum("...jil->...ijl", dg)
                   - np.einsum("...lij->...ijl", dg))
    gam = np.einsum("...kl,...ijl->...kij", _inv(G), first)
    return GridField(gam, lat)


def covariant_derivative_A(A: GridField, gamma: GridField, g: GridField):
    """Return (nabla A, |nabla A|^2).

    ``nablaA[..., i, k, j] = (nabla_i A)^k_j = d_i A^k_j + Gamma^k_{ip} A^p_j - Gamma^p_{ij} A^k_p``.
    """
    _check(A, g, 2)
    lat = A.lattice
    dA = np.stack([lat.d(A.values, 0), lat.d(A.values, 1)], axis=-3)
    gam = gamma.values
    nab = (dA
           + np.einsum("...kip,...pj->...ikj", gam, A.values)
           - np.einsum("...pij,...kp->...ikj", gam, A.values))
    gi = _inv(g.values)
    norm2 = np.einsum("...ia,...kb,...jc,...ikj,...abc->...",
                      gi, g.values, gi, nab, nab)
    return GridField(nab, lat), GridField(norm2, lat)


def integrate(u: GridField, g: GridField, allow_masked: bool = False) -> float:
    """Rectangle rule with the sqrt(det g) weight.

    On a doubly periodic lattice this is the trapezoid rule of a closed
    surface.  Other lattices need ``allow_masked=True``; the integral then
    covers valid nodes only.
    """
    _check(u, g, 0)
    lat = u.lattice
    w = u.values * _sqrt_det(g.values)
    ok = np.isfinite(w)
    if not allow_masked:
        if not all(lat.periodic):
            raise ValueError("integral over a non-closed chart requires allow_masked=True")
        if not np.all(ok):
            raise ValueError("masked nodes present; pass allow_masked=True")
    return math.fsum(w[ok].ravel().tolist()) * lat.hs * lat.ht


def vector_norm(v: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.sqrt(np.abs(np.einsum("...i,...ij,...j->...", v, g, v)))


def tensor_norm(T: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g-contracted Frobenius norm of a (1,1) tensor T[..., k, j]."""
    gi = _inv(g)
    return np.sqrt(np.abs(np.einsum("...kl,...ji,...kj,...li->...", g, gi, T, T)))


@dataclass
class ResidualReport:
    """Residual statistics of one identity across a refinement sequence."""

    identity: str
    surface: str
    resolutions: List[int] = field(default_factory=list)
    spacings: List[float] = field(default_factory=list)
    max_abs: List[float] = field(default_factory=list)
    mean_abs: List[float] = field(default_factory=list)

    def add(self, n: int, h: float, residual: np.ndarray):
        r = np.asarray(residual, dtype=float)
        r = np.abs(r[np.isfinite(r)])
        if r.size == 0:
            raise ValueError(f"{self.identity}: no valid nodes at N={n}")
        if self.resolutions and n <= self.resolutions[-1]:
            raise ValueError("resolutions must be strictly increasing")
        self.resolutions.append(int(n))
        self.spacings.append(float(h))
        self.max_abs.append(float(np.max(r)))
        self.mean_abs.append(math.fsum(r.ravel().tolist()) / r.size)

    @property
    def orders(self) -> List[Optional[float]]:
        """Observed orders log(r_k / r_{k+1}) / log(h_k / h_{k+1}) per refinement step."""
        out = []
        for k in range(len(self.max_abs) - 1):
            r0, r1 = self.max_abs[k], self.max_abs[k + 1]
            if r0 <= 0 or r1 <= 0:
                out.append(None)
            else:
                out.append(math.log(r0 / r1) / math.log(self.spacings[k] / self.spacings[k + 1]))
        return out

    @property
    def order(self) -> Optional[float]:
        """Finest observed order; reported only with three or more resolutions."""
        if len(self.resolutions) < 3:
            return None
        return self.orders[-1]

    def rows(self) -> List[Tuple[str, int, float, float, Optional[float]]]:
        orders = [None] + self.orders
        if len(self.resolutions) < 3:
            orders = [None] * len(self.resolutions)
        return [(self.identity, n, mx, mn, o)
                for n, mx, mn, o in zip(self.resolutions, self.max_abs, self.mean_abs, orders)]
