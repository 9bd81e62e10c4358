"""Closed-form geometry of Sol3 = (R^3, e^{2z}dx^2 + e^{-2z}dy^2 + dz^2).

Vectors are carried in components of the left-invariant orthonormal frame

    E1 = e^{-z} d/dx,   E2 = e^{z} d/dy,   E3 = d/dz,

so inner products are plain dot products.  Coordinate components only appear
at the boundary (charts, geodesic integration) and are converted with
:func:`to_frame` / :func:`to_coords`.

Every function accepts arrays with the 3-component axis last and broadcasts
over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "AmbientPoint",
    "AmbientVector",
    "CoordinateVector",
    "CONNECTION",
    "E1",
    "E2",
    "E3",
    "DegeneratePlaneError",
    "metric",
    "frame_scale",
    "to_frame",
    "to_coords",
    "inner",
    "ambient_covariant_derivative",
    "curvature_tensor",
    "sectional_curvature",
    "christoffel_coords",
    "geodesic_flow",
    "GeodesicPath",
]

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

# CONNECTION[i, k] = frame components of nabla_{E_i} E_k.
CONNECTION = np.zeros((3, 3, 3))
CONNECTION[0, 0] = -E3
CONNECTION[0, 2] = E1
CONNECTION[1, 1] = E3
CONNECTION[1, 2] = -E2

GRAM_TOL = 1e-12


class DegeneratePlaneError(ValueError):
    """Two vectors do not span a plane."""


@dataclass(frozen=True)
class AmbientPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.x, self.y, self.z])):
            raise ValueError(f"non-finite point {self}")

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype)


@dataclass(frozen=True)
class AmbientVector:
    """Components (a1, a2, a3) in the canonical frame at some base point."""

    a1: float
    a2: float
    a3: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.a1, self.a2, self.a3], dtype=dtype)

    @property
    def norm2(self) -> float:
        return self.a1**2 + self.a2**2 + self.a3**2


@dataclass(frozen=True)
class CoordinateVector:
    """Components (vx, vy, vz) in the coordinate basis d/dx, d/dy, d/dz."""

    vx: float
    vy: float
    vz: float

    def __array__(self, dtype=None, copy=None):
        return np.array([self.vx, self.vy, self.vz], dtype=dtype)


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError("non-finite input")


def _z(p) -> np.ndarray:
    return np.asarray(p, dtype=float)[..., 2]


def frame_scale(z) -> np.ndarray:
    """Diagonal of the coordinate-to-frame map, shape (..., 3)."""
    z = np.asarray(z, dtype=float)
    return np.stack([np.exp(z), np.exp(-z), np.ones_like(z)], axis=-1)


def metric(p, u, v) -> np.ndarray:
    """Sol3 inner product of two coordinate vectors based at ``p``."""
    p, u, v = (np.asarray(a, dtype=float) for a in (p, u, v))
    _finite(p, u, v)
    w = frame_scale(p[..., 2]) ** 2
    return np.sum(w * u * v, axis=-1)


def to_frame(p, v) -> np.ndarray:
    """Coordinate components at ``p`` -> canonical-frame components."""
    p, v = np.asarray(p, dtype=float), np.asarray(v, dtype=float)
    _finite(p, v)
    return frame_scale(_z(p)) * v


def to_coords(p, a) -> np.ndarray:
    """Inverse of :func:`to_frame`."""
    p, a = np.asarray(p, dtype=float), np.asarray(a, dtype=float)
    _finite(p, a)
    return a / frame_scale(_z(p))


def inner(u, v) -> np.ndarray:
    return np.sum(np.asarray(u) * np.asarray(v), axis=-1)


def ambient_covariant_derivative(u, v, dv) -> np.ndarray:
    """nabla_u V for a field V with frame components ``v`` at the base point.

    ``dv`` holds the directional derivatives u(V^k) of those components.
    """
    u, v, dv = (np.asarray(a, dtype=float) for a in (u, v, dv))
    return dv + np.einsum("...i,...k,ikm->...m", u, v, CONNECTION)


def curvature_tensor(X, Y, Z) -> np.ndarray:
    """R(X,Y)Z with the convention R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]."""
    X, Y, Z = (np.asarray(a, dtype=float) for a in (X, Y, Z))
    xz, yz = inner(X, Z)[..., None], inner(Y, Z)[..., None]
    x3, y3, z3 = X[..., 2:3], Y[..., 2:3], Z[..., 2:3]
    out = yz * X - xz * Y + 2.0 * z3 * (x3 * Y - y3 * X)
    out = out + 2.0 * (xz * y3 - yz * x3) * E3
    return out


def sectional_curvature(u, v) -> np.ndarray:
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    gram = inner(u, u) * inner(v, v) - inner(u, v) ** 2
    if np.any(gram < GRAM_TOL):
        raise DegeneratePlaneError(f"Gram determinant {np.min(gram):.3e} below {GRAM_TOL}")
    return inner(curvature_tensor(u, v, v), u) / gram


def christoffel_coords(p) -> np.ndarray:
    """Coordinate Christoffel symbols G[k, i, j] = Gamma^k_{ij} at ``p``.

    Obtained from the frame connection by writing E_i in coordinates:
    Gamma^x_{xz} = 1, Gamma^y_{yz} = -1, Gamma^z_{xx} = -e^{2z}, Gamma^z_{yy} = e^{-2z}.
    """
    z = float(np.asarray(p, dtype=float)[2])
    G = np.zeros((3, 3, 3))
    G[0, 0, 2] = G[0, 2, 0] = 1.0
    G[1, 1, 2] = G[1, 2, 1] = -1.0
    G[2, 0, 0] = -np.exp(2 * z)
    G[2, 1, 1] = np.exp(-2 * z)
    return G


def _geodesic_rhs(state: np.ndarray) -> np.ndarray:
    z = state[2]
    vx, vy, vz = state[3:]
    return np.array([
        vx,
        vy,
        vz,
        -2.0 * vx * vz,
        2.0 * vy * vz,
        np.exp(2 * z) * vx**2 - np.exp(-2 * z) * vy**2,
    ])


class GeodesicPath(NamedTuple):
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray

    @property
    def speeds(self) -> np.ndarray:
        return np.sqrt(metric(self.points, self.velocities, self.velocities))


def geodesic_flow(p, v, T: float, dt: float) -> GeodesicPath:
    """Integrate the geodesic through ``p`` with coordinate velocity ``v``.

    Classical fixed-step RK4; the step is shrunk slightly so that an integer
    number of steps lands exactly on ``T``.
    """
    p, v = np.asarray(p, dtype=float), np.asarray(v, dtype=float)
    _finite(p, v)
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    if dt > T:
        raise ValueError(f"dt={dt} exceeds T={T}")
    n = int(np.ceil(T / dt - 1e-9))
    h = T / n
    states = np.empty((n + 1, 6))
    states[0] = np.concatenate([p, v])
    y = states[0]
    for i in range(n):
        k1 = _geodesic_rhs(y)
        k2 = _geodesic_rhs(y + 0.5 * h * k1)
        k3 = _geodesic_rhs(y + 0.5 * h * k2)
        k4 = _geodesic_rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i + 1] = y
    times = np.linspace(0.0, T, n + 1)
    return GeodesicPath(times, states[:, :3], states[:, 3:])
