"""Closed catalog of test surfaces with analytic 2-jets.

Normal orientation is always xi = (phi_s x phi_t)/|phi_s x phi_t| taken in
frame components.  Resulting signs:

==========  ====================================================
leaf_x      xi = +E1, A = 0
leaf_y      xi = -E2, A = 0
leaf_z      xi = +E3, principal curvatures -1 (along E1), +1 (along E2)
graph       xi has positive E3 component
torus       xi points out of the tube (s = longitude, t = meridian)
sphere      xi points outward (s = polar angle, t = azimuth)
==========  ====================================================
"""

from __future__ import annotations

import math
from typing import Callable, Dict

import numpy as np

from .immersion import Chart, Jet2

__all__ = ["leaf_x", "leaf_y", "leaf_z", "graph", "torus", "sphere", "CATALOG", "make"]

TWO_PI = 2.0 * math.pi
LEAF_DOMAIN = (-1.0, 1.0, -1.0, 1.0)


def _vec(*comps):
    comps = np.broadcast_arrays(*comps)
    return np.stack(comps, axis=-1)


def _zeros(s, t):
    return np.zeros(np.broadcast(s, t).shape)


def leaf_x(c: float = 0.0, domain=LEAF_DOMAIN) -> Chart:
    """{x = c}: (s, t) -> (c, s, t)."""

    def ev(s, t):
        z0 = _zeros(s, t)
        return Jet2(_vec(z0 + c, z0 + s, z0 + t), _vec(z0, z0 + 1, z0), _vec(z0, z0, z0 + 1),
                    _vec(z0, z0, z0), _vec(z0, z0, z0), _vec(z0, z0, z0))

    return Chart("leaf_x", tuple(domain), (False, False), ev, cmc=True,
                 orientation="xi = +E1", params={"c": c})


def leaf_y(c: float = 0.0, domain=LEAF_DOMAIN) -> Chart:
    """{y = c}: (s, t) -> (s, c, t)."""

    def ev(s, t):
        z0 = _zeros(s, t)
        return Jet2(_vec(z0 + s, z0 + c, z0 + t), _vec(z0 + 1, z0, z0), _vec(z0, z0, z0 + 1),
                    _vec(z0, z0, z0), _vec(z0, z0, z0), _vec(z0, z0, z0))

    return Chart("leaf_y", tuple(domain), (False, False), ev, cmc=True,
                 orientation="xi = -E2", params={"c": c})


def leaf_z(c: float = 0.0, domain=LEAF_DOMAIN) -> Chart:
    """{z = c}: (s, t) -> (s, t, c)."""

    def ev(s, t):
        z0 = _zeros(s, t)
        return Jet2(_vec(z0 + s, z0 + t, z0 + c), _vec(z0 + 1, z0, z0), _vec(z0, z0 + 1, z0),
                    _vec(z0, z0, z0), _vec(z0, z0, z0), _vec(z0, z0, z0))

    return Chart("leaf_z", tuple(domain), (False, False), ev, cmc=True,
                 orientation="xi = +E3", params={"c": c})


def graph(eps: float = 0.1) -> Chart:
    """z = eps sin(s) sin(t) over the doubly periodic square [0, 2pi]^2.

    Translations in x and y are isometries of Sol3, so the chart closes up
    into a torus in the quotient and integrals over it are meaningful.
    """

    def ev(s, t):
        z0 = _zeros(s, t)
        ss, cs, st, ct = np.sin(s), np.cos(s), np.sin(t), np.cos(t)
        return Jet2(
            _vec(z0 + s, z0 + t, eps * ss * st),
            _vec(z0 + 1, z0, eps * cs * st),
            _vec(z0, z0 + 1, eps * ss * ct),
            _vec(z0, z0, -eps * ss * st),
            _vec(z0, z0, eps * cs * ct),
            _vec(z0, z0, -eps * ss * st),
        )

    return Chart("graph", (0.0, TWO_PI, 0.0, TWO_PI), (True, True), ev,
                 orientation="xi . E3 > 0", params={"eps": eps})


def torus(R: float = 2.0, r: float = 0.5) -> Chart:
    """Coordinate torus ((R + r cos t) cos s, (R + r cos t) sin s, r sin t)."""
    if not 0 < r < R:
        raise ValueError(f"torus needs 0 < r < R, got r={r}, R={R}")

    def ev(s, t):
        cs, ss, ct, st = np.cos(s), np.sin(s), np.cos(t), np.sin(t)
        rho = R + r * ct
        z0 = np.zeros_like(rho * cs)
        return Jet2(
            _vec(rho * cs, rho * ss, z0 + r * st),
            _vec(-rho * ss, rho * cs, z0),
            _vec(-r * st * cs, -r * st * ss, r * ct),
            _vec(-rho * cs, -rho * ss, z0),
            _vec(r * st * ss, -r * st * cs, z0),
            _vec(-r * ct * cs, -r * ct * ss, -r * st),
        )

    return Chart("torus", (0.0, TWO_PI, 0.0, TWO_PI), (True, True), ev,
                 orientation="xi points out of the tube", params={"R": R, "r": r})


def sphere(rho: float = 1.0) -> Chart:
    """Coordinate sphere of radius rho; nodes within 2h of a pole are excluded."""
    if rho <= 0:
        raise ValueError("sphere radius must be positive")

    def ev(s, t):
        cs, ss, ct, st = np.cos(s), np.sin(s), np.cos(t), np.sin(t)
        return Jet2(
            rho * _vec(ss * ct, ss * st, cs),
            rho * _vec(cs * ct, cs * st, -ss),
            rho * _vec(-ss * st, ss * ct, 0 * cs),
            rho * _vec(-ss * ct, -ss * st, -cs),
            rho * _vec(-cs * st, cs * ct, 0 * cs),
            rho * _vec(-ss * ct, -ss * st, 0 * cs),
        )

    def poles(s, t, hs, ht):
        return (s <= 2 * hs + 1e-12) | (s >= math.pi - 2 * hs - 1e-12)

    return Chart("sphere", (0.0, math.pi, 0.0, TWO_PI), (False, True), ev,
                 orientation="xi points outward", params={"rho": rho}, exclude=poles)


CATALOG: Dict[str, Callable[..., Chart]] = {
    "leaf_x": leaf_x,
    "leaf_y": leaf_y,
    "leaf_z": leaf_z,
    "graph": graph,
    "torus": torus,
    "sphere": sphere,
}

PARAMS = {
    "leaf_x": ("c",),
    "leaf_y": ("c",),
    "leaf_z": ("c",),
    "graph": ("eps",),
    "torus": ("R", "r"),
    "sphere": ("rho",),
}


def make(name: str, **params) -> Chart:
    """Build a catalog chart, ignoring parameters that do not apply to it."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown surface {name!r}; choose from {sorted(CATALOG)}") from None
    kw = {k: v for k, v in params.items() if k in PARAMS[name] and v is not None}
    return factory(**kw)
