import math

import numpy as np
import pytest

from solgeo import catalog
from solgeo.ambient import E1, E2, E3
from solgeo.immersion import (
    Chart,
    DegeneratePointError,
    Jet2,
    evaluate_point,
    gaussian_curvature_extrinsic,
    gaussian_curvature_gauss_equation,
    gaussian_curvature_intrinsic,
    sample,
)

ALL = sorted(catalog.CATALOG)


def test_leaf_x_is_totally_geodesic_hyperbolic():
    d = evaluate_point(catalog.leaf_x(), 0.2, -0.4)
    assert np.array_equal(d.A, np.zeros((2, 2)))
    assert d.f == 0.0
    assert d.K == -1.0
    assert np.array_equal(d.xi, E1)


def test_leaf_y_normal():
    d = evaluate_point(catalog.leaf_y(c=0.5), 0.1, 0.3)
    assert np.array_equal(d.xi, -E2)
    assert np.max(np.abs(d.A)) == 0.0
    assert gaussian_curvature_extrinsic(d) == -1.0


def test_leaf_z_flat_minimal():
    d = evaluate_point(catalog.leaf_z(), 0.3, 0.7)
    assert np.array_equal(d.xi, E3)
    assert d.f == 0.0
    assert d.normA2 == pytest.approx(2.0, abs=1e-14)
    assert d.K == pytest.approx(0.0, abs=1e-14)
    # principal curvatures -1 along E1, +1 along E2 (flat chart axes)
    assert np.allclose(d.A, np.diag([-1.0, 1.0]), atol=1e-15)


@pytest.mark.parametrize("name", ALL)
def test_orientation_flip(name):
    grid = sample(catalog.make(name), 16)
    d, e = grid.data, grid.data.flipped()
    assert np.allclose(e.A, -d.A, equal_nan=True)
    assert np.allclose(e.f, -d.f, equal_nan=True)
    assert np.array_equal(e.normA2, d.normA2, equal_nan=True)
    assert np.allclose(gaussian_curvature_extrinsic(e), gaussian_curvature_extrinsic(d),
                       atol=1e-13, equal_nan=True)


@pytest.mark.parametrize("name", ALL)
def test_frame_decomposition_invariants(name):
    d = sample(catalog.make(name), 33).data
    ok = np.isfinite(d.f)
    c = d.c[ok]
    assert np.max(np.abs(np.sum(c**2, -1) - 1)) <= 1e-12
    T = d.Etop[ok]
    g = d.g[ok]
    gram = np.einsum("nki,nij,nlj->nkl", T, g, T)
    target = np.eye(3) - np.einsum("nk,nl->nkl", c, c)
    assert np.max(np.abs(gram - target)) <= 1e-12
    h = d.h[ok]
    assert np.max(np.abs(h - np.swapaxes(h, -1, -2))) <= 1e-12
    assert np.all(np.linalg.eigvalsh(g) > 0)


@pytest.mark.parametrize("name", ALL)
def test_mean_curvature_and_norm(name):
    d = sample(catalog.make(name), 24).data
    ok = np.isfinite(d.f)
    A = d.A[ok]
    assert np.allclose(d.f[ok], 0.5 * np.trace(A, axis1=-2, axis2=-1), atol=1e-13)
    assert np.allclose(d.normA2[ok], np.einsum("nkj,njk->n", A, A), atol=1e-12)


@pytest.mark.parametrize("name", ALL)
def test_gauss_equation_matches_closed_form(name):
    d = sample(catalog.make(name), 24).data
    ok = np.isfinite(d.f)
    direct = gaussian_curvature_gauss_equation(d)[ok]
    assert np.max(np.abs(direct - d.K[ok])) <= 1e-10 * max(1.0, np.max(np.abs(d.K[ok])))


def _intrinsic_error(chart, n, region=None):
    grid = sample(chart, n)
    err = np.abs(gaussian_curvature_intrinsic(grid, n).values - grid.data.K)
    if region is not None:
        err = err[region(*grid.lattice.mesh())]
    return float(np.nanmax(err))


@pytest.mark.parametrize("name", ["graph", "torus", "leaf_x", "leaf_y"])
def test_intrinsic_extrinsic_order_two(name):
    chart = catalog.make(name)
    e = [_intrinsic_error(chart, n) for n in (32, 64, 128)]
    order = math.log2(e[1] / e[2])
    assert 1.8 <= order <= 2.2


def test_intrinsic_extrinsic_sphere_fixed_band():
    # the excluded pole band scales with h, so only a fixed latitude band converges
    band = lambda s, t: (s >= math.pi / 4) & (s <= 3 * math.pi / 4)
    chart = catalog.sphere()
    e = [_intrinsic_error(chart, n, band) for n in (32, 64, 128)]
    assert 1.8 <= math.log2(e[1] / e[2]) <= 2.2


def test_intrinsic_leaf_z_zero():
    K = gaussian_curvature_intrinsic(catalog.leaf_z(), 32).values
    assert np.nanmax(np.abs(K)) <= 1e-8
    assert np.all(np.isnan(K[0])) and np.all(np.isnan(K[:, -1]))


def test_intrinsic_leaf_x_hyperbolic():
    K = gaussian_curvature_intrinsic(catalog.leaf_x(), 64).values
    assert np.nanmax(np.abs(K + 1)) <= 5e-3


def test_periodic_edges_match():
    # graph edges differ by an x/y translation, an isometry: compare the geometry
    for name in ("graph", "torus"):
        ch = catalog.make(name)
        s0, s1, t0, t1 = ch.domain
        for (a, b) in (((s0, 0.4), (s1, 0.4)), ((0.7, t0), (0.7, t1))):
            da, db = evaluate_point(ch, *a), evaluate_point(ch, *b)
            for key in ("g", "A", "c", "K"):
                assert np.allclose(getattr(da, key), getattr(db, key), atol=1e-12)


def _cone_chart():
    def ev(s, t):
        z0 = np.zeros(np.broadcast(s, t).shape)
        v = lambda *c: np.stack(np.broadcast_arrays(*c), -1)
        return Jet2(v(s * t, s, z0), v(t, 1 + z0, z0), v(s, z0, z0),
                    v(z0, z0, z0), v(1 + z0, z0, z0), v(z0, z0, z0))
    return Chart("degenerate", (-1, 1, -1, 1), (False, False), ev)


def test_degenerate_point_error():
    ch = _cone_chart()
    # phi_s = (t, 1, 0), phi_t = (s, 0, 0): rank 1 where s = 0
    with pytest.raises(DegeneratePointError):
        evaluate_point(ch, 0.0, 0.5)
    evaluate_point(ch, 0.5, 0.5)
    with pytest.raises(DegeneratePointError):
        sample(ch, 21)


def test_non_finite_parameters_rejected():
    with pytest.raises(ValueError):
        evaluate_point(catalog.graph(), np.nan, 0.0)


def test_sphere_pole_band_masked():
    grid = sample(catalog.sphere(), 32)
    h = grid.lattice.hs
    s = grid.lattice.axis_nodes(0)
    masked_rows = ~grid.mask.any(axis=1)
    assert np.array_equal(masked_rows, (s <= 2 * h + 1e-12) | (s >= math.pi - 2 * h - 1e-12))
    assert np.all(np.isnan(grid.data.K[masked_rows]))


def test_torus_rejects_bad_radii():
    with pytest.raises(ValueError):
        catalog.torus(R=1.0, r=1.5)
    with pytest.raises(KeyError):
        catalog.make("klein_bottle")
