"""Acceptance criteria 1-10, one test each.

Every test prints a single ``[PASS]`` / ``[FAIL]`` line (visible even when
pytest captures output) and then asserts the same condition.

    pytest tests/test_acceptance.py -v
"""

import time

import numpy as np
import pytest

from solgeo import ambient, catalog, gapscan
from solgeo.ambient import E1, E2, E3
from solgeo.immersion import sample
from solgeo.simons import (
    IdentityFields,
    IdentityId,
    commutator_trace,
    consistency_delta_combination,
    identity_residual,
    residual_suite,
)
from solgeo.surfcalc import integrate

CATALOG = sorted(catalog.CATALOG)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail
    return emit


def test_criterion_01_sectional_curvatures(verdict):
    t0 = time.perf_counter()
    got = [float(ambient.sectional_curvature(u, v)) for u, v in ((E1, E3), (E2, E3), (E1, E2))]
    err = max(abs(a - b) for a, b in zip(got, (-1.0, -1.0, 1.0)))
    dt = time.perf_counter() - t0
    verdict(1, err <= 1e-10 and dt < 1.0,
            f"sec(E1,E3), sec(E2,E3), sec(E1,E2) = {got}, max err {err:.1e}, {dt:.3f}s")


def test_criterion_02_vertical_leaf(verdict):
    t0 = time.perf_counter()
    worst_h, worst_K = 0.0, 0.0
    for c in (0.0, 0.7, -1.3):
        d = sample(catalog.leaf_x(c=c), 64).data
        worst_h = max(worst_h, float(np.max(np.abs(d.h))))
        worst_K = max(worst_K, float(np.max(np.abs(d.K + 1))))
    dt = time.perf_counter() - t0
    verdict(2, worst_h <= 1e-8 and worst_K <= 1e-6 and dt < 5.0,
            f"leaf x=c on 64^2: max|h| = {worst_h:.1e}, max|K+1| = {worst_K:.1e}, {dt:.2f}s")


def test_criterion_03_horizontal_leaf(verdict):
    t0 = time.perf_counter()
    grid = sample(catalog.leaf_z(c=0.4), 64)
    d = grid.data
    nab2 = IdentityFields(grid).nablaA2
    f = float(np.max(np.abs(d.f)))
    K = float(np.max(np.abs(d.K)))
    S = float(np.max(np.abs(d.normA2 - 2)))
    N = float(np.nanmax(np.abs(nab2)))
    dt = time.perf_counter() - t0
    ok = f <= 1e-8 and K <= 1e-6 and S <= 1e-6 and N <= 1e-6 and dt < 5.0
    verdict(3, ok, f"leaf z=c: |f| {f:.1e}, |K| {K:.1e}, ||A|^2-2| {S:.1e}, |nabla A|^2 {N:.1e}, {dt:.2f}s")


def test_criterion_04_vertical_geodesics(verdict):
    worst = 0.0
    for p in ((0, 0, 0), (1.5, -0.7, 0.3)):
        path = ambient.geodesic_flow(p, [0, 0, 1], T=10.0, dt=1e-3)
        worst = max(worst, float(np.max(np.abs(path.points[:, :2] - np.asarray(p[:2], float)))))
    verdict(4, worst <= 1e-8, f"vertical geodesic x,y drift over t in [0,10], dt=1e-3: {worst:.1e}")


SUITE = [IdentityId.DELTA2, IdentityId.DELTA3, IdentityId.DELTA_ANGLE, IdentityId.DELTA_A_ANGLE,
         IdentityId.CODAZZI, IdentityId.TRACE_NABLA_A, IdentityId.NABLA_E3, IdentityId.GRAD_ANGLE,
         IdentityId.LEMMA_DIVF, IdentityId.LEMMA_DIVA]


def test_criterion_05_identity_suite(verdict):
    t0 = time.perf_counter()
    bad, lines = [], []
    for chart in (catalog.graph(eps=0.1), catalog.torus(R=2.0, r=0.5)):
        reps = residual_suite(chart, SUITE, [32, 64, 128])
        for ident, rep in reps.items():
            o = rep.order
            lines.append(f"{chart.name}:{ident.value}={o:.2f}")
            if o is None or not 1.5 <= o <= 2.5:
                bad.append(lines[-1])
    dt = time.perf_counter() - t0
    orders = [float(s.rsplit("=", 1)[1]) for s in lines]
    verdict(5, not bad and dt < 120.0,
            f"20 identity/surface pairs, orders in [{min(orders):.2f}, {max(orders):.2f}], "
            f"out of range: {bad or 'none'}, {dt:.1f}s")


def test_criterion_06_cmc_identity_on_leaves(verdict):
    worst = {}
    for name in ("leaf_x", "leaf_y", "leaf_z"):
        worst[name] = identity_residual(IdentityId.DELTA_CMC, catalog.make(name), 64).max_abs[0]
    verdict(6, max(worst.values()) <= 1e-8,
            "DELTA_CMC at N=64: " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))


def test_criterion_07_algebraic_identities(verdict):
    remark = comb = frames = 0.0
    rng = np.random.default_rng(2024)
    for name in CATALOG:
        chart = catalog.make(name)
        for n in (32, 64, 128):
            grid = sample(chart, n)
            F = IdentityFields(grid)
            remark = max(remark, float(np.nanmax(F.residual(IdentityId.REMARK))))
            d = grid.data
            th1, th2 = rng.uniform(0, 2 * np.pi, (2,) + d.f.shape)
            diff = commutator_trace(d, d.K, th1) - commutator_trace(d, d.K, th2)
            frames = max(frames, float(np.nanmax(np.abs(diff))))
        comb = max(comb, max(consistency_delta_combination(chart, [32, 64, 128]).max_abs))
    ok = remark <= 1e-10 and comb <= 1e-10 and frames <= 1e-12
    verdict(7, ok, f"all catalog surfaces, N=32/64/128: REMARK {remark:.1e}, "
                   f"combination {comb:.1e}, two-frame difference {frames:.1e}")


def test_criterion_08_quartic_identity(verdict):
    rng = np.random.default_rng(8)
    n = 10_000
    f = rng.uniform(-3, 3, n)
    S = 2 * f**2 + rng.uniform(0, 12, n)
    c3 = rng.uniform(-1, 1, n)
    K = 2 * c3**2 - 1 + 2 * f**2 - 0.5 * S

    class Point:
        pass

    d = Point()
    d.f, d.normA2, d.K = f, S, K
    d.c = np.stack([np.zeros(n), np.zeros(n), c3], -1)
    res = float(np.max(np.abs(gapscan.E_term(d) - 0.5 * gapscan.thm43_quartic(K, S, f))))
    flagged = "8" in gapscan.scan(catalog.torus(), 16).flags.get("quartic_factor", "")
    verdict(8, res <= 1e-10 and flagged,
            f"E - quartic/2 over 1e4 tuples: {res:.1e}; factor-8 flag in report: {flagged}")


def test_criterion_09_branch_solutions(verdict):
    rng = np.random.default_rng(9)
    f = rng.uniform(2.0 ** 0.25, 3.0, 1000) * rng.choice([-1.0, 1.0], 1000)
    worst = 0.0
    for fi in f:
        for S, K in gapscan.thm42_branch_solutions(fi):
            f2 = fi * fi
            worst = max(worst, abs((4 * f2 - S) * (S - 2 * f2) - 2), abs(2 * K - (4 * f2 - S)))
    below = rng.uniform(0, 2.0 ** 0.25 * (1 - 1e-9), 1000)
    none_ok = all(gapscan.thm42_branch_solutions(x) is None for x in below)
    verdict(9, worst <= 1e-12 and none_ok,
            f"1e3 random f with f^4 >= 2: max residual {worst:.1e}; no-solution below threshold: {none_ok}")


def test_criterion_10_torus_integrals(verdict):
    rep = gapscan.scan(catalog.torus(R=2.0, r=0.5), 128)
    lap = abs(rep.integrals["laplacian_normA2"])
    div = abs(rep.integrals["div_A_grad_f"])
    tol = 1e-6 * rep.area
    verdict(10, lap <= tol and div <= tol,
            f"torus N=128: |int Lap|A|^2| {lap:.1e}, |int div(A grad f)| {div:.1e}, tol {tol:.1e}")
