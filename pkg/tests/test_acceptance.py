"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines.
"""
import math
import time

import numpy as np
from shapely.geometry import Polygon as ShapelyPolygon

from spectral_bounds import bounds as B
from spectral_bounds.bessel import bessel_zero
from spectral_bounds.fem import fem_spectrum
from spectral_bounds.geometry import summarize, tube_volume, tube_volume_mc
from spectral_bounds.riesz import legendre_identity_check
from spectral_bounds.spectra import analytic_spectrum
from spectral_bounds.verify import TightFrameFamily, asymptotic_fit, avp_finite_check, verify_domain

from conftest import ANNULUS, DISK, SQUARE, SUITE_DOMAINS, random_star_polygon, spectrum


def verdict(number, name, ok, elapsed, limit, detail=""):
    ok = ok and elapsed < limit
    print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {name}: {detail} ({elapsed:.2f}s, limit {limit}s)")
    return ok


def test_criterion_1_slab_identity():
    t0 = time.perf_counter()
    # cross-section (0, 1): lambda_1 = pi^2, length 1, two boundary points; kappa -> 0
    lhs, rhs = B.slab_limit(2, math.pi**2, 1.0, 2.0, 0.0)
    ok = abs(lhs - math.pi**2) <= 1e-12 and abs(rhs - 16.0) <= 1e-12 and lhs <= rhs
    assert verdict(1, "slab limit reads pi^2 <= 16", ok, time.perf_counter() - t0, 1.0,
                   f"lhs={lhs!r}, rhs={rhs!r}")


def test_criterion_2_constant_bracket():
    t0 = time.perf_counter()
    lo, hi = 3 / math.sqrt(2), 4 / math.sqrt(math.pi)
    ok, worst = True, []
    for f in (B.second_term_ratio, B.convex_riesz_ratio):
        vals = [f(d) for d in range(2, 51)]
        ok &= all(lo - 5e-4 <= v <= hi + 5e-4 for v in vals)
        ok &= all(b >= a for a, b in zip(vals, vals[1:]))
        worst.append(f"{f.__name__}: {vals[0]:.6f}..{vals[-1]:.6f}")
    assert verdict(2, "ratios in [3/sqrt2, 4/sqrtpi], nondecreasing", ok, time.perf_counter() - t0, 1.0,
                   "; ".join(worst))


def test_criterion_3_sign_suite():
    t0 = time.perf_counter()
    failures, inconclusive, passed_ids = [], 0, set()
    for name, dom in SUITE_DOMAINS.items():
        for bc in ("dirichlet", "neumann"):
            spec = spectrum(name, bc, 500)
            rep = verify_domain(dom, bc, spectrum=spec)
            failures += [(name, bc, r.theorem_id, r.query, r.margin) for r in rep.failures()]
            inconclusive += rep.summary["inconclusive"]
            passed_ids |= {r.theorem_id for r in rep.records if r.passed}
    required = {"thm2.1", "thm2.4", "thm2.5", "thm2.7", "thm2.9", "cor2.10", "thm2.11(i)", "thm2.11(iii)",
                "thm2.11(iv)", "thm3.1", "thm3.2", "thm3.3", "cor2.2", "cor2.3", "cor2.8", "appA.1", "appA.2"}
    missing = required - passed_ids
    ok = not failures and not missing and inconclusive == 0
    assert verdict(3, "every applicable bound holds on analytic spectra", ok, time.perf_counter() - t0, 60.0,
                   f"{len(failures)} failures, {inconclusive} inconclusive, unexercised={sorted(missing)}"), failures[:5]


def test_criterion_4_tube_oracles():
    t0 = time.perf_counter()
    errs = []
    for h in np.linspace(0.01, 0.5, 25):
        errs.append(abs(tube_volume(SQUARE, h) - (4 * h - 4 * h * h)))
        # disk and annulus by direct area difference of concentric disks
        errs.append(abs(tube_volume(DISK, h) - math.pi * (1 - (1 - h) ** 2)))
        errs.append(abs(tube_volume(ANNULUS, h) - math.pi * ((4 - (2 - h) ** 2) + ((1 + h) ** 2 - 1))))
    exact_ok = max(errs) <= 1e-13
    rng = np.random.default_rng(2024)
    mc_ok, shapely_ok, worst_sigma = True, True, 0.0
    for seed in range(20):
        poly = random_star_polygon(rng)
        g = summarize(poly)
        h = 0.5 * g.max_tube_radius
        closed = tube_volume(poly, h, summary=g)
        sp = ShapelyPolygon(poly.vertices)
        direct = sp.area - sp.buffer(-h, quad_segs=256).area
        shapely_ok &= abs(closed - direct) <= 1e-5 * closed
        mc = tube_volume_mc(poly, h, seed=seed)
        sigma = abs(closed - mc.value) / mc.stderr
        worst_sigma = max(worst_sigma, sigma)
        mc_ok &= sigma <= 3.0
    ok = exact_ok and mc_ok and shapely_ok
    assert verdict(4, "tube formulas vs direct geometry and Monte Carlo", ok, time.perf_counter() - t0, 30.0,
                   f"max exact error {max(errs):.1e}, worst MC deviation {worst_sigma:.2f} sigma")


def test_criterion_5_remainder_limits():
    t0 = time.perf_counter()
    gd, gs = summarize(DISK), summarize(SQUARE)
    fi = asymptotic_fit("thm2.11(i)", gd, (1e2, 1e6))
    fiv = asymptotic_fit("thm2.11(iv)", gs, (1e2, 1e6))
    lim = B.c2_remainder_limit(2, gd.volume, gd.boundary_measure, gd.curvature_integrals)
    ok = (abs(fi.estimate - 6) <= 1e-3 and abs(fiv.estimate - 24) <= 1e-3 and abs(lim - 6) <= 1e-12
          and abs(fi.prediction - lim) <= 1e-12)
    assert verdict(5, "remainder limits 6 (disk) and 24 (square)", ok, time.perf_counter() - t0, 5.0,
                   f"fit(i)={fi.estimate:.6f}, fit(iv)={fiv.estimate:.6f}, C2 limit={lim!r}")


def test_criterion_6_eigensolver_oracle():
    t0 = time.perf_counter()
    ok, worst = True, 0.0
    poly = SQUARE.as_polygon()
    for bc in ("dirichlet", "neumann"):
        exact = analytic_spectrum(SQUARE, bc, 10).values
        fem = fem_spectrum(poly, bc, 10)
        nz = exact > 0
        rel = np.abs(fem.values[nz] / exact[nz] - 1)
        worst = max(worst, float(rel.max()))
        ok &= bool(np.all(rel <= 5e-3)) and bool(np.all(np.abs(fem.values[~nz]) <= 1e-8))
        if bc == "dirichlet":
            ok &= all(bool(np.all(lvl >= exact * (1 - 1e-12))) for lvl in fem.levels)
    assert verdict(6, "FEM within 0.5% of analytic, Dirichlet levels above", ok, time.perf_counter() - t0, 120.0,
                   f"worst relative error {worst:.2e}")


def test_criterion_7_avp_finite():
    t0 = time.perf_counter()
    results = [avp_finite_check(seed=s, n=8, k=1 + s % 7) for s in range(50)]
    eq = avp_finite_check(matrix=np.diag([1.0, 2.0, 3.0, 4.0]), n=4, k=2, frame=TightFrameFamily.standard(4))
    equality = abs(eq["lhs"] - eq["rhs"]) <= 1e-12
    ok = all(r["pass"] for r in results) and eq["pass"] and equality
    worst = min(r["worst_relative_gap"] for r in results)
    assert verdict(7, "averaged variational principle on random PSD matrices", ok, time.perf_counter() - t0, 5.0,
                   f"{sum(r['pass'] for r in results)}/50 pass, worst gap {worst:.2e}, "
                   f"eigenbasis lhs={eq['lhs']!r} rhs={eq['rhs']!r}")


def test_criterion_8_bessel():
    t0 = time.perf_counter()
    j01 = bessel_zero(0, 1)
    jp11 = bessel_zero(1, 1, kind="Jp")
    jhalf = bessel_zero(0.5, 1)
    ok = (abs(j01 - 2.404825557695773) <= 1e-12 and abs(jp11 - 1.8411837813406593) <= 1e-12
          and abs(jhalf - math.pi) <= 1e-12)
    assert verdict(8, "Bessel zeros", ok, time.perf_counter() - t0, 1.0,
                   f"j01={j01!r}, j'11={jp11!r}, j_1/2,1 - pi={jhalf - math.pi:.1e}")


def test_criterion_9_legendre_identity():
    t0 = time.perf_counter()
    s = spectrum("square", "dirichlet", 500)
    ws = list(range(1, 51)) + [2.5, 7.25]
    mismatch = legendre_identity_check(s, ws)
    assert verdict(9, "Legendre identity on the square", mismatch <= 1e-10, time.perf_counter() - t0, 1.0,
                   f"max mismatch {mismatch:.2e}")

