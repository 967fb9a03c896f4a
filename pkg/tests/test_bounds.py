import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_bounds import bounds as B
from spectral_bounds.geometry import Box, Disk, summarize, tube_volume
from spectral_bounds.riesz import average, partition_function, riesz_mean
from spectral_bounds.spectra import box_heat_trace

from conftest import ANNULUS, DISK, SQUARE, spectrum

PI = math.pi
PI2 = PI**2


def tube_of(dom):
    return lambda h: tube_volume(dom, h)


def values(results, **match):
    out = [r for r in results if all(getattr(r, k) == v for k, v in match.items())]
    assert out, f"no result matching {match}"
    return out


# --- constants -------------------------------------------------------------


def test_semiclassical_constants():
    assert B.semiclassical_constant(2) == pytest.approx(4 * PI, rel=1e-15)
    # C_3 = 4 pi^2 (4 pi / 3)^(-2/3) = 6^(2/3) pi^(4/3)
    assert B.semiclassical_constant(3) == pytest.approx(6 ** (2 / 3) * PI ** (4 / 3), rel=1e-14)
    assert B.semiclassical_constant(3) == pytest.approx(15.19267, abs=5e-6)
    s = B.semiclassical(2, 1.0, 1)
    assert s["one_term"] == pytest.approx(2 * PI)
    assert 2 * PI <= 2 * PI2
    with pytest.raises(ValueError):
        B.semiclassical(1, 1.0, 1)


def test_two_term_weyl_reference_for_square():
    s = B.semiclassical(2, 1.0, 100, boundary=4.0)
    cd, cd1 = 4 * PI, PI2  # C_1 = 4 pi^2 / 2^2
    coeff = cd**1.5 / (2 * 3 * math.sqrt(cd1))
    assert s["two_term_dirichlet"] == pytest.approx(2 * PI * 100 + coeff * 4 * 10, rel=1e-14)
    avg = average(spectrum("square", "dirichlet"), 100)
    assert abs(avg - s["two_term_dirichlet"]) < abs(avg - s["one_term"])


def test_ratio_brackets():
    lo, hi = 3 / math.sqrt(2), 4 / math.sqrt(PI)
    for f in (B.second_term_ratio, B.convex_riesz_ratio):
        vals = [f(d) for d in range(2, 51)]
        assert all(lo - 5e-4 <= v <= hi + 5e-4 for v in vals)
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))
        assert vals[0] == pytest.approx(lo, abs=1e-12)


def test_neumann_constant_two_evaluations_agree():
    for d in (2, 3, 4, 7):
        f = B.neumann_spectral_constant(d)
        dec = float(B.neumann_spectral_constant_decimal(d))
        assert f == pytest.approx(dec, rel=1e-9)
    # frozen after the decimal and binary evaluations agreed
    assert B.neumann_spectral_constant(2) == pytest.approx(430.6493811800138, rel=1e-12)


def test_spectral_function_bound():
    r = B.spectral_function_bound(100.0, 1.0, 2)
    assert r["main"] == pytest.approx(100 / (4 * PI), rel=1e-14)
    assert r["total"] == r["main"] + r["correction"]
    # the correction decays like 1/delta with coefficient pref * sqrt(mu) at d = 2
    c3 = 3 ** (1 / 3)
    coeff = 8 * (2 * PI) ** -2 * c3 * PI * (2 / PI * 4 * c3 + 1) * 10.0
    far = B.spectral_function_bound(100.0, 1e8, 2)
    assert far["correction"] * 1e8 == pytest.approx(coeff, rel=1e-6)
    farther = B.spectral_function_bound(100.0, 1e11, 2)
    assert farther["total"] == pytest.approx(farther["main"], rel=1e-9)
    deltas = np.geomspace(0.01, 100, 40)
    totals = [B.spectral_function_bound(100.0, float(x), 3)["total"] for x in deltas]
    assert all(a > b for a, b in zip(totals, totals[1:]))
    with pytest.raises(ValueError):
        B.spectral_function_bound(0.0, 1.0, 2)


# --- test-function bounds --------------------------------------------------


def test_phi_h_norms_square():
    g = summarize(SQUARE)
    n = B.phi_h_norms(g, tube_of(SQUARE), 0.1)
    assert (n.l2_sq, n.grad_l2_sq, n.sup) == pytest.approx((0.64, 36.0, 1.0))
    s = B.phi_h_norms(g, tube_of(SQUARE), 0.1, "sine")
    assert s.grad_l2_sq == pytest.approx(PI2 / 4 * 36)
    with pytest.raises(ValueError):
        B.phi_h_norms(g, tube_of(SQUARE), 0.6)
    with pytest.raises(ValueError):
        B.phi_h_norms(g, tube_of(SQUARE), 0.1, "cubic")
    with pytest.raises(ValueError):
        B.TestFunctionNorms(2.0, 1.0, 1.0, 1.0)


def test_avp_examples_square(square_dirichlet):
    n = B.phi_h_norms(summarize(SQUARE), tube_of(SQUARE), 0.1)
    res = B.dirichlet_avp(n, 2, k=1, z=30.0)
    upper = values(res, functional="average")[0].value
    assert upper == pytest.approx(36 / 0.64 + 2 * PI / 0.64, rel=1e-14)
    assert upper >= 2 * PI2
    assert B.avp_riesz_lower(n, 2, n.rayleigh) == 0.0
    assert B.avp_riesz_lower(n, 2, 30.0) == 0.0
    # partition at t = 0.1 with h = 0.2: only the sign is asserted
    n2 = B.phi_h_norms(summarize(SQUARE), tube_of(SQUARE), 0.2)
    assert B.avp_partition_lower(n2, 2, 0.1) <= box_heat_trace((1.0, 1.0), "dirichlet", 0.1)


def test_avp_rejects_rho_one():
    with pytest.raises(ValueError):
        B.dirichlet_avp(B.TestFunctionNorms(1.0, 1.0, 1.0, 1.0), 2, k=1)


@pytest.mark.parametrize("form", ["derived", "stated"])
def test_avp_bracket_forms_on_square(square_dirichlet, form):
    """Both bracket forms contain lambda_k and lambda_{k+1} wherever the root is real."""
    vals = square_dirichlet.values
    for h in (0.05, 0.1, 0.2):
        n = B.phi_h_norms(summarize(SQUARE), tube_of(SQUARE), h)
        for k in range(1, 200):
            if vals[k - 1] < n.rayleigh:
                continue
            br = B.avp_bracket(n, 2, k, average(square_dirichlet, k), form)
            if br is not None:
                assert br[0] <= vals[k - 1] * (1 + 1e-9) and vals[k] <= br[1] * (1 + 1e-9)


def test_avp_bracket_derived_is_shift_of_stated():
    n = B.TestFunctionNorms(0.5, 10.0, 1.0, 1.0)
    g = n.rayleigh
    d, k, avg = 2, 5, 40.0
    derived = B.avp_bracket(n, d, k, avg, "derived")
    # substituting lambda_j - G into the unshifted bracket with G = 0
    n0 = B.TestFunctionNorms(0.5, 1e-300, 1.0, 1.0)
    base = B.avp_bracket(n0, d, k, avg - g, "stated")
    assert derived == pytest.approx((base[0] + g, base[1] + g), rel=1e-14)
    with pytest.raises(ValueError):
        B.avp_bracket(n, d, k, avg, "other")


def test_bracket_inapplicable_below_rayleigh():
    n = B.TestFunctionNorms(0.5, 10.0, 1.0, 1.0)
    res = B.dirichlet_avp(n, 2, k=1, avg_k=5.0, lambda_k=5.0)
    assert len(res) == 2 and not any(r.applicable for r in res) and all(r.value is None for r in res)


# --- inradius and convex ---------------------------------------------------


def test_lambda1_examples():
    res = B.lambda1_bounds(summarize(SQUARE))
    up = values(res, theorem_id="thm2.5", side="upper")[0].value
    assert up == pytest.approx(5.783185962946784 / 0.25, rel=1e-12)
    assert up == pytest.approx(23.133, abs=5e-4)
    assert values(res, theorem_id="thm2.4", side="upper")[0].value == 64.0
    lo = values(res, side="lower")[0].value
    assert lo <= 2 * PI2 <= up


def test_inradius_average_gap_square(square_dirichlet):
    g = summarize(SQUARE)
    lam = square_dirichlet.values
    for k in (1, 5, 20):
        res = B.dirichlet_inradius(g, lam[0], k=k)
        gap = average(square_dirichlet, k) - lam[0]
        for r in res:
            assert r.value >= gap
        heat = values(res, params={"variant": "heat"})[0].value
        # (1/2) C_2 k (e lambda_1 / (4 pi)) at d = 2
        assert heat == pytest.approx(0.5 * 4 * PI * k * math.e * 2 * PI2 / (4 * PI), rel=1e-14)
    assert values(B.dirichlet_inradius(g, lam[0], k=1), params={"variant": "heat"})[0].value == pytest.approx(
        26.83, abs=5e-3)


def test_inradius_riesz_threshold(square_dirichlet):
    g = summarize(SQUARE)
    res = B.dirichlet_inradius(g, square_dirichlet.values[0], z=1.0)
    assert not res[0].applicable and res[0].threshold.value == pytest.approx(8.0)
    z = 200.0
    for r in B.dirichlet_inradius(g, square_dirichlet.values[0], z=z):
        assert r.value <= riesz_mean(square_dirichlet, z)
    with pytest.raises(ValueError):
        B.dirichlet_inradius(g, 0.0, k=1)


def test_convex_examples(square_dirichlet):
    g = summarize(SQUARE)
    avg = values(B.dirichlet_convex(g, k=1), functional="average")[0].value
    assert avg == pytest.approx(2 * PI + 2 * math.sqrt(2 * PI) * 4 + 64, rel=1e-14)
    assert avg == pytest.approx(90.34, abs=5e-3) and avg >= 2 * PI2
    res = B.dirichlet_convex(summarize(ANNULUS), k=1, z=100.0, alpha=1.0)
    assert res and not any(r.applicable for r in res)


def test_slab_limit():
    lhs, rhs = B.slab_limit(2, PI2, 1.0, 2.0, 0.0)
    assert abs(lhs - PI2) < 1e-12 and abs(rhs - 16.0) < 1e-12


def test_aaa_identity_and_validity(square_dirichlet):
    for d in range(2, 12):
        alpha = (d + 2) / (2 * d)
        assert B.aaa_coefficient(alpha, d, "derived") == pytest.approx(2 * math.sqrt(2 / (d + 2)), rel=1e-14)
        assert B.aaa_coefficient(alpha, d, "stated") >= B.aaa_coefficient(alpha, d, "derived")
    g = summarize(SQUARE)
    for form in ("stated", "derived"):
        for alpha in (0.5, 1.0, 2.0):
            for z in np.geomspace(alpha * 2 / 0.25, 0.9 * square_dirichlet.values[-1], 25):
                res = B.dirichlet_convex(g, z=float(z), alpha=alpha, aaa_form=form)
                r = [x for x in res if x.params.get("alpha") == alpha][0]
                assert r.value <= riesz_mean(square_dirichlet, float(z)) * (1 + 1e-9)
    with pytest.raises(ValueError):
        B.aaa_coefficient(1.0, 2, "x")


# --- tube and C^2 bounds ---------------------------------------------------


def test_h_of_k_square():
    assert B.h_of_k(2, 1.0, 10) == pytest.approx(1 / math.sqrt(20 * PI), rel=1e-14)
    assert B.h_of_k(2, 1.0, 10) == pytest.approx(0.12616, abs=5e-6)


def test_classS_square_k10(square_dirichlet):
    g = summarize(SQUARE)
    r = values(B.dirichlet_classS(g, tube_of(SQUARE), k=10), functional="average")[0]
    h = B.h_of_k(2, 1.0, 10)
    w = 4 * h - 4 * h * h
    rem = (2 * PI * 10 + 1 / h**2) * (h * 4 * w + (w - 4 * h)) / (1 - w)
    assert r.value == pytest.approx(20 * PI + 2 * math.sqrt(2 * PI) * 4 * math.sqrt(10) + rem, rel=1e-13)
    assert r.value >= average(square_dirichlet, 10)
    thin = Box((1.0, 0.1))
    tiny = B.dirichlet_classS(summarize(thin), tube_of(thin), k=1)[0]
    assert not tiny.applicable and "threshold" in tiny.notes[0]


def test_classS_partition_disk(disk_dirichlet):
    g = summarize(DISK)
    t = 0.01
    derived = values(B.dirichlet_classS(g, tube_of(DISK), t=t), functional="partition")[0]
    assert derived.params["remainder"] == pytest.approx(0.5, rel=1e-12)
    stated = values(B.dirichlet_classS(g, tube_of(DISK), t=t, partition_form="stated"), functional="partition")[0]
    assert stated.value == pytest.approx(PI / (0.04 * PI) - 2 * PI * 0.1 / (0.04 * PI) + 0.5, rel=1e-12)
    partial, tail = partition_function(disk_dirichlet, t)
    assert derived.value <= partial
    assert stated.value <= partial


def test_classS_stated_partition_fails_on_square():
    """The unshifted heat-trace form overshoots the square's trace; the proof form does not."""
    g = summarize(SQUARE)
    t = 0.01
    exact = box_heat_trace((1.0, 1.0), "dirichlet", t)
    stated = B.dirichlet_classS(g, tube_of(SQUARE), t=t, partition_form="stated")[0].value
    derived = B.dirichlet_classS(g, tube_of(SQUARE), t=t)[0].value
    assert stated > exact
    assert derived <= exact


def test_c2_limits_and_mean_convex_bound(disk_dirichlet):
    g = summarize(DISK)
    assert B.c2_remainder_limit(2, PI, 2 * PI, g.curvature_integrals) == pytest.approx(6.0, rel=1e-14)
    r = values(B.dirichlet_c2(g, k=10**6), theorem_id="thm2.9")[0]
    assert abs(r.params["remainder"] - 6.0) < 1e-2
    # the remainder approaches its limit like k^(-1/2)
    h = B.h_of_k(2, PI, 1e12)
    assert abs(B.c2_remainder(2, PI, 2 * PI, g.curvature_integrals, h) - 6.0) < 1e-5
    for k in range(1, 201):
        c = values(B.dirichlet_c2(g, k=k), theorem_id="cor2.10")[0]
        assert c.applicable and c.value >= average(disk_dirichlet, k)
    ann = values(B.dirichlet_c2(summarize(ANNULUS), k=3), theorem_id="cor2.10")[0]
    assert not ann.applicable


def test_c2_remainder_none_when_tube_fills():
    assert B.c2_remainder(2, 3 * PI, 6 * PI, (0.0,), 0.5) is None
    assert B.planar_remainder(1.0, 4.0, 4.0, 0.5) is None


def test_planar_cases(disk_dirichlet, square_dirichlet):
    gd, gs = summarize(DISK), summarize(SQUARE)
    r = B.dirichlet_planar(gd, "i", 10)
    assert r.params["h"] == pytest.approx(20**-0.5)
    assert r.params["limit"] == pytest.approx(6.0)
    assert r.value >= average(disk_dirichlet, 10)
    sq = [B.dirichlet_planar(gs, "iv", k) for k in range(1, 101)]
    assert sq[0].threshold.value == pytest.approx(2 / PI)
    assert sq[0].params["limit"] == pytest.approx(24.0)
    assert all(r.applicable and r.value >= average(square_dirichlet, r.query["k"]) for r in sq)
    assert not B.dirichlet_planar(gd, "iv", 10).applicable
    assert not B.dirichlet_planar(summarize(Box((1.0, 1.0, 1.0))), "iii", 10).applicable
    with pytest.raises(ValueError):
        B.dirichlet_planar(gd, "v", 10)
    with pytest.raises(ValueError):
        B.dirichlet_planar(gd, "ii", 10, alpha=1.5)


# --- Neumann ---------------------------------------------------------------


def test_neumann_examples(square_neumann):
    res = B.neumann_classical(2, 1.0, k=1, avg_k=0.0, z=20.0, t=0.1)
    lo, hi = [r.value for r in values(res, functional="single")]
    # C_2 (k/V) x_pm with x_pm = 1 -+ 1
    assert (lo, hi) == pytest.approx((0.0, 8 * PI))
    assert lo <= square_neumann.values[1] <= hi
    rz = values(res, functional="riesz1")[0].value
    assert rz == pytest.approx(400 / (8 * PI), rel=1e-14) and rz == pytest.approx(15.92, abs=5e-3)
    # 0, pi^2, pi^2 and 2 pi^2 all lie below z = 20
    assert riesz_mean(square_neumann, 20.0) == pytest.approx(20 + 2 * (20 - PI2) + (20 - 2 * PI2), rel=1e-14)
    assert rz <= riesz_mean(square_neumann, 20.0)
    pt = values(res, functional="partition")[0].value
    assert pt == pytest.approx(0.7958, abs=5e-5)
    assert pt <= box_heat_trace((1.0, 1.0), "neumann", 0.1)


def test_neumann_negative_discriminant():
    res = B.neumann_classical(2, 1.0, k=1, avg_k=100.0)
    assert all(not r.applicable for r in res)


def test_neumann_c2_disk(disk_neumann):
    g = summarize(DISK)
    z0 = 1.0
    res = B.neumann_c2(g, tube_of(DISK), z0, 1.0, z=100.0, k=2)
    up = values(res, functional="riesz1")[0]
    h = PI / 20
    cdn = B.neumann_spectral_constant(2)
    assert up.params["R_prime"] == pytest.approx(2 * 1e4 * cdn * PI * h * h, rel=1e-12)
    assert up.value >= riesz_mean(disk_neumann, 100.0)
    assert not values(res, functional="average")[0].applicable
    low = B.neumann_c2(g, tube_of(DISK), z0, 1.0, z=0.5)[0]
    assert not low.applicable


# --- appendix --------------------------------------------------------------


def test_bly_generalized():
    r = B.bly_generalized(1.0, 1.0, 2)
    assert r["value"] == pytest.approx(2 * PI)
    assert 2 * (2 * PI2) >= 4 * PI  # (d+2)/d * lambda_1 >= C_2
    assert B.bly_generalized(0.0, 1.0, 2)["value"] == 0.0
    for d, mass, l2 in ((2, 3.0, 0.7), (3, 10.0, 2.0), (5, 0.3, 1.5)):
        best = B.bly_generalized(mass, l2, d)
        sweep = [B.bly_generalized(mass, l2, d, R)["value"] for R in np.linspace(0.01, 4 * best["R"], 400)]
        assert best["value"] >= max(sweep) - 1e-12 * abs(best["value"])
        assert B.bly_generalized(mass, l2, d, best["R"])["value"] == pytest.approx(best["value"], rel=1e-12)
    # the two radius formulas agree only in the plane
    r2 = B.bly_generalized(3.0, 0.7, 2)
    assert r2["R"] == pytest.approx(r2["R_printed"])
    r3 = B.bly_generalized(10.0, 2.0, 3)
    assert r3["R"] != pytest.approx(r3["R_printed"])


def test_bly_generalized_result_is_bly(square_dirichlet):
    for k in (1, 10, 100):
        r = B.bly_generalized_result(2, 1.0, k)
        assert r.value == pytest.approx(B.bly_lower(2, 1.0, k).value, rel=1e-14)
        assert r.value <= average(square_dirichlet, k)


def test_single_from_averages_square(square_dirichlet):
    assert B.choose_l(16, 2) == 8
    A, Bc = 2 * math.sqrt(2 * PI) * 4, 64.0
    assert B.average_constants(summarize(SQUARE))[:3] == pytest.approx((A, Bc, 1))
    for k in (16, 64, 144):
        r = B.single_from_averages(k, A, Bc, 1, 2, 1.0)
        assert r["lower"] <= square_dirichlet.values[k - 1]
        assert square_dirichlet.values[k] <= r["upper"]
    z = B.single_from_averages(16, 0.0, 0.0, 1, 2, 1.0)
    assert z["modulus"] == pytest.approx(3 / 4 * 4 * PI * 16**0.75, rel=1e-14)
    with pytest.raises(ValueError):
        B.single_from_averages(3, A, Bc, 5, 2, 1.0)


def test_single_from_averages_window_guard():
    res = B.single_from_averages_results(20, 1.0, 1.0, 15, 2, 1.0, "test")
    assert all(not r.applicable for r in res)  # k - l = 12 < k0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10**6), st.integers(2, 6))
def test_choose_l_admissible(k, d):
    l = B.choose_l(k, d)
    e = 1 - 1 / (2 * d)
    assert 0.5 * k**e <= l <= 1.5 * k**e


# --- scale consistency -----------------------------------------------------


@pytest.mark.parametrize("t", [0.5, 3.0])
def test_scale_consistency(t):
    for dom, scaled in ((Box((1.0, 2.0)), Box((t, 2 * t))), (Disk(1.0), Disk(t))):
        g, gs = summarize(dom), summarize(scaled)
        for k in (5, 50, 400):
            for f in (lambda geo: B.dirichlet_convex(geo, k=k),
                      lambda geo: B.dirichlet_classS(geo, tube_of(dom if geo is g else scaled), k=k)):
                a, b = f(g)[0], f(gs)[0]
                assert a.applicable == b.applicable
                if a.applicable:
                    assert b.value == pytest.approx(a.value / t**2, rel=1e-10)
        r1 = B.dirichlet_convex(g, z=50.0)[0]
        r2 = B.dirichlet_convex(gs, z=50.0 / t**2)[0]
        assert r2.threshold.value == pytest.approx(r1.threshold.value / t**2)
        c1 = B.dirichlet_classS(g, tube_of(dom), t=0.01)[0]
        c2 = B.dirichlet_classS(gs, tube_of(scaled), t=0.01 * t**2)[0]
        assert c2.threshold.value == pytest.approx(c1.threshold.value * t**2)
        assert c2.value == pytest.approx(c1.value, rel=1e-10)


def test_bound_result_validation_and_dict():
    with pytest.raises(ValueError):
        B.BoundResult("x", "dirichlet", "upper", "average", {}, float("nan"))
    d = B.bly_lower(2, 1.0, 3).to_dict()
    assert d["theorem_id"] == "bly" and d["threshold"]["description"] == "none"
