import math

import mpmath
import numpy as np
import pytest
from scipy.special import jv

from spectral_bounds.bessel import (annulus_roots_below, bessel_zero, bessel_zeros_below, bisect_sign_changes,
                                    lambda1_ball)

# frozen after agreement with mpmath.besseljzero at 30 digits
J01 = 2.404825557695773
JP11 = 1.8411837813406593


def test_j01_frozen():
    assert abs(bessel_zero(0, 1, "J") - J01) < 1e-12


def test_jp11_frozen():
    assert abs(bessel_zero(1, 1, "J'") - JP11) < 1e-12


def test_half_integer_zero_is_pi():
    assert abs(bessel_zero(0.5, 1, "J") - math.pi) < 1e-12


@pytest.mark.parametrize("nu", [0, 1, 2, 3.5, 7])
@pytest.mark.parametrize("k", [1, 2, 5])
def test_zeros_against_mpmath(nu, k):
    mpmath.mp.dps = 30
    assert bessel_zero(nu, k, "J") == pytest.approx(float(mpmath.besseljzero(nu, k)), rel=1e-13)
    # mpmath counts the zero of J_0' at the origin
    kk = k + 1 if nu == 0 else k
    assert bessel_zero(nu, k, "J'") == pytest.approx(float(mpmath.besseljzero(nu, kk, derivative=1)), rel=1e-13)


def test_interlacing():
    for nu in range(6):
        for k in range(1, 6):
            a = bessel_zero(nu, k)
            assert a < bessel_zero(nu + 1, k) < bessel_zero(nu, k + 1)


def test_zeros_below_are_complete_and_sorted():
    z = bessel_zeros_below(3, 40.0)
    assert np.all(np.diff(z) > 0)
    assert len(z) == sum(1 for k in range(1, 20) if bessel_zero(3, k) < 40.0)


def test_lambda1_ball_values():
    b2 = lambda1_ball(2)
    assert b2["lambda1B"] == pytest.approx(J01**2, rel=1e-12)
    assert b2["J_at_sqrt"] == pytest.approx(0.519147497289466, rel=1e-10)
    assert abs(jv(0, math.sqrt(b2["lambda1B"]))) < 1e-10
    b3 = lambda1_ball(3)
    assert b3["lambda1B"] == pytest.approx(math.pi**2, rel=1e-12)
    # J_{3/2}(pi) = sqrt(2/(pi*pi)) (sin(pi)/pi - cos(pi)) = sqrt(2)/pi
    assert b3["J_at_sqrt"] == pytest.approx(math.sqrt(2) / math.pi, rel=1e-10)


def test_bad_arguments():
    with pytest.raises(ValueError):
        bessel_zero(-1, 1)
    with pytest.raises(ValueError):
        bessel_zero(0, 0)
    with pytest.raises(ValueError):
        bessel_zero(0, 1, "Y")
    with pytest.raises(ValueError):
        lambda1_ball(1)


def test_bisection_vectorised():
    roots = bisect_sign_changes(np.sin, np.array([3.0, 6.0]), np.array([3.3, 6.5]))
    assert np.allclose(roots, [math.pi, 2 * math.pi], rtol=1e-15)


def test_annulus_roots_against_mpmath():
    mpmath.mp.dps = 25
    a, b = 1.0, 2.0
    for nu in (0, 1, 3):
        for kind, f in (("J", lambda k: mpmath.besselj(nu, k * a) * mpmath.bessely(nu, k * b)
                         - mpmath.besselj(nu, k * b) * mpmath.bessely(nu, k * a)),
                        ("J'", lambda k: mpmath.besselj(nu, k * a, 1) * mpmath.bessely(nu, k * b, 1)
                         - mpmath.besselj(nu, k * b, 1) * mpmath.bessely(nu, k * a, 1))):
            for r in annulus_roots_below(nu, a, b, 12.0, kind):
                polished = float(mpmath.findroot(f, r))
                assert r == pytest.approx(polished, rel=1e-11)
