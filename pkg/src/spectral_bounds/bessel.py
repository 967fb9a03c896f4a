"""Zeros of Bessel functions and of their derivatives.

Function values come from :mod:`scipy.special`; locating and polishing the
zeros is done here: a fixed-step scan brackets every sign change and a
vectorised bisection shrinks all brackets to relative width 1e-15.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import jv, jvp, yv, yvp

_SCAN_STEP = 0.1


class BesselConvergenceError(RuntimeError):
    pass


def _kind_fn(kind: str):
    if kind == "J":
        return jv
    if kind in ("J'", "Jp", "dJ"):
        return jvp
    raise ValueError(f"kind must be 'J' or \"J'\", got {kind!r}")


def bisect_sign_changes(f, lo: np.ndarray, hi: np.ndarray, rtol: float = 1e-15,
                        max_iter: int = 200) -> np.ndarray:
    """Shrink brackets ``[lo, hi]`` (each with a sign change of ``f``) to a root."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = f(lo)
    for _ in range(max_iter):
        if np.all(hi - lo <= rtol * np.abs(hi)):
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        left = np.sign(fmid) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
    width = float(np.max((hi - lo) / np.abs(hi)))
    raise BesselConvergenceError(f"bisection stalled at relative width {width:.2e}")


def _brackets(values: np.ndarray, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.sign(values)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    return grid[idx], grid[idx + 1]


def _mcmahon(nu: float, k: int, kind: str) -> float:
    """Leading McMahon estimate of the k-th zero (used only to size the scan)."""
    shift = 0.25 if kind == "J" else 0.75
    return (k + nu / 2 - shift) * math.pi


def bessel_zeros_below(nu: float, xmax: float, kind: str = "J") -> np.ndarray:
    """All positive zeros of ``J_nu`` (or ``J_nu'``) in ``(0, xmax)``, ascending."""
    f = _kind_fn(kind)
    # zeros of J_nu and J_nu' (nu > 0) all exceed nu, and the first zero of J_0' is j_{1,1}
    x0 = max(0.5 * nu, 1e-3)
    if xmax <= x0:
        return np.empty(0)
    grid = np.arange(x0, xmax + _SCAN_STEP, _SCAN_STEP)
    vals = f(nu, grid)
    exact = np.flatnonzero(vals == 0.0)
    lo, hi = _brackets(vals, grid)
    roots = bisect_sign_changes(lambda x: f(nu, x), lo, hi) if len(lo) else np.empty(0)
    if len(exact):
        roots = np.sort(np.concatenate([roots, grid[exact]]))
    return roots[roots < xmax]


def bessel_zero(nu: float, k: int, kind: str = "J") -> float:
    """The k-th positive zero of ``J_nu`` (``kind='J'``) or ``J_nu'`` (``kind="J'"``)."""
    if nu < 0:
        raise ValueError("order must be nonnegative")
    if k < 1 or int(k) != k:
        raise ValueError("zero index must be a positive integer")
    _kind_fn(kind)
    xmax = _mcmahon(nu, k, kind) + 2 * math.pi + nu
    for _ in range(20):
        roots = bessel_zeros_below(nu, xmax, kind)
        if len(roots) >= k:
            return float(roots[k - 1])
        xmax *= 1.5
    raise BesselConvergenceError(f"could not bracket zero {k} of order {nu}")


def lambda1_ball(d: int) -> dict[str, float]:
    """First Dirichlet eigenvalue of the unit ball in R^d and ``J_{d/2}`` at its square root."""
    if d < 2 or int(d) != d:
        raise ValueError("dimension must be an integer >= 2")
    j = bessel_zero(d / 2 - 1, 1, "J")
    return {"lambda1B": j * j, "J_at_sqrt": float(jv(d / 2, j))}


def _cross(nu: float, a: float, b: float, kind: str):
    if kind == "J":
        return lambda k: jv(nu, k * a) * yv(nu, k * b) - jv(nu, k * b) * yv(nu, k * a)
    return lambda k: jvp(nu, k * a) * yvp(nu, k * b) - jvp(nu, k * b) * yvp(nu, k * a)


def annulus_roots_below(nu: float, a: float, b: float, kmax: float, kind: str = "J",
                        step: float = 0.02) -> np.ndarray:
    """Positive roots ``k < kmax`` of the annulus cross product of order ``nu``.

    ``kind='J'`` gives Dirichlet conditions on both circles, ``"J'"`` Neumann.
    Eigenvalues are ``k**2``.  Roots satisfy ``k >= nu / b``, which bounds the scan.
    """
    f = _cross(nu, a, b, kind)
    k0 = max(nu / b * (1 - 1e-9), 1e-3)
    if kmax <= k0:
        return np.empty(0)
    grid = np.arange(k0, kmax + step, step)
    with np.errstate(all="ignore"):
        vals = f(grid)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    lo, hi = _brackets(vals, grid)
    if not len(lo):
        return np.empty(0)
    with np.errstate(all="ignore"):
        roots = bisect_sign_changes(f, lo, hi)
    return roots[roots < kmax]
