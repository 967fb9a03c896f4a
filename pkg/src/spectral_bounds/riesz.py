"""Spectral functionals: Riesz means, averages, counting function, heat trace, Legendre conjugate."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spectra import Spectrum


class IncompleteSpectrumError(ValueError):
    """The spectrum does not reach far enough for the requested functional."""


@dataclass(frozen=True)
class RieszMean:
    z: float
    sigma: float = 1.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("Riesz mean needs z >= 0")
        if not self.sigma > 0:
            raise ValueError("Riesz exponent must be positive")


@dataclass(frozen=True)
class Average:
    k: int

    def __post_init__(self):
        if self.k < 1 or int(self.k) != self.k:
            raise ValueError("average index must be a positive integer")


@dataclass(frozen=True)
class Counting:
    lam: float


@dataclass(frozen=True)
class Partition:
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("heat-trace time must be positive")


@dataclass(frozen=True)
class Legendre:
    w: float

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError("Legendre variable must be positive")


SpectralQuery = RieszMean | Average | Counting | Partition | Legendre


def riesz_mean(spectrum: Spectrum, z: float, sigma: float = 1.0) -> float:
    vals = spectrum.values
    if z >= vals[-1]:
        raise IncompleteSpectrumError(
            f"Riesz mean at z={z:g} needs every eigenvalue below z; spectrum stops at {vals[-1]:g}")
    pos = z - vals[vals < z]
    return math.fsum(pos**sigma)


def average(spectrum: Spectrum, k: int) -> float:
    if k > spectrum.count:
        raise IncompleteSpectrumError(f"average of {k} eigenvalues needs count >= {k}")
    return math.fsum(spectrum.values[:k]) / k


def counting(spectrum: Spectrum, lam: float) -> int:
    vals = spectrum.values
    if lam >= vals[-1]:
        raise IncompleteSpectrumError(
            f"counting at {lam:g} needs an eigenvalue above it; spectrum stops at {vals[-1]:g}")
    return int(np.searchsorted(vals, lam, side="right"))


def weyl_tail(spectrum: Spectrum, t: float) -> float:
    """Model estimate of ``sum_{j > count} exp(-lambda_j t)``.

    Fits ``lambda_j ~ c j^p`` on the top decile of the spectrum and
    integrates ``exp(-c x^p t)`` over ``x > count``.
    """
    from scipy.integrate import quad

    n = spectrum.count
    vals = spectrum.values
    lo = max(int(0.9 * n), 1)
    j = np.arange(lo + 1, n + 1)
    top = vals[lo:]
    if len(top) < 2 or np.any(top <= 0):
        return float(np.exp(-vals[-1] * t) * n)
    p, logc = np.polyfit(np.log(j), np.log(top), 1)
    c = math.exp(logc)
    val, _ = quad(lambda x: math.exp(-c * x**p * t), n + 0.5, math.inf, limit=200)
    return float(val)


def partition_function(spectrum: Spectrum, t: float) -> tuple[float, float]:
    """``(partial sum over available eigenvalues, estimated tail)``; the tail is never added."""
    if not t > 0:
        raise ValueError("heat-trace time must be positive")
    partial = math.fsum(np.exp(-spectrum.values * t))
    return partial, weyl_tail(spectrum, t)


def legendre(spectrum: Spectrum, w: float) -> float:
    """Convex conjugate ``sup_z (w z - R_1(z))`` in closed form."""
    if not w > 0:
        raise ValueError("Legendre variable must be positive")
    n = int(math.floor(w))
    if n + 1 > spectrum.count:
        raise IncompleteSpectrumError(f"Legendre transform at w={w:g} needs {n + 1} eigenvalues")
    vals = spectrum.values
    return (w - n) * float(vals[n]) + math.fsum(vals[:n])


def evaluate(spectrum: Spectrum, query: SpectralQuery) -> float:
    if isinstance(query, RieszMean):
        return riesz_mean(spectrum, query.z, query.sigma)
    if isinstance(query, Average):
        return average(spectrum, query.k)
    if isinstance(query, Counting):
        return float(counting(spectrum, query.lam))
    if isinstance(query, Partition):
        return partition_function(spectrum, query.t)[0]
    if isinstance(query, Legendre):
        return legendre(spectrum, query.w)
    raise TypeError(f"unknown spectral query {query!r}")


def legendre_numeric(spectrum: Spectrum, w: float, z_grid: np.ndarray | None = None) -> float:
    """Brute-force conjugate: maximise ``w z - R_1(z)`` over a grid plus every kink.

    Only eigenvalues strictly below the last one are used, so the Riesz mean is
    exact on the search range.
    """
    vals = spectrum.values
    zmax = float(vals[-1])
    if z_grid is None:
        z_grid = np.linspace(0.0, zmax, 2001)
    z = np.concatenate([np.asarray(z_grid, dtype=float), vals])
    z = z[(z >= 0) & (z <= zmax)]
    # R_1 on all candidates at once: sum over eigenvalues of (z - lambda)_+
    csum = np.concatenate([[0.0], np.cumsum(vals)])
    idx = np.searchsorted(vals, z, side="left")
    r1 = idx * z - csum[idx]
    return float(np.max(w * z - r1))


def legendre_identity_check(spectrum: Spectrum, w_grid: Sequence[float]) -> float:
    """Largest absolute gap between the closed-form and brute-force conjugates over ``w_grid``."""
    worst = 0.0
    for w in w_grid:
        closed = legendre(spectrum, w)
        numeric = legendre_numeric(spectrum, w)
        worst = max(worst, abs(closed - numeric))
    return worst
