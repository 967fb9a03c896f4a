"""Reference spectra: closed forms for boxes, disks and annuli, plus JSON round-tripping."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import annulus_roots_below, bessel_zeros_below
from .geometry import Annulus, Box, Disk, Domain

BCS = ("dirichlet", "neumann")
SOURCES = ("analytic", "fem", "user")


class SpectrumError(ValueError):
    pass


def normalize_bc(bc: str) -> str:
    b = bc.strip().lower()
    if b in ("d", "dirichlet"):
        return "dirichlet"
    if b in ("n", "neumann"):
        return "neumann"
    raise SpectrumError(f"boundary condition must be dirichlet or neumann, got {bc!r}")


@dataclass
class Spectrum:
    bc: str
    values: np.ndarray
    source: str = "user"
    error_bounds: np.ndarray | None = None
    levels: list[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.bc = normalize_bc(self.bc)
        if self.source not in SOURCES:
            raise SpectrumError(f"unknown spectrum source {self.source!r}")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or len(vals) == 0:
            raise SpectrumError("spectrum needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise SpectrumError("spectrum values must be finite")
        if np.any(np.diff(vals) < 0):
            raise SpectrumError("spectrum values must be sorted nondecreasing")
        if self.error_bounds is None:
            err = np.zeros_like(vals)
        else:
            err = np.asarray(self.error_bounds, dtype=float)
            if err.shape != vals.shape or np.any(err < 0):
                raise SpectrumError("error bounds must be nonnegative, one per value")
        if self.bc == "dirichlet" and np.any(vals + err <= 0):
            raise SpectrumError("Dirichlet eigenvalues must be positive")
        if self.bc == "neumann" and np.any(vals < -err - 1e-12 * max(1.0, abs(float(vals[-1])))):
            raise SpectrumError("Neumann eigenvalues must be nonnegative")
        self.values = vals
        self.error_bounds = err

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def max_error(self) -> float:
        return float(self.error_bounds.max())

    def truncated(self, n: int) -> "Spectrum":
        return Spectrum(self.bc, self.values[:n], self.source, self.error_bounds[:n])

    def scaled(self, t: float) -> "Spectrum":
        """Spectrum of the domain dilated by ``t``."""
        return Spectrum(self.bc, self.values / t**2, self.source, self.error_bounds / t**2)

    def to_dict(self) -> dict:
        return {"bc": self.bc, "values": self.values.tolist(),
                "error_bounds": self.error_bounds.tolist(), "source": self.source}

    @classmethod
    def from_dict(cls, data: dict) -> "Spectrum":
        try:
            return cls(data["bc"], data["values"], data.get("source", "user"), data.get("error_bounds"))
        except KeyError as exc:
            raise SpectrumError(f"spectrum JSON is missing {exc}") from exc


def _grow_cutoff(count: int, enumerate_below, initial: float) -> np.ndarray:
    """Enumerate values below a cutoff grown until ``count + 1`` values lie strictly below it.

    Everything strictly below the final cutoff is present, so the first
    ``count`` returned values are complete.
    """
    cutoff = initial
    while True:
        vals = np.sort(enumerate_below(cutoff))
        if np.count_nonzero(vals < cutoff) >= count + 1:
            return vals[:count]
        cutoff *= 1.5


def _weyl_guess(volume: float, d: int, count: int) -> float:
    omega = math.pi ** (d / 2) / math.gamma(1 + d / 2)
    cd = 4 * math.pi**2 * omega ** (-2 / d)
    return 1.2 * cd * ((count + 1) / volume) ** (2 / d) + 10.0


def box_values_below(lengths, bc: str, cutoff: float) -> np.ndarray:
    """All values ``sum (pi m_i / L_i)^2 < cutoff`` with multiplicity."""
    start = 1 if bc == "dirichlet" else 0
    axes = []
    for L in lengths:
        mmax = int(math.floor(math.sqrt(cutoff) * L / math.pi))
        m = np.arange(start, mmax + 1)
        axes.append((math.pi * m / L) ** 2)
    if any(len(a) == 0 for a in axes):
        return np.empty(0)
    total = axes[0]
    for a in axes[1:]:
        total = (total[:, None] + a[None, :]).ravel()
        total = total[total < cutoff]
    return total[total < cutoff]


def disk_values_below(radius: float, bc: str, cutoff: float) -> np.ndarray:
    kind = "J" if bc == "dirichlet" else "J'"
    xmax = math.sqrt(cutoff) * radius
    out = [np.zeros(1)] if bc == "neumann" else []
    for nu in itertools.count():
        if nu > xmax:
            break
        zeros = bessel_zeros_below(nu, xmax, kind)
        if not len(zeros):
            if nu > 0:
                break
            continue
        vals = (zeros / radius) ** 2
        out.append(vals if nu == 0 else np.repeat(vals, 2))
    return np.concatenate(out) if out else np.empty(0)


def annulus_values_below(r_in: float, r_out: float, bc: str, cutoff: float) -> np.ndarray:
    kind = "J" if bc == "dirichlet" else "J'"
    kmax = math.sqrt(cutoff)
    out = [np.zeros(1)] if bc == "neumann" else []
    # every eigenfunction of angular order nu has eigenvalue >= nu^2 / r_out^2
    for nu in range(int(math.floor(kmax * r_out)) + 1):
        roots = annulus_roots_below(nu, r_in, r_out, kmax, kind)
        vals = roots**2
        out.append(vals if nu == 0 else np.repeat(vals, 2))
    return np.concatenate(out)


def analytic_spectrum(domain: Domain, bc: str, count: int) -> Spectrum:
    """First ``count`` eigenvalues (with multiplicity) from separation of variables."""
    bc = normalize_bc(bc)
    if count < 1:
        raise SpectrumError("count must be >= 1")
    if isinstance(domain, Box):
        vol = float(np.prod(domain.lengths))
        vals = _grow_cutoff(count, lambda c: box_values_below(domain.lengths, bc, c),
                            _weyl_guess(vol, domain.dim, count))
    elif isinstance(domain, Disk):
        vals = _grow_cutoff(count, lambda c: disk_values_below(domain.radius, bc, c),
                            _weyl_guess(math.pi * domain.radius**2, 2, count))
    elif isinstance(domain, Annulus):
        vol = math.pi * (domain.r_out**2 - domain.r_in**2)
        vals = _grow_cutoff(count, lambda c: annulus_values_below(domain.r_in, domain.r_out, bc, c),
                            _weyl_guess(vol, 2, count))
    else:
        raise SpectrumError(f"no closed-form spectrum for {type(domain).__name__}; use the FEM solver")
    return Spectrum(bc, vals, "analytic")


def box_heat_trace(lengths, bc: str, t: float, tol: float = 1e-17) -> float:
    """Heat trace of a box as a product of one-dimensional theta sums."""
    bc = normalize_bc(bc)
    total = 1.0
    for L in lengths:
        a = math.pi**2 * t / L**2
        m = np.arange(1, int(math.ceil(math.sqrt(-math.log(tol) / a))) + 2)
        s = float(np.sum(np.exp(-a * m * m)))
        total *= s if bc == "dirichlet" else 1.0 + s
    return total
