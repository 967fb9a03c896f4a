import math

import numpy as np
import pytest

from spectral_bounds.geometry import Annulus, Box, Disk, Polygon
from spectral_bounds.spectra import analytic_spectrum

SQUARE = Box((1.0, 1.0))
RECT = Box((1.0, 2.0))
CUBE = Box((1.0, 1.0, 1.0))
DISK = Disk(1.0)
ANNULUS = Annulus(1.0, 2.0)
L_SHAPE = Polygon(((0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)))

SUITE_DOMAINS = {"square": SQUARE, "rect": RECT, "cube": CUBE, "disk": DISK, "annulus": ANNULUS}

_cache = {}


def spectrum(name, bc, count=500):
    key = (name, bc, count)
    if key not in _cache:
        _cache[key] = analytic_spectrum(SUITE_DOMAINS[name], bc, count)
    return _cache[key]


@pytest.fixture(scope="session")
def square_dirichlet():
    return spectrum("square", "dirichlet")


@pytest.fixture(scope="session")
def square_neumann():
    return spectrum("square", "neumann")


@pytest.fixture(scope="session")
def disk_dirichlet():
    return spectrum("disk", "dirichlet")


@pytest.fixture(scope="session")
def disk_neumann():
    return spectrum("disk", "neumann")


def square_oracle(bc, count, lengths=(1.0, 1.0)):
    """Brute-force lattice enumeration for rectangles, independent of the library enumerator."""
    start = 1 if bc == "dirichlet" else 0
    vals = sorted(math.pi**2 * (m * m / lengths[0] ** 2 + n * n / lengths[1] ** 2)
                  for m in range(start, 80) for n in range(start, 80))
    return vals[:count]


def random_star_polygon(rng):
    """Star-shaped simple polygon around the origin, counter-clockwise, with 5 to 10 vertices."""
    n = int(rng.integers(5, 11))
    # jittered but ordered angles keep the polygon simple
    angles = np.linspace(0, 2 * math.pi, n, endpoint=False) + rng.uniform(-0.2, 0.2, n) * (2 * math.pi / n)
    radii = rng.uniform(0.5, 1.5, n)
    return Polygon(tuple(zip(radii * np.cos(angles), radii * np.sin(angles))))
