"""Domains and the geometric functionals that the eigenvalue bounds consume.

Every bound in :mod:`spectral_bounds.bounds` is a function of a handful of
scalars (volume, boundary measure, inradius, tube radius, angle sums,
curvature integrals) plus, for some of them, the volume of the inner tubular
neighbourhood ``omega_h = {x in Omega : dist(x, boundary) <= h}``.  This module
computes those quantities, in closed form when possible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
import shapely
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import linprog, minimize, minimize_scalar

TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Invalid domain description."""


class UnsupportedDomainError(GeometryError):
    """The requested quantity is not defined for this kind of domain."""


class QuadratureError(RuntimeError):
    """Boundary quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative tolerance {achieved:.3e})")
        self.achieved = achieved


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Box:
    lengths: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        if not lengths:
            raise GeometryError("box needs at least one side length")
        if any(not (x > 0 and math.isfinite(x)) for x in lengths):
            raise GeometryError(f"box side lengths must be positive, got {lengths}")
        object.__setattr__(self, "lengths", lengths)

    @property
    def dim(self) -> int:
        return len(self.lengths)

    def scaled(self, t: float) -> "Box":
        return Box(tuple(t * x for x in self.lengths))

    def as_polygon(self) -> "Polygon":
        if self.dim != 2:
            raise UnsupportedDomainError("only planar boxes are polygons")
        a, b = self.lengths
        return Polygon(((0.0, 0.0), (a, 0.0), (a, b), (0.0, b)))


@dataclass(frozen=True)
class Disk:
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GeometryError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    dim = 2

    def scaled(self, t: float) -> "Disk":
        return Disk(t * self.radius)


@dataclass(frozen=True)
class Annulus:
    r_in: float
    r_out: float

    def __post_init__(self):
        if not (self.r_in > 0 and self.r_out > 0):
            raise GeometryError("annulus radii must be positive")
        if not self.r_in < self.r_out:
            raise GeometryError(f"annulus needs r_in < r_out, got {self.r_in}, {self.r_out}")
        object.__setattr__(self, "r_in", float(self.r_in))
        object.__setattr__(self, "r_out", float(self.r_out))

    dim = 2

    def scaled(self, t: float) -> "Annulus":
        return Annulus(t * self.r_in, t * self.r_out)


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _merge_collinear(v: np.ndarray, tol: float) -> np.ndarray:
    # repeat until stable: removing one vertex can make a neighbour collinear
    changed = True
    while changed and len(v) >= 3:
        changed = False
        prev = np.roll(v, 1, axis=0)
        nxt = np.roll(v, -1, axis=0)
        e1 = v - prev
        e2 = nxt - v
        scale = np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
        cross = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        dot = np.einsum("ij,ij->i", e1, e2)
        degenerate = (scale <= tol**2) | ((np.abs(cross) <= tol * scale) & (dot > 0))
        if degenerate.any():
            idx = int(np.flatnonzero(degenerate)[0])
            v = np.delete(v, idx, axis=0)
            changed = True
    return v


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counter-clockwise vertices (collinear vertices are merged)."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError("polygon vertices must be a list of 2D points")
        if len(v) >= 2 and np.allclose(v[0], v[-1]):
            v = v[:-1]
        scale = float(np.ptp(v, axis=0).max()) if len(v) else 0.0
        v = _merge_collinear(v, 1e-12 * max(scale, 1.0))
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 non-collinear vertices")
        if not shapely.LinearRing(v).is_simple:
            raise GeometryError("polygon is not simple (edges intersect)")
        if _signed_area(v) <= 0:
            raise GeometryError("polygon vertices must be counter-clockwise")
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in v))

    dim = 2

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def scaled(self, t: float) -> "Polygon":
        return Polygon(tuple((t * x, t * y) for x, y in self.vertices))

    def interior_angles(self) -> np.ndarray:
        v = self.array
        e_in = v - np.roll(v, 1, axis=0)
        e_out = np.roll(v, -1, axis=0) - v
        cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
        dot = np.einsum("ij,ij->i", e_in, e_out)
        return math.pi - np.arctan2(cross, dot)

    @property
    def is_convex(self) -> bool:
        return bool(np.all(self.interior_angles() < math.pi))


CurveFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


class SmoothCurveDomain:
    """Planar domain bounded by one closed, positively oriented C^2 curve.

    ``curve(t)`` maps an array of parameters in ``[0, period]`` to the arrays
    ``(r, r', r'')``, each of shape ``(len(t), 2)``.
    """

    dim = 2

    def __init__(self, curve: CurveFn, period: float = TWO_PI, name: str = "curve",
                 spec: dict | None = None):
        self.curve = curve
        self.period = float(period)
        self.name = name
        self.spec = spec
        self._validate()

    def _validate(self):
        r0, d0, _ = self.curve(np.array([0.0, self.period]))
        scale = float(np.max(np.abs(r0))) + 1.0
        if np.linalg.norm(r0[0] - r0[1]) > 1e-8 * scale or np.linalg.norm(d0[0] - d0[1]) > 1e-6 * scale:
            raise GeometryError("curve is not closed")
        t = self.nodes(4096)
        r, d1, _ = self.curve(t)
        speed = np.linalg.norm(d1, axis=1)
        if speed.min() <= 1e-9 * speed.max():
            raise GeometryError("curve is not regular (tangent vanishes)")
        if not shapely.LinearRing(r).is_simple:
            raise GeometryError("curve is not simple")
        if _signed_area(r) <= 0:
            raise GeometryError("curve must be positively oriented")

    def nodes(self, n: int) -> np.ndarray:
        return np.arange(n) * (self.period / n)

    def curvature(self, t: np.ndarray) -> np.ndarray:
        _, d1, d2 = self.curve(t)
        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        return cross / np.linalg.norm(d1, axis=1) ** 3

    def polyline(self, n: int = 4096) -> np.ndarray:
        return self.curve(self.nodes(n))[0]

    def scaled(self, t: float) -> "SmoothCurveDomain":
        base = self.curve

        def curve(s):
            r, d1, d2 = base(s)
            return t * r, t * d1, t * d2

        return SmoothCurveDomain(curve, self.period, self.name)

    @classmethod
    def ellipse(cls, a: float, b: float) -> "SmoothCurveDomain":
        if not (a > 0 and b > 0):
            raise GeometryError("ellipse semi-axes must be positive")

        def curve(t):
            c, s = np.cos(t), np.sin(t)
            r = np.column_stack([a * c, b * s])
            d1 = np.column_stack([-a * s, b * c])
            d2 = np.column_stack([-a * c, -b * s])
            return r, d1, d2

        return cls(curve, TWO_PI, name=f"ellipse {a:g} {b:g}",
                   spec={"type": "curve", "builtin": f"ellipse {a!r} {b!r}"})

    @classmethod
    def from_table(cls, rows: Sequence[Sequence[float]]) -> "SmoothCurveDomain":
        """Build from rows ``(t, x, y, x', y', x'', y'')`` covering one period.

        The last row may repeat the first point at ``t0 + period``; otherwise
        the period is inferred from the (uniform) parameter spacing.
        """
        tab = np.asarray(rows, dtype=float)
        if tab.ndim != 2 or tab.shape[1] != 7 or len(tab) < 8:
            raise GeometryError("curve table needs >= 8 rows of (t, x, y, x', y', x'', y'')")
        t = tab[:, 0]
        if np.any(np.diff(t) <= 0):
            raise GeometryError("curve table parameters must increase")
        if np.linalg.norm(tab[0, 1:3] - tab[-1, 1:3]) <= 1e-12 * (1 + np.abs(tab[:, 1:3]).max()):
            period = t[-1] - t[0]
            tab = tab[:-1]
        else:
            period = (t[-1] - t[0]) * len(t) / (len(t) - 1)
        t0 = tab[0, 0]
        tt = np.append(tab[:, 0] - t0, period)
        ext = np.vstack([tab, tab[:1]])
        pos = CubicHermiteSpline(tt, ext[:, 1:3], ext[:, 3:5])
        vel = CubicHermiteSpline(tt, ext[:, 3:5], ext[:, 5:7])

        def curve(s):
            s = np.mod(s, period)
            s = np.where(np.isclose(s, period), 0.0, s)
            return pos(s), vel(s), vel(s, 1)

        return cls(curve, period, name="table",
                   spec={"type": "curve", "table": tab.tolist()})


Domain = Box | Disk | Annulus | Polygon | SmoothCurveDomain


def domain_dim(domain: Domain) -> int:
    return domain.dim


# ---------------------------------------------------------------------------
# Geometric summary
# ---------------------------------------------------------------------------


@dataclass
class GeometricSummary:
    dim: int
    volume: float
    boundary_measure: float
    inradius: float
    max_tube_radius: float
    boundary_components: int
    angle_sums: dict[str, float] | None = None
    curvature_integrals: tuple[float, ...] | None = None
    tags: tuple[str, ...] = ()
    exact: dict[str, bool] = field(default_factory=dict)
    flags: tuple[str, ...] = ()

    def has(self, tag: str) -> bool:
        return tag == "any" or tag in self.tags

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "volume": self.volume,
            "boundary_measure": self.boundary_measure,
            "inradius": self.inradius,
            "max_tube_radius": self.max_tube_radius,
            "boundary_components": self.boundary_components,
            "angle_sums": self.angle_sums,
            "curvature_integrals": None if self.curvature_integrals is None else list(self.curvature_integrals),
            "tags": list(self.tags),
            "exact": dict(self.exact),
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeometricSummary":
        ci = data.get("curvature_integrals")
        return cls(
            dim=int(data["dim"]),
            volume=float(data["volume"]),
            boundary_measure=float(data["boundary_measure"]),
            inradius=float(data["inradius"]),
            max_tube_radius=float(data["max_tube_radius"]),
            boundary_components=int(data.get("boundary_components", 1)),
            angle_sums=data.get("angle_sums"),
            curvature_integrals=None if ci is None else tuple(float(x) for x in ci),
            tags=tuple(data.get("tags", ())),
            exact=dict(data.get("exact", {})),
            flags=tuple(data.get("flags", ())),
        )

    def with_overrides(self, overrides: dict) -> "GeometricSummary":
        merged = self.to_dict()
        merged.update(overrides)
        return GeometricSummary.from_dict(merged)


def _all_exact(*names: str, value: bool = True) -> dict[str, bool]:
    return {n: value for n in names}


_FIELDS = ("volume", "boundary_measure", "inradius", "max_tube_radius",
           "angle_sums", "curvature_integrals")


def summarize(domain: Domain) -> GeometricSummary:
    """Compute every geometric scalar the bounds need."""
    if isinstance(domain, Box):
        return _summarize_box(domain)
    if isinstance(domain, Disk):
        r = domain.radius
        return GeometricSummary(
            dim=2, volume=math.pi * r * r, boundary_measure=TWO_PI * r, inradius=r,
            max_tube_radius=r, boundary_components=1, curvature_integrals=(TWO_PI,),
            tags=("convex", "classS", "C2", "meanconvex", "planar"),
            exact=_all_exact(*_FIELDS))
    if isinstance(domain, Annulus):
        a, b = domain.r_in, domain.r_out
        return GeometricSummary(
            dim=2, volume=math.pi * (b * b - a * a), boundary_measure=TWO_PI * (a + b),
            inradius=(b - a) / 2, max_tube_radius=(b - a) / 2, boundary_components=2,
            curvature_integrals=(0.0,), tags=("classS", "C2", "planar"),
            exact=_all_exact(*_FIELDS))
    if isinstance(domain, Polygon):
        return _summarize_polygon(domain)
    if isinstance(domain, SmoothCurveDomain):
        return _summarize_curve(domain)
    raise UnsupportedDomainError(f"unknown domain type {type(domain).__name__}")


def _summarize_box(box: Box) -> GeometricSummary:
    L = np.asarray(box.lengths)
    d = box.dim
    volume = float(np.prod(L))
    if d == 1:
        boundary = 2.0
    else:
        boundary = float(sum(2 * np.prod(np.delete(L, i)) for i in range(d)))
    inradius = float(L.min()) / 2
    tags = ["convex", "classS"]
    angle_sums = None
    if d == 2:
        tags += ["polygon", "planar"]
        angle_sums = {"S_A": 4.0, "S_B": 0.0}
    return GeometricSummary(
        dim=d, volume=volume, boundary_measure=boundary, inradius=inradius,
        max_tube_radius=inradius, boundary_components=1, angle_sums=angle_sums,
        tags=tuple(tags), exact=_all_exact(*_FIELDS))


# -- polygons ---------------------------------------------------------------


def _segment_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each point (n, 2) to each segment [a_i, b_i]; shape (n, m)."""
    p = points[:, None, :]
    ab = (b - a)[None, :, :]
    ap = p - a[None, :, :]
    denom = np.einsum("ijk,ijk->ij", ab, ab)
    s = np.clip(np.einsum("ijk,ijk->ij", ap, ab) / denom, 0.0, 1.0)
    closest = a[None, :, :] + s[..., None] * ab
    return np.linalg.norm(p - closest, axis=2)


def polygon_boundary_distance(poly: Polygon, points: np.ndarray) -> np.ndarray:
    v = poly.array
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts))
    for lo in range(0, len(pts), 4096):
        chunk = pts[lo:lo + 4096]
        out[lo:lo + 4096] = _segment_distances(chunk, v, np.roll(v, -1, axis=0)).min(axis=1)
    return out


def _inward_bisectors(poly: Polygon) -> np.ndarray:
    v = poly.array
    w = np.roll(v, -1, axis=0) - v
    w /= np.linalg.norm(w, axis=1)[:, None]
    half = poly.interior_angles() / 2
    c, s = np.cos(half), np.sin(half)
    return np.column_stack([c * w[:, 0] - s * w[:, 1], s * w[:, 0] + c * w[:, 1]])


def bisector_intersections(poly: Polygon) -> np.ndarray:
    """Intersection points of consecutive inward angle-bisector rays."""
    v = poly.array
    d = _inward_bisectors(poly)
    pts = []
    n = len(v)
    for i in range(n):
        j = (i + 1) % n
        mat = np.column_stack([d[i], -d[j]])
        if abs(np.linalg.det(mat)) < 1e-14:
            continue
        s, t = np.linalg.solve(mat, v[j] - v[i])
        if s > 0 and t > 0:
            pts.append(v[i] + s * d[i])
    return np.asarray(pts).reshape(-1, 2)


def _polygon_inradius(poly: Polygon) -> tuple[float, np.ndarray]:
    v = poly.array
    if poly.is_convex:
        # Chebyshev centre: maximise r subject to n_i . x + r <= n_i . v_i
        e = np.roll(v, -1, axis=0) - v
        normals = np.column_stack([e[:, 1], -e[:, 0]]) / np.linalg.norm(e, axis=1)[:, None]
        a_ub = np.column_stack([normals, np.ones(len(v))])
        b_ub = np.einsum("ij,ij->i", normals, v)
        res = linprog([0, 0, -1], A_ub=a_ub, b_ub=b_ub, bounds=[(None, None)] * 3, method="highs")
        if res.success:
            return float(res.x[2]), res.x[:2]
    shape = shapely.Polygon(v)
    scale = float(np.ptp(v, axis=0).max())
    candidates = [np.asarray(shapely.maximum_inscribed_circle(shape, scale * 1e-6).coords[0])]
    inner = bisector_intersections(poly)
    if len(inner):
        inside = shapely.contains_xy(shape, inner[:, 0], inner[:, 1])
        candidates.extend(inner[inside])
    lo, hi = v.min(axis=0), v.max(axis=0)
    g = np.stack(np.meshgrid(np.linspace(lo[0], hi[0], 41), np.linspace(lo[1], hi[1], 41)), -1).reshape(-1, 2)
    g = g[shapely.contains_xy(shape, g[:, 0], g[:, 1])]
    if len(g):
        dist = polygon_boundary_distance(poly, g)
        candidates.extend(g[np.argsort(dist)[-5:]])

    def neg_dist(x):
        if not shapely.contains_xy(shape, x[0], x[1]):
            return 0.0
        return -float(polygon_boundary_distance(poly, x[None, :])[0])

    best_r, best_x = -1.0, None
    for c in candidates:
        res = minimize(neg_dist, c, method="Nelder-Mead",
                       options={"xatol": scale * 1e-13, "fatol": scale * 1e-15, "maxiter": 4000})
        x = res.x if -res.fun >= -neg_dist(c) else c
        r = -neg_dist(x)
        if r > best_r:
            best_r, best_x = r, x
    return best_r, best_x


def polygon_tube_radius(poly: Polygon, inradius: float | None = None) -> tuple[float, bool]:
    """Smallest boundary distance of the bisector intersections inside the polygon.

    Returns ``(h_tilde, fallback)``; ``fallback`` is True when no intersection
    lies inside the polygon and the inradius is returned instead.
    """
    pts = bisector_intersections(poly)
    shape = shapely.Polygon(poly.array)
    dist = np.empty(0)
    if len(pts):
        pts = pts[shapely.contains_xy(shape, pts[:, 0], pts[:, 1])]
        dist = polygon_boundary_distance(poly, pts)
        # intersections landing on the boundary (e.g. at a reflex vertex) are not interior points
        dist = dist[dist > 1e-12 * float(np.ptp(poly.array, axis=0).max())]
    if not len(dist):
        if inradius is None:
            inradius = _polygon_inradius(poly)[0]
        return inradius, True
    return float(dist.min()), False


def polygon_angle_sums(poly: Polygon) -> dict[str, float]:
    ang = poly.interior_angles()
    convex = ang[ang < math.pi]
    reflex = ang[ang > math.pi]
    return {"S_A": float(np.sum(1.0 / np.tan(convex / 2))),
            "S_B": float(np.sum((reflex - math.pi) / 2))}


def _summarize_polygon(poly: Polygon) -> GeometricSummary:
    v = poly.array
    volume = _signed_area(v)
    perimeter = float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())
    inradius, _ = _polygon_inradius(poly)
    h_tilde, fallback = polygon_tube_radius(poly, inradius)
    tags = ["classS", "polygon", "planar"]
    if poly.is_convex:
        tags.insert(0, "convex")
    exact = _all_exact(*_FIELDS)
    exact["inradius"] = poly.is_convex
    return GeometricSummary(
        dim=2, volume=volume, boundary_measure=perimeter, inradius=inradius,
        max_tube_radius=min(h_tilde, inradius), boundary_components=1,
        angle_sums=polygon_angle_sums(poly), tags=tuple(tags), exact=exact,
        flags=("h_tilde_fallback",) if fallback else ())


# -- smooth curves ------------------------------------------------------------


def _periodic_quadrature(domain: SmoothCurveDomain, integrand, rtol: float = 1e-12,
                         n0: int = 256, nmax: int = 1 << 17) -> float:
    n = n0
    prev = None
    while True:
        t = domain.nodes(n)
        val = float(np.sum(integrand(t)) * domain.period / n)
        if prev is not None:
            err = abs(val - prev) / max(abs(val), 1.0)
            if err <= rtol:
                return val
            if n >= nmax:
                raise QuadratureError("boundary quadrature did not converge", err)
        prev = val
        n *= 2


def curve_boundary_distance(domain: SmoothCurveDomain, points: np.ndarray, n: int = 8192) -> np.ndarray:
    ring = shapely.LinearRing(domain.polyline(n))
    pts = np.atleast_2d(points)
    return shapely.distance(ring, shapely.points(pts))


def _curve_medial_distance(domain: SmoothCurveDomain, rays: int = 720, samples: int = 8192) -> float:
    """Minimum over boundary points of the distance to the medial axis along the inward normal.

    Moving a distance ``s`` inward from ``p`` keeps ``p`` as the unique nearest
    boundary point exactly while no other boundary sample is closer than
    ``s``; the first failure is located by bisection on each ray.
    """
    t = domain.nodes(samples)
    r, d1, _ = domain.curve(t)
    tangent = d1 / np.linalg.norm(d1, axis=1)[:, None]
    inward = np.column_stack([-tangent[:, 1], tangent[:, 0]])
    diam = float(np.ptp(r, axis=0).max())
    tol = 1e-12 * diam
    best = math.inf
    for i in range(0, samples, max(samples // rays, 1)):
        p, nu = r[i], inward[i]

        def ok(s):
            q = p + s * nu
            return float(np.min(np.sum((r - q) ** 2, axis=1))) >= (s - tol) ** 2

        lo, hi = 0.0, min(diam, best)
        if ok(hi):
            continue
        while hi - lo > 1e-10 * diam:
            mid = 0.5 * (lo + hi)
            if ok(mid):
                lo = mid
            else:
                hi = mid
        best = min(best, lo)
    return best


def _curve_inradius(domain: SmoothCurveDomain) -> float:
    poly = domain.polyline(4096)
    shape = shapely.Polygon(poly)
    c = np.asarray(shapely.maximum_inscribed_circle(shape, float(np.ptp(poly, axis=0).max()) * 1e-6).coords[0])
    ring = shapely.LinearRing(domain.polyline(16384))

    def neg(x):
        if not shapely.contains_xy(shape, x[0], x[1]):
            return 0.0
        return -float(shapely.distance(ring, shapely.Point(x)))

    res = minimize(neg, c, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
    return float(max(-res.fun, -neg(c)))


def _summarize_curve(domain: SmoothCurveDomain) -> GeometricSummary:
    def area_integrand(t):
        r, d1, _ = domain.curve(t)
        return 0.5 * (r[:, 0] * d1[:, 1] - r[:, 1] * d1[:, 0])

    def length_integrand(t):
        return np.linalg.norm(domain.curve(t)[1], axis=1)

    def curvature_integrand(t):
        _, d1, d2 = domain.curve(t)
        return (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / np.linalg.norm(d1, axis=1) ** 2

    volume = _periodic_quadrature(domain, area_integrand)
    length = _periodic_quadrature(domain, length_integrand)
    total_curvature = _periodic_quadrature(domain, curvature_integrand)
    kappa = domain.curvature(domain.nodes(8192))
    kmax = float(np.abs(kappa).max())
    hbar = min(1.0 / kmax if kmax > 0 else math.inf, _curve_medial_distance(domain))
    inradius = _curve_inradius(domain)
    hbar = min(hbar, inradius)
    tags = ["classS", "C2", "planar"]
    if kappa.min() >= 0:
        tags = ["convex", "classS", "C2", "meanconvex", "planar"]
    exact = _all_exact(*_FIELDS, value=False)
    return GeometricSummary(
        dim=2, volume=volume, boundary_measure=length, inradius=inradius, max_tube_radius=hbar,
        boundary_components=1, curvature_integrals=(total_curvature,), tags=tuple(tags),
        exact=exact)


# ---------------------------------------------------------------------------
# Tubular neighbourhoods
# ---------------------------------------------------------------------------


class TubeEstimate(NamedTuple):
    value: float
    stderr: float
    exact: bool


def _contains(domain: Domain, pts: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0], pts[:, 1]
    if isinstance(domain, Disk):
        return x * x + y * y < domain.radius ** 2
    if isinstance(domain, Annulus):
        rr = x * x + y * y
        return (rr > domain.r_in ** 2) & (rr < domain.r_out ** 2)
    if isinstance(domain, Polygon):
        return shapely.contains_xy(shapely.Polygon(domain.array), x, y)
    if isinstance(domain, SmoothCurveDomain):
        return shapely.contains_xy(shapely.Polygon(domain.polyline(8192)), x, y)
    if isinstance(domain, Box) and domain.dim == 2:
        a, b = domain.lengths
        return (x > 0) & (x < a) & (y > 0) & (y < b)
    raise UnsupportedDomainError("Monte-Carlo tube volumes are implemented for planar domains")


def boundary_distance(domain: Domain, pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if isinstance(domain, Box):
        L = np.asarray(domain.lengths)
        return np.minimum(pts, L - pts).min(axis=1)
    if isinstance(domain, Disk):
        return np.abs(domain.radius - np.linalg.norm(pts, axis=1))
    if isinstance(domain, Annulus):
        rr = np.linalg.norm(pts, axis=1)
        return np.minimum(np.abs(rr - domain.r_in), np.abs(domain.r_out - rr))
    if isinstance(domain, Polygon):
        return polygon_boundary_distance(domain, pts)
    if isinstance(domain, SmoothCurveDomain):
        return curve_boundary_distance(domain, pts)
    raise UnsupportedDomainError(type(domain).__name__)


def _bounding_box(domain: Domain) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(domain, Box):
        return np.zeros(domain.dim), np.asarray(domain.lengths)
    if isinstance(domain, Disk):
        r = domain.radius
        return np.array([-r, -r]), np.array([r, r])
    if isinstance(domain, Annulus):
        r = domain.r_out
        return np.array([-r, -r]), np.array([r, r])
    pts = domain.array if isinstance(domain, Polygon) else domain.polyline(4096)
    return pts.min(axis=0), pts.max(axis=0)


def tube_volume_mc(domain: Domain, h: float, seed: int = 0, cells: int = 256) -> TubeEstimate:
    """Stratified (jittered-grid) estimate of ``|omega_h|`` with two samples per cell.

    The standard error uses the within-cell pair differences, which is
    unbiased for stratified sampling.
    """
    if h <= 0:
        raise ValueError("tube width must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = _bounding_box(domain)
    step = (hi - lo) / cells
    ii, jj = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
    corners = lo + np.column_stack([ii.ravel(), jj.ravel()]) * step
    ys = []
    for _ in range(2):
        pts = corners + rng.random(corners.shape) * step
        inside = _contains(domain, pts)
        y = np.zeros(len(pts))
        if inside.any():
            y[inside] = boundary_distance(domain, pts[inside]) <= h
        ys.append(y)
    cell_area = float(np.prod(step))
    y1, y2 = ys
    value = cell_area * float(np.sum(0.5 * (y1 + y2)))
    stderr = cell_area * math.sqrt(float(np.sum((y1 - y2) ** 2)) / 4.0)
    return TubeEstimate(value, stderr, False)


def tube_volume(domain: Domain, h: float, summary: GeometricSummary | None = None,
                seed: int = 0, return_error: bool = False):
    """Volume of ``omega_h``; closed form where known, otherwise a seeded estimate.

    With ``return_error=True`` a :class:`TubeEstimate` is returned so callers
    can see the standard error of the numeric path.
    """
    if not h > 0:
        raise ValueError(f"tube width must be positive, got {h}")
    est = _tube_closed_form(domain, h, summary)
    if est is None:
        est = tube_volume_mc(domain, h, seed=seed)
    return est if return_error else est.value


def _tube_closed_form(domain: Domain, h: float, summary: GeometricSummary | None) -> TubeEstimate | None:
    if isinstance(domain, Box):
        L = np.asarray(domain.lengths)
        inner = float(np.prod(np.clip(L - 2 * h, 0.0, None)))
        return TubeEstimate(float(np.prod(L)) - inner, 0.0, True)
    if isinstance(domain, Disk):
        r = domain.radius
        return TubeEstimate(math.pi * (r * r - max(r - h, 0.0) ** 2), 0.0, True)
    if isinstance(domain, Annulus):
        a, b = domain.r_in, domain.r_out
        if 2 * h >= b - a:
            return TubeEstimate(math.pi * (b * b - a * a), 0.0, True)
        return TubeEstimate(math.pi * ((a + h) ** 2 - a * a + b * b - (b - h) ** 2), 0.0, True)
    if summary is None:
        summary = summarize(domain)
    if h >= summary.inradius:
        return TubeEstimate(summary.volume, 0.0, True)
    if isinstance(domain, Polygon):
        if h < summary.max_tube_radius:
            s = summary.angle_sums
            return TubeEstimate(h * summary.boundary_measure - h * h * (s["S_A"] - s["S_B"]), 0.0, True)
        return None
    if isinstance(domain, SmoothCurveDomain):
        if h < summary.max_tube_radius:
            b = summary.boundary_components
            return TubeEstimate(h * summary.boundary_measure - math.pi * (2 - b) * h * h, 0.0, False)
        return None
    raise UnsupportedDomainError(type(domain).__name__)


def tube_function(domain: Domain, summary: GeometricSummary | None = None, seed: int = 0) -> Callable[[float], float]:
    if summary is None:
        summary = summarize(domain)
    return lambda h: tube_volume(domain, h, summary=summary, seed=seed)


class MinkowskiFit(NamedTuple):
    slope: float
    curvature_coefficient: float
    residuals: np.ndarray


def minkowski_content_fit(domain: Domain, h_grid: Sequence[float], summary: GeometricSummary | None = None) -> MinkowskiFit:
    """Least-squares fit ``|omega_h| ~ c1 h + c2 h^2``; ``c1`` estimates the Minkowski content."""
    h = np.asarray(h_grid, dtype=float)
    if h.ndim != 1 or len(h) < 2:
        raise ValueError("need at least two tube widths for the fit")
    if np.any(h <= 0) or np.any(np.diff(h) >= 0):
        raise ValueError("tube widths must be positive and strictly decreasing")
    if summary is None:
        summary = summarize(domain)
    if h[0] >= summary.max_tube_radius:
        raise ValueError("tube widths must lie below the maximal tube radius")
    vols = np.array([tube_volume(domain, x, summary=summary) for x in h])
    design = np.column_stack([h, h * h])
    coef, *_ = np.linalg.lstsq(design, vols, rcond=None)
    return MinkowskiFit(float(coef[0]), float(coef[1]), vols - design @ coef)


# ---------------------------------------------------------------------------
# Widths and curvature thresholds
# ---------------------------------------------------------------------------


def direction_width(domain: Domain, v: Sequence[float]) -> float:
    """Width ``sup {v . (x - y) : x, y in Omega}`` in the unit direction ``v``."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0:
        raise ValueError("direction must be nonzero")
    if abs(norm - 1) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if isinstance(domain, Box):
        if len(v) != domain.dim:
            raise ValueError("direction has the wrong dimension")
        return float(np.dot(np.abs(v), domain.lengths))
    if isinstance(domain, Disk):
        return 2 * domain.radius
    if isinstance(domain, Annulus):
        return 2 * domain.r_out
    pts = domain.array if isinstance(domain, Polygon) else domain.polyline(16384)
    proj = pts @ v
    width = float(proj.max() - proj.min())
    if isinstance(domain, SmoothCurveDomain):
        t = domain.nodes(16384)
        width = 0.0
        for sign in (1.0, -1.0):
            i = int(np.argmax(sign * proj))
            f = lambda s: -sign * float(domain.curve(np.array([s]))[0][0] @ v)
            h = domain.period / 16384
            res = minimize_scalar(f, bounds=(t[i] - h, t[i] + h), method="bounded",
                                  options={"xatol": 1e-12})
            width += -res.fun
    return width


def boundary_curvature_term(domain: Domain, summary: GeometricSummary | None = None,
                            h_samples: int = 65, boundary_samples: int = 4096) -> float:
    """``max |h k(x) / (1 - h k(x))|`` over boundary points and ``0 <= h <= hbar/2`` (planar)."""
    if isinstance(domain, (Polygon, Box)):
        raise UnsupportedDomainError("curvature is undefined on polygonal boundaries")
    if summary is None:
        summary = summarize(domain)
    hbar = summary.max_tube_radius
    if isinstance(domain, Disk):
        kappa = np.array([1.0 / domain.radius])
    elif isinstance(domain, Annulus):
        kappa = np.array([1.0 / domain.r_out, -1.0 / domain.r_in])
    else:
        kappa = domain.curvature(domain.nodes(boundary_samples))
    hs = np.linspace(0.0, hbar / 2, h_samples)
    hk = np.outer(hs, kappa)
    vals = np.abs(hk / (1 - hk))
    best = float(vals.max())
    if isinstance(domain, SmoothCurveDomain):
        # refine along the boundary around the best sample
        j = int(np.argmax(vals.max(axis=0)))
        t = domain.nodes(boundary_samples)
        step = domain.period / boundary_samples
        for h in (hs[-1], hs[int(np.argmax(vals[:, j]))]):
            def g(s):
                k = float(domain.curvature(np.array([s]))[0])
                return -abs(h * k / (1 - h * k))
            res = minimize_scalar(g, bounds=(t[j] - step, t[j] + step), method="bounded",
                                  options={"xatol": 1e-12})
            best = max(best, -res.fun)
    return best


def neumann_z0_threshold(domain: Domain, summary: GeometricSummary | None = None) -> float:
    """Smallest ``z`` from which the C^2 Neumann Riesz-mean bound applies (planar domains)."""
    if isinstance(domain, (Polygon, Box)):
        raise UnsupportedDomainError("the Neumann z0 threshold needs a C^2 boundary")
    if summary is None:
        summary = summarize(domain)
    m = boundary_curvature_term(domain, summary)
    return max(summary.max_tube_radius ** -2, (4.0 / 9.0) * m * m)


# ---------------------------------------------------------------------------
# JSON domain specs
# ---------------------------------------------------------------------------


def domain_from_spec(spec: dict) -> Domain:
    try:
        kind = spec["type"].lower()
        if kind == "box":
            return Box(tuple(spec["lengths"]))
        if kind == "disk":
            return Disk(spec["radius"])
        if kind == "annulus":
            return Annulus(spec["r_in"], spec["r_out"])
        if kind == "polygon":
            return Polygon(tuple(tuple(p) for p in spec["vertices"]))
        if kind == "curve":
            if "builtin" in spec:
                name, *args = spec["builtin"].split()
                if name != "ellipse" or len(args) != 2:
                    raise GeometryError(f"unknown built-in curve {spec['builtin']!r}")
                return SmoothCurveDomain.ellipse(float(args[0]), float(args[1]))
            return SmoothCurveDomain.from_table(spec["table"])
    except (KeyError, TypeError) as exc:
        raise GeometryError(f"malformed domain spec: {exc}") from exc
    raise GeometryError(f"unknown domain type {spec.get('type')!r}")


def domain_to_spec(domain: Domain) -> dict:
    if isinstance(domain, Box):
        return {"type": "box", "lengths": list(domain.lengths)}
    if isinstance(domain, Disk):
        return {"type": "disk", "radius": domain.radius}
    if isinstance(domain, Annulus):
        return {"type": "annulus", "r_in": domain.r_in, "r_out": domain.r_out}
    if isinstance(domain, Polygon):
        return {"type": "polygon", "vertices": [list(p) for p in domain.vertices]}
    if domain.spec is not None:
        return dict(domain.spec)
    return {"type": "curve", "name": domain.name}
