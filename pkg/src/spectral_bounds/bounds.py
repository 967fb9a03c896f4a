"""Evaluable eigenvalue bounds.

Every function returns :class:`BoundResult` objects that carry the value,
which side of the true quantity it bounds, and the hypothesis under which it
is valid.  A violated hypothesis yields ``applicable=False`` with ``value``
left as ``None``; nothing is silently skipped.

Notation: ``V`` is the volume, ``P`` the boundary measure, ``r`` the
inradius, ``C_d = 4 pi^2 omega_d^(-2/d)`` the semiclassical constant and
``Y(k) = C_d (k/V)^(2/d)``.

The ``functional`` field names what is being bounded:

* ``average``      -- ``(1/k) sum_{j<=k} lambda_j``
* ``average_gap``  -- ``(1/k) sum_{j<=k} (lambda_j - lambda_1)``
* ``riesz1``       -- ``sum_j (z - lambda_j)_+``
* ``partition``    -- ``sum_j exp(-lambda_j t)``
* ``single``       -- a single eigenvalue, index in ``query["index"]``
* ``lambda1``      -- the first eigenvalue
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, getcontext
from typing import Callable


from .bessel import lambda1_ball
from .geometry import GeometricSummary

DIRICHLET = "dirichlet"
NEUMANN = "neumann"


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def unit_ball_volume(d: float) -> float:
    return math.pi ** (d / 2) / math.gamma(1 + d / 2)


def semiclassical_constant(d: int) -> float:
    """``C_d = 4 pi^2 omega_d^(-2/d)``; ``C_2 = 4 pi``."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return 4 * math.pi**2 * unit_ball_volume(d) ** (-2 / d)


def weyl_boundary_coefficient(d: int) -> float:
    """Coefficient of ``(P/V)(k/V)^(1/d)`` in the two-term Weyl expansion of Dirichlet averages."""
    cd, cd1 = semiclassical_constant(d), semiclassical_constant(d - 1)
    return cd ** ((d + 1) / 2) / (2 * (d + 1) * cd1 ** ((d - 1) / 2))


def second_term_ratio(d: int) -> float:
    """Ratio of the averaged-bound second-term coefficient to the Weyl one."""
    cd = semiclassical_constant(d)
    return 2 * math.sqrt(2 * cd / (d + 2)) / weyl_boundary_coefficient(d)


def convex_riesz_ratio(d: int) -> float:
    """Ratio of the convex Riesz-mean second-term coefficient to the Weyl boundary term."""
    num = 2 * math.sqrt(2 / (d + 2)) * (2 * math.pi) ** (-d) * unit_ball_volume(d)
    den = 0.25 * (2 / (d + 1)) * (2 * math.pi) ** (1 - d) * unit_ball_volume(d - 1)
    return num / den


def _cd_terms(d: int):
    c3 = 3.0 ** (1 / (d + 1))
    inner = (0.5 + c3 * (d + 2)) ** (d - 1) * (2 * (d + 2) * c3 + math.pi)
    return c3, inner


def neumann_spectral_constant(d: int) -> float:
    """Constant ``c_d`` bounding the Neumann spectral function near the boundary."""
    c3, inner = _cd_terms(d)
    return 4 * unit_ball_volume(d) * ((2 * math.pi) ** (-d) + d * (d + 2) * c3 * math.pi ** (-1 - d) * inner)


def neumann_spectral_constant_decimal(d: int, digits: int = 40) -> Decimal:
    """Same constant evaluated in decimal arithmetic (independent of binary rounding)."""
    getcontext().prec = digits
    pi = Decimal("3.141592653589793238462643383279502884197")
    c3 = Decimal(3) ** (Decimal(1) / Decimal(d + 1))
    # omega_d = pi^(d/2) / Gamma(1 + d/2), via the recursion omega_d = 2 pi / d * omega_{d-2}
    omega = Decimal(2) if d % 2 else Decimal(1)
    for m in range(2 if d % 2 == 0 else 1, d + 1, 2):
        if m == 1:
            continue
        omega = omega * 2 * pi / m
    inner = (Decimal("0.5") + c3 * (d + 2)) ** (d - 1) * (2 * (d + 2) * c3 + pi)
    return 4 * omega * ((2 * pi) ** (-d) + d * (d + 2) * c3 * pi ** (-1 - d) * inner)


def spectral_function_bound(mu: float, delta: float, d: int) -> dict[str, float]:
    """Interior bound on ``sum_{mu_j <= mu} v_j(x)^2`` at distance ``delta`` from the boundary."""
    if not (mu > 0 and delta > 0):
        raise ValueError("mu and delta must be positive")
    c3 = 3.0 ** (1 / (d + 1))
    omega = unit_ball_volume(d)
    main = (2 * math.pi) ** (-d) * omega * mu ** (d / 2)
    pref = d * (d + 2) * (2 * math.pi) ** (-d) * c3 * omega * (2 / math.pi * (d + 2) * c3 + 1) / delta
    corr = pref * (math.sqrt(mu) + (d + 2) * c3 / delta) ** (d - 1)
    return {"main": main, "correction": corr, "total": main + corr}


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Threshold:
    variable: str = ""
    relation: str = ""
    value: float | None = None
    description: str = "none"

    def to_dict(self) -> dict:
        return {"variable": self.variable, "relation": self.relation, "value": self.value,
                "description": self.description}


NO_THRESHOLD = Threshold()


@dataclass
class BoundResult:
    theorem_id: str
    bc: str
    side: str
    functional: str
    query: dict
    value: float | None
    applicable: bool = True
    threshold: Threshold = NO_THRESHOLD
    assumptions: tuple[str, ...] = ("any",)
    formula: str = ""
    notes: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.applicable and (self.value is None or not math.isfinite(self.value)):
            raise ValueError(f"{self.theorem_id}: applicable bound must have a finite value")

    def to_dict(self) -> dict:
        return {
            "theorem_id": self.theorem_id, "bc": self.bc, "side": self.side,
            "functional": self.functional, "query": dict(self.query), "value": self.value,
            "applicable": self.applicable, "threshold": self.threshold.to_dict(),
            "assumptions": list(self.assumptions), "formula": self.formula,
            "notes": list(self.notes), "params": dict(self.params),
        }


def _inapplicable(theorem_id, bc, side, functional, query, reason, threshold=NO_THRESHOLD,
                  assumptions=("any",), formula="", params=None) -> BoundResult:
    return BoundResult(theorem_id, bc, side, functional, query, None, False, threshold,
                       tuple(assumptions), formula, (reason,), dict(params or {}))


def _missing_tags(geom: GeometricSummary, tags) -> list[str]:
    return [t for t in tags if not geom.has(t)]


def _weyl(d: int, k: float, V: float) -> float:
    return semiclassical_constant(d) * (k / V) ** (2 / d)


# ---------------------------------------------------------------------------
# semiclassical references
# ---------------------------------------------------------------------------


def semiclassical(d: int, volume: float, k: int, boundary: float | None = None) -> dict:
    """One-term Weyl value (lower for Dirichlet averages, upper for Neumann) and two-term reference."""
    if d < 2:
        raise ValueError("bounds are formulated for d >= 2")
    one = d / (d + 2) * _weyl(d, k, volume)
    out = {"C_d": semiclassical_constant(d), "one_term": one}
    if boundary is not None:
        second = weyl_boundary_coefficient(d) * boundary / volume * (k / volume) ** (1 / d)
        out["two_term_dirichlet"] = one + second
        out["two_term_neumann"] = one - second
    return out


def bly_lower(d: int, volume: float, k: int) -> BoundResult:
    value = semiclassical(d, volume, k)["one_term"]
    return BoundResult("bly", DIRICHLET, "lower", "average", {"k": k}, value, formula="one-term Weyl")


def kroger_upper(d: int, volume: float, k: int) -> BoundResult:
    value = semiclassical(d, volume, k)["one_term"]
    return BoundResult("kroger", NEUMANN, "upper", "average", {"k": k}, value, formula="one-term Weyl")


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunctionNorms:
    l2_sq: float
    grad_l2_sq: float
    sup: float
    volume: float

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not (self.l2_sq > 0 and self.grad_l2_sq > 0 and self.sup > 0 and self.volume > 0):
            raise ValueError("test-function norms must be positive")
        if self.rho > 1 + 1e-12:
            raise ValueError("rho = l2/(V sup^2) cannot exceed 1")

    @property
    def rho(self) -> float:
        return self.l2_sq / (self.volume * self.sup**2)

    @property
    def rayleigh(self) -> float:
        return self.grad_l2_sq / self.l2_sq


def phi_h_norms(geom: GeometricSummary, tube: Callable[[float], float], h: float,
                profile: str = "linear") -> TestFunctionNorms:
    """Conservative norms of the boundary cut-off ``phi_h = f(dist/h)``.

    ``l2_sq`` is the lower bound ``V - |omega_h|``; ``grad_l2_sq`` is exact for
    the linear profile and an upper bound for the sine profile.
    """
    if not 0 < h <= geom.inradius:
        raise ValueError(f"cut-off width h={h} must lie in (0, inradius={geom.inradius}]")
    w = tube(h)
    V = geom.volume
    if w >= V:
        raise ValueError("tube fills the domain; the cut-off has no interior plateau")
    if profile == "linear":
        grad = w / h**2
    elif profile == "sine":
        grad = math.pi**2 * w / (4 * h**2)
    else:
        raise ValueError(f"unknown profile {profile!r}")
    return TestFunctionNorms(V - w, grad, 1.0, V)


# ---------------------------------------------------------------------------
# general test-function bounds
# ---------------------------------------------------------------------------


def avp_riesz_lower(norms: TestFunctionNorms, d: int, z: float) -> float:
    g = norms.rayleigh
    base = max(z - g, 0.0)
    return (2 / (d + 2)) * (2 * math.pi) ** (-d) * unit_ball_volume(d) * norms.l2_sq * base ** (d / 2 + 1) / norms.sup**2


def avp_average_upper(norms: TestFunctionNorms, d: int, k: int) -> float:
    return norms.rayleigh + d / (d + 2) * _weyl(d, k, norms.volume) * norms.rho ** (-2 / d)


def avp_partition_lower(norms: TestFunctionNorms, d: int, t: float) -> float:
    s2 = norms.sup**2
    V = norms.volume
    return (V - (norms.grad_l2_sq * t + V * s2 - norms.l2_sq) / s2) / (4 * math.pi * t) ** (d / 2)


def avp_bracket(norms: TestFunctionNorms, d: int, k: int, avg_k: float,
                form: str = "derived") -> tuple[float, float] | None:
    """Interval containing ``lambda_k`` and ``lambda_{k+1}``, or ``None`` when the root is imaginary.

    ``form="derived"`` shifts by the Rayleigh quotient ``G`` of the test
    function (substituting ``lambda_j - G`` into the Neumann-type bracket);
    ``form="stated"`` uses the unshifted bracket with ``G`` only inside the root.
    """
    g = norms.rayleigh
    y = _weyl(d, k, norms.volume) * norms.rho ** (-2 / d)
    if form == "derived":
        disc = 1 - (d + 2) / d * (avg_k - g) / y
        if disc < 0:
            return None
        r = math.sqrt(disc)
        return g + y * (1 - r), g + y * (1 + r)
    if form == "stated":
        disc = 1 - ((d + 2) / d * avg_k - g) / y
        if disc < 0:
            return None
        r = math.sqrt(disc)
        return y * (1 - r), y * (1 + r)
    raise ValueError(f"unknown bracket form {form!r}")


def dirichlet_avp(norms: TestFunctionNorms, d: int, *, z: float | None = None, k: int | None = None,
                  t: float | None = None, avg_k: float | None = None, lambda_k: float | None = None,
                  theorem_id: str = "thm2.1", params: dict | None = None,
                  bracket_form: str = "derived") -> list[BoundResult]:
    """Bounds from an arbitrary admissible test function."""
    params = dict(params or {})
    params.setdefault("rho", norms.rho)
    if not norms.rho < 1:
        raise ValueError("the test function must satisfy rho < 1")
    out: list[BoundResult] = []
    if z is not None:
        thr = Threshold("z", ">", norms.rayleigh, "z above the Rayleigh quotient gives a nonzero bound")
        out.append(BoundResult(theorem_id, DIRICHLET, "lower", "riesz1", {"z": z},
                               avp_riesz_lower(norms, d, z), threshold=thr,
                               formula="test-function Riesz lower bound", params=params))
    if k is not None and avg_k is None:
        out.append(BoundResult(theorem_id, DIRICHLET, "upper", "average", {"k": k},
                               avp_average_upper(norms, d, k), formula="test-function average bound",
                               params=params))
    if t is not None:
        out.append(BoundResult("cor2.2", DIRICHLET, "lower", "partition", {"t": t},
                               avp_partition_lower(norms, d, t), formula="linearised heat-trace bound",
                               params=params))
    if k is not None and avg_k is not None:
        thr = Threshold("lambda_k", ">=", norms.rayleigh, "lambda_k at least the Rayleigh quotient")
        if lambda_k is not None and lambda_k < norms.rayleigh:
            for idx, side in ((k, "lower"), (k + 1, "upper")):
                out.append(_inapplicable("cor2.3", DIRICHLET, side, "single", {"k": k, "index": idx},
                                         "lambda_k below the Rayleigh quotient", thr, params=params))
            return out
        br = avp_bracket(norms, d, k, avg_k, bracket_form)
        for idx, side, pos in ((k, "lower", 0), (k + 1, "upper", 1)):
            if br is None:
                out.append(_inapplicable("cor2.3", DIRICHLET, side, "single", {"k": k, "index": idx},
                                         "negative discriminant: bound not applicable at this k", thr,
                                         params=params))
            else:
                out.append(BoundResult("cor2.3", DIRICHLET, side, "single", {"k": k, "index": idx},
                                       br[pos], threshold=thr, formula=f"quadratic bracket ({bracket_form})",
                                       params=params))
    return out


# ---------------------------------------------------------------------------
# first-eigenfunction test function
# ---------------------------------------------------------------------------


def dirichlet_inradius(geom: GeometricSummary, lambda1: float, *, z: float | None = None,
                       k: int | None = None) -> list[BoundResult]:
    """Bounds using the first eigenfunction as test function (sup bound via the inradius)."""
    if not lambda1 > 0:
        raise ValueError("lambda1 must be positive")
    d, V, r = geom.dim, geom.volume, geom.inradius
    ball = lambda1_ball(d)
    lb, jb = ball["lambda1B"], abs(ball["J_at_sqrt"])
    out = []
    if z is not None:
        thr = Threshold("z", ">=", (d + 2) / (2 * r * r), "z >= (d+2)/(2 r^2)")
        if z < thr.value:
            out.append(_inapplicable("thm2.5", DIRICHLET, "lower", "riesz1", {"z": z}, "z below threshold", thr))
        else:
            val = max(z - lambda1, 0.0) ** (d / 2 + 1) * jb * r**d / ((d + 2) * d * lb ** ((d - 1) / 2))
            out.append(BoundResult("thm2.5", DIRICHLET, "lower", "riesz1", {"z": z}, val, threshold=thr,
                                   formula="inradius Riesz bound"))
        heat = lambda1 * (d / (2 * math.e)) ** (d / 2) * max(z / lambda1 - 1, 0.0) ** (d / 2 + 1) / math.gamma(d / 2 + 2)
        out.append(BoundResult("thm2.5", DIRICHLET, "lower", "riesz1", {"z": z}, heat,
                               formula="heat-kernel Riesz bound", params={"variant": "heat"}))
    if k is not None:
        cd = semiclassical_constant(d)
        val = (d / (d + 2) * cd * (k / V) ** (2 / d) * (2 * d * unit_ball_volume(d) * V / jb) ** (2 / d)
               * lb ** ((d - 1) / d) / (4 * math.pi**2 * r * r))
        out.append(BoundResult("thm2.5", DIRICHLET, "upper", "average_gap", {"k": k}, val,
                               formula="inradius average-gap bound"))
        heat = d / (d + 2) * cd * k ** (2 / d) * (math.e * lambda1 / (2 * d * math.pi))
        out.append(BoundResult("thm2.5", DIRICHLET, "upper", "average_gap", {"k": k}, heat,
                               formula="heat-kernel average-gap bound", params={"variant": "heat"}))
    return out


def lambda1_bounds(geom: GeometricSummary) -> list[BoundResult]:
    d, r = geom.dim, geom.inradius
    out = [BoundResult("thm2.5", DIRICHLET, "upper", "lambda1", {"index": 1},
                       lambda1_ball(d)["lambda1B"] / r**2, formula="inscribed-ball bound")]
    if geom.has("convex"):
        out.append(BoundResult("thm2.5", DIRICHLET, "lower", "lambda1", {"index": 1},
                               math.pi**2 / (4 * r * r), assumptions=("convex",),
                               formula="convex inradius lower bound"))
        out.append(BoundResult("thm2.4", DIRICHLET, "upper", "lambda1", {"index": 1},
                               4 * geom.boundary_measure**2 / geom.volume**2, assumptions=("convex",),
                               formula="convex perimeter bound"))
    return out


# ---------------------------------------------------------------------------
# convex domains
# ---------------------------------------------------------------------------


def convex_average_upper(d: int, V: float, P: float, k: float) -> float:
    cd = semiclassical_constant(d)
    return (d / (d + 2) * _weyl(d, k, V) + 2 * math.sqrt(2 * cd / (d + 2)) * (k / V) ** (1 / d) * P / V
            + 4 * P * P / (V * V))


def aaa_coefficient(alpha: float, d: int, form: str = "stated") -> float:
    """Coefficient of ``(2 pi)^-d omega_d P z^((d+1)/2)`` in the alpha-family convex Riesz bound.

    ``form="derived"`` keeps the factor ``2/(d+2)`` on the ``sqrt(alpha d)`` term
    that the stated form drops; the stated coefficient is never smaller.
    """
    s = math.sqrt(alpha * d)
    if form == "stated":
        return 1 / s + 2 * s
    if form == "derived":
        return 1 / s + 2 * s / (d + 2)
    raise ValueError(form)


def dirichlet_convex(geom: GeometricSummary, *, z: float | None = None, k: int | None = None,
                     alpha: float | None = None, aaa_form: str = "stated") -> list[BoundResult]:
    d, V, P, r = geom.dim, geom.volume, geom.boundary_measure, geom.inradius
    tags = ("convex",)
    out = []
    missing = _missing_tags(geom, tags)
    c = (2 * math.pi) ** (-d) * unit_ball_volume(d)
    if z is not None:
        thr = Threshold("z", ">=", (d + 2) / (2 * r * r), "z >= (d+2)/(2 r^2)")
        if missing:
            out.append(_inapplicable("thm2.4", DIRICHLET, "lower", "riesz1", {"z": z}, "domain not convex", thr, tags))
        elif z < thr.value:
            out.append(_inapplicable("thm2.4", DIRICHLET, "lower", "riesz1", {"z": z}, "z below threshold", thr, tags))
        else:
            val = 2 / (d + 2) * c * V * z ** (d / 2 + 1) - 2 * math.sqrt(2 / (d + 2)) * c * P * z ** ((d + 1) / 2)
            out.append(BoundResult("thm2.4", DIRICHLET, "lower", "riesz1", {"z": z}, val, threshold=thr,
                                   assumptions=tags, formula="convex two-term Riesz bound"))
        if alpha is not None:
            thr_a = Threshold("z", ">=", alpha * d / (r * r), "z >= alpha d / r^2")
            params = {"alpha": alpha, "form": aaa_form}
            if missing:
                out.append(_inapplicable("thm2.4", DIRICHLET, "lower", "riesz1", {"z": z}, "domain not convex",
                                         thr_a, tags, params=params))
            elif z < thr_a.value:
                out.append(_inapplicable("thm2.4", DIRICHLET, "lower", "riesz1", {"z": z}, "z below threshold",
                                         thr_a, tags, params=params))
            else:
                val = (2 / (d + 2) * c * V * z ** (d / 2 + 1)
                       - c * P * z ** ((d + 1) / 2) * aaa_coefficient(alpha, d, aaa_form))
                out.append(BoundResult("thm2.4", DIRICHLET, "lower", "riesz1", {"z": z}, val, threshold=thr_a,
                                       assumptions=tags, formula="alpha-family convex Riesz bound",
                                       params=params))
    if k is not None:
        if missing:
            out.append(_inapplicable("thm2.4", DIRICHLET, "upper", "average", {"k": k}, "domain not convex",
                                     assumptions=tags))
        else:
            out.append(BoundResult("thm2.4", DIRICHLET, "upper", "average", {"k": k},
                                   convex_average_upper(d, V, P, k), assumptions=tags,
                                   formula="convex two-term average bound"))
    return out


def slab_limit(d: int, lambda1_cross: float, vol_cross: float, perim_cross: float,
               kappa: float) -> tuple[float, float]:
    """Both sides of the convex average bound for a long cylinder ``Omega' x (0, L)`` as ``L -> oo``.

    ``kappa = k / (L |Omega'|)`` is held fixed; returns ``(lhs, rhs)``.
    """
    cd = semiclassical_constant(d)
    lhs = lambda1_cross + math.pi**2 * vol_cross**2 * kappa**2 / 3
    rhs = (d / (d + 2) * cd * kappa ** (2 / d)
           + 2 * perim_cross / vol_cross * math.sqrt(2 * cd / (d + 2)) * kappa ** (1 / d)
           + 4 * perim_cross**2 / vol_cross**2)
    return lhs, rhs


# ---------------------------------------------------------------------------
# tube-volume (class S) bounds
# ---------------------------------------------------------------------------


def h_of_k(d: int, V: float, k: float) -> float:
    """Optimal cut-off width ``(2 C_d/(d+2))^(-1/2) (k/V)^(-1/d)``."""
    return (2 * semiclassical_constant(d) / (d + 2)) ** -0.5 * (k / V) ** (-1 / d)


def remainder_tube(d: int, V: float, P: float, k: float, h: float, w: float) -> float | None:
    """Remainder ``R_k(h)`` of the class-S average bound given ``w = |omega_h|``."""
    if w >= V:
        return None
    a = 2 / (d + 2) * _weyl(d, k, V) + 1 / h**2
    return a * (h * P * w + V * (w - h * P)) / (V * (V - w))


def dirichlet_classS(geom: GeometricSummary, tube: Callable[[float], float], *, k: int | None = None,
                     t: float | None = None, partition_form: str = "derived") -> list[BoundResult]:
    d, V, P, r = geom.dim, geom.volume, geom.boundary_measure, geom.inradius
    tags = ("classS",)
    missing = _missing_tags(geom, tags)
    cd = semiclassical_constant(d)
    out = []
    if k is not None:
        kmin = V * r ** (-d) * ((d + 2) / (2 * cd)) ** (d / 2)
        thr = Threshold("k", ">=", kmin, "h(k) <= inradius")
        h = h_of_k(d, V, k)
        if missing:
            out.append(_inapplicable("thm2.7", DIRICHLET, "upper", "average", {"k": k}, "domain not in class S",
                                     thr, tags))
        elif k < kmin or h > r:
            out.append(_inapplicable("thm2.7", DIRICHLET, "upper", "average", {"k": k}, "k below threshold", thr, tags))
        else:
            rem = remainder_tube(d, V, P, k, h, tube(h))
            if rem is None:
                out.append(_inapplicable("thm2.7", DIRICHLET, "upper", "average", {"k": k},
                                         "tube fills the domain", thr, tags))
            else:
                val = d / (d + 2) * _weyl(d, k, V) + 2 * math.sqrt(2 * cd / (d + 2)) * P / V * (k / V) ** (1 / d) + rem
                out.append(BoundResult("thm2.7", DIRICHLET, "upper", "average", {"k": k}, val, threshold=thr,
                                       assumptions=tags, formula="tube-volume average bound",
                                       params={"h": h, "remainder": rem}))
    if t is not None:
        thr = Threshold("t", "<=", r * r, "0 < t <= r^2")
        if missing:
            out.append(_inapplicable("cor2.8", DIRICHLET, "lower", "partition", {"t": t}, "domain not in class S",
                                     thr, tags))
        elif not 0 < t <= r * r:
            out.append(_inapplicable("cor2.8", DIRICHLET, "lower", "partition", {"t": t}, "t above threshold",
                                     thr, tags))
        else:
            s = math.sqrt(t)
            w = tube(s)
            scale = (4 * math.pi * t) ** (d / 2)
            if partition_form == "derived":
                val = (V - 2 * w) / scale
            elif partition_form == "stated":
                val = (V - P * s + 2 * (s * P - w)) / scale
            else:
                raise ValueError(partition_form)
            out.append(BoundResult("cor2.8", DIRICHLET, "lower", "partition", {"t": t}, val, threshold=thr,
                                   assumptions=tags, formula=f"tube heat-trace bound ({partition_form})",
                                   params={"remainder": 2 * (s * P - w) / scale}))
    return out


# ---------------------------------------------------------------------------
# C^2 domains
# ---------------------------------------------------------------------------


def _curvature_sum(d: int, h: float, integrals) -> float:
    """``(1/d) sum_{j=2}^d binom(d,j) (-1)^(j-1) h^(j-2) I_{j-1}``."""
    total = 0.0
    for j in range(2, d + 1):
        total += math.comb(d, j) * (-1) ** (j - 1) * h ** (j - 2) * integrals[j - 2]
    return total / d


def c2_remainder(d: int, V: float, P: float, integrals, h: float) -> float | None:
    """Remainder from curvature integrals; ``None`` once the tube model fills the domain."""
    s = _curvature_sum(d, h, integrals)
    den = V * V - h * V * P - V * h * h * s
    if den <= 0:
        return None
    return (2 * P * P + 2 * (h * P + V) * s) / den


def c2_remainder_limit(d: int, V: float, P: float, integrals) -> float:
    return 2 * P * P / (V * V) - (d - 1) / V * integrals[0]


def dirichlet_c2(geom: GeometricSummary, *, k: int | None = None) -> list[BoundResult]:
    d, V, P = geom.dim, geom.volume, geom.boundary_measure
    hbar = geom.max_tube_radius
    cd = semiclassical_constant(d)
    out = []
    if k is None:
        return out
    tags = ("C2",)
    kmin = V * hbar ** (-d) * ((d + 2) / (2 * cd)) ** (d / 2)
    thr = Threshold("k", ">=", kmin, "h(k) <= hbar")
    if _missing_tags(geom, tags) or geom.curvature_integrals is None:
        out.append(_inapplicable("thm2.9", DIRICHLET, "upper", "average", {"k": k},
                                 "needs a C2 boundary with curvature integrals", thr, tags))
    elif k < kmin:
        out.append(_inapplicable("thm2.9", DIRICHLET, "upper", "average", {"k": k}, "k below threshold", thr, tags))
    else:
        h = h_of_k(d, V, k)
        rem = c2_remainder(d, V, P, geom.curvature_integrals, h)
        if rem is None:
            out.append(_inapplicable("thm2.9", DIRICHLET, "upper", "average", {"k": k}, "tube fills the domain",
                                     thr, tags))
        else:
            val = d / (d + 2) * _weyl(d, k, V) + 2 * math.sqrt(2 * cd / (d + 2)) * P / V * (k / V) ** (1 / d) + rem
            out.append(BoundResult("thm2.9", DIRICHLET, "upper", "average", {"k": k}, val, threshold=thr,
                                   assumptions=tags, formula="curvature-integral remainder",
                                   params={"h": h, "remainder": rem,
                                           "limit": c2_remainder_limit(d, V, P, geom.curvature_integrals)}))
    # mean-convex corollary: convex formula with a weaker threshold
    tags = ("C2", "meanconvex")
    radicand = (d + 2) / (2 * cd) * (V - 2 * hbar * P) / (hbar * hbar * V)
    notes = ()
    if hbar >= V / (2 * P):
        kmin2, desc = 1.0, "hbar >= V/(2P): all k"
    elif radicand <= 0:
        kmin2, desc = 1.0, "nonpositive radicand: all k"
        notes = ("threshold radicand is nonpositive; treated as vacuous",)
    else:
        kmin2, desc = V * radicand ** (d / 2), "k >= V((d+2)/(2C_d) (V-2 hbar P)/(hbar^2 V))^(d/2)"
    thr2 = Threshold("k", ">=", kmin2, desc)
    if _missing_tags(geom, tags):
        out.append(_inapplicable("cor2.10", DIRICHLET, "upper", "average", {"k": k}, "needs mean-convex C2",
                                 thr2, tags))
    elif k < kmin2:
        out.append(_inapplicable("cor2.10", DIRICHLET, "upper", "average", {"k": k}, "k below threshold",
                                 thr2, tags))
    else:
        out.append(BoundResult("cor2.10", DIRICHLET, "upper", "average", {"k": k},
                               convex_average_upper(d, V, P, k), threshold=thr2, assumptions=tags,
                               formula="convex two-term average bound", notes=notes))
    return out


# ---------------------------------------------------------------------------
# planar domains
# ---------------------------------------------------------------------------


def planar_remainder(V: float, P: float, c: float, h: float) -> float | None:
    den = V * (V - P * h + c * h * h)
    if den <= 0:
        return None
    return 2 * (P * P - c * V - c * P * h) / den


def planar_remainder_limit(V: float, P: float, c: float) -> float:
    return 2 * (P * P - c * V) / (V * V)


def _planar_head(V: float, P: float, k: float) -> float:
    return 2 * math.pi * k / V + math.sqrt(8 * math.pi) * P / V * math.sqrt(k / V)


def dirichlet_planar(geom: GeometricSummary, case: str, k: int, alpha: float = 0.5) -> BoundResult:
    """Planar average bounds: ``case`` is one of ``i``, ``ii``, ``iii``, ``iv``."""
    tid = f"thm2.11({case})"
    V, P = geom.volume, geom.boundary_measure
    q = {"k": k}
    if geom.dim != 2:
        return _inapplicable(tid, DIRICHLET, "upper", "average", q, "planar domains only", assumptions=("planar",))
    h = math.sqrt(V / (2 * math.pi * k))
    if case == "i":
        tags = ("C2",)
        hbar = geom.max_tube_radius
        thr = Threshold("k", ">=", V / (2 * math.pi * hbar**2), "k >= V/(2 pi hbar^2)")
        if _missing_tags(geom, tags):
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "needs a C2 boundary", thr, tags)
        if k < thr.value:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "k below threshold", thr, tags)
        c = math.pi * (2 - geom.boundary_components)
        rem = planar_remainder(V, P, c, h)
        if rem is None:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "tube fills the domain", thr, tags)
        return BoundResult(tid, DIRICHLET, "upper", "average", q, _planar_head(V, P, k) + rem, threshold=thr,
                           assumptions=tags, formula="planar C2 remainder",
                           params={"h": h, "remainder": rem, "limit": planar_remainder_limit(V, P, c)})
    if case == "ii":
        tags = ("C2",)
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        hbar = geom.max_tube_radius
        kmin = V / (2 * math.pi) * max(hbar**-2, (P / (alpha * V)) ** 2)
        thr = Threshold("k", ">=", kmin, "k >= V/(2 pi) max(hbar^-2, (P/(alpha V))^2)")
        params = {"alpha": alpha}
        if _missing_tags(geom, tags) or geom.boundary_components > 2:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "needs C2 with at most two boundary components",
                                 thr, tags, params=params)
        if k < kmin:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "k below threshold", thr, tags, params=params)
        return BoundResult(tid, DIRICHLET, "upper", "average", q,
                           _planar_head(V, P, k) + 2 * P * P / ((1 - alpha) * V * V), threshold=thr,
                           assumptions=tags, formula="planar two-component bound", params=params)
    if case == "iii":
        tags = ("convex",)
        if _missing_tags(geom, tags):
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "domain not convex", assumptions=tags)
        return BoundResult(tid, DIRICHLET, "upper", "average", q, _planar_head(V, P, k) + 4 * P * P / (V * V),
                           assumptions=tags, formula="planar convex bound")
    if case == "iv":
        tags = ("polygon",)
        ht = geom.max_tube_radius
        thr = Threshold("k", ">=", V / (2 * math.pi * ht**2), "k >= V/(2 pi htilde^2)")
        if _missing_tags(geom, tags) or geom.angle_sums is None:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "domain is not a polygon", thr, tags)
        if k < thr.value:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "k below threshold", thr, tags)
        c = geom.angle_sums["S_A"] - geom.angle_sums["S_B"]
        rem = planar_remainder(V, P, c, h)
        if rem is None:
            return _inapplicable(tid, DIRICHLET, "upper", "average", q, "tube fills the domain", thr, tags)
        return BoundResult(tid, DIRICHLET, "upper", "average", q, _planar_head(V, P, k) + rem, threshold=thr,
                           assumptions=tags, formula="polygon angle remainder",
                           params={"h": h, "remainder": rem, "limit": planar_remainder_limit(V, P, c)})
    raise ValueError(f"unknown planar case {case!r}")


# ---------------------------------------------------------------------------
# Neumann
# ---------------------------------------------------------------------------


def neumann_classical(d: int, V: float, *, k: int | None = None, mu_next: float | None = None,
                      avg_k: float | None = None, z: float | None = None, t: float | None = None,
                      widths: list[float] | None = None) -> list[BoundResult]:
    out = []
    if k is not None:
        y = _weyl(d, k, V)
        if mu_next is not None:
            val = d / (d + 2) * y * (1 - (mu_next / y - 1) ** 2)
            out.append(BoundResult("thm3.1", NEUMANN, "upper", "average", {"k": k}, val,
                                   formula="Kroger refinement with mu_{k+1}", params={"mu_next": mu_next}))
        if avg_k is not None:
            disc = 1 - (d + 2) / d * avg_k / y
            for idx, side, sgn in ((k, "lower", -1), (k + 1, "upper", 1)):
                q = {"k": k, "index": idx}
                if disc < 0:
                    out.append(_inapplicable("thm3.1", NEUMANN, side, "single", q, "negative discriminant"))
                else:
                    out.append(BoundResult("thm3.1", NEUMANN, side, "single", q, y * (1 + sgn * math.sqrt(disc)),
                                           formula="quadratic bracket"))
    if z is not None:
        cd = semiclassical_constant(d)
        one = 2 / (d + 2) * cd ** (-d / 2) * V * z ** (1 + d / 2)
        out.append(BoundResult("thm3.1", NEUMANN, "lower", "riesz1", {"z": z}, one, formula="one-term Riesz bound"))
        if widths:
            cd1 = semiclassical_constant(d - 1)
            best, best_w = -math.inf, None
            for w in widths:
                extra = (0.25 * (2 / (d + 1)) * cd1 ** (-(d - 1) / 2) * V / w * z ** ((d + 1) / 2)
                         - (2 * math.pi) ** (2 - d) * unit_ball_volume(d) * V / (96 * w * w) * z ** (d / 2))
                if max(extra, 0.0) > best:
                    best, best_w = max(extra, 0.0), w
            out.append(BoundResult("thm3.2", NEUMANN, "lower", "riesz1", {"z": z}, one + best,
                                   formula="two-term Riesz bound with direction width",
                                   params={"width": best_w}))
    if t is not None:
        out.append(BoundResult("thm3.1", NEUMANN, "lower", "partition", {"t": t}, V / (4 * math.pi * t) ** (d / 2),
                               formula="free heat trace"))
    return out


def neumann_c2(geom: GeometricSummary, tube: Callable[[float], float], z0: float, curvature_term: float, *,
               z: float | None = None, k: int | None = None) -> list[BoundResult]:
    """Upper Riesz and lower average bounds for Neumann eigenvalues on C^2 domains.

    ``curvature_term`` is ``max |h kappa/(1 - h kappa)|`` over the boundary and
    ``0 <= h <= hbar/2``; ``z0`` the matching threshold on ``z``.
    """
    d, V, P = geom.dim, geom.volume, geom.boundary_measure
    hbar = geom.max_tube_radius
    cd = semiclassical_constant(d)
    cdn = neumann_spectral_constant(d)
    tags = ("C2",)
    missing = _missing_tags(geom, tags)
    out = []

    def r_prime(zz):
        h = math.pi / (2 * math.sqrt(zz))
        return 2 * zz ** (1 + d / 2) * cdn * abs(tube(h) - h * P)

    if z is not None:
        thr = Threshold("z", ">=", z0, "z >= max(hbar^-2, (4/9) M^2)")
        if missing:
            out.append(_inapplicable("thm3.3", NEUMANN, "upper", "riesz1", {"z": z}, "needs a C2 boundary", thr, tags))
        elif z < z0:
            out.append(_inapplicable("thm3.3", NEUMANN, "upper", "riesz1", {"z": z}, "z below threshold", thr, tags))
        else:
            rp = r_prime(z)
            val = 2 / (d + 2) * cd ** (-d / 2) * V * z ** (1 + d / 2) + math.pi * P * cdn * z ** ((d + 1) / 2) + rp
            out.append(BoundResult("thm3.3", NEUMANN, "upper", "riesz1", {"z": z}, val, threshold=thr,
                                   assumptions=tags, formula="Neumann Riesz upper bound",
                                   params={"R_prime": rp, "c_d": cdn}))
    if k is not None:
        kmin = cdn * V * max(hbar ** (-d), (2 / 3) * curvature_term**d)
        thr = Threshold("k", ">=", kmin, "k >= c_d V max(hbar^-d, (2/3) M^d)")
        zk = cd * (k / V) ** (2 / d)
        notes = []
        if missing:
            out.append(_inapplicable("thm3.3", NEUMANN, "lower", "average", {"k": k}, "needs a C2 boundary", thr, tags))
        elif k < kmin:
            out.append(_inapplicable("thm3.3", NEUMANN, "lower", "average", {"k": k}, "k below threshold", thr, tags))
        elif zk < z0:
            out.append(_inapplicable("thm3.3", NEUMANN, "lower", "average", {"k": k},
                                     "z(k) below the Riesz threshold z0 although k meets its own threshold", thr, tags))
        else:
            kmin_z = V * cdn * z0 ** (d / 2)
            if abs(kmin_z - kmin) > 1e-12 * kmin:
                notes.append(f"k threshold differs from c_d V z0^(d/2) = {kmin_z:.6g}")
            rk = r_prime(zk) / k
            val = (d / (d + 2) * zk - math.pi * cdn * cd ** ((d + 1) / 2) * P / V * (k / V) ** (1 / d) - rk)
            out.append(BoundResult("thm3.3", NEUMANN, "lower", "average", {"k": k}, val, threshold=thr,
                                   assumptions=tags, formula="Neumann average lower bound", notes=tuple(notes),
                                   params={"R": rk, "c_d": cdn}))
    return out


# ---------------------------------------------------------------------------
# generalised Berezin-Li-Yau and single eigenvalues from averages
# ---------------------------------------------------------------------------


def bly_generalized(sum_mass: float, phi_l2_sq: float, d: int, R: float | None = None) -> dict[str, float]:
    """Lower bound on ``sum_j ||grad(phi f_j)||^2``.

    With ``R`` the fixed-radius bound is returned; without it the maximum over
    ``R``, attained at ``R^2 = C_d (sum_mass/phi_l2_sq)^(2/d)``.
    """
    if not (sum_mass >= 0 and phi_l2_sq > 0):
        raise ValueError("sum_mass must be >= 0 and phi_l2_sq > 0")
    cd = semiclassical_constant(d)
    if R is not None:
        if not R > 0:
            raise ValueError("R must be positive")
        val = -2 / (d + 2) * cd ** (-d / 2) * phi_l2_sq * R ** (d + 2) + R * R * sum_mass
        return {"R": R, "value": val}
    r_opt = math.sqrt(cd * (sum_mass / phi_l2_sq) ** (2 / d))
    val = d / (d + 2) * cd * phi_l2_sq ** (-2 / d) * sum_mass ** (1 + 2 / d)
    return {"R": r_opt, "value": val, "R_printed": math.sqrt(cd * sum_mass / phi_l2_sq)}


def bly_generalized_result(d: int, V: float, k: int, R: float | None = None) -> BoundResult:
    """Apply the generalised bound with ``phi = 1`` and ``f_j`` the Dirichlet eigenfunctions."""
    res = bly_generalized(float(k), V, d, R)
    params = {"R": res["R"], "optimal": R is None}
    return BoundResult("appA.1", DIRICHLET, "lower", "average", {"k": k}, res["value"] / k,
                       formula="Fourier-side lower bound", params=params)


def choose_l(k: int, d: int) -> int:
    e = 1 - 1 / (2 * d)
    l = int(math.floor(k**e + 0.5))
    if not 0.5 * k**e <= l <= 1.5 * k**e:
        raise AssertionError("window length outside the admissible range")
    return l


def single_from_averages(k: int, A: float, B: float, k0: int, d: int, volume: float) -> dict[str, float]:
    if k < k0:
        raise ValueError(f"k={k} below k0={k0}")
    if A < 0 or B < 0:
        raise ValueError("A and B must be nonnegative")
    cd = semiclassical_constant(d)
    V = volume
    main = cd * (k / V) ** (2 / d)
    c1 = 3 / (d + 2) * cd * V ** (-2 / d) + 2 * A * V ** (-1 / d)
    lin = (d + 1) / d * A * (k / V) ** (1 / d)
    c2 = 3 * A / (2 * d) * V ** (-1 / d)
    lower = main - c1 * k ** (3 / (2 * d)) + lin - c2 * k ** (1 / (2 * d)) - B
    upper = main + c1 * k ** (3 / (2 * d)) + lin + (c2 + 2 * B) * k ** (1 / (2 * d)) + B
    modulus = c1 * k ** (3 / (2 * d)) + (c2 + 2 * B) * k ** (1 / (2 * d)) + B
    return {"l": choose_l(k, d), "lower": lower, "upper": upper, "modulus": modulus, "center": main + lin}


def single_from_averages_results(k: int, A: float, B: float, k0: int, d: int, V: float,
                                 source: str) -> list[BoundResult]:
    params = {"A": A, "B": B, "k0": k0, "source": source}
    thr = Threshold("k", ">=", k0, "k >= k0")
    if k < k0:
        return [_inapplicable("appA.2", DIRICHLET, s, "single", {"k": k, "index": i}, "k below k0", thr,
                              params=params) for i, s in ((k, "lower"), (k + 1, "upper"))]
    l = choose_l(k, d)
    if 0 < k - l < k0:
        return [_inapplicable("appA.2", DIRICHLET, s, "single", {"k": k, "index": i},
                              "window start k - l below k0", thr, params=params)
                for i, s in ((k, "lower"), (k + 1, "upper"))]
    res = single_from_averages(k, A, B, k0, d, V)
    return [BoundResult("appA.2", DIRICHLET, "lower", "single", {"k": k, "index": k}, res["lower"],
                        threshold=thr, formula="windowed averages", params=params),
            BoundResult("appA.2", DIRICHLET, "upper", "single", {"k": k, "index": k + 1}, res["upper"],
                        threshold=thr, formula="windowed averages", params=params)]


def average_constants(geom: GeometricSummary, alpha: float = 0.5) -> tuple[float, float, int, str] | None:
    """Constants ``(A, B, k0, source)`` of a two-term average bound with constant remainder, if one applies."""
    d, V, P = geom.dim, geom.volume, geom.boundary_measure
    cd = semiclassical_constant(d)
    A = 2 * math.sqrt(2 * cd / (d + 2)) * P / V
    if geom.has("convex"):
        return A, 4 * P * P / (V * V), 1, "thm2.4"
    if d == 2 and geom.has("C2") and geom.boundary_components <= 2:
        hbar = geom.max_tube_radius
        kmin = V / (2 * math.pi) * max(hbar**-2, (P / (alpha * V)) ** 2)
        return A, 2 * P * P / ((1 - alpha) * V * V), int(math.ceil(kmin)), "thm2.11(ii)"
    return None
