"""Check bounds against reference spectra, fit remainder limits, and test the averaged variational principle on matrices."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import bounds as B
from ._json import fmt
from .fem import fem_spectrum
from .geometry import (Annulus, Box, Disk, Domain, GeometricSummary, Polygon,
                       UnsupportedDomainError, boundary_curvature_term, direction_width, domain_to_spec,
                       neumann_z0_threshold, summarize, tube_function)
from .riesz import average, partition_function, riesz_mean
from .spectra import Spectrum, SpectrumError, analytic_spectrum, normalize_bc

DIRICHLET_THEOREMS = ("bly", "thm2.1", "cor2.2", "cor2.3", "thm2.4", "thm2.5", "thm2.7", "cor2.8",
                      "thm2.9", "cor2.10", "thm2.11", "appA.1", "appA.2")
NEUMANN_THEOREMS = ("kroger", "thm3.1", "thm3.2", "thm3.3")
ALL_THEOREMS = DIRICHLET_THEOREMS + NEUMANN_THEOREMS

STATUSES = ("pass", "fail", "inapplicable", "inconclusive")
ANALYTIC_RTOL = 1e-9
PHI_WIDTHS = (0.05, 0.1, 0.2)
AAA_ALPHAS = (0.5, 1.0, 2.0)


class VerificationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# report types
# ---------------------------------------------------------------------------


@dataclass
class Record:
    theorem_id: str
    functional: str
    side: str
    query: dict
    bound: float | None
    reference: float | None
    margin: float | None
    applicable: bool
    status: str
    params: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "pass" and not self.applicable:
            raise ValueError("an inapplicable record cannot pass")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"theorem_id": self.theorem_id, "functional": self.functional, "side": self.side,
                "query": dict(self.query), "bound": self.bound, "reference": self.reference,
                "margin": self.margin, "applicable": self.applicable, "pass": self.passed,
                "status": self.status, "params": dict(self.params), "note": self.note}


@dataclass
class FitResult:
    theorem_id: str
    estimate: float
    prediction: float
    deviation: float
    kind: str

    def to_dict(self) -> dict:
        return {"theorem_id": self.theorem_id, "estimate": self.estimate, "prediction": self.prediction,
                "deviation": self.deviation, "kind": self.kind}


@dataclass
class VerificationReport:
    domain: dict
    bc: str
    source: str
    records: list[Record]
    fits: list[FitResult] = field(default_factory=list)

    @property
    def summary(self) -> dict:
        counts = {s: 0 for s in STATUSES}
        for r in self.records:
            counts[r.status] += 1
        margins = [r.margin for r in self.records if r.applicable and r.margin is not None]
        return {"total": len(self.records), "passed": counts["pass"], "failed": counts["fail"],
                "inapplicable": counts["inapplicable"], "inconclusive": counts["inconclusive"],
                "worst_margin": min(margins) if margins else None}

    @property
    def ok(self) -> bool:
        return not any(r.status == "fail" for r in self.records)

    def failures(self) -> list[Record]:
        return [r for r in self.records if r.status == "fail"]

    def to_dict(self) -> dict:
        return {"domain": self.domain, "bc": self.bc, "source": self.source, "summary": self.summary,
                "records": [r.to_dict() for r in self.records], "fits": [f.to_dict() for f in self.fits]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theorem_id", "query", "bound", "reference", "margin", "applicable", "pass"])
        for r in self.records:
            query = ";".join(f"{k}={fmt(v)}" for k, v in r.query.items())
            w.writerow([r.theorem_id, query, fmt(r.bound), fmt(r.reference), fmt(r.margin),
                        str(r.applicable).lower(), str(r.passed).lower()])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# grids and spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    ks: tuple[int, ...] = ()
    zs: tuple[float, ...] = ()
    ts: tuple[float, ...] = ()

    def __post_init__(self):
        if any(k < 1 for k in self.ks) or any(z < 0 for z in self.zs) or any(t <= 0 for t in self.ts):
            raise VerificationError("grid points must satisfy k >= 1, z >= 0, t > 0")

    @property
    def empty(self) -> bool:
        return not (self.ks or self.zs or self.ts)


@dataclass(frozen=True)
class SpectrumOptions:
    count: int = 500
    fem_count: int = 40
    target_h: float = 0.05
    refinements: int = 2


def default_grid(geom: GeometricSummary, spectrum: Spectrum, points: int = 60) -> Grid:
    """Log-spaced grids reaching as far as the spectrum supports.

    ``t`` starts at ``max(r^2 1e-4, 40/lambda_max)`` so the discarded heat-trace
    tail is below ``exp(-40)`` per missing eigenvalue.
    """
    vals = spectrum.values
    n = spectrum.count
    kmax = n - 1
    ks = sorted(set(range(1, min(20, kmax) + 1))
                | {int(round(x)) for x in np.geomspace(1, max(kmax, 1), points)})
    ks = [k for k in ks if 1 <= k <= kmax]
    top = float(vals[-1] - spectrum.error_bounds[-1])
    positive = vals[vals > 0]
    zlo = 0.5 * float(positive[0]) if len(positive) else 1.0
    zs = [float(z) for z in np.geomspace(zlo, 0.999 * top, points)] if top > zlo else []
    r2 = geom.inradius**2
    tmin = max(1e-4 * r2, 40.0 / float(vals[-1]))
    ts = [float(t) for t in np.geomspace(tmin, r2, points // 2)] if tmin < r2 else [r2]
    return Grid(tuple(ks), tuple(zs), tuple(ts))


def reference_spectrum(domain: Domain, bc: str, opts: SpectrumOptions | None = None) -> Spectrum:
    """Analytic spectrum where available, FEM otherwise."""
    opts = opts or SpectrumOptions()
    if isinstance(domain, (Box, Disk, Annulus)):
        return analytic_spectrum(domain, bc, opts.count)
    if isinstance(domain, Polygon):
        return fem_spectrum(domain, bc, opts.fem_count, target_h=opts.target_h, refinements=opts.refinements)
    raise SpectrumError(f"no reference spectrum for {type(domain).__name__}")


def _widths(domain: Domain, d: int) -> list[float]:
    if d == 2:
        angles = np.linspace(0.0, math.pi, 16, endpoint=False)
        dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    else:
        dirs = np.eye(d)
    out = []
    for v in dirs:
        try:
            out.append(direction_width(domain, v))
        except (UnsupportedDomainError, ValueError):
            continue
    return out


# ---------------------------------------------------------------------------
# reference values and comparison
# ---------------------------------------------------------------------------


class _Reference:
    """Reference values of each functional with the FEM error allowance."""

    def __init__(self, spectrum: Spectrum):
        self.s = spectrum
        self.vals = spectrum.values
        self.err = spectrum.error_bounds

    def value(self, functional: str, query: dict) -> tuple[float, float, float] | None:
        """``(value, error allowance, truncation allowance)`` or ``None`` when out of range."""
        v, e = self.vals, self.err
        n = len(v)
        if functional == "average":
            k = query["k"]
            return (average(self.s, k), float(e[:k].mean()), 0.0) if k <= n else None
        if functional == "average_gap":
            k = query["k"]
            return (average(self.s, k) - v[0], float(e[:k].mean() + e[0]), 0.0) if k <= n else None
        if functional in ("single", "lambda1"):
            i = query["index"]
            return (float(v[i - 1]), float(e[i - 1]), 0.0) if i <= n else None
        if functional == "riesz1":
            z = query["z"]
            if z >= v[-1] - e[-1]:
                return None
            return riesz_mean(self.s, z), float(e[v < z + e].sum()), 0.0
        if functional == "partition":
            t = query["t"]
            partial, tail = partition_function(self.s, t)
            return partial, float(np.sum(t * np.exp(-(v - e) * t) * e)), tail
        raise ValueError(functional)


def _compare(res: B.BoundResult, ref: _Reference, params: dict | None = None, note: str = "") -> Record:
    params = {**res.params, **(params or {})}
    if not res.applicable:
        return Record(res.theorem_id, res.functional, res.side, res.query, None, None, None, False,
                      "inapplicable", params, "; ".join(res.notes) or note)
    got = ref.value(res.functional, res.query)
    if got is None:
        return Record(res.theorem_id, res.functional, res.side, res.query, res.value, None, None, False,
                      "inapplicable", params, "reference spectrum does not reach this query")
    value, fem_err, trunc = got
    margin = res.value - value if res.side == "upper" else value - res.value
    tol = ANALYTIC_RTOL * max(abs(value), abs(res.value), 1e-300) + 1e-13
    if margin >= -tol:
        status = "pass"
    elif margin >= -(tol + fem_err) or (res.side == "lower" and margin >= -(tol + trunc)):
        # a truncated heat trace only underestimates the truth
        status = "inconclusive"
    else:
        status = "fail"
    notes = [n for n in (note, *res.notes) if n]
    return Record(res.theorem_id, res.functional, res.side, res.query, res.value, value, margin, True,
                  status, params, "; ".join(notes))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


class _Context:
    def __init__(self, domain: Domain, geom: GeometricSummary, spectrum: Spectrum, seed: int):
        self.domain = domain
        self.geom = geom
        self.spectrum = spectrum
        self.tube = tube_function(domain, geom, seed=seed)
        self.ref = _Reference(spectrum)
        self._z0 = None
        self._m = None

    @property
    def d(self):
        return self.geom.dim

    def curvature(self):
        if self._z0 is None:
            self._m = boundary_curvature_term(self.domain, self.geom)
            self._z0 = neumann_z0_threshold(self.domain, self.geom)
        return self._z0, self._m


def _phi_norms(ctx: _Context):
    out = []
    for h in PHI_WIDTHS:
        if h > ctx.geom.inradius:
            continue
        for profile in ("linear", "sine"):
            try:
                norms = B.phi_h_norms(ctx.geom, ctx.tube, h, profile)
            except ValueError:
                continue
            out.append(({"h": h, "profile": profile}, norms))
    return out


def _eval_dirichlet(tid: str, ctx: _Context, grid: Grid) -> Iterable[tuple[B.BoundResult, dict, str]]:
    g, d, V = ctx.geom, ctx.d, ctx.geom.volume
    vals = ctx.spectrum.values
    n = ctx.spectrum.count
    if tid == "bly":
        for k in grid.ks:
            yield B.bly_lower(d, V, k), {}, ""
    elif tid in ("thm2.1", "cor2.2", "cor2.3"):
        for params, norms in _phi_norms(ctx):
            if tid == "thm2.1":
                for z in grid.zs:
                    yield from ((r, params, "") for r in B.dirichlet_avp(norms, d, z=z, params=params))
                for k in grid.ks:
                    yield from ((r, params, "") for r in B.dirichlet_avp(norms, d, k=k, params=params))
            elif tid == "cor2.2":
                for t in grid.ts:
                    yield from ((r, params, "") for r in B.dirichlet_avp(norms, d, t=t, params=params))
            else:
                for k in grid.ks:
                    if k + 1 > n:
                        continue
                    avg = average(ctx.spectrum, k)
                    yield from ((r, params, "") for r in B.dirichlet_avp(norms, d, k=k, avg_k=avg,
                                                                       lambda_k=float(vals[k - 1]),
                                                                       params=params))
    elif tid == "thm2.4":
        yield from ((r, {}, "") for r in B.lambda1_bounds(g) if r.theorem_id == "thm2.4")
        for z in grid.zs:
            yield from ((r, {}, "") for r in B.dirichlet_convex(g, z=z))
            alphas = AAA_ALPHAS + ((d + 2) / (2 * d),)
            for a in alphas:
                for form in ("stated", "derived"):
                    yield from ((r, {}, "") for r in B.dirichlet_convex(g, z=z, alpha=a, aaa_form=form)
                                if "alpha" in r.params)
        for k in grid.ks:
            yield from ((r, {}, "") for r in B.dirichlet_convex(g, k=k))
    elif tid == "thm2.5":
        yield from ((r, {}, "") for r in B.lambda1_bounds(g) if r.theorem_id == "thm2.5")
        for z in grid.zs:
            yield from ((r, {}, "") for r in B.dirichlet_inradius(g, float(vals[0]), z=z))
        for k in grid.ks:
            yield from ((r, {}, "") for r in B.dirichlet_inradius(g, float(vals[0]), k=k))
    elif tid == "thm2.7":
        for k in grid.ks:
            for r in B.dirichlet_classS(g, ctx.tube, k=k):
                yield r, {}, ""
                if not r.applicable:
                    # fall back to the inradius bound, which holds for every k
                    lam1 = float(vals[0])
                    gap = B.dirichlet_inradius(g, lam1, k=k)[0]
                    fb = B.BoundResult("thm2.7", B.DIRICHLET, "upper", "average", {"k": k}, lam1 + gap.value,
                                       formula="inradius fallback", params={"fallback": "thm2.5"})
                    yield fb, {}, "thm2.7 inapplicable; thm2.5 fallback"
    elif tid == "cor2.8":
        for t in grid.ts:
            yield from ((r, {}, "") for r in B.dirichlet_classS(g, ctx.tube, t=t))
    elif tid in ("thm2.9", "cor2.10"):
        for k in grid.ks:
            yield from ((r, {}, "") for r in B.dirichlet_c2(g, k=k) if r.theorem_id == tid)
    elif tid == "thm2.11":
        for k in grid.ks:
            for case in ("i", "ii", "iii", "iv"):
                yield B.dirichlet_planar(g, case, k), {}, ""
    elif tid == "appA.1":
        for k in grid.ks:
            opt = B.bly_generalized_result(d, V, k)
            yield opt, {}, ""
            for f in (0.5, 2.0):
                yield B.bly_generalized_result(d, V, k, R=f * opt.params["R"]), {}, ""
    elif tid == "appA.2":
        consts = B.average_constants(g)
        for k in grid.ks:
            if consts is None:
                for idx, side in ((k, "lower"), (k + 1, "upper")):
                    yield B._inapplicable("appA.2", B.DIRICHLET, side, "single", {"k": k, "index": idx},
                                          "no two-term average bound with constant remainder"), {}, ""
                continue
            A, Bc, k0, src = consts
            yield from ((r, {}, "") for r in B.single_from_averages_results(k, A, Bc, k0, d, V, src))
    else:
        raise VerificationError(f"unknown theorem id {tid!r}")


def _eval_neumann(tid: str, ctx: _Context, grid: Grid) -> Iterable[tuple[B.BoundResult, dict, str]]:
    g, d, V = ctx.geom, ctx.d, ctx.geom.volume
    vals = ctx.spectrum.values
    n = ctx.spectrum.count
    if tid == "kroger":
        for k in grid.ks:
            yield B.kroger_upper(d, V, k), {}, ""
    elif tid == "thm3.1":
        for k in grid.ks:
            if k + 1 > n:
                continue
            yield from ((r, {}, "") for r in B.neumann_classical(d, V, k=k, mu_next=float(vals[k]),
                                                                 avg_k=average(ctx.spectrum, k)))
        for z in grid.zs:
            yield from ((r, {}, "") for r in B.neumann_classical(d, V, z=z))
        for t in grid.ts:
            yield from ((r, {}, "") for r in B.neumann_classical(d, V, t=t))
    elif tid == "thm3.2":
        widths = _widths(ctx.domain, d)
        for z in grid.zs:
            yield from ((r, {}, "") for r in B.neumann_classical(d, V, z=z, widths=widths)
                        if r.theorem_id == "thm3.2")
    elif tid == "thm3.3":
        if not g.has("C2"):
            for k in grid.ks:
                yield B._inapplicable("thm3.3", B.NEUMANN, "lower", "average", {"k": k}, "needs a C2 boundary",
                                      assumptions=("C2",)), {}, ""
            return
        z0, m = ctx.curvature()
        for z in grid.zs:
            yield from ((r, {}, "") for r in B.neumann_c2(g, ctx.tube, z0, m, z=z))
        for k in grid.ks:
            yield from ((r, {}, "") for r in B.neumann_c2(g, ctx.tube, z0, m, k=k))
    else:
        raise VerificationError(f"unknown theorem id {tid!r}")


def _theorem_ids(bc: str, theorem_ids: Sequence[str] | None) -> list[str]:
    own = DIRICHLET_THEOREMS if bc == "dirichlet" else NEUMANN_THEOREMS
    ids = list(theorem_ids) if theorem_ids else list(own)
    for tid in ids:
        if tid not in ALL_THEOREMS:
            raise VerificationError(f"unknown theorem id {tid!r}")
    return ids


def evaluate_bounds(domain: Domain, bc: str, theorem_ids: Sequence[str] | None, grid: Grid, spectrum: Spectrum,
                    summary: GeometricSummary | None = None,
                    seed: int = 42) -> list[tuple[B.BoundResult | None, str, dict, str]]:
    """Evaluate bounds on a grid: ``(result, theorem_id, extra params, note)`` tuples.

    Spectral inputs that a bound itself depends on (``lambda_1`` and the
    ``k``-th average for brackets, ``mu_{k+1}``) are read from ``spectrum``.
    A theorem for the other boundary condition yields a single ``None`` entry.
    """
    bc = normalize_bc(bc)
    if grid.empty:
        raise VerificationError("verification grid is empty")
    geom = summary or summarize(domain)
    ids = _theorem_ids(bc, theorem_ids)
    own = DIRICHLET_THEOREMS if bc == "dirichlet" else NEUMANN_THEOREMS
    ctx = _Context(domain, geom, spectrum, seed)
    out = []
    for tid in ids:
        if tid not in own:
            out.append((None, tid, {}, f"theorem concerns the other boundary condition than {bc}"))
            continue
        gen = _eval_dirichlet(tid, ctx, grid) if bc == "dirichlet" else _eval_neumann(tid, ctx, grid)
        out.extend((res, tid, params, note) for res, params, note in gen)
    return out


def verify_domain(domain: Domain, bc: str, theorem_ids: Sequence[str] | None = None, grid: Grid | None = None,
                  spectrum_opts: SpectrumOptions | None = None, *, spectrum: Spectrum | None = None,
                  summary: GeometricSummary | None = None, seed: int = 42) -> VerificationReport:
    """Evaluate each requested bound on the grid and compare with a reference spectrum."""
    bc = normalize_bc(bc)
    geom = summary or summarize(domain)
    if grid is not None and grid.empty:
        raise VerificationError("verification grid is empty")
    if spectrum is None:
        spectrum = reference_spectrum(domain, bc, spectrum_opts)
    elif spectrum.bc != bc:
        raise VerificationError("spectrum boundary condition does not match")
    if grid is None:
        grid = default_grid(geom, spectrum)
    ids = _theorem_ids(bc, theorem_ids)
    ref = _Reference(spectrum)
    records: list[Record] = []
    for res, tid, params, note in evaluate_bounds(domain, bc, ids, grid, spectrum, geom, seed):
        if res is None:
            records.append(Record(tid, "-", "-", {}, None, None, None, False, "inapplicable", {}, note))
        else:
            records.append(_compare(res, ref, params, note))
    fits = []
    if bc == "dirichlet":
        tube = tube_function(domain, geom, seed=seed)
        for tid in ("thm2.7", "thm2.9", "thm2.11(i)", "thm2.11(iv)"):
            if tid.split("(")[0] in ids:
                try:
                    fits.append(asymptotic_fit(tid, geom, (1e2, 1e6), tube=tube))
                except (VerificationError, UnsupportedDomainError):
                    continue
    try:
        desc = domain_to_spec(domain)
    except Exception:  # descriptive only
        desc = {"type": type(domain).__name__}
    return VerificationReport(desc, bc, spectrum.source, records, fits)


# ---------------------------------------------------------------------------
# asymptotic fits
# ---------------------------------------------------------------------------


def _remainder(tid: str, geom: GeometricSummary, k: float, tube) -> float:
    d, V, P = geom.dim, geom.volume, geom.boundary_measure
    h = B.h_of_k(d, V, k)
    if tid == "thm2.7":
        return B.remainder_tube(d, V, P, k, h, tube(h))
    if tid == "thm2.9":
        return B.c2_remainder(d, V, P, geom.curvature_integrals, h)
    if tid == "thm2.11(i)":
        return B.planar_remainder(V, P, math.pi * (2 - geom.boundary_components), h)
    if tid == "thm2.11(iv)":
        return B.planar_remainder(V, P, geom.angle_sums["S_A"] - geom.angle_sums["S_B"], h)
    raise VerificationError(f"no remainder fit for {tid!r}")


def asymptotic_fit(theorem_id: str, geom: GeometricSummary, k_range: tuple[float, float],
                   tube=None, points: int = 40) -> FitResult:
    """Fit the large-``k`` behaviour of a remainder term and compare with its predicted limit.

    For limits, ``R(k)`` is fitted as a quadratic in ``k^(-1/d)`` and the
    intercept is the estimate.  For ``thm2.7`` the slope of
    ``log(|R(k)|/k^(1/d))`` against ``log k`` is returned with prediction
    ``-1/d`` (the remainder is bounded, hence ``o(k^(1/d))``).
    """
    lo, hi = k_range
    if not (lo >= 1 and hi >= 10 * lo):
        raise VerificationError("k range must span at least one decade")
    d, V, P = geom.dim, geom.volume, geom.boundary_measure
    req = {"thm2.7": "classS", "thm2.9": "C2", "thm2.11(i)": "C2", "thm2.11(iv)": "polygon"}
    if theorem_id not in req:
        raise VerificationError(f"no remainder fit for {theorem_id!r}")
    if not geom.has(req[theorem_id]) or (theorem_id.startswith("thm2.11") and d != 2):
        raise UnsupportedDomainError(f"{theorem_id} does not apply to this domain")
    if theorem_id == "thm2.9" and geom.curvature_integrals is None:
        raise UnsupportedDomainError("missing curvature integrals")
    if theorem_id == "thm2.7" and tube is None:
        raise VerificationError("thm2.7 fit needs a tube-volume function")
    ks = np.geomspace(lo, hi, points)
    R = np.array([_remainder(theorem_id, geom, k, tube) for k in ks])
    if theorem_id == "thm2.7":
        slope = float(np.polyfit(np.log(ks), np.log(np.abs(R) / ks ** (1 / d)), 1)[0])
        return FitResult(theorem_id, slope, -1 / d, slope + 1 / d, "slope")
    x = ks ** (-1 / d)
    coef = np.polyfit(x, R, 2)
    estimate = float(coef[-1])
    if theorem_id == "thm2.9":
        pred = B.c2_remainder_limit(d, V, P, geom.curvature_integrals)
    elif theorem_id == "thm2.11(i)":
        pred = B.planar_remainder_limit(V, P, math.pi * (2 - geom.boundary_components))
    else:
        pred = B.planar_remainder_limit(V, P, geom.angle_sums["S_A"] - geom.angle_sums["S_B"])
    return FitResult(theorem_id, estimate, pred, estimate - pred, "limit")


# ---------------------------------------------------------------------------
# finite-dimensional averaged variational principle
# ---------------------------------------------------------------------------


@dataclass
class TightFrameFamily:
    """Vectors ``f_xi`` (rows) with weights ``mu(xi)`` such that ``sum mu f f^T = C I``."""

    vectors: np.ndarray
    weights: np.ndarray
    constant: float
    tol: float = 1e-10

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.vectors),) or np.any(self.weights <= 0):
            raise VerificationError("one positive weight per frame vector is required")
        n = self.vectors.shape[1]
        # frame identity on each standard basis vector (and off-diagonal terms)
        op = (self.vectors * self.weights[:, None]).T @ self.vectors
        if not np.allclose(op, self.constant * np.eye(n), atol=self.tol * max(1.0, self.constant), rtol=0):
            raise VerificationError("frame is not tight")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @classmethod
    def standard(cls, n: int) -> "TightFrameFamily":
        return cls(np.eye(n), np.ones(n), 1.0)

    @classmethod
    def random(cls, n: int, m: int, rng: np.random.Generator, constant: float = 1.0) -> "TightFrameFamily":
        """``m`` random vectors made tight by the inverse square root of their frame operator."""
        if m < n:
            raise VerificationError("a frame needs at least as many vectors as the dimension")
        a = rng.standard_normal((m, n))
        w = rng.uniform(0.5, 2.0, m)
        op = (a * w[:, None]).T @ a
        evals, evecs = np.linalg.eigh(op)
        inv_sqrt = evecs @ np.diag(evals**-0.5) @ evecs.T
        return cls(math.sqrt(constant) * a @ inv_sqrt, w, constant)


def random_psd(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, n))
    return a @ a.T


def avp_finite_check(seed: int = 0, n: int = 8, k: int = 3, frame: TightFrameFamily | None = None,
                     matrix: np.ndarray | None = None, z_samples: int = 5, frame_size: int = 32,
                     rtol: float = 1e-10) -> dict:
    """Check both forms of the averaged variational principle for a symmetric PSD matrix.

    Form 1 sums over all frame vectors on the left and over those with
    ``z |f|^2 - Q(f) >= 0`` on the right, at ``z = lambda_{k+1}``.  Form 2
    compares the Riesz mean ``R_1(z)`` with the frame average of
    ``(z |f|^2 - Q(f))_+ / C`` at ``z`` sampled in ``[lambda_k, lambda_{k+1}]``
    (including both endpoints).
    """
    rng = np.random.default_rng(seed)
    H = random_psd(n, rng) if matrix is None else np.asarray(matrix, dtype=float)
    if H.shape != (n, n) and matrix is not None:
        n = H.shape[0]
    if not np.allclose(H, H.T):
        raise VerificationError("matrix must be symmetric")
    if not 1 <= k < n:
        raise VerificationError("need 1 <= k < n")
    if frame is None:
        frame = TightFrameFamily.random(n, frame_size, rng)
    if frame.dim != n:
        raise VerificationError("frame dimension does not match the matrix")
    lam, U = np.linalg.eigh(H)
    F, mu, C = frame.vectors, frame.weights, frame.constant
    coeff = (F @ U) ** 2  # |<f_xi, u_j>|^2
    norms = np.sum(F * F, axis=1)
    quad = np.einsum("ij,jk,ik->i", F, H, F)

    def form1(z):
        lhs = sum((z - lam[j]) * float(mu @ coeff[:, j]) for j in range(k))
        g = z * norms - quad
        rhs = float(np.sum(mu * np.where(g >= 0, g, 0.0)))
        return lhs, rhs

    zs = np.concatenate([[lam[k - 1], lam[k]], np.linspace(lam[k - 1], lam[k], z_samples + 2)[1:-1]])
    worst = math.inf
    rows = []
    for z in zs:
        lhs, rhs = form1(z)
        r1 = float(np.sum(np.clip(z - lam, 0.0, None)))
        frame_avg = float(np.sum(mu * np.clip(z * norms - quad, 0.0, None))) / C
        scale = max(abs(lhs), abs(rhs), abs(r1), 1.0)
        gap = min(lhs - rhs, r1 - frame_avg) / scale
        worst = min(worst, gap)
        rows.append({"z": float(z), "lhs": lhs, "rhs": rhs, "riesz": r1, "frame_average": frame_avg})
    lhs, rhs = form1(lam[k])
    return {"lhs": lhs, "rhs": rhs, "pass": bool(worst >= -rtol), "worst_relative_gap": worst,
            "samples": rows, "eigenvalues": lam.tolist()}


def report_table(spectrum: Spectrum, records: Sequence[Record]) -> tuple[list[str], list[list]]:
    """Plot-ready table of ``k``, the true average and each average bound (one column per bound)."""
    cols: dict[str, dict[int, float]] = {}
    for r in records:
        if r.functional != "average" or not r.applicable:
            continue
        label = r.theorem_id
        if r.params.get("h") is not None and r.theorem_id == "thm2.1":
            label += f"[h={r.params['h']},{r.params.get('profile')}]"
        if r.params.get("fallback"):
            label += "[fallback]"
        cols.setdefault(label, {})[r.query["k"]] = r.bound
    ks = sorted({k for c in cols.values() for k in c})
    header = ["k", "average"] + list(cols)
    rows = []
    for k in ks:
        if k > spectrum.count:
            continue
        rows.append([k, average(spectrum, k)] + [cols[c].get(k) for c in cols])
    return header, rows
