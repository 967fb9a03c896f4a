"""``spectral-bounds`` command line.

Exit codes: 0 success, 1 verification failure, 2 malformed input, 3 computation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _json
from .bessel import BesselConvergenceError
from .fem import EigensolverError, MeshError
from .geometry import GeometryError, QuadratureError, domain_from_spec, summarize
from .riesz import IncompleteSpectrumError, average, counting, legendre, partition_function, riesz_mean
from .spectra import Spectrum, SpectrumError, analytic_spectrum, normalize_bc
from .verify import (ALL_THEOREMS, Grid, SpectrumOptions, VerificationError, default_grid, evaluate_bounds,
                     reference_spectrum, report_table, verify_domain)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2, 3
SUBCOMMANDS = ("geometry", "spectrum", "bounds", "riesz", "verify", "report")
FORMATS = ("json", "csv", "tsv")
DEFAULT_SEED = 42


class InputError(ValueError):
    """Malformed command-line input (exit code 2)."""


@dataclass
class CliConfig:
    subcommand: str
    domain: str | None = None
    bc: str = "dirichlet"
    count: int = 500
    k: str | None = None
    z: str | None = None
    t: str | None = None
    w: str | None = None
    theorems: list[str] = field(default_factory=list)
    fmt: str = "json"
    seed: int = DEFAULT_SEED
    out: str | None = None
    spectrum: str | None = None
    geometry: str | None = None
    source: str = "auto"

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InputError(f"unknown subcommand {self.subcommand!r}")
        if self.fmt not in FORMATS:
            raise InputError(f"unknown format {self.fmt!r}")


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _load_json(text_or_path: str) -> dict:
    text = text_or_path.strip()
    try:
        if not text.startswith("{"):
            text = Path(text_or_path).read_text()
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {text_or_path!r}: {exc}") from exc


def parse_k_range(text: str) -> list[int]:
    """``A:B[:step]`` inclusive, or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            a, b = parts[:2]
            step = parts[2] if len(parts) == 3 else 1
            if step < 1 or a < 1 or b < a:
                raise ValueError
            return list(range(a, b + 1, step))
        ks = [int(p) for p in text.split(",")]
    except ValueError:
        raise InputError(f"bad k range {text!r}; expected A:B[:step] with 1 <= A <= B") from None
    if any(k < 1 for k in ks):
        raise InputError("k values must be >= 1")
    return ks


def parse_floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"bad {name} list {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise InputError(f"{name} list must hold finite numbers")
    return vals


def _domain(cfg: CliConfig):
    if not cfg.domain:
        raise InputError("--domain is required")
    return domain_from_spec(_load_json(cfg.domain))


def _summary(cfg: CliConfig, domain):
    geom = summarize(domain)
    if cfg.geometry:
        geom = geom.with_overrides(_load_json(cfg.geometry))
    return geom


def _spectrum(cfg: CliConfig, domain, count: int | None = None) -> Spectrum:
    if cfg.spectrum:
        spec = Spectrum.from_dict(_load_json(cfg.spectrum))
        if spec.bc != normalize_bc(cfg.bc):
            raise InputError("spectrum file has a different boundary condition")
        return spec
    count = count or cfg.count
    if cfg.source == "analytic":
        return analytic_spectrum(domain, cfg.bc, count)
    opts = SpectrumOptions(count=count, fem_count=min(count, SpectrumOptions.fem_count))
    if cfg.source == "fem":
        from .fem import fem_spectrum
        return fem_spectrum(domain, cfg.bc, count)
    return reference_spectrum(domain, cfg.bc, opts)


def _grid(cfg: CliConfig, geom, spectrum) -> Grid:
    if not (cfg.k or cfg.z or cfg.t):
        return default_grid(geom, spectrum)
    return Grid(tuple(parse_k_range(cfg.k)) if cfg.k else (),
                tuple(parse_floats(cfg.z, "z")) if cfg.z else (),
                tuple(parse_floats(cfg.t, "t")) if cfg.t else ())


def _table(header: list[str], rows: list[list], sep: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=sep, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_json.fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _run_geometry(cfg: CliConfig) -> tuple[str, int]:
    domain = _domain(cfg)
    geom = _summary(cfg, domain)
    data = geom.to_dict()
    if cfg.fmt == "json":
        return _json.dumps(data), EXIT_OK
    rows = [[k, v] for k, v in data.items() if not isinstance(v, (dict, list))]
    rows += [[f"angle_sums.{k}", v] for k, v in (data["angle_sums"] or {}).items()]
    return _table(["field", "value"], rows, "," if cfg.fmt == "csv" else "\t"), EXIT_OK


def _run_spectrum(cfg: CliConfig) -> tuple[str, int]:
    domain = _domain(cfg)
    spec = _spectrum(cfg, domain)
    if cfg.fmt == "json":
        return _json.dumps(spec.to_dict()), EXIT_OK
    rows = [[j + 1, v, e] for j, (v, e) in enumerate(zip(spec.values, spec.error_bounds))]
    return _table(["index", "value", "error_bound"], rows, "," if cfg.fmt == "csv" else "\t"), EXIT_OK


def _run_bounds(cfg: CliConfig) -> tuple[str, int]:
    domain = _domain(cfg)
    geom = _summary(cfg, domain)
    spec = _spectrum(cfg, domain)
    grid = _grid(cfg, geom, spec)
    results = evaluate_bounds(domain, cfg.bc, cfg.theorems or None, grid, spec, geom, cfg.seed)
    items = []
    for res, tid, params, note in results:
        if res is None:
            items.append({"theorem_id": tid, "applicable": False, "notes": [note]})
            continue
        d = res.to_dict()
        d["params"].update(params)
        if note:
            d["notes"].append(note)
        items.append(d)
    if cfg.fmt == "json":
        return _json.dumps(items), EXIT_OK
    rows = [[it["theorem_id"], it.get("side"), it.get("functional"),
             ";".join(f"{k}={_json.fmt(v)}" for k, v in it.get("query", {}).items()),
             it.get("value"), it["applicable"]] for it in items]
    header = ["theorem_id", "side", "functional", "query", "bound", "applicable"]
    return _table(header, rows, "," if cfg.fmt == "csv" else "\t"), EXIT_OK


def _run_riesz(cfg: CliConfig) -> tuple[str, int]:
    if cfg.spectrum:
        spec = Spectrum.from_dict(_load_json(cfg.spectrum))
    else:
        spec = _spectrum(cfg, _domain(cfg))
    rows = []
    if cfg.z:
        for z in parse_floats(cfg.z, "z"):
            rows.append(["riesz1", z, riesz_mean(spec, z)])
            rows.append(["counting", z, counting(spec, z)])
    if cfg.k:
        for k in parse_k_range(cfg.k):
            rows.append(["average", k, average(spec, k)])
    if cfg.t:
        for t in parse_floats(cfg.t, "t"):
            partial, tail = partition_function(spec, t)
            rows.append(["partition", t, partial])
            rows.append(["partition_tail_estimate", t, tail])
    if cfg.w:
        for w in parse_floats(cfg.w, "w"):
            rows.append(["legendre", w, legendre(spec, w)])
    if not rows:
        raise InputError("riesz needs at least one of --z, --k, --t, --w")
    if cfg.fmt == "json":
        return _json.dumps([{"functional": f, "argument": a, "value": v} for f, a, v in rows]), EXIT_OK
    return _table(["functional", "argument", "value"], rows, "," if cfg.fmt == "csv" else "\t"), EXIT_OK


def _run_verify(cfg: CliConfig) -> tuple[str, int]:
    domain = _domain(cfg)
    geom = _summary(cfg, domain)
    spec = _spectrum(cfg, domain)
    grid = _grid(cfg, geom, spec)
    rep = verify_domain(domain, cfg.bc, cfg.theorems or None, grid, spectrum=spec, summary=geom, seed=cfg.seed)
    code = EXIT_OK if rep.ok else EXIT_FAIL
    if cfg.fmt == "json":
        return _json.dumps(rep.to_dict()), code
    text = rep.to_csv()
    if cfg.fmt == "tsv":
        text = text.replace(",", "\t")
    return text, code


def _run_report(cfg: CliConfig) -> tuple[str, int]:
    domain = _domain(cfg)
    geom = _summary(cfg, domain)
    spec = _spectrum(cfg, domain)
    grid = _grid(cfg, geom, spec)
    rep = verify_domain(domain, cfg.bc, cfg.theorems or None, grid, spectrum=spec, summary=geom, seed=cfg.seed)
    s = rep.summary
    lines = [f"domain: {json.dumps(rep.domain)}", f"boundary condition: {rep.bc}",
             f"spectrum: {spec.count} values ({spec.source})",
             f"records: {s['total']} total, {s['passed']} passed, {s['failed']} failed, "
             f"{s['inapplicable']} inapplicable, {s['inconclusive']} inconclusive",
             f"worst margin: {_json.fmt(s['worst_margin'])}"]
    by_theorem: dict[str, list[int]] = {}
    for r in rep.records:
        c = by_theorem.setdefault(r.theorem_id, [0, 0, 0])
        c[0] += r.status == "pass"
        c[1] += r.status == "fail"
        c[2] += not r.applicable
    for tid, (p, f, na) in by_theorem.items():
        lines.append(f"  {tid:<14} pass {p:>5}  fail {f:>3}  inapplicable {na:>4}")
    for fit in rep.fits:
        lines.append(f"  fit {fit.theorem_id}: estimate {fit.estimate:.6g}, predicted {fit.prediction:.6g}")
    header, rows = report_table(spec, rep.records)
    tsv = _table(header, rows, "\t")
    text = "\n".join(lines) + "\n"
    if cfg.out:
        tsv_path = Path(cfg.out).with_suffix(".tsv")
        tsv_path.write_text(tsv)
        text += f"table written to {tsv_path}\n"
    else:
        text += "\n" + tsv
    return text, EXIT_OK if rep.ok else EXIT_FAIL


_RUNNERS = {"geometry": _run_geometry, "spectrum": _run_spectrum, "bounds": _run_bounds,
            "riesz": _run_riesz, "verify": _run_verify, "report": _run_report}


def run(cfg: CliConfig) -> tuple[int, str]:
    """Execute ``cfg``; returns ``(exit code, emitted text)``.  Errors become messages, not exceptions."""
    try:
        text, code = _RUNNERS[cfg.subcommand](cfg)
    except (InputError, GeometryError, SpectrumError, VerificationError, KeyError, TypeError) as exc:
        return EXIT_INPUT, f"error: {exc}\n"
    except (MeshError, EigensolverError, BesselConvergenceError, QuadratureError,
            IncompleteSpectrumError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return EXIT_COMPUTE, f"computation failed: {exc}\n"
    except ValueError as exc:
        return EXIT_INPUT, f"error: {exc}\n"
    return code, text


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectral-bounds",
                                description="Eigenvalue bounds for the Laplacian and their verification.")
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--domain", help="domain-spec JSON file or inline JSON")
        s.add_argument("--bc", default="dirichlet", help="dirichlet or neumann")
        s.add_argument("--count", type=int, default=500, help="number of reference eigenvalues")
        s.add_argument("--k", help="k range A:B[:step] or comma list")
        s.add_argument("--z", help="comma-separated Riesz-mean arguments")
        s.add_argument("--t", help="comma-separated heat-trace times")
        s.add_argument("--w", help="comma-separated Legendre arguments (riesz only)")
        s.add_argument("--theorems", default="", help=f"comma list from: {', '.join(ALL_THEOREMS)}")
        s.add_argument("--format", dest="fmt", choices=FORMATS, default="json")
        s.add_argument("--seed", type=int, default=DEFAULT_SEED)
        s.add_argument("--out", help="write output here instead of stdout")
        s.add_argument("--spectrum", help="spectrum JSON to use instead of computing one")
        s.add_argument("--geometry", help="geometric-summary JSON whose fields override computed ones")
        s.add_argument("--source", choices=("auto", "analytic", "fem"), default="auto")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    theorems = [t.strip() for t in args.theorems.split(",") if t.strip()]
    try:
        cfg = CliConfig(args.subcommand, args.domain, args.bc, args.count, args.k, args.z, args.t, args.w,
                        theorems, args.fmt, args.seed, args.out, args.spectrum, args.geometry, args.source)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code, text = run(cfg)
    if code in (EXIT_INPUT, EXIT_COMPUTE):
        sys.stderr.write(text)
        return code
    if cfg.out and cfg.subcommand != "report":
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
