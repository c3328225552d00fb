"""Command-line front end: ``ccbif {verify,spectrum,scan,map,family-info}``.

Exit codes: 0 success, 2 usage or input error, 3 verification failure,
4 scan warning under ``--strict``. Every output file carries the run
configuration (a ``config`` key in JSON, a ``# config:`` line in CSV).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, bifurcation, families, nbody, spectral
from .errors import CCBifError, GridTooCoarse

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_STRICT = 0, 2, 3, 4

_SYMBOLIC = re.compile(r"^(-)?(?:sqrt(\d+(?:\.\d*)?)|(pi))(?:/(\d+(?:\.\d*)?))?$")


class UsageError(Exception):
    pass


def parse_number(text):
    """Decimal literal, or an exact form such as ``sqrt2/7`` or ``pi/3``."""
    s = text.strip().replace(" ", "")
    m = _SYMBOLIC.match(s)
    if m:
        sign, root, pi, den = m.groups()
        val = math.pi if pi else math.sqrt(float(root))
        if den:
            val /= float(den)
        return -val if sign else val
    try:
        return float(s)
    except ValueError:
        raise UsageError(f"cannot parse number {text!r}") from None


def parse_range(text):
    lo, sep, hi = text.partition(":")
    if not sep:
        raise UsageError(f"range must look like lo:hi, got {text!r}")
    lo, hi = parse_number(lo), parse_number(hi)
    if not hi > lo:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def parse_grid(text):
    parts = text.lower().split("x")
    try:
        n0, n1 = (int(parts[0]), int(parts[-1]))
    except ValueError:
        raise UsageError(f"grid must look like NxM, got {text!r}") from None
    if len(parts) > 2 or n0 < 2 or n1 < 2:
        raise UsageError(f"grid sizes must be >= 2, got {text!r}")
    return n0, n1


def _positive(name, value):
    if not value > 0:
        raise UsageError(f"{name} must be positive")
    return value


# -- shared plumbing -------------------------------------------------------------------

def run_config(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "handler"}
    cfg["version"] = __version__
    return cfg


def dumps_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def csv_text(config, header, rows):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def emit(text, path, stdout):
    if path:
        Path(path).write_text(text)
    else:
        stdout.write(text)


def build_point(args):
    """The FamilyPoint selected by ``--family/--param`` or ``--file``."""
    if getattr(args, "file", None) and args.family in (None, "csv"):
        q, m = nbody.read_configuration(args.file)
        if m is None:
            raise UsageError(f"{args.file}: masses are required")
        return families.FamilyPoint(None, q, m, nbody.lambda_of(q, m))
    if args.param is None:
        raise UsageError("--param is required with --family")
    if args.family == "two-squares":
        return families.two_squares_point(parse_number(args.param))
    if args.family == "rosette":
        vals = [parse_number(v) for v in args.param.split(",")]
        if len(vals) != 2:
            raise UsageError("rosette --param takes m0,m1")
        return families.rosette_point(*vals)
    raise UsageError("give --family two-squares|rosette with --param, or --file")


# -- commands ----------------------------------------------------------------------------

def cmd_verify(args, stdout):
    point = build_point(args)
    tol = _positive("--residual-tol", args.residual_tol)
    res = point.residual()
    ok = res <= tol
    doc = {
        "config": run_config(args),
        "lambda": point.lam,
        "residual": res,
        "residual_tol": tol,
        "pass": bool(ok),
    }
    if args.family == "rosette":
        doc["m2"] = float(point.masses[6])
    if args.family == "two-squares":
        doc["M_r"] = float(point.masses[0])
    if args.out:
        Path(args.out).write_text(dumps_json(doc))
    lines = [f"lambda   = {point.lam!r}", f"residual = {res:.3e}"]
    if "m2" in doc:
        lines.append(f"m2       = {doc['m2']!r}")
    if "M_r" in doc:
        lines.append(f"M_r      = {doc['M_r']!r}")
    lines.append("PASS" if ok else f"FAIL (residual exceeds {tol:.1e})")
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_spectrum(args, stdout):
    point = build_point(args)
    a = point.analyze(_positive("--tau-zero", args.tau_zero))
    cfg = run_config(args)
    if args.format == "csv":
        par = point.parameter
        par = par[-1] if isinstance(par, tuple) else par
        text = csv_text(cfg, ["parameter", "kernel_dim", "morse_index", "det_B", "min_abs_eig"],
                        [a.csv_row(float("nan") if par is None else float(par))])
    else:
        doc = {"config": cfg, "lambda": point.lam}
        doc.update(a.to_json())
        text = dumps_json(doc)
    emit(text, args.out, stdout)
    return EXIT_OK


def _scan_family(args):
    if args.family == "two-squares":
        return families.TwoSquaresFamily()
    if args.family == "rosette":
        if args.m0 is None:
            raise UsageError("rosette scans need --m0")
        return families.RosetteSlice(_positive("--m0", parse_number(args.m0)))
    raise UsageError(f"family {args.family!r} cannot be scanned continuously")


def cmd_scan(args, stdout):
    tau = _positive("--tau-zero", args.tau_zero)
    cfg = run_config(args)
    if args.family == "csv":
        if not args.file:
            raise UsageError("--family csv needs --file")
        pts = families.csv_family_load(args.file, _positive("--residual-tol", args.residual_tol))
        result = bifurcation.scan_points(pts, tau)
    else:
        if args.range is None:
            raise UsageError("--range lo:hi is required")
        lo, hi = parse_range(args.range)
        if args.steps < 2:
            raise UsageError("--steps must be >= 2")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GridTooCoarse)
            result = bifurcation.scan_1d(_scan_family(args), lo, hi, args.steps, tau,
                                         refine_levels=args.refine_levels)
    events = list(result.events)
    if args.format == "csv":
        rows = [[e.bracket[0], e.bracket[1], e.left_morse, e.right_morse, e.kernel_jump,
                 e.classification, e.bif_index[bifurcation.FREE_ORBIT]] for e in events]
        text = csv_text(cfg, ["lo", "hi", "left_morse", "right_morse", "kernel_jump",
                              "classification", "bif_index"], rows)
    else:
        text = dumps_json({
            "config": cfg,
            "events": [e.to_json() for e in events],
            "index_sum": bifurcation.index_sum_check(events).to_json(),
            "resolution": result.resolution,
            "warnings": result.warnings,
        })
    emit(text, args.out, stdout)
    if args.dump:
        families.csv_family_dump(
            [s.point for s in result.samples], args.dump,
            header_lines=["config: " + json.dumps(cfg, sort_keys=True),
                          "parameter,x1,y1,...,xN,yN,m1,...,mN"])
        spectra = args.dump + ".spectra.csv"
        Path(spectra).write_text(csv_text(
            cfg, ["parameter", "kernel_dim", "morse_index", "det_B", "min_abs_eig"],
            [s.analysis.csv_row(s.parameter) for s in result.samples]))
    if result.warnings:
        for w in result.warnings:
            print(f"warning: {w}", file=sys.stderr)
        if args.strict:
            return EXIT_STRICT
    return EXIT_OK


def cmd_map(args, stdout):
    tau = _positive("--tau-zero", args.tau_zero)
    ranges = [parse_range(r) for r in args.range.split(",")]
    if len(ranges) == 1:
        ranges *= 2
    if len(ranges) != 2 or min(r[0] for r in ranges) <= 0:
        raise UsageError("--range must be lo:hi or lo:hi,lo:hi with positive bounds")
    n0, n1 = parse_grid(args.grid)
    m0 = np.linspace(*ranges[0], n0)
    m1 = np.linspace(*ranges[1], n1)
    rmap = bifurcation.map_2d(m0, m1, tau)
    cfg = run_config(args)
    text = csv_text(cfg, ["m0", "m1", "morse_index", "kernel_flag", "det_B"], rmap.cell_rows())
    emit(text, args.out, stdout)
    regions_path = args.regions
    if regions_path is None and args.out:
        regions_path = str(Path(args.out).with_suffix("")) + ".regions.json"
    summary = {"config": cfg}
    summary.update(rmap.summary())
    slice_m0, changes = bifurcation.select_slice(rmap)
    summary["suggested_slice"] = {"m0": slice_m0, "index_changes": changes}
    if regions_path:
        Path(regions_path).write_text(dumps_json(summary))
    else:
        stdout.write(dumps_json(summary))
    return EXIT_OK


def cmd_family_info(args, stdout):
    point = build_point(args)
    doc = {"config": run_config(args), "family": args.family}
    doc.update(point.to_json())
    doc["trivial_isotropy"] = families.has_trivial_isotropy(point.positions)
    if args.family == "two-squares":
        doc["r0"] = families.locate_r0()
    emit(dumps_json(doc), args.out, stdout)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="ccbif",
        description="Bifurcations of planar central configurations along known families.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, families_=("two-squares", "rosette", "csv")):
        sp.add_argument("--family", choices=families_)
        sp.add_argument("--param", help="r, or m0,m1 for the rosette; accepts sqrt2/7, pi/3")
        sp.add_argument("--file", help="configuration JSON/CSV or CSV family")
        sp.add_argument("--tau-zero", type=float, default=spectral.TAU_ZERO)
        sp.add_argument("--residual-tol", type=float, default=families.RESIDUAL_TOL)
        sp.add_argument("--out")

    sp = sub.add_parser("verify", help="check the central-configuration condition")
    common(sp)
    sp.set_defaults(handler=cmd_verify)

    sp = sub.add_parser("spectrum", help="Hessian and B-matrix spectra")
    common(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(handler=cmd_spectrum)

    sp = sub.add_parser("scan", help="locate and classify bifurcations along a 1D family")
    common(sp)
    sp.add_argument("--range")
    sp.add_argument("--steps", type=int, default=512)
    sp.add_argument("--m0", help="fixed m0 for rosette scans over m1")
    sp.add_argument("--refine-levels", type=int, default=bifurcation.REFINE_LEVELS)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--dump", help="write grid points as a CSV family (plus spectra CSV)")
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(handler=cmd_scan)

    sp = sub.add_parser("map", help="Morse-index map of the rosette mass plane")
    sp.add_argument("--family", choices=("rosette",), default="rosette")
    sp.add_argument("--range", default="0.1:5")
    sp.add_argument("--grid", default="64x64")
    sp.add_argument("--tau-zero", type=float, default=spectral.TAU_ZERO)
    sp.add_argument("--out")
    sp.add_argument("--regions", help="region summary JSON (default: next to --out)")
    sp.set_defaults(handler=cmd_map)

    sp = sub.add_parser("family-info", help="dump one family point as JSON")
    common(sp, ("two-squares", "rosette"))
    sp.set_defaults(handler=cmd_family_info)
    return p


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args, stdout)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CCBifError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
