"""Command-line front end: analyze, milnor, arc-check, arc-search, trace, dims.

All JSON output is byte-deterministic for identical input, seed and config
(sorted keys, fixed float repr), and every report embeds enough provenance
to re-run it exactly.

Exit codes: 0 success, 1 user error (parse failure, bad arguments),
2 analysis ran but every center was degenerate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import __version__, arcs, milnor, poly, tracer
from .poly import ParseError, Polynomial, RationalArc
from .tracer import TraceConfig


class UserError(Exception):
    """Invalid user input; reported on stderr with exit code 1."""


def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out_path: Optional[str]) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_vars(spec: str) -> List[str]:
    names = [v.strip() for v in spec.split(",") if v.strip()]
    if not names:
        raise UserError("--vars must list at least one variable name")
    if len(set(names)) != len(names):
        raise UserError("duplicate variable names")
    return names


def _parse_poly(text: str, var_names: Sequence[str]) -> Polynomial:
    try:
        return poly.parse(text, var_names)
    except ParseError as exc:
        raise UserError(f"polynomial parse error: {exc}") from exc


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UserError(f"invalid rational {text!r}") from exc


def _parse_center(text: str, n: int) -> Tuple[Fraction, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != n:
        raise UserError(f"center {text!r} has {len(parts)} coordinates, expected {n}")
    return tuple(_parse_rational(p) for p in parts)


def _parse_radii(spec: str) -> Tuple[float, float, int]:
    try:
        r0_s, factor_s, count_s = spec.split(":")
        r0, factor, count = float(r0_s), float(factor_s), int(count_s)
    except ValueError as exc:
        raise UserError(f"--radii must look like R0:factor:count, got {spec!r}") from exc
    if r0 <= 0 or factor <= 1 or count < 4:
        raise UserError("--radii requires R0 > 0, factor > 1, count >= 4")
    return r0, factor, count


# ---------------------------------------------------------------------------
# Arc-spec text format: per-variable term lists, e.g. "x: 1/2 t^-1; y: -1 t^1"
# ---------------------------------------------------------------------------


def parse_arc_spec(spec: str, var_names: Sequence[str]) -> RationalArc:
    n = len(var_names)
    index = {name: i for i, name in enumerate(var_names)}
    coeffs: dict = {}
    for clause in spec.split(";"):
        clause = clause.strip()
        if not clause:
            continue
        if ":" not in clause:
            raise UserError(f"arc clause {clause!r} is missing 'var:'")
        name, body = clause.split(":", 1)
        name = name.strip()
        if name not in index:
            raise UserError(f"unknown arc variable {name!r}")
        j = index[name]
        for coeff, k in _parse_arc_terms(body):
            if coeff == 0:
                continue
            vec = list(coeffs.get(k, (Fraction(0),) * n))
            vec[j] += coeff
            coeffs[k] = tuple(vec)
    return RationalArc(n, coeffs)


def _parse_arc_terms(body: str) -> List[Tuple[Fraction, int]]:
    import re

    token_re = re.compile(
        r"\s*(?P<sign>[+-])?\s*(?:(?P<num>\d+(?:/\d+)?)\s*\*?\s*)?"
        r"(?:t(?:\^(?P<exp>-?\d+))?)?"
    )
    terms: List[Tuple[Fraction, int]] = []
    pos = 0
    body = body.strip()
    while pos < len(body):
        m = token_re.match(body, pos)
        if not m or m.end() == pos:
            raise UserError(f"cannot parse arc terms at {body[pos:]!r}")
        sign, num, exp = m.group("sign"), m.group("num"), m.group("exp")
        has_t = "t" in body[m.start():m.end()]
        if num is None and not has_t:
            raise UserError(f"cannot parse arc terms at {body[pos:]!r}")
        coeff = Fraction(num) if num is not None else Fraction(1)
        if sign == "-":
            coeff = -coeff
        k = int(exp) if exp is not None else (1 if has_t else 0)
        terms.append((coeff, k))
        pos = m.end()
    return terms


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _trace_config(args, seed_default: int = 0) -> TraceConfig:
    cfg = TraceConfig(seed=getattr(args, "seed", None) or seed_default)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "tol", None) is not None:
        if args.tol <= 0:
            raise UserError("--tol must be positive")
        cfg = replace(cfg, tol=args.tol)
    if getattr(args, "radii", None) is not None:
        r0, factor, count = _parse_radii(args.radii)
        cfg = replace(cfg, r0=r0, radius_factor=factor, radius_count=count)
    if getattr(args, "grid", None) is not None:
        cfg = replace(cfg, grid=args.grid)
    return cfg


def _resolve_centers(args, f: Polynomial, cfg: TraceConfig) -> List[Tuple[Fraction, ...]]:
    n = f.num_vars
    centers: List[Tuple[Fraction, ...]] = []
    if getattr(args, "center", None):
        for c in args.center:
            centers.append(_parse_center(c, n))
    if getattr(args, "centers", None):
        spec = args.centers.strip()
        if spec.isdigit():
            count = int(spec)
            for i in range(count):
                centers.append(milnor.pick_generic_center(f, seed=cfg.seed + i))
        else:
            for c in spec.split(";"):
                if c.strip():
                    centers.append(_parse_center(c, n))
    if not centers:
        for i in range(3):
            centers.append(milnor.pick_generic_center(f, seed=cfg.seed + i))
    return centers


def _traces_csv(traces, num_vars: int, id_offset: int = 0) -> List[List]:
    rows = []
    for t in traces:
        for s in t.samples:
            rows.append([t.branch_id + id_offset, s.radius, *s.point, s.f_value,
                         s.malgrange, s.residual])
    return rows


def _write_csv(rows: List[List], num_vars: int, out_path: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["branch_id", "R"] + [f"x{i + 1}" for i in range(num_vars)] + ["f", "malgrange", "residual"]
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    _emit(buf.getvalue(), out_path)


def cmd_analyze(args) -> int:
    var_names = _parse_vars(args.vars)
    if len(var_names) < 2:
        raise UserError("analyze requires at least 2 variables")
    f = _parse_poly(args.poly, var_names)
    cfg = _trace_config(args)
    centers = _resolve_centers(args, f, cfg)

    if len(centers) == 1:
        report = tracer.s_a_estimate(f, centers[0], cfg)
        payload = report.to_dict()
        payload["mode"] = "single-center"
        statuses = [report.status]
        all_traces = [(report, 0)]
    else:
        sreport = tracer.s_infinity_estimate(f, centers, cfg)
        payload = sreport.to_dict()
        payload["mode"] = "multi-center"
        statuses = [r.status for r in sreport.per_center]
        all_traces = [(r, 1000 * i) for i, r in enumerate(sreport.per_center)]

    payload["polynomial"] = args.poly
    payload["vars"] = var_names
    payload["version"] = __version__

    if args.format == "csv":
        rows = []
        for report, offset in all_traces:
            rows.extend(_traces_csv(report.traces, f.num_vars, offset))
        _write_csv(rows, f.num_vars, args.out)
    else:
        _emit(_json_dumps(payload), args.out)

    if statuses and all(s != "ok" for s in statuses):
        return 2
    return 0


def cmd_milnor(args) -> int:
    var_names = _parse_vars(args.vars)
    f = _parse_poly(args.poly, var_names)
    if f.num_vars < 2:
        raise UserError("milnor requires at least 2 variables")
    center = _parse_center(args.center, f.num_vars) if args.center else (Fraction(0),) * f.num_vars
    pivot = milnor.PIVOT_MINORS if args.minors else (
        args.pivot - 1 if args.pivot is not None else milnor.default_pivot(f)
    )
    try:
        sys_ = milnor.milnor_equations([f], center, pivot=pivot)
    except (ValueError, IndexError) as exc:
        raise UserError(str(exc)) from exc
    payload = sys_.to_dict(var_names)
    payload["polynomial"] = args.poly
    payload["vars"] = var_names
    payload["version"] = __version__
    _emit(_json_dumps(payload), args.out)
    return 0


def cmd_arc_check(args) -> int:
    var_names = _parse_vars(args.vars)
    f = _parse_poly(args.poly, var_names)
    xi = parse_arc_spec(args.arc, var_names)
    try:
        report = arcs.check_membership(f, xi)
    except arcs.WindowViolationError as exc:
        raise UserError(str(exc)) from exc
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    payload = report.to_dict()
    payload["polynomial"] = args.poly
    payload["vars"] = var_names
    payload["arc"] = args.arc
    payload["version"] = __version__
    _emit(_json_dumps(payload), args.out)
    return 0


def cmd_arc_search(args) -> int:
    var_names = _parse_vars(args.vars)
    f = _parse_poly(args.poly, var_names)
    cfg = arcs.ArcSearchConfig(
        seed=args.seed or 0,
        starts=args.starts,
        tol=args.tol if args.tol is not None else arcs.ArcSearchConfig.tol,
    )
    try:
        found = arcs.search_arcs(f, cfg)
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    payload = {
        "candidates": [c.to_dict() for c in found],
        "config": cfg.to_dict(),
        "complete": False,  # the search never certifies exhaustiveness
        "polynomial": args.poly,
        "vars": var_names,
        "version": __version__,
    }
    _emit(_json_dumps(payload), args.out)
    return 0


def cmd_trace(args) -> int:
    var_names = _parse_vars(args.vars)
    if len(var_names) < 2:
        raise UserError("trace requires at least 2 variables")
    f = _parse_poly(args.poly, var_names)
    cfg = _trace_config(args)
    center = _parse_center(args.center, f.num_vars) if args.center else \
        milnor.pick_generic_center(f, seed=cfg.seed)
    try:
        traces = tracer.trace_branches(f, center, cfg)
    except tracer.DegenerateMilnorError as exc:
        sys.stderr.write(f"degenerate Milnor system: {exc}\n")
        return 2
    tracer.estimate_limits(traces, cfg)
    if args.format == "json":
        payload = {
            "branches": [
                {
                    "branch_id": t.branch_id,
                    "status": t.status,
                    "samples": [
                        {
                            "R": s.radius,
                            "x": list(s.point),
                            "f": s.f_value,
                            "malgrange": s.malgrange,
                            "residual": s.residual,
                        }
                        for s in t.samples
                    ],
                }
                for t in traces
            ],
            "center": [str(c) for c in center],
            "config": cfg.to_dict(),
            "polynomial": args.poly,
            "vars": var_names,
            "version": __version__,
        }
        _emit(_json_dumps(payload), args.out)
    else:
        _write_csv(_traces_csv(traces, f.num_vars), f.num_vars, args.out)
    return 0


def cmd_dims(args) -> int:
    try:
        dim_arc, dim_av = arcs.dims(args.n, args.d)
    except ValueError as exc:
        raise UserError(str(exc)) from exc
    _emit(_json_dumps({"arc": dim_arc, "av": dim_av, "n": args.n, "d": args.d,
                       "version": __version__}), args.out)
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(p, *, vars_required=True):
    p.add_argument("--vars", required=vars_required, help="comma-separated variable names, in order")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="write output to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="milnorarc",
        description="Estimate bifurcation values at infinity of a real polynomial",
    )
    parser.add_argument("--version", action="version", version=f"milnorarc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full pipeline over one or more centers")
    p.add_argument("poly")
    _add_common(p)
    p.add_argument("--center", action="append", help="explicit center 'c1,c2,...' (repeatable)")
    p.add_argument("--centers", help="count of seeded random centers, or 'c1,c2;c1,c2' explicit list")
    p.add_argument("--radii", help="radius schedule R0:factor:count")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("milnor", help="print the Milnor system for a center")
    p.add_argument("poly")
    _add_common(p)
    p.add_argument("--center", help="center 'c1,c2,...' (default all zeros)")
    p.add_argument("--pivot", type=int, default=None, help="1-based pivot variable")
    p.add_argument("--minors", action="store_true", help="use the maximal-minor description")
    p.set_defaults(func=cmd_milnor)

    p = sub.add_parser("arc-check", help="exact asymptotic membership check for an arc")
    p.add_argument("poly")
    p.add_argument("arc", help="arc spec, e.g. 'x: 1/2 t^-1; y: -1 t^1'")
    _add_common(p)
    p.set_defaults(func=cmd_arc_check)

    p = sub.add_parser("arc-search", help="numerical multistart search for asymptotic arcs")
    p.add_argument("poly")
    _add_common(p)
    p.add_argument("--starts", type=int, default=32)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_arc_search)

    p = sub.add_parser("trace", help="emit per-branch samples as CSV or JSON")
    p.add_argument("poly")
    _add_common(p)
    p.add_argument("--center", help="center 'c1,c2,...' (default: seeded generic draw)")
    p.add_argument("--radii", help="radius schedule R0:factor:count")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("dims", help="coefficient-space dimension comparison")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dims)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UserError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except milnor.DegenerateCenterError as exc:
        sys.stderr.write(f"error: {exc}\n")
        for line in exc.diagnostics:
            sys.stderr.write(f"  {line}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
