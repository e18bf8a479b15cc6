"""Command line entry point: ``python -m mordell_bounds <command> --input job.json``.

Exit codes: 0 success, 1 invalid input, 2 resource limit or search not fully
certified, 3 internal failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import mpmath

from . import __version__
from ._arith import rational_str, to_mpq
from .bounds import CurveDescriptor, general_bound, poly_curve_bound, transverse_bound
from .cm_lattice import (
    CMOrder,
    KLattice,
    gradodet_check,
    orthogonal_complement,
    successive_minima,
)
from .elliptic import EllipticCurveQ, make_point
from .errors import InvalidInputError, ResourceLimitError
from .heights import DEFAULT_EPS, canonical_height, h2_height, height_gap_check, point_embedding
from .search import MWInput, search_rational_points
from .selftest import run_selftest

SCHEMA = 1
EXIT_OK, EXIT_INVALID, EXIT_LIMIT, EXIT_INTERNAL = 0, 1, 2, 3
COMMANDS = ("bound", "polybound", "search", "lattice", "height", "selftest")


# ---------------------------------------------------------------------------
# serialization


def num(value, provenance="computed", unit="nats"):
    """Numeric report field; large or high-precision values become 17-digit strings."""
    if isinstance(value, (int,)) and not isinstance(value, bool) and abs(value) < 2**53:
        v = value
    else:
        x = mpmath.mpf(value)
        if mpmath.isfinite(x) and (x == 0 or 1e-300 < abs(x) < 1e15):
            v = float(mpmath.nstr(x, 17))
        else:
            v = mpmath.nstr(x, 17)
    return {"value": v, "unit": unit, "provenance": provenance}


def _knum(order, z):
    a, b = order.from_k(z)
    return [rational_str(a), rational_str(b)]


def _point(P):
    return None if P is None else [rational_str(P[0]), rational_str(P[1])]


def _trace(table):
    return {k: num(e.value, e.provenance, e.unit) for k, e in sorted(table.entries.items())}


# ---------------------------------------------------------------------------
# input parsing


def _load(path):
    try:
        if path == "-":
            doc = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read job file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise InvalidInputError(f'job must be a JSON object with "schema": {SCHEMA}')
    return doc


def _req(doc, key):
    if key not in doc:
        raise InvalidInputError(f"missing field {key!r}")
    return doc[key]


def _int(v, name):
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidInputError(f"{name} must be an integer")
    return v


def _real(v, name):
    try:
        q = to_mpq(v)
    except Exception as exc:
        raise InvalidInputError(f"{name}: {exc}") from exc
    return float(q)


def _curve(doc):
    c = _req(doc, "curve")
    if not isinstance(c, dict):
        raise InvalidInputError('"curve" must be {"A": int, "B": int}')
    return EllipticCurveQ(_int(_req(c, "A"), "A"), _int(_req(c, "B"), "B"))


def _order(doc):
    cm = doc.get("cm")
    if cm is None:
        return CMOrder(None)
    if not isinstance(cm, dict):
        raise InvalidInputError('"cm" must be {"D": int, "f": int} or null')
    return CMOrder(_int(_req(cm, "D"), "D"), _int(cm.get("f", 1), "f"))


def _poly(doc):
    p = _req(doc, "p")
    if not isinstance(p, list):
        raise InvalidInputError('"p" must be a list of coefficients p0, ..., pn')
    return [to_mpq(c) for c in p]


def _elem(e):
    if isinstance(e, int) and not isinstance(e, bool):
        return (e, 0)
    if isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in e):
        return (e[0], e[1])
    raise InvalidInputError(f"lattice entries are integers or [a, b] pairs meaning a + b*tau, got {e!r}")


def _echo(doc):
    return {k: doc[k] for k in sorted(doc)}


# ---------------------------------------------------------------------------
# commands


def _bound_report(rep):
    return {
        "branch": rep.branch,
        "bound_nats": None if rep.bound_nats is None else num(rep.bound_nats, "guarded-upper-bound"),
    }


def cmd_bound(doc, args):
    E = _curve(doc)
    desc = CurveDescriptor(
        N=_int(_req(doc, "N"), "N"),
        degC=_int(_req(doc, "degC"), "degC"),
        h2C=_real(_req(doc, "h2C"), "h2C"),
        hC=_real(doc.get("hC", 0), "hC"),
        tC=_int(doc["tC"], "tC") if "tC" in doc else None,
        rC=_int(doc["rC"], "rC") if "rC" in doc else None,
        r=_int(_req(doc, "r"), "r"),
        cm=_order(doc),
        curve_E=E,
    )
    if desc.tC == desc.N:
        rep = transverse_bound(desc)
    else:
        rep = general_bound(desc)
    return {
        "constants_trace": _trace(rep.trace),
        "bound": _bound_report(rep),
        "warnings": rep.warnings,
        "certification": {"status": "bound" if rep.bound_nats is not None else "empty-certificate"},
    }, EXIT_OK


def cmd_polybound(doc, args):
    E = _curve(doc)
    rep = poly_curve_bound(E, _order(doc), _poly(doc))
    return {
        "constants_trace": _trace(rep.trace),
        "bound": _bound_report(rep),
        "warnings": rep.warnings,
        "certification": {"status": "bound"},
    }, EXIT_OK


def cmd_search(doc, args):
    E = _curve(doc)
    gen = doc.get("generator")
    rank = _int(doc.get("rank", 0 if gen is None else 1), "rank")
    mw = MWInput(E, None if gen is None else tuple(gen), rank)
    cap = args.radius_cap if args.radius_cap is not None else _int(doc.get("radius_cap", 1000), "radius_cap")
    rep = search_rational_points(E, _order(doc), _poly(doc), mw, cap)
    found = [
        {"a": f["a"], "T1": f["T1"], "b": f["b"], "T2": f["T2"], "P1": _point(f["P1"]), "P2": _point(f["P2"])}
        for f in rep.points_found
    ]
    out = {
        "constants_trace": _trace(rep.bound_report.trace),
        "bound": _bound_report(rep.bound_report),
        "warnings": rep.warnings,
        "certification": {
            "certified_bound_nats": num(rep.certified_bound_nats, "guarded-upper-bound"),
            "hhat_G": num(rep.hhat_G, "canonical-height"),
            "safety_factor": rep.safety_factor,
            "required_coeff_radius": rep.required_coeff_radius,
            "searched_radius": rep.searched_radius,
            "fully_certified": rep.fully_certified,
            "points_found": found,
            "closure_candidates": [
                {"P1": None, "P2": None, "note": c["note"]} for c in rep.closure_candidates
            ],
            "torsion": [_point(T) for T in mw.torsion],
        },
    }
    return out, EXIT_OK if rep.fully_certified else EXIT_LIMIT


def cmd_lattice(doc, args):
    order = _order(doc)
    rows = _req(doc, "rows")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InvalidInputError('"rows" must be a list of lists')
    L = KLattice([[_elem(e) for e in r] for r in rows], order)
    cap = args.vectors_cap if args.vectors_cap is not None else 10**7
    m = successive_minima(L, cap=cap)
    g = gradodet_check(L, minima=m)
    cert = {
        "det": num(L.det, "exact-gram", unit="1"),
        "gram_det": rational_str(L.gram_det),
        "minima": [num(math.sqrt(float(s)), "enumeration", unit="1") for s in m.sq_lambdas],
        "minima_squared": [rational_str(s) for s in m.sq_lambdas],
        "minima_basis": [[_knum(order, z) for z in v] for v in m.basis],
        "minima_generate": m.generates,
        "minkowski": {"lhs": num(m.minkowski_lhs, "formula", "1"), "rhs": num(m.minkowski_rhs, "formula", "1"),
                      "ok": m.minkowski_ok},
        "degree_over_det": {"lhs": num(g.lhs, "formula", "1"), "rhs": num(g.rhs, "formula", "1"), "ok": g.ok},
    }
    warnings = []
    if L.r < L.N:
        if order.euclidean:
            comp = orthogonal_complement(L)
            cert["complement"] = [[_knum(order, z) for z in v] for v in comp.rows]
            cert["complement_det"] = num(comp.det, "exact-gram", unit="1")
        else:
            warnings.append("orthogonal complement skipped: O_K is not norm-Euclidean")
    status_ok = m.minkowski_ok and g.ok
    cert["status"] = "ok" if status_ok else "violation"
    return {"constants_trace": {}, "bound": None, "warnings": warnings, "certification": cert}, (
        EXIT_OK if status_ok else EXIT_INTERNAL
    )


def cmd_height(doc, args):
    E = _curve(doc)
    pts = _req(doc, "points")
    if not isinstance(pts, list):
        raise InvalidInputError('"points" must be a list of [x, y] or null')
    Ps = [None if P is None else make_point(E, *P) for P in pts]
    eps = args.eps if args.eps is not None else DEFAULT_EPS
    rows = []
    for P in Ps:
        h = canonical_height(E, P, eps)
        rows.append({
            "point": _point(P),
            "hhat": num(h.value, "local-decomposition"),
            "hhat_abs_error": num(h.abs_error, "tail-estimate"),
            "h2": num(h2_height(point_embedding(P)).value, "exact-integers"),
        })
    ok, info = height_gap_check(E, Ps, eps)
    cert = {
        "points": rows,
        "gap_check": {k: num(v, "computed") for k, v in sorted(info.items())} | {"ok": ok},
        "C_E": num(E.C_E, "formula"),
    }
    return {"constants_trace": {}, "bound": None, "warnings": [], "certification": cert}, (
        EXIT_OK if ok else EXIT_INTERNAL
    )


def cmd_selftest(doc, args):
    res = run_selftest()
    ok = all(v is True for v in res.values())
    return {"constants_trace": {}, "bound": None, "warnings": [],
            "certification": {"checks": res, "status": "ok" if ok else "failed"}}, (EXIT_OK if ok else EXIT_INTERNAL)


HANDLERS = {
    "bound": cmd_bound,
    "polybound": cmd_polybound,
    "search": cmd_search,
    "lattice": cmd_lattice,
    "height": cmd_height,
    "selftest": cmd_selftest,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="mordell_bounds", description="Explicit height bounds and point search.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="JSON job file ('-' for stdin); not needed for selftest")
    ap.add_argument("--output", help="report path (default: stdout)")
    ap.add_argument("--eps", type=float, help="canonical height tolerance")
    ap.add_argument("--radius-cap", type=int, help="largest |a| searched")
    ap.add_argument("--vectors-cap", type=int, help="enumeration cap for lattice minima")
    return ap


def run(command, args) -> tuple:
    """Run one job; returns (report dict, exit code)."""
    for name in ("eps", "radius_cap", "vectors_cap"):
        v = getattr(args, name, None)
        if v is not None and not v > 0:
            raise InvalidInputError(f"--{name.replace('_', '-')} must be positive")
    doc = {"schema": SCHEMA} if command == "selftest" and not args.input else _load(_req_input(args))
    body, code = HANDLERS[command](doc, args)
    report = {"schema": SCHEMA, "command": command, "input_echo": _echo(doc)}
    report.update(body)
    report["exit_code"] = code
    return report, code


def _req_input(args):
    if not args.input:
        raise InvalidInputError("--input is required")
    return args.input


def _emit(report, path):
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = run(args.command, args)
    except InvalidInputError as exc:
        report, code = {"schema": SCHEMA, "command": args.command, "error": str(exc),
                        "kind": type(exc).__name__}, EXIT_INVALID
    except ResourceLimitError as exc:
        report, code = {"schema": SCHEMA, "command": args.command, "error": str(exc),
                        "kind": "ResourceLimitError", "radius": exc.radius}, EXIT_LIMIT
    except Exception as exc:  # noqa: BLE001
        report, code = {"schema": SCHEMA, "command": args.command,
                        "error": f"{type(exc).__name__}: {exc}", "kind": "internal"}, EXIT_INTERNAL
    report["exit_code"] = code
    try:
        _emit(report, args.output)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if code:
        print(report.get("error") or f"finished with exit code {code}", file=sys.stderr)
    return code
