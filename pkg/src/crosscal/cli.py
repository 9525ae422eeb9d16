"""crosscal command line: tables, verify, find, knot.

stdout carries exactly one JSON report; diagnostics go to stderr.
Exit status: 0 all checks passed, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import time

import numpy as np

from .complex_vcp import CVcpStructure, CvcpError
from .exterior import AlternatingTensor
from .grassmann import OptimizerConfig, minimize, nonexistence_scan, summarize, thread_count
from .knotspace import (
    DiscretizedKnot,
    KnotError,
    compatibility_residuals,
    embed,
    fiber_cvcp_defect,
    hamilton_check,
    isotropy_check,
    make_circle,
    make_sphere,
    quotient_structures,
)
from .normed_algebras import multiplication_table
from .vcp import StructureError, automorphism_algebra, parse_selector
from .verify import CVCP_KINDS, VCP_KINDS, expected_algebra_dim, jsonable, load_structure, run_suite

SCHEMA_VERSION = "1"
KNOT_CHECKS = ("compatibility", "isotropy", "quotient")


class InputError(Exception):
    pass


def _terms(form: AlternatingTensor) -> list:
    out = []
    for key in sorted(form.coeffs):
        c = form.coeffs[key]
        out.append({"idx": [i + 1 for i in key], "c": int(c) if float(c).is_integer() else c})
    return out


def _structure(text: str):
    try:
        kind, param = parse_selector(text)
        if kind not in VCP_KINDS + CVCP_KINDS:
            raise InputError(f"unknown structure {text!r}")
        return load_structure(kind, param)
    except (StructureError, CvcpError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def cmd_tables(args) -> tuple[dict, bool]:
    S = _structure(args.structure)
    report = {"structure": S.label}
    if isinstance(S, CVcpStructure):
        report.update({"dim_real": S.dim_real, "r": S.r, "omega": _terms(S.omega),
                       "Omega_re": _terms(S.Omega.re), "Omega_im": _terms(S.Omega.im)})
        return report, True
    alg = automorphism_algebra(S)
    report.update({"n": S.n, "r": S.r, "form": _terms(S.phi), "automorphism_dim": alg.dim,
                   "automorphism_gap": alg.gap})
    if S.kind in ("g2", "spin7"):
        report["octonion_table"] = multiplication_table()
    return report, alg.dim == expected_algebra_dim(S)


def cmd_verify(args) -> tuple[dict, bool]:
    S = _structure(args.structure)
    records = run_suite(S, args.samples, args.seed, args.tol, args.theta, thread_count())
    return {"structure": S.label, "samples": args.samples, "seed": args.seed, "tol": args.tol,
            "records": records}, all(r["pass"] for r in records)


def cmd_find(args) -> tuple[dict, bool]:
    S = _structure(args.structure)
    if isinstance(S, CVcpStructure):
        raise InputError("find works on the real VCP structures")
    k = args.k
    if k is None:
        k = S.r + 1 if args.objective == "instanton" else (S.n + S.r - 1) // 2
    try:
        config = OptimizerConfig(restarts=args.restarts, seed=args.seed, tol=args.tol)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    report = {"structure": S.label, "objective": args.objective, "k": k, "config": config.to_json()}
    try:
        if S.kind == "spin7" and args.objective == "brane" and k == 5:
            scan = nonexistence_scan(S, k, config)
            report.update({"mode": "nonexistence_scan", "min_residual": scan["min_residual"],
                           "converged": scan["converged"], "restarts": scan["restarts"],
                           "runs": [r.to_json(args.verbose) for r in scan["runs"]]})
            return report, scan["min_residual"] > 0.01 and scan["converged"] == 0
        runs = minimize(S, args.objective, k, config)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    summary = summarize(S, args.objective, runs, 1e-6)
    report.update({"mode": "search", "summary": summary, "runs": [r.to_json(args.verbose) for r in runs]})
    return report, summary["converged"] > 0 and summary["verified"] == summary["converged"]


def _load_knot(source: str, S) -> DiscretizedKnot:
    """A knot JSON path, or a built-in 'circle:M' / 'sphere:D' placed in the structure's space."""
    name, _, arg = source.partition(":")
    n = S.dim_real if isinstance(S, CVcpStructure) else S.n
    # built-ins go into the real slice of C^n, or the leading coordinates of R^n
    cols = [0, 2, 4] if isinstance(S, CVcpStructure) else [0, 1, 2]
    if name in ("circle", "sphere"):
        try:
            size = int(arg) if arg else (100 if name == "circle" else 3)
            base = make_circle(3, size) if name == "circle" else make_sphere(size)
            return embed(base, np.eye(n)[cols])
        except (ValueError, IndexError) as exc:
            raise InputError(str(exc)) from exc
    try:
        with open(source) as fh:
            return DiscretizedKnot.from_json(json.load(fh))
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{source} is not JSON: {exc}") from exc


def cmd_knot(args) -> tuple[dict, bool]:
    S = _structure(args.structure)
    if not args.input:
        raise InputError("knot needs --in (a knot JSON file, circle:M or sphere:D)")
    try:
        knot = _load_knot(args.input, S)
        witnesses = {}
        if args.check == "compatibility":
            if isinstance(S, CVcpStructure):
                raise InputError("compatibility runs on real VCP structures")
            res = compatibility_residuals(S, knot, min(args.samples, 1000), args.seed)
            residual = max(res.values())
            witnesses = res
        elif args.check == "isotropy":
            if not isinstance(S, CVcpStructure):
                raise InputError("isotropy needs a Calabi-Yau structure")
            residual = isotropy_check(knot, S.omega)
        else:
            if not isinstance(S, CVcpStructure):
                raise InputError("quotient needs a Calabi-Yau structure")
            q = quotient_structures(S, knot)
            ham = hamilton_check(q)
            norm_def = fiber_cvcp_defect(q, seed=args.seed)
            residual = max(ham["max"], norm_def, q.j_invariance)
            witnesses = {"fiber_rank": sorted({int(x) for x in q.rank}), "hamilton": ham,
                         "fiber_normalization": norm_def, "j_invariance": q.j_invariance}
    except (KnotError, StructureError) as exc:
        raise InputError(str(exc)) from exc
    return {"structure": S.label, "check": args.check, "m": knot.m, "s": knot.s,
            "residual": residual, "tol": args.tol, "witnesses": witnesses}, residual < args.tol


COMMANDS = {"tables": cmd_tables, "verify": cmd_verify, "find": cmd_find, "knot": cmd_knot}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--structure", required=True,
                        help="complex:m, volume:n, g2, spin7, cy:n or hk:m")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--samples", type=int, default=10_000)
    common.add_argument("--restarts", type=int, default=50)
    common.add_argument("--k", type=int, default=None)
    common.add_argument("--objective", choices=("instanton", "brane"), default="instanton")
    common.add_argument("--theta", type=float, default=0.0)
    common.add_argument("--in", dest="input", default=None)
    common.add_argument("--out", default=None, help="also write the report to this file")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--deterministic", action="store_true",
                        help="omit timestamp and hostname from the report")
    parser = argparse.ArgumentParser(prog="crosscal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("tables", "verify", "find"):
        sub.add_parser(name, parents=[common])
    knot = sub.add_parser("knot", parents=[common])
    knot.add_argument("check", choices=KNOT_CHECKS)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.tol is None:
        args.tol = 1e-10 if args.command == "find" else 1e-9
    if args.tol <= 0 or args.samples <= 0:
        print("error: --tol and --samples must be positive", file=sys.stderr)
        return 2
    try:
        body, ok = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, "pass": bool(ok)}
    report.update(body)
    if not args.deterministic:
        report["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        report["host"] = socket.gethostname()
    text = json.dumps(jsonable(report), indent=2, allow_nan=False)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return 2
    print(text)
    if not ok:
        print(f"{args.command}: a check failed", file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
