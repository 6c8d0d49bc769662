"""Command-line front end: every pipeline as a subcommand with deterministic
line-delimited JSON (and CSV trace) outputs.

Exit codes: 0 success, 2 validation error, 3 numerical failure.  Errors go to
stderr as one JSON object.  An INI config file supplies defaults per section
(section name = subcommand); explicit flags override it, unknown keys are
rejected.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys

import numpy as np

from . import logderiv as L
from . import ode as O
from . import riesz as R
from . import wiman as W
from .numerics import LogValue, NumericsError
from .profiles import RadialProfile, branch_samples
from .scaffold import ScaffoldParams, build_scaffold, scaffold_from_json_dict
from .serialize import dumps17, read_records, write_records


class CliValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# scaffold plumbing


def _scaffold_records(scaffold) -> list[dict]:
    doc = scaffold.to_json_dict()
    head = {"kind": "scaffold-params", **doc["params"], "retries": doc["retries"]}
    recs = [head]
    checks = []
    for g in doc["generations"]:
        recs.append({"kind": "generation", **g})
        checks.append(
            {
                "name": f"closure-residual-gen-{g['n']}",
                "value": g["residual"],
                "threshold": 1e-9,
                "passed": g["residual"] <= 1e-9,
            }
        )
        checks.append(
            {
                "name": f"oscillation-bound-gen-{g['n']}",
                "value": abs(g["eps"]),
                "threshold": 0.5,
                "passed": abs(g["eps"]) < 0.5,
            }
        )
    recs.extend({"kind": "check", **c} for c in checks)
    return recs


def _load_scaffold(path: str):
    recs = read_records(path)
    params = next(r for r in recs if r["kind"] == "scaffold-params")
    gens = [r for r in recs if r["kind"] == "generation"]
    doc = {
        "params": {k: v for k, v in params.items() if k not in ("kind", "retries")},
        "retries": params.get("retries", 0),
        "generations": gens,
    }
    return scaffold_from_json_dict(doc)


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_scaffold(args) -> int:
    if args.p1 is None or args.p2 is None:
        raise CliValidationError("scaffold needs --p1 and --p2 (flags or config)")
    params = ScaffoldParams.with_defaults(
        k=args.k, p1=args.p1, p2=args.p2, p=args.p,
        eta=lambda n: float(n + args.eta_offset),
        log_c=args.log_c, g1=args.g1,
    )
    sc = build_scaffold(params, args.generations)
    write_records(args.out, _scaffold_records(sc))
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "g_rn", "g_rprime", "g_rhat", "g_rstar", "g_rdprime", "eps", "residual"])
            for g in sc.generations:
                w.writerow(
                    [g.index] + [f"{x:.17g}" for x in (
                        g.r_n.g, g.r_prime.g, g.r_hat.g, g.r_star.g, g.r_dprime.g,
                        g.eps_n, g.residual,
                    )]
                )
    return 0


def _cmd_profile(args) -> int:
    sc = _load_scaffold(args.scaffold)
    prof = RadialProfile(sc)
    gs = branch_samples(prof, args.samples_per_branch)
    prof.write_csv(args.out, gs)
    if args.junctions_out:
        recs = []
        for j in prof.junction_report():
            recs.append(
                {
                    "kind": "check",
                    "name": f"junction-{j.label}",
                    "value": max(j.phi_rel_jump, j.dphi_rel_jump),
                    "threshold": 1e-9,
                    "passed": max(j.phi_rel_jump, j.dphi_rel_jump) <= 1e-9,
                }
            )
        write_records(args.junctions_out, recs)
    return 0


def _cmd_riesz(args) -> int:
    sc = _load_scaffold(args.scaffold)
    prof = RadialProfile(sc)
    part = R.partition_region(prof, args.generation, g_max=args.g_max, ceiling=args.ceiling)
    cloud = R.atomize(part, prof, split_doubles=args.split_doubles)
    with open(args.out, "w", newline="\n") as fh:
        fh.write(cloud.to_jsonl())
    if args.summary_out:
        recs = [
            {
                "kind": "riesz-summary",
                "cells": len(part.cells),
                "atoms": len(cloud),
                "total_mass": part.total_mass,
                "truncated": {k: bool(v) for k, v in sorted(part.truncated.items())},
            }
        ]
        write_records(args.summary_out, recs)
    return 0


def _cmd_series(args) -> int:
    if args.action != "reference":
        raise CliValidationError(f"unknown series action {args.action!r}")
    series = W.build_reference_series(args.variant, sigma=args.sigma, lam=args.lam, delta=args.delta)
    recs: list[dict] = []
    if args.variant == "power-law":
        recs.append({"kind": "series-params", "variant": "power-law", "sigma": args.sigma})
        mat = series.materialize(args.terms)
        recs.extend({"kind": "term", **t} for t in mat.to_json_terms())
    else:
        recs.append(
            {
                "kind": "series-params",
                "variant": "doubling",
                "sigma": args.sigma,
                "lambda": args.lam,
                "delta": series.delta,
            }
        )
        mat = series.materialize(min(args.terms, 4))
        recs.extend({"kind": "term", **t} for t in mat.to_json_terms())
    write_records(args.out, recs)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["g", "log_mu", "nu_log", "K_log"])
            if args.variant == "doubling":
                for k in range(args.trace_k_lo, args.trace_k_hi + 1):
                    g = series.r_k(k).g
                    mu = series.log_max_term(g)
                    nu = series.central_index(g)
                    kk = series.k_indicator(g)
                    w.writerow(
                        [f"{g:.17g}", f"{mu.logmag:.17g}", f"{nu.log_n:.17g}", f"{kk.logmag:.17g}"]
                    )
            else:
                for g in np.linspace(0.5, 3.5, 25):
                    mat_mu = W.log_max_term(mat, float(g))
                    nu = series.central_index(float(g))
                    kk = series.k_indicator(float(g))
                    w.writerow(
                        [
                            f"{g:.17g}",
                            f"{mat_mu.to_float():.17g}",
                            f"{nu.log_n:.17g}",
                            f"{kk.logmag:.17g}",
                        ]
                    )
    return 0


def _cmd_logderiv(args) -> int:
    g_seq = [float(x) for x in args.g_n.split(",")]
    if args.action == "windows":
        ws = L.loworder_windows(args.lam, args.eta, g_seq)
        dens = L.upper_density(ws)
        recs = [
            {
                "kind": "windows",
                "intervals": [[a, b] for a, b in ws.intervals],
                "upper_density": dens.value,
                "flagged": dens.flagged,
            },
            {
                "kind": "check",
                "name": "window-density",
                "value": dens.value,
                "threshold": 1.0,
                "passed": dens.value >= 0.0,
            },
        ]
        write_records(args.out, recs)
        return 0
    if args.action == "certificate":
        spec = L.exp_inverse_power_spec(args.power)
        ws = L.loworder_windows(spec.lam, args.eta, g_seq)
        rpt = L.logderiv_certificate(spec, args.k, args.j, args.eps, ws)
        recs = [
            {
                "kind": "certificate",
                "k": rpt.k,
                "j": rpt.j,
                "eps": rpt.eps,
                "max_statistic": rpt.max_statistic,
                "fitted_constant": rpt.fitted_constant,
            },
            {
                "kind": "check",
                "name": "certificate-statistic-bounded",
                "value": rpt.max_statistic,
                "threshold": args.power,
                "passed": rpt.max_statistic <= args.power,
            },
        ]
        write_records(args.out, recs)
        return 0
    raise CliValidationError(f"unknown logderiv action {args.action!r}")


def _cmd_ode(args) -> int:
    if args.action == "predict":
        sigma, lam, alpha = O.predict_orders(args.p1, args.p2, args.k, args.p)
        rec = {"kind": "prediction", "sigma": sigma, "lambda": lam, "alpha": alpha,
               "k": args.k, "p1": args.p1, "p2": args.p2, "p": args.p}
        if args.out:
            write_records(args.out, [rec])
        else:
            sys.stdout.write(dumps17(rec) + "\n")
        return 0
    if args.action == "exponents":
        xi, beta, res = O.quadratic_growth_exponents(args.k, args.p1, args.p2, args.eps)
        rec = {"kind": "xi-beta", "xi": xi, "beta": beta, "identity_residual": res}
        chk = {
            "kind": "check",
            "name": "growth-exponent-identity-residual",
            "value": res,
            "threshold": 1e-12,
            "passed": res <= 1e-12,
        }
        if args.out:
            write_records(args.out, [rec, chk])
        else:
            sys.stdout.write(dumps17(rec) + "\n")
        return 0
    if args.action == "solve":
        coeffs = O.pole_coeffs(args.pole_order, args.degree, scale=args.scale)
        init = [LogValue.from_float(1.0)] + [LogValue.zero()] * (args.k - 1)
        sol = O.taylor_solve(coeffs, args.k, init, args.degree)
        g_lo, g_hi, n = (float(x) for x in args.estimate.split(":"))
        gs = np.linspace(g_lo, g_hi, int(n))
        samples = [(float(g), math.log(max(sol.log_abs_sum(float(g)), 1e-300))) for g in gs]
        ind = O.estimate_orders(samples, window=0.4, min_span=args.min_span)
        if args.samples_csv:
            with open(args.samples_csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["g", "log_logM", "ratio"])
                for g, v in samples:
                    w.writerow([f"{g:.17g}", f"{v:.17g}", f"{v / g:.17g}"])
        recs = [
            {
                "kind": "ode-orders",
                "k": args.k,
                "pole_order": args.pole_order,
                "degree": args.degree,
                "sigma_hat_tail": ind.sigma_M.tail,
                "lambda_hat_tail": ind.lambda_M.tail,
                "slope": ind.sigma_M.slope,
                "window": list(ind.window),
            }
        ]
        if args.audit_p1 is not None:
            rows = O.audit_inequalities(ind, args.audit_p1, args.audit_p2, args.k)
            for row in rows:
                recs.append(
                    {
                        "kind": "check",
                        "name": row.name,
                        "value": row.margin,
                        "threshold": 0.0,
                        "passed": row.passed,
                        "detail": row.detail,
                    }
                )
        write_records(args.out, recs)
        return 0
    raise CliValidationError(f"unknown ode action {args.action!r}")


def _cmd_report(args) -> int:
    rows = []
    for path in args.inputs:
        try:
            recs = read_records(path)
        except FileNotFoundError:
            raise CliValidationError(f"missing input {path}")
        for rec in recs:
            if rec.get("kind") == "check":
                rows.append((path, rec))
    lines = ["| check | source | value | threshold | status |",
             "|---|---|---|---|---|"]
    for path, rec in rows:
        status = "pass" if rec.get("passed") else "FAIL"
        lines.append(
            f"| {rec['name']} | {path} | {rec['value']:.6g} | "
            f"{rec.get('threshold', float('nan')):.3g} | {status} |"
        )
    text = "\n".join(lines) + "\n"
    with open(args.out, "w", newline="\n") as fh:
        fh.write(text)
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["check", "source", "value", "threshold", "passed"])
            for path, rec in rows:
                w.writerow(
                    [rec["name"], path, f"{rec['value']:.17g}",
                     f"{rec.get('threshold', float('nan')):.17g}", rec.get("passed")]
                )
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_config_defaults(parser: argparse.ArgumentParser, section: str, config_path: str):
    """Install INI-section values as subparser defaults (flags still win)."""
    cp = configparser.ConfigParser()
    if not cp.read(config_path):
        raise CliValidationError(f"config file {config_path} not readable")
    if not cp.has_section(section):
        return
    by_dest = {a.dest: a for a in parser._actions}
    for key, raw in cp.items(section):
        dest = key.replace("-", "_")
        action = by_dest.get(dest)
        if action is None:
            raise CliValidationError(f"unknown config key [{section}] {key}")
        if isinstance(action, argparse._StoreTrueAction):
            action.default = raw.strip().lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            action.default = action.type(raw)
        else:
            action.default = raw


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="discgrowth", description=__doc__)
    top.add_argument("--config", default=None, help="INI file with per-subcommand sections")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scaffold", help="build the thinning-radii construction")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p1", type=float, default=None)
    p.add_argument("--p2", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--generations", type=int, default=4)
    p.add_argument("--g1", type=float, default=None)
    p.add_argument("--log-c", dest="log_c", type=float, default=None)
    p.add_argument("--eta-offset", dest="eta_offset", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--csv-out", dest="csv_out", default=None)
    p.set_defaults(func=_cmd_scaffold)

    p = sub.add_parser("profile", help="sample the piecewise radial profile")
    p.add_argument("--scaffold", required=True)
    p.add_argument("--samples-per-branch", dest="samples_per_branch", type=int, default=16)
    p.add_argument("--out", required=True)
    p.add_argument("--junctions-out", dest="junctions_out", default=None)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("riesz", help="equal-mass cells and surrogate zeros")
    p.add_argument("--scaffold", required=True)
    p.add_argument("--generation", type=int, default=1)
    p.add_argument("--g-max", dest="g_max", type=float, default=25.0)
    p.add_argument("--ceiling", type=int, default=200_000)
    p.add_argument("--split-doubles", dest="split_doubles", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--summary-out", dest="summary_out", default=None)
    p.set_defaults(func=_cmd_riesz)

    p = sub.add_parser("series", help="reference sparse-series constructions")
    p.add_argument("action", choices=["reference"])
    p.add_argument("--variant", choices=["power-law", "doubling"], required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--terms", type=int, default=12)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None)
    p.add_argument("--trace-k-lo", dest="trace_k_lo", type=int, default=5)
    p.add_argument("--trace-k-hi", dest="trace_k_hi", type=int, default=14)
    p.set_defaults(func=_cmd_series)

    p = sub.add_parser("logderiv", help="windows, densities and certificates")
    p.add_argument("action", choices=["windows", "certificate"])
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--g-n", dest="g_n", default="2,4,8,16,32")
    p.add_argument("--power", type=float, default=2.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_logderiv)

    p = sub.add_parser("ode", help="solve, predict and audit")
    p.add_argument("action", choices=["predict", "solve", "exponents"])
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p1", type=float, default=None)
    p.add_argument("--p2", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--pole-order", dest="pole_order", type=int, default=2)
    p.add_argument("--scale", type=float, default=-1.0)
    p.add_argument("--degree", type=int, default=2000)
    p.add_argument("--estimate", default="0.8:2.2:48")
    p.add_argument("--min-span", dest="min_span", type=float, default=1.0)
    p.add_argument("--audit-p1", dest="audit_p1", type=float, default=None)
    p.add_argument("--audit-p2", dest="audit_p2", type=float, default=None)
    p.add_argument("--samples-csv", dest="samples_csv", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_ode)

    p = sub.add_parser("report", help="collate check rows from prior outputs")
    p.add_argument("--inputs", nargs="*", default=[])
    p.add_argument("--out", required=True)
    p.add_argument("--csv-out", dest="csv_out", default=None)
    p.set_defaults(func=_cmd_report)

    return top


def _prescan(argv):
    """(config path, subcommand token) without triggering required-flag checks."""
    config = None
    command = None
    i = 0
    while i < len(argv):
        a = argv[i]
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
            i += 2
            continue
        if a.startswith("--config="):
            config = a.split("=", 1)[1]
        elif command is None and not a.startswith("-"):
            command = a
        i += 1
    return config, command


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        config, command = _prescan(argv)
        name_map = parser._subparsers._group_actions[0]._name_parser_map
        if config and command in name_map:
            _add_config_defaults(name_map[command], command, config)
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0)
        return args.func(args)
    except (CliValidationError, NumericsError) as err:
        code = 2 if _is_validation(err) else 3
        sys.stderr.write(dumps17({"error": type(err).__name__, "message": str(err)}) + "\n")
        return code
    except OSError as err:
        sys.stderr.write(dumps17({"error": type(err).__name__, "message": str(err)}) + "\n")
        return 2


def _is_validation(err: Exception) -> bool:
    from .numerics import BracketError, QuadratureError

    return not isinstance(err, (BracketError, QuadratureError))


if __name__ == "__main__":
    sys.exit(main())
