"""Batch entry point: constants, ground states, verification, report tables.

Every run is driven by one seed; reports are JSON (sorted keys, no
timestamps) so identical invocations produce byte-identical files.  Exit
codes: 0 pass, 2 verification failure, 1 usage or hypothesis error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import constants as consts
from . import verify as ver
from .grids import PeriodicGrid, save_field
from .groundstate import SolverConfig, VariationalProblem, solve
from .groups import GroupDescriptor, euclidean, heisenberg1, sphere_measure
from .spectral import negative_laplacian

SCHEMA_VERSION = 1

_GROUPS = {
    "euclidean1": lambda: euclidean(1),
    "euclidean2": lambda: euclidean(2),
    "euclidean3": lambda: euclidean(3),
    "euclidean4": lambda: euclidean(4),
    "heisenberg1": heisenberg1,
}


class HypothesisViolation(ValueError):
    pass


def _group(name: str) -> GroupDescriptor:
    try:
        return _GROUPS[name]()
    except KeyError:
        raise HypothesisViolation(
            f"unknown group {name!r}; choose from {sorted(_GROUPS)}"
        ) from None


def _check(cond: bool, message: str):
    if not cond:
        raise HypothesisViolation(message)


def _write_json(path, doc):
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    return int(os.environ.get("CRITINEQ_WORKERS", "1"))


def cmd_constants(args) -> int:
    group = _group(args.group)
    _check(args.q > args.p, f"constants require q > p (got p={args.p}, q={args.q})")
    _check(args.p > 1, "requires p > 1")
    sphere = sphere_measure(group)
    report = consts.compute_constants_report(
        args.p, args.q, group.Q, sphere, quasi_norm=group.quasi_norm
    )
    _write_json(args.out, json.loads(report.to_json()))
    return 0


def cmd_report(args) -> int:
    group = _group(args.group)
    _check(args.p > 1, "requires p > 1")
    sphere = sphere_measure(group)
    qs = np.geomspace(args.q_min, args.q_max, args.num)
    _check(args.q_min > args.p, "requires q_min > p")
    rows = []
    for q in qs:
        params = consts.GNParams(p=args.p, q=float(q), Q=group.Q, sphere=sphere)
        m1, m2, theta = consts.weak_type_constants(params)
        bound = consts.marcinkiewicz_gn_bound(params)
        rows.append(
            {
                "q": float(q),
                "m1": m1,
                "m2": m2,
                "theta": theta,
                "marcinkiewicz_bound": bound,
                "bound_over_growth": bound / q ** (1.0 - 1.0 / args.p),
            }
        )
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "group": args.group,
        "p": args.p,
        "Q": group.Q,
        "sphere": sphere,
        "rows": rows,
    }
    _write_json(args.out, doc)
    return 0


def cmd_ground_state(args) -> int:
    group = _group(args.group)
    _check(group.name != "heisenberg1", "ground-state solving is Euclidean-model only")
    _check(args.q > args.p, f"requires q > p (got p={args.p}, q={args.q})")
    grid = PeriodicGrid(n=group.n, L=args.L, N=args.N)
    prob = VariationalProblem(group=group, op=negative_laplacian(grid), p=args.p, q=args.q)
    config = SolverConfig(
        tol_pde=args.tol, restarts=args.restarts, max_iter=args.max_iter
    )
    result = solve(prob, config)
    if args.save_field:
        save_field(result.phi, args.save_field)
    _write_json(args.out, json.loads(result.to_json()))
    return 0


def _build_problem(args, group):
    grid = PeriodicGrid(n=group.n, L=args.L, N=args.N, max_points=2**26)
    op = negative_laplacian(grid)
    return VariationalProblem(group=group, op=op, p=args.p, q=args.q), grid, op


def cmd_verify(args) -> int:
    group = _group(args.group)
    if args.kind == "gn" and group.name == "heisenberg1":
        from .heisenberg import HeisenbergGrid, empirical_gn_ratio_h1, heisenberg_gaussian

        _check(args.p == 2.0, "the Heisenberg check runs at p = 2 only")
        _check(args.q > 2.0, "requires q > p = 2")
        hgrid = HeisenbergGrid(
            half_widths=(args.L / 2,) * 3, shape=(args.N, args.N, args.N)
        )
        widths = np.geomspace(args.L / 5.0, max(4.0 * args.L / args.N, args.L / 40.0), args.count)
        fields = [heisenberg_gaussian(hgrid, w) for w in widths]
        report = empirical_gn_ratio_h1(hgrid, fields, q=args.q)
        _write_json(args.out, json.loads(report.to_json()))
        if args.csv:
            report.write_csv(args.csv)
        return 0 if report.passed else 2

    _check(args.q > args.p, f"requires q > p (got p={args.p}, q={args.q})")
    prob, grid, op = _build_problem(args, group)
    family = ver.TestFamily(
        kind="band_limited_noise", seed=args.seed, count=args.count,
        scale=(1.0, grid.N / 4.0),
    )
    sphere = sphere_measure(group)

    if args.kind == "gn":
        fields = ver.realize_family(family, grid)
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", consts.InconclusiveEnvelopeWarning)
            env = consts.c1_envelope(args.p, group.Q, sphere)
        report = ver.verify_gn(
            prob, fields, env, family=family, max_workers=_workers(args)
        )
    elif args.kind == "trudinger":
        fields = ver.realize_family(family, grid)
        rep_gn = ver.verify_gn(prob, fields, 1e308, family=family)
        c_full = rep_gn.max_ratio
        alpha = args.alpha or 0.5 * consts.trudinger_alpha_threshold(c_full, args.p)
        c2 = consts.trudinger_constant(alpha, c_full, args.p)
        report = ver.verify_trudinger(
            prob, fields, alpha, c2, family=family, max_workers=_workers(args)
        )
        report.extra["alpha"] = alpha
        report.extra["c1_family"] = c_full
    elif args.kind == "bgw":
        _check(args.a is not None, "bgw requires --a")
        _check(args.a > group.Q / args.q, "requires a > Q/q")
        fields = ver.make_bgw_family(
            grid, op, count=args.count, Q=group.Q, p=args.p, start=args.band_start
        )
        report = ver.verify_bgw(prob, fields, a=args.a, q_param=args.q)
    elif args.kind == "bw":
        from .grids import gaussian_field

        f = gaussian_field(grid, width=grid.L / 12.0)
        radii = np.geomspace(grid.h, grid.L / 3.0, args.count)
        c4 = args.c4 or ver.calibrate_bw_constant(prob, group, [f], radii)
        report = ver.verify_bw_set(prob, group, f, radii, c4)
        report.extra["c4"] = c4
    elif args.kind == "holder":
        _check(args.alpha is not None and 0 < args.alpha <= 1, "holder requires --alpha in (0, 1]")
        lam = args.alpha + group.Q / args.p
        _check(0 < lam < group.Q, f"lambda = alpha + Q/p = {lam} must lie in (0, Q)")
        from .spectral import apply_power
        from .grids import lp_norm

        ratios = []
        for i in range(args.count):
            f = ver.band_limited_noise(grid, [args.seed, i], k_max=grid.N / 6.0, localize=False)
            tf = apply_power(op, f, -lam / op.nu)
            ratios.append(
                ver.holder_seminorm(tf, args.alpha, args.pairs, seed=args.seed + i)
                / lp_norm(f, args.p)
            )
        worst = max(ratios)
        report = ver.VerificationReport(
            check="holder",
            params={"p": args.p, "alpha": args.alpha, "lambda": lam},
            family={"kind": "band_limited_noise", "seed": args.seed, "count": args.count},
            per_sample=[{"ratio": float(r)} for r in ratios],
            max_ratio=float(worst),
            reference=float(worst),
            tolerance=0.0,
            passed=True,
        )
    else:
        raise HypothesisViolation(f"unknown verify kind {args.kind!r}")

    _write_json(args.out, json.loads(report.to_json()))
    if args.csv:
        report.write_csv(args.csv)
    return 0 if report.passed else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="critineq",
        description="Critical-inequality constants, ground states, and verification",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("constants", help="closed-form constants for one (p, q)")
    pc.add_argument("--p", type=float, required=True)
    pc.add_argument("--q", type=float, required=True)
    pc.add_argument("--group", default="euclidean2", choices=sorted(_GROUPS))
    pc.add_argument("--out", default=None)
    pc.set_defaults(func=cmd_constants)

    pr = sub.add_parser("report", help="constants table over a q grid (CSV)")
    pr.add_argument("--p", type=float, required=True)
    pr.add_argument("--group", default="euclidean2", choices=sorted(_GROUPS))
    pr.add_argument("--q-min", type=float, default=None)
    pr.add_argument("--q-max", type=float, default=1e4)
    pr.add_argument("--num", type=int, default=50)
    pr.add_argument("--csv", default=None)
    pr.add_argument("--out", default=None)
    pr.set_defaults(func=cmd_report)

    pg = sub.add_parser("ground-state", help="solve the critical equation")
    pg.add_argument("--p", type=float, default=2.0)
    pg.add_argument("--q", type=float, default=4.0)
    pg.add_argument("--group", default="euclidean2", choices=sorted(_GROUPS))
    pg.add_argument("--N", type=int, default=256)
    pg.add_argument("--L", type=float, default=30.0)
    pg.add_argument("--tol", type=float, default=None)
    pg.add_argument("--restarts", type=int, default=3)
    pg.add_argument("--max-iter", type=int, default=5000)
    pg.add_argument("--save-field", default=None)
    pg.add_argument("--out", default=None)
    pg.set_defaults(func=cmd_ground_state)

    pv = sub.add_parser("verify", help="empirical inequality stress tests")
    pv.add_argument("kind", choices=["gn", "trudinger", "bgw", "bw", "holder"])
    pv.add_argument("--p", type=float, default=2.0)
    pv.add_argument("--q", type=float, default=4.0)
    pv.add_argument("--a", type=float, default=None)
    pv.add_argument("--alpha", type=float, default=None)
    pv.add_argument("--group", default="euclidean2", choices=sorted(_GROUPS))
    pv.add_argument("--N", type=int, default=128)
    pv.add_argument("--L", type=float, default=30.0)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--count", type=int, default=20)
    pv.add_argument("--pairs", type=int, default=2000)
    pv.add_argument("--c4", type=float, default=None)
    pv.add_argument("--band-start", type=int, default=0)
    pv.add_argument("--workers", type=int, default=None)
    pv.add_argument("--csv", default=None)
    pv.add_argument("--out", default=None)
    pv.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "report" and args.q_min is None:
        args.q_min = args.p + 0.5
    try:
        return args.func(args)
    except HypothesisViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
