"""Command-line interface: simulate scenarios, dump barrier fields, and run
verification audits.

Exit codes: 0 success, 2 validation/usage error, 3 audit failure,
4 runtime or filter error.  Failures emit one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import scenarios, svgplot, verify
from .barrier import (BarrierEvaluation, CbfParams, barrier_field,
                      provable_buffer, smooth_max, smooth_min)
from .safety_filter import DegenerateGradientError, DesiredController, safe_velocity
from .sim import SimConfig, Termination, UnsafeStartError, run

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_AUDIT_FAILED = 3
EXIT_RUNTIME = 4

SCENARIO_DIR_ENV = "POLYCBF_SCENARIO_DIR"


def _fail(code: int, err: Exception | str) -> int:
    name = type(err).__name__ if isinstance(err, Exception) else "Error"
    print(json.dumps({"error": name, "message": str(err)}), file=sys.stderr)
    return code


def _resolve_scenario(ref: str) -> scenarios.Scenario:
    if ref in scenarios.BUILTIN_NAMES:
        return scenarios.builtin(ref)
    if os.path.exists(ref):
        return scenarios.load(ref)
    search_dir = os.environ.get(SCENARIO_DIR_ENV)
    if search_dir:
        for candidate in (os.path.join(search_dir, ref),
                          os.path.join(search_dir, ref + ".json")):
            if os.path.exists(candidate):
                return scenarios.load(candidate)
    raise scenarios.ScenarioError(
        f"unknown scenario {ref!r}: not a builtin "
        f"({', '.join(scenarios.BUILTIN_NAMES)}) and no such file")


def _apply_overrides(scenario, args) -> scenarios.Scenario:
    # Precedence: command line > scenario file > builtin defaults.
    cbf = scenario.cbf
    if args.kappa is not None or args.buffer is not None \
            or args.alpha_gain is not None:
        cbf = CbfParams(
            kappa=args.kappa if args.kappa is not None else cbf.kappa,
            buffer=args.buffer if args.buffer is not None else cbf.buffer,
            alpha_gain=(args.alpha_gain if args.alpha_gain is not None
                        else cbf.alpha_gain),
        )
    sim = scenario.default_sim
    if args.dt is not None or args.t_end is not None or args.start is not None:
        sim = SimConfig(
            dt=args.dt if args.dt is not None else sim.dt,
            t_end=args.t_end if args.t_end is not None else sim.t_end,
            x0=np.asarray(args.start) if args.start is not None else sim.x0,
            goal_tolerance=sim.goal_tolerance,
            record_stride=sim.record_stride,
        )
    controller = scenario.controller
    if args.goal is not None:
        controller = DesiredController(goal=np.asarray(args.goal),
                                       gain=controller.gain,
                                       u_max=controller.u_max)
    return dataclasses.replace(scenario, cbf=cbf, default_sim=sim,
                               controller=controller)


def cmd_simulate(args) -> int:
    try:
        scenario = _apply_overrides(_resolve_scenario(args.scenario), args)
    except scenarios.ScenarioError as err:
        return _fail(EXIT_VALIDATION, err)
    try:
        t0 = time.perf_counter()
        result = run(scenario, method=args.method)
        wall = time.perf_counter() - t0
    except (UnsafeStartError, DegenerateGradientError) as err:
        return _fail(EXIT_RUNTIME, err)

    try:
        if args.csv:
            result.write_csv(args.csv)
        if args.svg:
            svgplot.render_trajectory(scenario, result, args.svg)
    except OSError as err:
        return _fail(EXIT_RUNTIME, err)

    goal_t = "-" if result.reached_goal_at is None \
        else f"{result.reached_goal_at:.2f} s"
    print(f"scenario    : {scenario.name}")
    print(f"termination : {result.termination.value}")
    print(f"min h       : {result.min_h:.6g}")
    print(f"goal time   : {goal_t}")
    print(f"final state : {result.positions[-1].tolist()}")
    print(f"wall time   : {wall:.3f} s")
    if result.termination is Termination.ERROR:
        return _fail(EXIT_RUNTIME, result.error or "filter error")
    return EXIT_OK


def cmd_field(args) -> int:
    try:
        scenario = _resolve_scenario(args.scenario)
        if args.kappa is not None or args.buffer is not None \
                or args.alpha_gain is not None:
            cbf = scenario.cbf
            scenario = dataclasses.replace(scenario, cbf=CbfParams(
                kappa=args.kappa if args.kappa is not None else cbf.kappa,
                buffer=args.buffer if args.buffer is not None else cbf.buffer,
                alpha_gain=(args.alpha_gain if args.alpha_gain is not None
                            else cbf.alpha_gain)))
        dim = scenario.environment.dimension
        if args.bounds is not None:
            if len(args.bounds) != 2 * dim:
                raise scenarios.ScenarioError(
                    f"--bounds needs {2 * dim} numbers for a {dim}D scenario")
            bounds = np.asarray(args.bounds).reshape(dim, 2)
            low, high = bounds[:, 0], bounds[:, 1]
        else:
            low, high = verify.scenario_bounds(scenario)
    except scenarios.ScenarioError as err:
        return _fail(EXIT_VALIDATION, err)

    grid = verify.grid_points(low, high, args.resolution)
    h, margin = barrier_field(scenario.environment, scenario.agent, grid,
                              args.time, scenario.cbf)
    axes = "xyz"[:dim]
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(",".join(list(axes) + ["psi", "h"]) + "\n")
            for point, m, hv in zip(grid, margin, h):
                cells = [f"{v:.17g}" for v in (*point, m, hv)]
                fh.write(",".join(cells) + "\n")
    except OSError as err:
        return _fail(EXIT_RUNTIME, err)
    print(f"wrote {grid.shape[0]} grid rows to {args.out}")
    return EXIT_OK


def _suite_reports(args) -> list[verify.AuditReport]:
    names = [args.scenario] if args.scenario else list(scenarios.BUILTIN_NAMES)
    reports = []
    rng = np.random.default_rng(args.seed)

    def scens():
        return (scenarios.builtin(n) for n in names)

    if args.suite in ("gradients", "all"):
        for s in scens():
            worst = verify.gradient_audit(s, n_states=min(args.n, 1000),
                                          seed=args.seed)
            reports.append(verify.AuditReport(
                name="gradients", parameters={"scenario": s.name,
                                              "n_states": min(args.n, 1000)},
                worst=worst, passed=bool(worst <= 1e-5), seed=args.seed))

    if args.suite in ("qp", "all"):
        worst_slack, worst_comp = 0.0, 0.0
        dims = [2, 3]
        for _ in range(args.n):
            dim = dims[int(rng.integers(len(dims)))]
            ev = BarrierEvaluation(
                value=float(rng.normal()), gradient=rng.normal(size=dim),
                time_partial=float(rng.normal()), nonsmooth_value=0.0)
            params = CbfParams(kappa=5.0, alpha_gain=float(rng.uniform(0.5, 4)))
            res = safe_velocity(ev, rng.normal(size=dim), params)
            worst_slack = max(worst_slack, -res.slack)
            coeff = (res.u_safe - res.u_desired) @ ev.gradient \
                / max(ev.gradient @ ev.gradient, 1e-30)
            worst_comp = max(worst_comp, abs(coeff * res.slack))
        worst = max(worst_slack, worst_comp)
        reports.append(verify.AuditReport(
            name="qp-closed-form", parameters={"n": args.n},
            worst=worst, passed=bool(worst <= 1e-10), seed=args.seed))

    if args.suite in ("hull", "all"):
        for s in scens():
            reports.append(verify.hull_containment_audit(s, seed=args.seed))

    if args.suite in ("under", "all"):
        for s in scens():
            low, high = verify.scenario_bounds(s)
            res = 50 if s.environment.dimension == 3 else 200
            grid = verify.grid_points(low, high, res)
            params = CbfParams(kappa=s.cbf.kappa,
                               buffer=provable_buffer(s.environment),
                               alpha_gain=s.cbf.alpha_gain)
            worst = verify.under_approximation_audit(
                s.environment, s.agent, params, grid)
            reports.append(verify.AuditReport(
                name="under-approximation",
                parameters={"scenario": s.name, "buffer": params.buffer,
                            "resolution": res},
                worst=worst, passed=bool(worst <= 1e-12), seed=args.seed))

    if args.suite in ("sandwich", "all"):
        worst = 0.0
        for _ in range(200):
            size = int(rng.integers(1, 9))
            values = rng.normal(scale=10.0, size=size)
            kappa = float(rng.uniform(0.5, 50.0))
            hi, lo = smooth_max(values, kappa), smooth_min(values, kappa)
            worst = max(
                worst,
                values.max() - hi,
                hi - values.max() - np.log(size) / kappa,
                lo - values.min(),
                values.min() - np.log(size) / kappa - lo,
            )
        reports.append(verify.AuditReport(
            name="smoothing-sandwich", parameters={"n": 200},
            worst=worst, passed=bool(worst <= 1e-12), seed=args.seed))

    return reports


def cmd_verify(args) -> int:
    try:
        reports = _suite_reports(args)
    except scenarios.ScenarioError as err:
        return _fail(EXIT_VALIDATION, err)
    payload = json.dumps([r.to_dict() for r in reports], indent=2,
                         sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    if not all(r.passed for r in reports):
        failed = [r.name for r in reports if not r.passed]
        return _fail(EXIT_AUDIT_FAILED, f"audits failed: {', '.join(failed)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polycbf",
        description="Safety-filtered navigation in polytope environments.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and log the trajectory")
    sim.add_argument("scenario", help="builtin name or config file path")
    sim.add_argument("--kappa", type=float)
    sim.add_argument("--buffer", type=float)
    sim.add_argument("--alpha-gain", type=float, dest="alpha_gain")
    sim.add_argument("--dt", type=float)
    sim.add_argument("--t-end", type=float, dest="t_end")
    sim.add_argument("--start", type=float, nargs="+")
    sim.add_argument("--goal", type=float, nargs="+")
    sim.add_argument("--method", choices=("rk4", "euler"), default="rk4")
    sim.add_argument("--csv", help="trajectory CSV output path")
    sim.add_argument("--svg", help="trajectory SVG output path")
    sim.set_defaults(func=cmd_simulate)

    fld = sub.add_parser("field", help="dump a grid of (psi, h) values")
    fld.add_argument("scenario")
    fld.add_argument("--bounds", type=float, nargs="+",
                     help="xmin xmax ymin ymax [zmin zmax]")
    fld.add_argument("--resolution", type=int, default=100)
    fld.add_argument("--time", type=float, default=0.0)
    fld.add_argument("--kappa", type=float)
    fld.add_argument("--buffer", type=float)
    fld.add_argument("--alpha-gain", type=float, dest="alpha_gain")
    fld.add_argument("--out", required=True)
    fld.set_defaults(func=cmd_field)

    ver = sub.add_parser("verify", help="run verification audits")
    ver.add_argument("suite", choices=("gradients", "qp", "hull", "under",
                                       "sandwich", "all"))
    ver.add_argument("--scenario", help="restrict to one builtin")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--n", type=int, default=100000)
    ver.add_argument("--out", help="write the JSON report to a file")
    ver.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, matching our validation code
        return int(exc.code) if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
