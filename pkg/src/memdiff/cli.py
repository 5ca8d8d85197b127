"""Command line interface.

Subcommands:
    kernels   run the kernel-calculus verification suite
    ode       solve the scalar memory ODE, write a CSV, print the envelope
    solve     run one diffusion experiment, write the diagnostics CSV
    verify    run verification suites; exit 0 iff every check passes

Exit codes: 0 success, 1 at least one check failed, 2 bad configuration.
The default output directory is $MEMDIFF_OUT or ./results.
"""

import argparse
import os
import sys

import numpy as np

from .errors import MemdiffError
from .fracode import OdeProblem, envelope_check, solve_power_ode
from .harness import (
    ExperimentConfig,
    run_suites,
    solve_csv_rows,
    truncate_data,
    write_csv,
    write_json,
    initial_profile,
)
from .kernels import TimeGrid
from .spatial import cutoff
from .stepper import SolveConfig, solve
from ._backend import backend_name

_OVERRIDABLE = {
    "alpha": float, "m": float, "tau": float, "T": float, "radius": float,
    "h": float, "seed": int, "suite": str, "out": str, "profile": str,
    "length": float, "amplitude": float, "width": float,
}


def _add_common(p):
    p.add_argument("--config", help="JSON config file; flags override its fields")
    p.add_argument("--alpha", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--T", type=float, dest="T")
    p.add_argument("--radius", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--length", type=float)
    p.add_argument("--amplitude", type=float)
    p.add_argument("--width", type=float)
    p.add_argument("--profile", choices=("gaussian", "box", "sine", "random"))
    p.add_argument("--seed", type=int)
    p.add_argument("--out")


def _build_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    for flag, _ in _OVERRIDABLE.items():
        val = getattr(args, flag, None)
        if val is None:
            continue
        if flag == "T":
            cfg.horizon = val
        else:
            setattr(cfg, flag, val)
    cfg.validate()
    return cfg


def _out_dir(cfg) -> str:
    return cfg.out or os.environ.get("MEMDIFF_OUT", "results")


def cmd_kernels(args) -> int:
    cfg = _build_config(args)
    cfg.suite = "kernels"
    return _run_verify(cfg)


def cmd_ode(args) -> int:
    cfg = _build_config(args)
    tgrid = TimeGrid.from_horizon(cfg.tau, cfg.horizon)
    problem = OdeProblem(
        alpha=cfg.alpha, lam=args.lam, m=cfg.m, v0=args.v0, tgrid=tgrid
    )
    v = solve_power_ode(problem)
    out = _out_dir(cfg)
    path = os.path.join(out, "ode.csv")
    write_csv(path, ["t", "v"], [np.concatenate(([0.0], v.times())),
                                 np.concatenate(([problem.v0], v.values))])
    env = envelope_check(v, cfg.alpha, cfg.m)
    print(f"wrote {path}")
    print(
        f"envelope: c1={env['c1']:.6g} c2={env['c2']:.6g} "
        f"tail_slope={env['tail_slope']:.4f} target={env['target_slope']:.4f} "
        f"passed={env['passed']}"
    )
    return 0


def cmd_solve(args) -> int:
    cfg = _build_config(args)
    grid = cfg.space_grid()
    tgrid = cfg.time_grid()
    u0 = truncate_data(
        initial_profile(cfg, grid), cfg.trunc_n, cfg.trunc_m,
        cutoff(cfg.trunc_n, grid),
    )
    sc = SolveConfig.for_power_law(
        cfg.alpha, cfg.m, grid, tgrid, u0=u0, reg_index=cfg.reg_index,
        newton_tol=cfg.newton_tol, newton_max_iter=cfg.newton_max_iter,
    )
    hist = solve(sc, u0)
    out = _out_dir(cfg)
    path = os.path.join(out, "solve.csv")
    header, cols = solve_csv_rows(hist)
    write_csv(path, header, cols)
    print(f"wrote {path} (backend={backend_name()}, "
          f"newton iterations mean={hist.newton_iterations.mean():.2f})")
    return 0


def _run_verify(cfg) -> int:
    reports = run_suites(cfg)
    out = _out_dir(cfg)
    payload = {
        "backend": backend_name(),
        "seed": cfg.seed,
        "suites": [r.to_dict() for r in reports],
        "passed": all(r.passed for r in reports),
    }
    write_json(os.path.join(out, "report.json"), payload)
    rows = [
        (r.suite, c.name, c.measured, c.tolerance, int(c.passed))
        for r in reports
        for c in r.checks
    ]
    write_csv(
        os.path.join(out, "checks.csv"),
        ["suite", "check", "measured", "tolerance", "passed"],
        [np.array(col, dtype=object) for col in zip(*rows)],
    )
    for r in reports:
        for line in r.lines():
            print(line)
    total = sum(len(r.checks) for r in reports)
    failed = sum(r.n_failed for r in reports)
    print(f"report: {total - failed}/{total} checks passed "
          f"-> {os.path.join(out, 'report.json')}")
    return 0 if payload["passed"] else 1


def cmd_verify(args) -> int:
    cfg = _build_config(args)
    if args.suite:
        cfg.suite = args.suite
    cfg.validate()
    return _run_verify(cfg)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="memdiff",
        description="Nonlinear diffusion with memory derivatives: solvers and "
                    "theorem-level verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_k = sub.add_parser("kernels", help="run the kernel-calculus suite")
    _add_common(p_k)

    p_o = sub.add_parser("ode", help="solve the scalar memory ODE")
    _add_common(p_o)
    p_o.add_argument("--lam", type=float, default=1.0, help="decay rate")
    p_o.add_argument("--v0", type=float, default=1.0, help="initial value")

    p_s = sub.add_parser("solve", help="run one diffusion experiment")
    _add_common(p_s)

    p_v = sub.add_parser("verify", help="run verification suites")
    _add_common(p_v)
    p_v.add_argument(
        "--suite",
        choices=("all", "kernels", "contraction", "mass", "nonextinction"),
    )

    args = parser.parse_args(argv)
    handlers = {
        "kernels": cmd_kernels,
        "ode": cmd_ode,
        "solve": cmd_solve,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except MemdiffError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
