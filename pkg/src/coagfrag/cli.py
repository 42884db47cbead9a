"""Command-line front end.

Every subcommand writes its table(s) plus a JSON sidecar holding the full run
configuration into ``--out`` (default: current directory).

Exit codes: 0 success, 1 solver failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AsymptoteKind,
    AsymptoteModel,
    RateTable,
    log10_asymptote,
    log10_density_asymptote,
)
from .errors import SolverError
from .evolution import StepMode, StepPolicy, evolve, uniform_init
from .io import CSVFormatError, read_csv, write_json, write_table
from .model import Distribution, Grid
from .newton import exponential_init, solve_equilibrium
from .recursive import equilibrium_sequence, solve_m0

log = logging.getLogger("coagfrag")

EXIT_OK, EXIT_SOLVER, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# -- argument types -----------------------------------------------------------

def positive_float(s: str) -> float:
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {s}")
    return v


def nonneg_float(s: str) -> float:
    v = float(s)
    if not (math.isfinite(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"must be a non-negative number, got {s}")
    return v


def positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def float_list(s) -> list:
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    s = str(s).strip()
    if not s:
        return []
    try:
        return [float(v) for v in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _fmt_t(t: float) -> str:
    return repr(float(t)).rstrip("0").rstrip(".") if float(t) != int(t) else str(int(t))


# -- subcommands --------------------------------------------------------------

def _sidecar(args, name: str, payload: dict) -> Path:
    payload = dict(payload)
    payload["config"] = _config_dict(args)
    payload["version"] = __version__
    return write_json(Path(args.out) / f"{name}.json", payload)


def cmd_recursive(args) -> int:
    m0 = solve_m0(args.m1, args.h)
    seq = equilibrium_sequence(m0, args.h, args.terms, dps=args.dps)
    i = np.arange(1, seq.M + 1)
    rows = zip(i, seq.x, seq.values, seq.density)
    write_table(Path(args.out) / "recursive", ["i", "x", "f_h", "f_density"], rows, args.format)
    _sidecar(args, "recursive", {
        "m1": args.m1,
        "h": args.h,
        "m0": m0,
        "M": seq.M,
        "mass_check": seq.mass(),
        "number_check": seq.number(),
        "b_tail": seq.b_tail,
    })
    log.info("recursive: m0=%.12g mass(partial)=%.12g", m0, seq.mass())
    return EXIT_OK


def _grid(args) -> Grid:
    try:
        return Grid(args.h, args.L)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_newton(args) -> int:
    grid = _grid(args)
    rep = solve_equilibrium(args.m1, grid, max_iter=args.iters, tol_residual=args.tol)
    f = rep.solution
    write_table(Path(args.out) / "newton", ["i", "x", "f"], zip(range(1, grid.N + 1), grid.x, f.values), args.format)
    _sidecar(args, "newton", {**rep.summary(), "residual_history": rep.residual_history,
                              "increment_history": rep.increment_history})
    log.info("newton: iterations=%d residual=%.3e converged=%s", rep.iterations, rep.residual_norm, rep.converged)
    return EXIT_OK


def _load_distribution(path, grid: Grid) -> Distribution:
    data = read_csv(path, ["x", "f"])
    if data["f"].size != grid.N or not np.allclose(data["x"], grid.x, rtol=1e-9, atol=0):
        raise UsageError(f"{path}: grid does not match h={grid.h}, L={grid.L}")
    return Distribution(grid, data["f"])


def cmd_evolve(args) -> int:
    grid = _grid(args)
    if args.init_file:
        f0 = _load_distribution(args.init_file, grid)
    elif args.init == "uniform":
        f0 = uniform_init(args.m1, grid)
    else:
        f0 = exponential_init(args.m1, grid)

    if args.dt_fixed is not None:
        policy = StepPolicy(mode=StepMode.FIXED, dt_fixed=args.dt_fixed, monotone_exclude=args.monotone_exclude)
    else:
        policy = StepPolicy(dt0=args.dt0, dt_max=args.dt_max, grow=args.grow, shrink=args.shrink,
                            monotone_exclude=args.monotone_exclude)

    snaps = sorted(args.snapshots)
    if any(t <= 0 or t > args.t_end for t in snaps):
        raise UsageError(f"snapshot times must lie in (0, t_end={args.t_end}]")
    if args.self_equilibrium is not None and args.equilibrium:
        raise UsageError("--equilibrium and --self-equilibrium are mutually exclusive")
    ref_t = args.self_equilibrium
    if ref_t is not None and not 0 < ref_t <= args.t_end:
        raise UsageError(f"--self-equilibrium {ref_t} must lie in (0, t_end={args.t_end}]")
    wanted = set(snaps) | ({ref_t} if ref_t is not None else set())
    traj = evolve(f0, args.t_end, policy, sorted(wanted))

    out = Path(args.out)
    files = []
    for t, f in traj.snapshots:
        p = write_table(out / f"snapshot_t{_fmt_t(t)}", ["i", "x", "f"],
                        zip(range(1, grid.N + 1), grid.x, f.values), args.format)
        files.append(p.name)

    mu_rows = []
    reference = None
    if ref_t is not None:
        reference = traj.at(ref_t)
        mu_times = [t for t in snaps if t < ref_t]
    elif args.equilibrium:
        reference = _load_distribution(args.equilibrium, grid)
        mu_times = snaps
    if reference is not None:
        xs = args.eval_x or []
        for x in xs:
            i = grid.index_of(x)
            ref = reference.values[i - 1]
            if not ref > 0:
                raise UsageError(f"reference equilibrium vanishes at x={x}")
            for t in mu_times:
                mu_rows.append((x, t, abs(traj.at(t).values[i - 1] - ref) / ref))
        p = write_table(out / "mu", ["x", "t", "mu"], mu_rows, args.format)
        files.append(p.name)

    _sidecar(args, "trajectory", {
        "accepted_steps": traj.accepted_steps,
        "rejected_steps": traj.rejected_steps,
        "flagged_steps": traj.flagged_steps,
        "final_dt": traj.final_dt,
        "mass_drift": traj.mass_drift(),
        "snapshot_times": traj.times,
        "files": files,
    })
    return EXIT_OK


def _asymptote_model(args) -> AsymptoteModel:
    kind = AsymptoteKind(args.kind)
    try:
        return AsymptoteModel(kind, m1=args.m1, h=args.h, n_p=args.np)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_asymptote(args) -> int:
    model = _asymptote_model(args)
    if args.num == 0:
        xs = np.array([])
    elif args.log_spaced:
        xs = np.geomspace(args.x_min, args.x_max, args.num)
    else:
        xs = np.linspace(args.x_min, args.x_max, args.num)
    fn = log10_density_asymptote if args.density else log10_asymptote
    ys = np.atleast_1d(fn(model, xs)) if xs.size else np.array([])
    write_table(Path(args.out) / "asymptote", ["x", "log10_f"], zip(xs, ys), args.format)
    _sidecar(args, "asymptote", {"kind": model.kind.value, "points": int(xs.size)})
    return EXIT_OK


def cmd_rates(args) -> int:
    data = read_csv(args.mu, ["x", "t", "mu"])
    sizes = sorted(set(data["x"].tolist()))
    times = sorted(set(data["t"].tolist()))
    if args.times:
        times = sorted(args.times)
    mu = np.full((len(sizes), len(times)), np.nan)
    for x, t, m in zip(data["x"], data["t"], data["mu"]):
        if t in times:
            mu[sizes.index(x), times.index(t)] = m
    table = RateTable(sizes, times, mu)
    rows, rows_log10 = [], []
    for s, x in enumerate(sizes):
        for k in range(len(times) - 1):
            d = table.delta[s, k]
            if np.isfinite(d):
                rows.append((x, times[k], times[k + 1], d))
                rows_log10.append({"x": x, "t1": times[k], "t2": times[k + 1], "delta_log10": d * math.log10(math.e)})
    write_table(Path(args.out) / "rates", ["x", "t1", "t2", "delta"], rows, args.format)
    _sidecar(args, "rates", {"log": "natural", "delta_log10": rows_log10})
    return EXIT_OK


def cmd_compare(args) -> int:
    grid = _grid(args)
    rep = solve_equilibrium(args.m1, grid, max_iter=args.iters, tol_residual=args.tol)
    M = args.terms or 10 * grid.N
    if M < grid.N:
        raise UsageError(f"--terms {M} is smaller than the grid size N={grid.N}")
    seq = equilibrium_sequence(solve_m0(args.m1, args.h), args.h, M)
    fn = args.h * np.asarray(rep.solution.values)
    fr = np.asarray(seq.values[: grid.N])
    diff = np.abs(fn - fr)
    write_table(Path(args.out) / "compare", ["x", "f_newton", "f_recursive", "abs_diff"],
                zip(grid.x, fn, fr, diff), args.format)
    worst = int(np.argmax(diff))
    _sidecar(args, "compare", {
        "scale": "f_h (sequence scale, h times density)",
        "max_abs_diff": float(diff[worst]),
        "argmax_x": float(grid.x[worst]),
        "newton": rep.summary(),
        "recursive_terms": M,
        "recursive_mass_check": seq.mass(),
    })
    log.info("compare: max_abs_diff=%.3e at x=%g", diff[worst], grid.x[worst])
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--config", help="JSON file with option defaults; flags override it")
    common.add_argument("--log-level", default="WARNING")

    p = argparse.ArgumentParser(prog="coagfrag", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("recursive", parents=[common], help="model D equilibrium by recursion")
    s.add_argument("--m1", type=positive_float, default=1.0)
    s.add_argument("--h", type=positive_float, default=1.0)
    s.add_argument("--terms", type=positive_int, default=100)
    s.add_argument("--dps", type=positive_int, default=None, help="decimal digits for an mpmath run")
    s.set_defaults(func=cmd_recursive)

    s = sub.add_parser("newton", parents=[common], help="truncated equilibrium by Newton iteration")
    s.add_argument("--m1", type=positive_float, default=1.0)
    s.add_argument("--h", type=positive_float, default=0.01)
    s.add_argument("--L", type=positive_float, default=100.0)
    s.add_argument("--iters", type=positive_int, default=5)
    s.add_argument("--tol", type=positive_float, default=1e-10)
    s.set_defaults(func=cmd_newton)

    s = sub.add_parser("evolve", parents=[common], help="explicit Euler time evolution")
    s.add_argument("--init", choices=["uniform", "exponential"], default="uniform")
    s.add_argument("--init-file", help="CSV with columns x,f to start from")
    s.add_argument("--m1", type=positive_float, default=1.0)
    s.add_argument("--h", type=positive_float, default=0.01)
    s.add_argument("--L", type=positive_float, default=100.0)
    s.add_argument("--dt-fixed", type=positive_float, default=None, help="fixed step; adaptive if omitted")
    s.add_argument("--dt0", type=positive_float, default=1e-2)
    s.add_argument("--dt-max", type=positive_float, default=1.1)
    s.add_argument("--grow", type=positive_float, default=1.10)
    s.add_argument("--shrink", type=positive_float, default=0.90)
    s.add_argument("--monotone-exclude", type=nonneg_float, default=0.05,
                   help="top fraction of the grid ignored by the monotonicity test")
    s.add_argument("--t-end", type=nonneg_float, default=30.0)
    s.add_argument("--snapshots", type=float_list, default=[])
    s.add_argument("--eval-x", type=float_list, default=[])
    s.add_argument("--equilibrium", help="CSV (x,f) used as reference for the mu table")
    s.add_argument("--self-equilibrium", type=positive_float, default=None,
                   help="use the state at this time as reference")
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("asymptote", parents=[common], help="closed-form asymptotic profiles")
    s.add_argument("--kind", choices=[k.value for k in AsymptoteKind], default="c_large")
    s.add_argument("--x-min", type=positive_float, default=1.0)
    s.add_argument("--x-max", type=positive_float, default=100.0)
    s.add_argument("--num", type=int, default=100)
    s.add_argument("--log-spaced", action="store_true")
    s.add_argument("--density", action="store_true", help="d_large on the density scale, argument is size x")
    s.add_argument("--m1", type=positive_float, default=1.0)
    s.add_argument("--h", type=positive_float, default=None)
    s.add_argument("--np", type=positive_float, default=None, help="N_P of the Niwa profile")
    s.set_defaults(func=cmd_asymptote)

    s = sub.add_parser("rates", parents=[common], help="convergence rates from a mu table")
    s.add_argument("--mu", required=True, help="CSV with columns x,t,mu")
    s.add_argument("--times", type=float_list, default=[], help="restrict to these times")
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("compare", parents=[common], help="Newton vs recursive equilibrium")
    s.add_argument("--m1", type=positive_float, default=1.0)
    s.add_argument("--h", type=positive_float, default=0.01)
    s.add_argument("--L", type=positive_float, default=100.0)
    s.add_argument("--iters", type=positive_int, default=5)
    s.add_argument("--tol", type=positive_float, default=1e-10)
    s.add_argument("--terms", type=positive_int, default=None, help="recursion length (default 10 L/h)")
    s.set_defaults(func=cmd_compare)
    return p


def _config_dict(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        coerced = {}
        for action in sub._actions:
            if action.dest in cfg:
                v = cfg[action.dest]
                if action.type is not None and v is not None and not isinstance(v, bool):
                    try:
                        v = action.type(v if action.type is float_list else str(v))
                    except (argparse.ArgumentTypeError, ValueError) as exc:
                        parser.error(f"config key {action.dest}: {exc}")
                coerced[action.dest] = v
        sub.set_defaults(**coerced)
        args = parser.parse_args(argv)
    return args


def _thread_limit():
    n = os.environ.get("COAGFRAG_THREADS")
    if not n:
        return nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return nullcontext()
    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    args = _parse(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with _thread_limit():
            return args.func(args)
    except (UsageError, CSVFormatError) as exc:
        print(f"coagfrag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"coagfrag {args.command}: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"coagfrag {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"coagfrag {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
