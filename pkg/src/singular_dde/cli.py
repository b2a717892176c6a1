"""Command line: ``singular-dde {legs,profile,simulate,sweep,cusp}``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import algebra, analysis, branch, export, profiles, simulator
from .model import (
    BranchIndex,
    ConditionViolation,
    DegenerateCoefficient,
    DegenerateIndex,
    InvalidParams,
    Kind,
    ModelParams,
    SingularDenominator,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
THREADS_ENV = "SINGULAR_DDE_THREADS"


class ConfigError(Exception):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def _add_model_args(p: argparse.ArgumentParser, eps: bool = False, K1: bool = False):
    delay = p.add_mutually_exclusive_group()
    delay.add_argument("--A", type=float, help="delay ratio a2/a1 (default 6)")
    delay.add_argument("--a2", type=float, help="second delay (alternative to --A)")
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--K2", type=float, default=0.5)
    if K1:
        p.add_argument("--K1", type=float, required=True)
    if eps:
        p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int, default=0, help="reserved; all commands are deterministic")


def _params(args, K1: float = 1.0, extra: list[str] | None = None) -> ModelParams:
    """Build ModelParams, collecting every violated constraint."""
    problems = list(extra or [])
    a2 = args.a2 if args.a2 is not None else (6.0 if args.A is None else args.A) * args.a1
    eps = getattr(args, "eps", 0.0)
    try:
        params = ModelParams(eps=eps, K1=K1, K2=args.K2, a1=args.a1, a2=a2, c=args.c)
    except InvalidParams as exc:
        problems.extend(exc.problems)
        params = None
    if problems:
        raise ConfigError(problems)
    return params


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args, params: ModelParams, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    cfg["params"] = params.as_dict()
    cfg.update(extra)
    return cfg


def _threads(default: int = 2) -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError([f"{THREADS_ENV} must be an integer (got {raw!r})"]) from None
    if value < 1:
        raise ConfigError([f"{THREADS_ENV} must be >= 1 (got {value})"])
    return min(default, value)


def cmd_legs(args) -> int:
    extra = []
    if args.n < 0:
        extra.append(f"n must be >= 0 (got {args.n})")
    if not args.k1_max > 0:
        extra.append(f"k1-max must be > 0 (got {args.k1_max})")
    if args.samples < 1:
        extra.append(f"samples must be >= 1 (got {args.samples})")
    params = _params(args, extra=extra)
    items, points = branch.assemble(params, args.n, args.k1_max)
    legs = [x for x in items if isinstance(x, branch.Leg)]
    out = _out_dir(args)
    cfg = _config(args, params)
    export.write_csv(out / "branch.csv", export.BRANCH_COLUMNS,
                     export.branch_rows(params, legs, args.samples, args.k1_max), cfg)
    chain = [_item_dict(x) for x in items]
    export.write_json(out / "bifurcations.json",
                      {"points": export.bifurcation_payload(points), "chain": chain}, cfg)
    for x in chain:
        print(json.dumps(export._jsonable(x)))
    return EXIT_OK


def _item_dict(item) -> dict:
    if isinstance(item, branch.Gap):
        return {"gap": [item.k1_lo, item.k1_hi]}
    return {"kind": item.kind.value, "n": item.n, "m": item.m,
            "K1_lo": item.k1_lo, "K1_hi": item.k1_hi,
            "lo": str(item.lo_boundary), "hi": str(item.hi_boundary)}


def cmd_profile(args) -> int:
    extra = []
    try:
        kind = Kind.parse(args.kind)
    except ValueError as exc:
        extra.append(str(exc))
        kind = None
    if args.n < 0 or args.m < 0:
        extra.append(f"indices must be >= 0 (got n={args.n}, m={args.m})")
    params = _params(args, K1=args.K1, extra=extra)
    try:
        sol = algebra.construct(params, BranchIndex(args.n, args.m), kind)
    except ConditionViolation as exc:
        raise ConfigError([f"{kind.value} (n={args.n}, m={args.m}) does not exist at "
                           f"K1={args.K1}: {name} fails (margin {v:.6g})"
                           for name, v in exc.violations.items()]) from None
    except SingularDenominator as exc:
        raise ConfigError([str(exc)]) from None
    parm = profiles.parametrisation(params, sol)
    report = profiles.verify_parametrisation(parm, params.c, args.per_piece)
    out = _out_dir(args)
    cfg = _config(args, params)
    export.write_csv(out / "profile.csv", export.PROFILE_COLUMNS,
                     export.profile_rows(parm.profile), cfg)
    export.write_csv(out / "parametrisation.csv", export.PARAMETRISATION_COLUMNS,
                     export.parametrisation_rows(parm), cfg)
    payload = {"solution": {"kind": sol.kind.value, "n": sol.n, "m": sol.m, "T": sol.T,
                            "T1": sol.T1, "T2": sol.T2, "theta": sol.theta,
                            "amplitude": algebra.amplitude(sol, params),
                            "marginal": list(sol.marginal), "notes": list(sol.notes)},
               "verification": export.report_payload(report)}
    export.write_json(out / "verification.json", payload, cfg)
    print(json.dumps(export._jsonable(payload)))
    return EXIT_OK if report.passed else EXIT_RUNTIME


def _step(args) -> simulator.StepControl:
    return simulator.StepControl(h_max=args.h_max, rtol=args.rtol, atol=args.atol)


def _step_problems(args) -> list[str]:
    out = []
    if args.h_max is not None and not args.h_max > 0:
        out.append(f"h-max must be > 0 (got {args.h_max})")
    if not args.rtol > 0 or not args.atol > 0:
        out.append("rtol and atol must be > 0")
    return out


def _history(args, params: ModelParams):
    if args.history == "sinusoid":
        return simulator.Sinusoid(amplitude=args.amplitude)
    if args.history == "constant":
        return simulator.Constant(args.u0)
    try:
        kind = Kind.parse(args.warm_kind)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    try:
        sol = algebra.construct(params, BranchIndex(args.warm_n, args.warm_m), kind)
    except ConditionViolation as exc:
        raise ConfigError([f"warm start {kind.value} (n={args.warm_n}, m={args.warm_m}) "
                           f"does not exist at K1={params.K1}: {name} fails"
                           for name in exc.violations]) from None
    return simulator.warm_start(sol)


def cmd_simulate(args) -> int:
    extra = _step_problems(args)
    if not args.eps > 0:
        extra.append(f"eps must be > 0 for simulation (got {args.eps})")
    if not args.t_end > 0:
        extra.append(f"t-end must be > 0 (got {args.t_end})")
    if not 0 < args.tail_fraction <= 1:
        extra.append(f"tail-fraction must lie in (0, 1] (got {args.tail_fraction})")
    if args.stride < 1:
        extra.append(f"stride must be >= 1 (got {args.stride})")
    params = _params(args, K1=args.K1, extra=extra)
    history = _history(args, params)
    traj = simulator.integrate(params, history, args.t_end, _step(args))
    out = _out_dir(args)
    cfg = _config(args, params)
    export.write_csv(out / "trajectory.csv", export.TRAJECTORY_COLUMNS,
                     export.trajectory_rows(traj, args.stride), cfg)
    try:
        metrics = analysis.extract(traj, args.tail_fraction)
    except analysis.NoOscillation as exc:
        export.write_json(out / "metrics.json", {"error": str(exc)}, cfg)
        print(f"no oscillation: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    payload = export.metrics_payload(metrics) | {"diagnostics": traj.diagnostics}
    export.write_json(out / "metrics.json", payload, cfg)
    print(json.dumps(export._jsonable(payload)))
    return EXIT_OK


def cmd_sweep(args) -> int:
    extra = _step_problems(args)
    if not args.eps > 0:
        extra.append(f"eps must be > 0 for simulation (got {args.eps})")
    if args.steps < 2:
        extra.append(f"steps must be >= 2 (got {args.steps})")
    for name in ("K1_from", "K1_to"):
        if not getattr(args, name) > 0:
            extra.append(f"{name} must be > 0 (got {getattr(args, name)})")
    params = _params(args, K1=args.K1_from if args.K1_from > 0 else 1.0, extra=extra)
    settings = analysis.SweepSettings(t_first=args.t_first, t_warm=args.t_warm,
                                      tail_fraction=args.tail_fraction, step=_step(args))
    lo, hi = args.K1_from, args.K1_to
    if args.direction == "both":
        up, down = analysis.sweep_both(params, min(lo, hi), max(lo, hi), args.steps,
                                       settings=settings, workers=_threads())
        results = [up, down]
        window = analysis.hysteresis_window(up, down)
    else:
        a, b = (min(lo, hi), max(lo, hi)) if args.direction == "up" else (max(lo, hi), min(lo, hi))
        results = [analysis.sweep(params, a, b, args.steps, settings=settings)]
        window = None
    out = _out_dir(args)
    cfg = _config(args, params)
    export.write_csv(out / "sweep.csv", export.SWEEP_COLUMNS, export.sweep_rows(results), cfg)
    summary = {
        "jumps": {r.direction.value: r.jumps for r in results},
        "modality_transitions": {r.direction.value: analysis.modality_transitions(r)
                                 for r in results},
        "hysteresis_window": window,
        "failures": {r.direction.value: [[s.K1, s.error] for s in r.samples if s.error]
                     for r in results},
    }
    export.write_json(out / "sweep_summary.json", summary, cfg)
    print(json.dumps(export._jsonable(summary)))
    return EXIT_OK


def cmd_cusp(args) -> int:
    problems = []
    if not 0 < args.K2 < 1:
        problems.append(f"K2 must lie in (0, 1) (got {args.K2})")
    if args.n < 0 or args.m < 1:
        problems.append(f"need n >= 0 and m >= 1 (got n={args.n}, m={args.m})")
    elif args.m == args.n:
        problems.append(f"no cusp for m = n (got {args.m})")
    if problems:
        raise ConfigError(problems)
    A, K1 = branch.cusp_locus(args.K2, args.n, args.m)
    payload = {"A": A, "K1": K1}
    if args.out:
        cfg = {"K2": args.K2, "n": args.n, "m": args.m}
        export.write_json(Path(args.out) / "cusp.json", payload, cfg)
    print(json.dumps(payload))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="singular-dde", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("legs", help="assemble the singular branch and its bifurcation points")
    _add_model_args(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--k1-max", type=float, default=branch.K1_CAP)
    p.add_argument("--samples", type=int, default=400, help="rows per leg in branch.csv")
    p.add_argument("--out", default="out/legs")
    p.set_defaults(func=cmd_legs)

    p = sub.add_parser("profile", help="construct and verify one singular solution")
    _add_model_args(p, K1=True)
    p.add_argument("--kind", required=True, help="unimodal, typeI or typeII")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--per-piece", type=int, default=200)
    p.add_argument("--out", default="out/profile")
    p.set_defaults(func=cmd_profile)

    def step_args(q):
        q.add_argument("--h-max", type=float, default=None)
        q.add_argument("--rtol", type=float, default=simulator.StepControl.rtol)
        q.add_argument("--atol", type=float, default=simulator.StepControl.atol)
        q.add_argument("--tail-fraction", type=float, default=0.5)

    p = sub.add_parser("simulate", help="integrate the eps > 0 equation and measure the orbit")
    _add_model_args(p, eps=True, K1=True)
    p.add_argument("--t-end", type=float, default=200.0)
    p.add_argument("--history", choices=("sinusoid", "constant", "warm"), default="sinusoid")
    p.add_argument("--amplitude", type=float, default=0.1)
    p.add_argument("--u0", type=float, default=0.1)
    p.add_argument("--warm-kind", default="unimodal")
    p.add_argument("--warm-n", type=int, default=0)
    p.add_argument("--warm-m", type=int, default=0)
    p.add_argument("--stride", type=int, default=10)
    step_args(p)
    p.add_argument("--out", default="out/simulate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="warm-started K1 sweeps")
    _add_model_args(p, eps=True)
    p.add_argument("--from", dest="K1_from", type=float, required=True)
    p.add_argument("--to", dest="K1_to", type=float, required=True)
    p.add_argument("--steps", type=int, default=60)
    p.add_argument("--direction", choices=("up", "down", "both"), default="both")
    p.add_argument("--t-first", type=float, default=200.0)
    p.add_argument("--t-warm", type=float, default=100.0)
    step_args(p)
    p.add_argument("--out", default="out/sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cusp", help="cusp point (A, K1) where the L-fold disappears")
    p.add_argument("--K2", type=float, default=0.5)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cusp)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except (simulator.IntegrationError, DegenerateCoefficient, DegenerateIndex,
            SingularDenominator, analysis.NoOscillation) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
