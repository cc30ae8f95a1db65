"""Command-line front end: runs, sweeps, experiment drivers, bound checks.

All randomness flows from --seed; when omitted a seed is drawn and printed
so the run can be reproduced.  Flags may come from a key=value config file
(--config); explicit flags win.  Numeric flags are validated before any
simulation starts.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, experiments
from .core import RunConfig, make_rule, run


class CliError(Exception):
    pass


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _pick_seed(seed):
    if seed is not None:
        return int(seed)
    chosen = int.from_bytes(os.urandom(4), "big")
    _say(f"seed={chosen}")
    return chosen


def _check_writable(path) -> None:
    path = Path(path)
    if path.is_dir():
        raise CliError(f"output path {path} is a directory")
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise CliError(f"output destination {parent} is not writable")


def load_config(path) -> dict[str, list[str]]:
    """key = value [value ...] lines mirroring the flag names; '#' comments."""
    mapping: dict[str, list[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values = value.split()
            if not values:
                raise CliError(f"{path}:{lineno}: empty value for {key.strip()!r}")
            mapping[key.strip()] = values
    return mapping


def _resolve(args, config, name, cast, default=None, multi=False):
    value = getattr(args, name, None)
    if value is not None and not (multi and value == []):
        return value
    if config and name in config:
        raw = config[name]
        if multi:
            return [cast(v) for v in raw]
        return cast(raw[0])
    return default


def _resolve_param(algo: str, K, rho) -> float:
    if K is not None and rho is not None:
        raise CliError("--K and --rho conflict; give the parameter native to the algorithm")
    if algo == "cga":
        if K is None:
            raise CliError("cga needs --K")
        return float(K)
    if rho is None:
        raise CliError("mmas needs --rho")
    return float(rho)


def _add_common(p: argparse.ArgumentParser, multi_grid: bool = False) -> None:
    p.add_argument("--algo", choices=("cga", "mmas"), help="algorithm to run")
    if multi_grid:
        p.add_argument("--n", type=int, action="append", help="problem size (repeatable)")
        p.add_argument("--K", type=float, action="append", help="cGA population parameter (repeatable)")
        p.add_argument("--rho", type=float, action="append", help="MMAS evaporation factor (repeatable)")
    else:
        p.add_argument("--n", type=int, help="problem size")
        p.add_argument("--K", type=float, help="cGA population parameter (step size 1/K)")
        p.add_argument("--rho", type=float, help="MMAS evaporation factor")
    p.add_argument("--seed", type=int, help="base random seed (auto-chosen and printed if omitted)")
    p.add_argument("--budget", type=int, help="iteration budget (default 100 * n * ln n)")
    p.add_argument("--config", help="key=value config file; flags override")


def _default_budget(n: int) -> int:
    return max(1, int(math.ceil(100.0 * n * math.log(n))))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftlab",
        description="Simulate and analyze update strength and genetic drift "
                    "in the cGA and a two-individual MMAS on OneMax.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single run, one-line summary, optional record file")
    _add_common(p)
    p.add_argument("--out", help="write the run record to this file")

    p = sub.add_parser("sweep", help="runtime sweep over an (n, strength) grid")
    _add_common(p, multi_grid=True)
    p.add_argument("--trials", type=int, help="trials per grid cell (default 10)")
    p.add_argument("--out", required=True, help="CSV output path (summary lands beside it)")
    p.add_argument("--jobs", type=int, default=1, help="parallel trials (outputs identical for any value)")
    p.add_argument("--resume", action="store_true", help="continue an existing CSV at the next seed index")

    p = sub.add_parser("census", help="border-occupancy census per trial")
    _add_common(p, multi_grid=True)
    p.add_argument("--trials", type=int, help="trials per grid cell (default 10)")
    p.add_argument("--checkpoint", type=int, help="stop at this iteration instead of the optimum")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("bstep-freq", help="empirical vs exact biased-step frequency")
    p.add_argument("--n", type=int, action="append", help="problem size (repeatable)")
    p.add_argument("--samples", type=int, help="frozen-model steps per n (default 200000)")
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="key=value config file; flags override")
    p.add_argument("--out", required=True)

    p = sub.add_parser("hitting-time", help="displacement hitting-time experiment")
    _add_common(p)
    p.add_argument("--mode", choices=("rw", "full"), default="rw")
    p.add_argument("--s", type=float, required=True, help="signed target displacement")
    p.add_argument("--alpha", type=float, required=True, help="horizon scale factor")
    p.add_argument("--trials", type=int, help="default 1000")
    p.add_argument("--horizon", type=int, help="override the alpha-derived horizon")
    p.add_argument("--out", help="CSV of per-trial outcomes")

    p = sub.add_parser("clt", help="normality diagnostic for the rescaled model walk")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--steps", type=int, help="default 10000")
    p.add_argument("--trials", type=int, help="default 2000")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("coupon", help="recovery cost after pinning bits at the lower border")
    _add_common(p)
    p.add_argument("--m", type=int, required=True, help="bits initialized at the lower border")
    p.add_argument("--trials", type=int, help="default 100")
    p.add_argument("--out", help="CSV of per-trial remaining times")

    p = sub.add_parser("verify-bounds", help="bound-vs-oracle verification table")
    p.add_argument("--only", action="append", choices=experiments.VERIFY_FAMILIES,
                   help="run a single family (repeatable)")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--seed", type=int)

    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else None
    algo = _resolve(args, config, "algo", str)
    if algo is None:
        raise CliError("run needs --algo")
    n = _resolve(args, config, "n", int)
    if n is None:
        raise CliError("run needs --n")
    param = _resolve_param(algo, _resolve(args, config, "K", float),
                           _resolve(args, config, "rho", float))
    rule = make_rule(algo, param)
    budget = _resolve(args, config, "budget", int, _default_budget(n))
    seed = _pick_seed(_resolve(args, config, "seed", int))
    out = _resolve(args, config, "out", str)
    if out:
        _check_writable(out)
    record = run(RunConfig(n=n, rule=rule, budget=budget), seed)
    if out:
        experiments.persist_run_records([record], out)
    label = f"K={param:g}" if algo == "cga" else f"rho={param:g}"
    status = ("budget exhausted" if record.censored
              else f"optimum sampled after {record.iterations} iterations")
    print(f"{algo} n={n} {label} seed={seed}: {status} "
          f"({record.evaluations} evaluations, {record.lower_border_hits} bits "
          f"touched the lower border)")
    return 0


def _grid_config(args, needs_tracking: bool = False) -> experiments.SweepConfig:
    config = load_config(args.config) if args.config else None
    algo = _resolve(args, config, "algo", str)
    if algo is None:
        raise CliError("missing --algo")
    n_values = _resolve(args, config, "n", int, multi=True)
    if not n_values:
        raise CliError("missing --n")
    Ks = _resolve(args, config, "K", float, multi=True)
    rhos = _resolve(args, config, "rho", float, multi=True)
    if Ks and rhos:
        raise CliError("--K and --rho conflict; give the parameter native to the algorithm")
    params = Ks if algo == "cga" else rhos
    if not params:
        raise CliError(f"missing --{'K' if algo == 'cga' else 'rho'}")
    trials = _resolve(args, config, "trials", int, 10)
    budget = _resolve(args, config, "budget", int, _default_budget(max(n_values)))
    seed = _pick_seed(_resolve(args, config, "seed", int))
    return experiments.SweepConfig(
        algorithm=algo, n_values=tuple(n_values), params=tuple(params),
        trials=trials, budget=budget, base_seed=seed,
        tracked_bits="all" if needs_tracking else "none")


def _cmd_sweep(args) -> int:
    config = _grid_config(args)
    _check_writable(args.out)
    experiments.runtime_sweep(config, out=args.out, jobs=args.jobs,
                              resume=args.resume, progress=_say)
    print(f"wrote {args.out} and {experiments.summary_path(args.out)}")
    return 0


def _cmd_census(args) -> int:
    config = _grid_config(args, needs_tracking=True)
    _check_writable(args.out)
    file_config = load_config(args.config) if args.config else None
    checkpoint = _resolve(args, file_config, "checkpoint", int)
    experiments.border_census(config, checkpoint=checkpoint, out=args.out,
                              jobs=args.jobs)
    print(f"wrote {args.out}")
    return 0


def _cmd_bstep_freq(args) -> int:
    config = load_config(args.config) if args.config else None
    n_values = _resolve(args, config, "n", int, multi=True)
    if not n_values:
        raise CliError("missing --n")
    samples = _resolve(args, config, "samples", int, 200_000)
    if samples < 1:
        raise CliError("--samples must be positive")
    seed = _pick_seed(_resolve(args, config, "seed", int))
    _check_writable(args.out)
    rows = experiments.bstep_frequency_experiment(n_values, samples, seed, out=args.out)
    for n, _, empirical, exact, ratio in rows:
        print(f"n={n}: empirical {empirical:.6f} exact {exact:.6f} ratio {ratio:.4f}")
    return 0


def _cmd_hitting(args) -> int:
    config = load_config(args.config) if args.config else None
    algo = _resolve(args, config, "algo", str)
    if algo is None:
        raise CliError("missing --algo")
    param = _resolve_param(algo, _resolve(args, config, "K", float),
                           _resolve(args, config, "rho", float))
    trials = _resolve(args, config, "trials", int, 1000)
    seed = _pick_seed(_resolve(args, config, "seed", int))
    n = _resolve(args, config, "n", int)
    if args.out:
        _check_writable(args.out)
    _, summary = experiments.hitting_time_experiment(
        args.mode, algo, s=args.s, alpha=args.alpha, param=param, trials=trials,
        seed=seed, n=n, horizon=args.horizon, out=args.out)
    held = summary["frac_held"]
    print(f"{algo} {args.mode}: horizon {summary['horizon']}, "
          f"P(held or border) = {held:.4f} vs tail bound {summary['tail_bound']:.4f}")
    if "report_bridge_bound" in summary:
        print(f"asymptotic bridging bound (report only): {summary['report_bridge_bound']:.3e}")
    print(f"mean T = {summary['mean_T']:.1f}, border fraction = {summary['frac_border']:.4f}")
    return 0


def _cmd_clt(args) -> int:
    steps = args.steps if args.steps is not None else 10_000
    trials = args.trials if args.trials is not None else 2000
    seed = _pick_seed(args.seed)
    summary = experiments.clt_diagnostic(args.K, steps, trials, seed)
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"K={args.K} steps={steps} trials={trials}: "
              f"KS distance {summary['ks_distance']:.4f} "
              f"(absorbed {summary['absorbed_fraction']:.3f}, "
              f"kept {summary['kept_trials']})")
        if summary["low_confidence"]:
            print("low confidence: fewer than 100 trials")
    return 0


def _cmd_coupon(args) -> int:
    config = load_config(args.config) if args.config else None
    algo = _resolve(args, config, "algo", str, "cga")
    n = _resolve(args, config, "n", int)
    if n is None:
        raise CliError("missing --n")
    param = _resolve_param(algo, _resolve(args, config, "K", float),
                           _resolve(args, config, "rho", float))
    trials = _resolve(args, config, "trials", int, 100)
    budget = _resolve(args, config, "budget", int, _default_budget(n))
    seed = _pick_seed(_resolve(args, config, "seed", int))
    summary = experiments.coupon_collector_experiment(
        n, args.m, trials, param=param, algorithm=algo, budget=budget, seed=seed)
    if args.out:
        _check_writable(args.out)
        rows = [(i, seed + i, int(t)) for i, t in enumerate(summary["times"])]
        experiments.write_table(args.out, "coupon-v1", ("trial", "seed", "iterations"), rows)
    msg = (f"n={n} m={args.m}: median remaining time {summary['median_time']:.0f}, "
           f"censored {summary['censored_trials']}/{trials}")
    if "reference_time" in summary:
        msg += (f", P(T >= {summary['reference_time']:.0f}) = "
                f"{summary['frac_at_least_reference']:.3f}")
    print(msg)
    return 0


def _cmd_verify_bounds(args) -> int:
    results = experiments.bound_verification_suite(
        families=args.only, seed=args.seed if args.seed is not None else 20240601)
    if args.json:
        print(json.dumps(results, indent=2))
    else:
        width_family = max(len(r["family"]) for r in results)
        width_check = max(len(r["check"]) for r in results)
        for r in results:
            value = r["value"]
            value_str = f"{value:.6g}" if isinstance(value, float) else str(value)
            status = "PASS" if r["passed"] else "FAIL"
            print(f"{r['family']:<{width_family}}  {r['check']:<{width_check}}  "
                  f"{value_str:>12}  {str(r['target']):<24} {status}")
        failures = sum(not r["passed"] for r in results)
        print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if all(r["passed"] for r in results) else 1


_COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "census": _cmd_census,
    "bstep-freq": _cmd_bstep_freq,
    "hitting-time": _cmd_hitting,
    "clt": _cmd_clt,
    "coupon": _cmd_coupon,
    "verify-bounds": _cmd_verify_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ValueError, analysis.DomainError, experiments.SchemaError) as exc:
        _say(f"error: {exc}")
        _say(parser.format_usage().rstrip())
        _say(f"see: driftlab {args.command} --help")
        return 2
    except FileNotFoundError as exc:
        _say(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
