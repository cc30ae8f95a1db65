"""Desk-scale experiment drivers and stable file formats.

Every experiment is reproducible from (config, base seed): trial seeds are
base_seed + row index, trials never share a seed, and output files are
byte-identical across re-runs and across --jobs settings.  Tables are CSV
with a schema version header line; run records are one-per-line key=value
text.
"""

from __future__ import annotations

import concurrent.futures
import itertools
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import analysis, core
from .core import MarginalVector, RunConfig, RunRecord, make_rule

SWEEP_SCHEMA = "sweep-v1"
SWEEP_HEADER = ("algo", "n", "strength", "trial", "seed", "iterations",
                "evaluations", "lower_hits", "upper_hits", "censored")
SWEEP_SUMMARY_SCHEMA = "sweep-summary-v1"
SWEEP_SUMMARY_HEADER = ("algo", "n", "strength", "trials", "censored",
                        "mean_iterations", "median_iterations",
                        "q1_iterations", "q3_iterations")
HITTING_SCHEMA = "hitting-v1"
HITTING_HEADER = ("mode", "algo", "param", "s", "alpha", "trial", "T", "outcome")
CENSUS_SCHEMA = "census-v1"
CENSUS_HEADER = ("algo", "n", "strength", "trial", "seed", "checkpoint",
                 "iterations", "censored", "lower_ever", "lower_final",
                 "upper_ever", "upper_final", "min_marginal")
BSTEP_SCHEMA = "bstep-v1"
BSTEP_HEADER = ("n", "samples", "empirical", "exact", "ratio")
RUNREC_SCHEMA = "runrec-v1"

OUTCOME_CENSORED = "CENSORED"
OUTCOME_BORDER = "BORDER"
OUTCOME_REACHED_POS = "REACHED_POS"
OUTCOME_REACHED_NEG = "REACHED_NEG"


class SchemaError(ValueError):
    """An output file's schema version does not match the expected one."""


# ---------------------------------------------------------------------------
# Persistence


def _format_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path, schema: str, header: Sequence[str],
                rows: Iterable[Sequence]) -> None:
    """Write a CSV with a schema header line, atomically.

    Content is staged in `<path>.partial` and renamed into place, so an
    interrupted write never leaves a truncated canonical file.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".partial")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema={schema}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_value(v) for v in row) + "\n")
    os.replace(tmp, path)


def read_table(path, expect_schema: Optional[str] = None):
    """Read a schema-headed CSV back as (schema, header, rows of strings)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# schema="):
        raise SchemaError(f"{path}: missing schema header line")
    schema = lines[0].split("=", 1)[1].strip()
    if expect_schema is not None and schema != expect_schema:
        raise SchemaError(f"{path}: schema {schema!r} does not match expected {expect_schema!r}")
    if len(lines) < 2:
        raise SchemaError(f"{path}: missing column header")
    header = tuple(lines[1].split(","))
    rows = [tuple(line.split(",")) for line in lines[2:] if line]
    return schema, header, rows


def persist_run_records(records: Iterable[RunRecord], path) -> None:
    """One key=value record per line, LF endings, schema header first."""
    path = Path(path)
    tmp = path.with_name(path.name + ".partial")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema={RUNREC_SCHEMA}\n")
        for rec in records:
            fields = (
                ("algo", rec.algorithm), ("n", rec.n), ("strength", rec.strength),
                ("seed", rec.seed), ("iterations", rec.iterations),
                ("evaluations", rec.evaluations), ("censored", int(rec.censored)),
                ("lower_hits", rec.lower_border_hits), ("upper_hits", rec.upper_border_hits),
                ("min_marginal", rec.min_marginal), ("gap_min", rec.gap_min),
                ("gap_max", rec.gap_max), ("gap_final", rec.gap_final),
            )
            fh.write(" ".join(f"{k}={_format_value(v)}" for k, v in fields) + "\n")
    os.replace(tmp, path)


def summary_path(path) -> Path:
    path = Path(path)
    if path.suffix == ".csv":
        return path.with_suffix(".summary.csv")
    return path.with_name(path.name + ".summary.csv")


# ---------------------------------------------------------------------------
# Sweep configuration


@dataclass(frozen=True)
class SweepConfig:
    """Experiment grid: one cell per (n, param), `trials` runs per cell.

    params carries the algorithm's native update parameter: K values for the
    cGA, rho values for MMAS.  The derived strength column (1/K or rho) is
    what lands in output files.
    """

    algorithm: str
    n_values: tuple
    params: tuple
    trials: int
    budget: int
    base_seed: int
    tracked_bits: object = "none"

    def __post_init__(self):
        if self.algorithm not in ("cga", "mmas"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if not self.n_values:
            raise ValueError("need at least one n value")
        if not self.params:
            raise ValueError("need at least one strength parameter")
        for n in self.n_values:
            if int(n) < 4:
                raise ValueError(f"n must be >= 4, got {n}")
        for param in self.params:
            make_rule(self.algorithm, param)  # validates K >= 2 / rho in (0,1)
        if self.tracked_bits not in ("none", "all") and not (
                isinstance(self.tracked_bits, int) and self.tracked_bits > 0):
            raise ValueError("tracked_bits must be 'none', 'all' or a positive count")

    def cells(self) -> list[tuple[int, float]]:
        return [(int(n), float(p)) for n, p in itertools.product(self.n_values, self.params)]


def _run_task(args):
    algorithm, n, param, seed, budget = args
    rule = make_rule(algorithm, param)
    return core.run(RunConfig(n=n, rule=rule, budget=budget), seed)


def _sweep_row(args):
    rec = _run_task(args)
    return (rec.iterations, rec.evaluations, rec.lower_border_hits,
            rec.upper_border_hits, int(rec.censored))


def _census_row(args):
    rec = _run_task(args)
    lo, hi = core.border_interval(rec.n)
    lower_final = int((rec.final_probs <= lo + 1e-12).sum())
    upper_final = int((rec.final_probs >= hi - 1e-12).sum())
    return (rec.iterations, int(rec.censored), rec.lower_border_hits, lower_final,
            rec.upper_border_hits, upper_final, rec.min_marginal)


def _map_tasks(worker, tasks, jobs: int):
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(tasks) // (jobs * 8))
        return list(pool.map(worker, tasks, chunksize=chunk))


def _quartile_summary(values) -> tuple[float, float, float, float]:
    arr = np.asarray(values, dtype=np.float64)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return float(arr.mean()), float(med), float(q1), float(q3)


def runtime_sweep(config: SweepConfig, out=None, jobs: int = 1,
                  resume: bool = False,
                  progress: Optional[Callable[[str], None]] = None):
    """Run the grid and return (rows, summary_rows) per the sweep schema.

    Trial seeds are base_seed + global row index.  Completed rows are
    flushed to `<out>.partial` as they arrive, so an interrupted sweep keeps
    its partial results; --resume picks up the canonical file (or a leftover
    partial) and completes it to the identical bytes of a clean run.
    """
    cells = config.cells()
    tasks = []
    keys = []
    for cell_index, (n, param) in enumerate(cells):
        strength = make_rule(config.algorithm, param).strength
        for trial in range(config.trials):
            row_index = cell_index * config.trials + trial
            seed = config.base_seed + row_index
            tasks.append((config.algorithm, n, param, seed, config.budget))
            keys.append((config.algorithm, n, strength, trial, seed))

    tmp = None
    if out is not None:
        out = Path(out)
        tmp = out.with_name(out.name + ".partial")

    done: dict[int, tuple] = {}
    if resume and out is not None:
        source = out if out.exists() else (tmp if tmp.exists() else None)
        if source is not None:
            _, header, old_rows = read_table(source, expect_schema=SWEEP_SCHEMA)
            if tuple(header) != SWEEP_HEADER:
                raise SchemaError(f"{source}: header {header} does not match {SWEEP_HEADER}")
            lookup = {(key[0], key[1], repr(key[2]), key[3]): i
                      for i, key in enumerate(keys)}
            for row in old_rows:
                if len(row) != len(SWEEP_HEADER):
                    continue  # interrupted mid-line
                ident = (row[0], int(row[1]), row[2], int(row[3]))
                if ident in lookup:
                    done[lookup[ident]] = tuple(row)

    todo = [i for i in range(len(tasks)) if i not in done]

    def result_stream():
        if jobs <= 1 or len(todo) <= 1:
            for i in todo:
                yield _sweep_row(tasks[i])
        else:
            with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
                chunk = max(1, len(todo) // (jobs * 8))
                yield from pool.map(_sweep_row, [tasks[i] for i in todo],
                                    chunksize=chunk)

    rows: list[tuple] = [None] * len(tasks)
    results = result_stream()
    stream = None
    try:
        if tmp is not None:
            stream = open(tmp, "w", encoding="utf-8", newline="\n")
            stream.write(f"# schema={SWEEP_SCHEMA}\n")
            stream.write(",".join(SWEEP_HEADER) + "\n")
        for i in range(len(tasks)):
            if i in done:
                rows[i] = done[i]
            else:
                algo, n, strength, trial, seed = keys[i]
                rows[i] = (algo, n, strength, trial, seed) + next(results)
                if progress is not None and trial == config.trials - 1:
                    progress(f"{algo} n={n} strength={strength:.6g} "
                             f"trial {trial + 1}/{config.trials}")
            if stream is not None:
                stream.write(",".join(_format_value(v) for v in rows[i]) + "\n")
                stream.flush()
    finally:
        if stream is not None:
            stream.close()

    summary_rows = []
    for cell_index, (n, param) in enumerate(cells):
        strength = make_rule(config.algorithm, param).strength
        cell_rows = rows[cell_index * config.trials:(cell_index + 1) * config.trials]
        iters = [int(r[5]) for r in cell_rows]
        censored = sum(int(r[9]) for r in cell_rows)
        mean, med, q1, q3 = _quartile_summary(iters)
        summary_rows.append((config.algorithm, n, strength, config.trials,
                             censored, mean, med, q1, q3))

    if out is not None:
        os.replace(tmp, out)
        write_table(summary_path(out), SWEEP_SUMMARY_SCHEMA, SWEEP_SUMMARY_HEADER,
                    summary_rows)
    return rows, summary_rows


def default_checkpoint(n: int) -> int:
    return int(math.ceil(n * math.log(n)))


def border_census(config: SweepConfig, checkpoint: Optional[int] = None,
                  out=None, jobs: int = 1):
    """Per-trial border occupancy at first-optimum time or a fixed checkpoint.

    lower_ever counts bits that touched the lower border at any time before
    the stop; lower_final counts bits sitting there at the stop itself.
    """
    if config.tracked_bits != "all":
        raise ValueError("border census needs tracked_bits='all' in the sweep config")
    budget = config.budget if checkpoint is None else min(config.budget, checkpoint)
    checkpoint_col = -1 if checkpoint is None else int(checkpoint)
    cells = config.cells()
    tasks = []
    keys = []
    for cell_index, (n, param) in enumerate(cells):
        strength = make_rule(config.algorithm, param).strength
        for trial in range(config.trials):
            row_index = cell_index * config.trials + trial
            seed = config.base_seed + row_index
            tasks.append((config.algorithm, n, param, seed, budget))
            keys.append((config.algorithm, n, strength, trial, seed))
    results = _map_tasks(_census_row, tasks, jobs)
    rows = []
    for key, res in zip(keys, results):
        algo, n, strength, trial, seed = key
        iterations, censored, lower_ever, lower_final, upper_ever, upper_final, min_marginal = res
        rows.append((algo, n, strength, trial, seed, checkpoint_col, iterations,
                     censored, lower_ever, lower_final, upper_ever, upper_final,
                     min_marginal))
    if out is not None:
        write_table(out, CENSUS_SCHEMA, CENSUS_HEADER, rows)
    return rows


# ---------------------------------------------------------------------------
# Frozen-model sampling (classification statistics without model updates)


def frozen_step_samples(model: MarginalVector, bit: int, steps: int,
                        rng: np.random.Generator,
                        rule=None, chunk: int = 1 << 14):
    """Sample `steps` iterations against a frozen model for one tracked bit.

    Returns (margins, deltas): the per-step margin excluding the bit, and the
    realized marginal change the configured rule would have applied to that
    bit (zeros when rule is None).  The model itself is never touched; a
    mutation is a hard error.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    probs = model.probs
    n = probs.size
    digest = probs.tobytes()
    lo, hi = core.border_interval(n)
    p_bit = float(probs[bit])
    margins = np.empty(steps, dtype=np.int32)
    deltas = np.zeros(steps, dtype=np.float64)
    pos = 0
    while pos < steps:
        m = min(chunk, steps - pos)
        X = rng.random((m, n)) < probs
        Y = rng.random((m, n)) < probs
        fx = X.sum(axis=1)
        fy = Y.sum(axis=1)
        xb = X[:, bit]
        yb = Y[:, bit]
        margins[pos:pos + m] = (fx - xb) - (fy - yb)
        if rule is not None:
            swap = fy > fx
            wb = np.where(swap, yb, xb)
            if isinstance(rule, core.CgaRule):
                lb = np.where(swap, xb, yb)
                moved = np.clip(p_bit + (wb.astype(np.int8) - lb.astype(np.int8)) / rule.K, lo, hi)
            else:
                moved = np.clip((1.0 - rule.rho) * p_bit + rule.rho * wb, lo, hi)
            deltas[pos:pos + m] = moved - p_bit
        pos += m
    if probs.tobytes() != digest:
        raise RuntimeError("frozen-model sampling mutated the model")
    return margins, deltas


def bstep_frequency_experiment(n_values: Sequence[int], samples: int, seed: int,
                               out=None):
    """Empirical vs exact biased-step frequency at a fixed bit, model at 1/2."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rows = []
    rng = np.random.default_rng(seed)
    for n in n_values:
        model = MarginalVector.uniform(int(n))
        margins, _ = frozen_step_samples(model, 0, samples, rng)
        empirical = float(((margins == 0) | (margins == -1)).mean())
        exact = analysis.bstep_probability_exact(model, 0)
        rows.append((int(n), samples, empirical, exact, empirical / exact))
    if out is not None:
        write_table(out, BSTEP_SCHEMA, BSTEP_HEADER, rows)
    return rows


# ---------------------------------------------------------------------------
# Pure random-walk simulators (single bit under unbiased dynamics)


def _classify_codes(code: np.ndarray) -> list[str]:
    names = {0: OUTCOME_CENSORED, 1: OUTCOME_BORDER, 2: OUTCOME_REACHED_POS,
             3: OUTCOME_REACHED_NEG}
    return [names[int(c)] for c in code]


def rw_walk_cga(K: int, start: int, trials: int, horizon: int,
                rng: np.random.Generator, s: Optional[float] = None,
                borders: tuple[int, int] = None):
    """Step-size-1/K unbiased walk on states {0..K} with self-loops.

    Moves +-1 each with probability p(1-p) at p = i/K.  Stops a walker when
    it reaches a border state or (if s is given) when its displacement from
    the start reaches s*K in the sign of s.  Returns (T, outcome codes).
    """
    if borders is None:
        borders = (0, K)
    lo, hi = borders
    X = np.full(trials, int(start), dtype=np.int64)
    T = np.full(trials, horizon, dtype=np.int64)
    code = np.zeros(trials, dtype=np.int8)
    sgn = 0 if s is None else (1 if s > 0 else -1)
    thresh = None if s is None else abs(s) * K
    alive = np.arange(trials)
    at_border = (X[alive] <= lo) | (X[alive] >= hi)
    if at_border.any():
        T[alive[at_border]] = 0
        code[alive[at_border]] = 1
        alive = alive[~at_border]
    for t in range(1, horizon + 1):
        if alive.size == 0:
            break
        xa = X[alive]
        p = xa / K
        q = p * (1.0 - p)
        u = rng.random(alive.size)
        moved = xa + (u < q) - ((u >= q) & (u < 2.0 * q))
        X[alive] = moved
        hit = (moved <= lo) | (moved >= hi)
        if thresh is not None:
            bridged = (sgn * (moved - start) >= thresh) & ~hit
        else:
            bridged = np.zeros(alive.size, dtype=bool)
        done = hit | bridged
        if done.any():
            idx = alive[done]
            T[idx] = t
            code[idx] = np.where(hit[done], 1, 2 if sgn > 0 else 3)
            alive = alive[~done]
    return T, code


def rw_walk_mmas(rho: float, start: float, trials: int, horizon: int,
                 rng: np.random.Generator, s: Optional[float] = None,
                 border: float = None):
    """Unbiased evaporation walk: up by rho*(1-p) w.p. p, down by rho*p.

    A walker stops when min(p, 1-p) <= border (the border is broken) or when
    its displacement from the start reaches s.  border defaults to rho.
    """
    if border is None:
        border = rho
    b_lo, b_hi = border, 1.0 - border
    P = np.full(trials, float(start), dtype=np.float64)
    T = np.full(trials, horizon, dtype=np.int64)
    code = np.zeros(trials, dtype=np.int8)
    sgn = 0 if s is None else (1 if s > 0 else -1)
    thresh = None if s is None else abs(s)
    alive = np.arange(trials)
    broken = (P[alive] <= b_lo) | (P[alive] >= b_hi)
    if broken.any():
        T[alive[broken]] = 0
        code[alive[broken]] = 1
        alive = alive[~broken]
    for t in range(1, horizon + 1):
        if alive.size == 0:
            break
        pa = P[alive]
        u = rng.random(alive.size)
        up = u < pa
        moved = np.where(up, pa + rho * (1.0 - pa), (1.0 - rho) * pa)
        P[alive] = moved
        hit = (moved <= b_lo) | (moved >= b_hi)
        if thresh is not None:
            bridged = (sgn * (moved - start) >= thresh) & ~hit
        else:
            bridged = np.zeros(alive.size, dtype=bool)
        done = hit | bridged
        if done.any():
            idx = alive[done]
            T[idx] = t
            code[idx] = np.where(hit[done], 1, 2 if sgn > 0 else 3)
            alive = alive[~done]
    return T, code


# ---------------------------------------------------------------------------
# Hitting-time experiment


@dataclass(frozen=True)
class HittingTimeSample:
    """One trial of the displacement hitting-time experiment."""

    bit: int
    trial: int
    T: int
    outcome: str


def bridge_prob_lower_bound_cga(alpha: float, s: float) -> float:
    """Report-only asymptotic lower bound on bridging displacement s*K.

    Contains vanishing corrections that are not computable at finite size;
    printed next to empirical frequencies, never used as a gate.
    """
    z = 13.0 / math.sqrt(abs(s) * alpha)
    lower, _ = analysis.normal_cdf_bounds(z)
    return 0.5 * max(lower, 0.0)


def bridge_prob_lower_bound_mmas(alpha: float, s: float) -> float:
    """Report-only analogue of bridge_prob_lower_bound_cga for MMAS."""
    z = 24.0 / math.sqrt(abs(s) * alpha)
    lower, _ = analysis.normal_cdf_bounds(z)
    return max(lower, 0.0)


def _full_algo_hitting(algorithm, n, param, s, horizon, seed, tracked_bit):
    """Track one bit's displacement inside a real run; cGA accumulates only
    random-walk contributions, MMAS tracks the raw marginal itself."""
    rule = make_rule(algorithm, param)
    rng = np.random.default_rng(seed)
    probs = np.full(n, 0.5)
    lo, hi = core.border_interval(n)
    if algorithm == "mmas":
        b = max(1.0 / n, rule.rho)
        stop_lo, stop_hi = b, 1.0 - b
    else:
        stop_lo, stop_hi = lo, hi
    bit = tracked_bit
    p0 = probs[bit]
    disp = 0.0
    sgn = 1 if s > 0 else -1
    for t in range(1, horizon + 1):
        u = rng.random((2, n))
        x = (u[0] < probs).view(np.int8)
        y = (u[1] < probs).view(np.int8)
        fx, fy = int(x.sum()), int(y.sum())
        winner, loser = (y, x) if fy > fx else (x, y)
        before = probs[bit]
        probs = rule.apply(probs, winner, loser, n)
        if algorithm == "cga":
            margin = (fx - int(x[bit])) - (fy - int(y[bit]))
            if margin != 0 and margin != -1:
                disp += probs[bit] - before
        else:
            disp = probs[bit] - p0
        if probs[bit] <= stop_lo + 1e-12 or probs[bit] >= stop_hi - 1e-12:
            return t, OUTCOME_BORDER
        if sgn * disp >= abs(s):
            return t, OUTCOME_REACHED_POS if sgn > 0 else OUTCOME_REACHED_NEG
    return horizon, OUTCOME_CENSORED


def hitting_time_experiment(mode: str, algorithm: str, *, s: float, alpha: float,
                            param: float, trials: int, seed: int,
                            n: Optional[int] = None,
                            horizon: Optional[int] = None,
                            tracked_bit: Optional[int] = None,
                            out=None):
    """Distribution of the time to bridge displacement s (or hit a border).

    mode 'rw' simulates one bit under pure unbiased dynamics; mode 'full'
    tracks a designated bit inside a complete run.  The default horizon is
    alpha*(s*K)^2 iterations for the cGA and alpha*(s/rho)^2 for MMAS; the
    summary reports the fraction of trials in which the displacement was not
    bridged before the horizon (or a border was reached), next to the
    e-based tail bound for that event and the report-only asymptotic
    bridging bound.
    """
    mode_norm = {"rw": "rw", "rw_only": "rw", "full": "full", "full_algo": "full"}.get(
        mode.lower().replace("-", "_"))
    if mode_norm is None:
        raise ValueError(f"unknown mode {mode!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rule = make_rule(algorithm, param)
    if algorithm == "cga":
        scale = abs(s) * rule.K
        tail_bound = 1.0 - math.exp(-1.0 / (4.0 * alpha))
    else:
        scale = abs(s) / rule.rho
        tail_bound = 1.0 - math.exp(-1.0 / (16.0 * alpha))
    H = horizon if horizon is not None else int(math.floor(alpha * scale * scale))
    if H < 1:
        raise ValueError(f"horizon {H} is empty; increase alpha or |s|")

    if mode_norm == "rw":
        rng = np.random.default_rng(seed)
        if algorithm == "cga":
            if rule.K != int(rule.K):
                raise ValueError("pure-walk mode needs an integer K (state grid 0..K)")
            K = int(rule.K)
            T, code = rw_walk_cga(K, K // 2, trials, H, rng, s=s)
        else:
            b = rule.rho if n is None else max(1.0 / n, rule.rho)
            T, code = rw_walk_mmas(rule.rho, 0.5, trials, H, rng, s=s, border=b)
        outcomes = _classify_codes(code)
        samples = [HittingTimeSample(bit=0, trial=i, T=int(T[i]), outcome=outcomes[i])
                   for i in range(trials)]
    else:
        if n is None:
            raise ValueError("full-run mode needs n")
        bit = (n - 1) if tracked_bit is None else tracked_bit
        samples = []
        for trial in range(trials):
            t, outcome = _full_algo_hitting(algorithm, n, param, s, H,
                                            seed + trial, bit)
            samples.append(HittingTimeSample(bit=bit, trial=trial, T=t, outcome=outcome))

    times = np.array([smp.T for smp in samples], dtype=np.int64)
    bridged_early = np.array(
        [smp.outcome in (OUTCOME_REACHED_POS, OUTCOME_REACHED_NEG) and smp.T < H
         for smp in samples])
    frac_border = float(np.mean([smp.outcome == OUTCOME_BORDER for smp in samples]))
    frac_bridged = float(np.mean([smp.outcome in (OUTCOME_REACHED_POS, OUTCOME_REACHED_NEG)
                                  for smp in samples]))
    summary = {
        "mode": mode_norm,
        "algorithm": algorithm,
        "param": float(param),
        "s": float(s),
        "alpha": float(alpha),
        "trials": trials,
        "horizon": H,
        "frac_held": float(1.0 - bridged_early.mean()),
        "tail_bound": tail_bound,
        "frac_border": frac_border,
        "frac_bridged": frac_bridged,
        "mean_T": float(times.mean()),
        "median_T": float(np.median(times)),
    }
    if s < 0:
        report = (bridge_prob_lower_bound_cga(alpha, s) if algorithm == "cga"
                  else bridge_prob_lower_bound_mmas(alpha, s))
        summary["report_bridge_bound"] = report
    if out is not None:
        rows = [(mode_norm, algorithm, float(param), float(s), float(alpha),
                 smp.trial, smp.T, smp.outcome) for smp in samples]
        write_table(out, HITTING_SCHEMA, HITTING_HEADER, rows)
    return samples, summary


# ---------------------------------------------------------------------------
# CLT diagnostic for the potential-rescaled walk


def clt_diagnostic(K: int, steps: int, trials: int, seed: int) -> dict:
    """Normality check for accumulated potential increments of the 1/K walk.

    Simulates `trials` independent walks from the centre for `steps` steps,
    accumulates the potential change per step, normalizes the sums by their
    empirical standard deviation and reports the Kolmogorov-Smirnov distance
    to the standard normal CDF.  Walks that touch an end state stop moving
    there; their (frozen) sums are excluded from the statistic and reported
    via absorbed_fraction, since the normal approximation targets the walk
    before absorption.
    """
    g = analysis.walk_potential_table_cga(K)
    rng = np.random.default_rng(seed)
    X = np.full(trials, K // 2, dtype=np.int64)
    Y = np.zeros(trials)
    touched = np.zeros(trials, dtype=bool)
    for _ in range(steps):
        p = X / K
        q = p * (1.0 - p)
        u = rng.random(trials)
        moved = X + (u < q) - ((u >= q) & (u < 2.0 * q))
        Y += g[moved] - g[X]
        X = moved
        touched |= (X == 0) | (X == K)
    kept = Y[~touched]
    absorbed_fraction = float(touched.mean())
    summary = {
        "K": K,
        "steps": steps,
        "trials": trials,
        "absorbed_fraction": absorbed_fraction,
        "kept_trials": int(kept.size),
        "low_confidence": trials < 100,
    }
    if kept.size < 2 or float(kept.std()) == 0.0:
        summary["ks_distance"] = 1.0
        summary["degenerate"] = True
        return summary
    normed = np.sort(kept / kept.std())
    cdf = analysis.standard_normal_cdf(normed)
    k = kept.size
    ecdf_hi = np.arange(1, k + 1) / k
    ecdf_lo = np.arange(0, k) / k
    summary["ks_distance"] = float(max((ecdf_hi - cdf).max(), (cdf - ecdf_lo).max()))
    return summary


# ---------------------------------------------------------------------------
# Coupon-collector recovery experiment


def coupon_collector_experiment(n: int, border_bits: int, trials: int, *,
                                param: float, algorithm: str = "cga",
                                budget: int, seed: int) -> dict:
    """Remaining optimization time after pinning bits at the lower border.

    border_bits marginals start at 1/n, the rest at 1 - 1/n.  The reference
    time (n/2 - 1) * (eps/2) * ln n with border_bits = n^eps is reported
    along with the fraction of trials at or above it (censored trials count
    as above).
    """
    if not 0 <= border_bits < n:
        raise ValueError("border bit count must leave room for non-border bits")
    rule = make_rule(algorithm, param)
    lo, hi = core.border_interval(n)
    init = np.full(n, hi)
    init[:border_bits] = lo
    times = np.empty(trials, dtype=np.int64)
    censored = np.zeros(trials, dtype=bool)
    for trial in range(trials):
        rec = core.run(RunConfig(n=n, rule=rule, budget=budget, init=init), seed + trial)
        times[trial] = rec.iterations
        censored[trial] = rec.censored
    summary = {
        "n": n,
        "border_bits": border_bits,
        "algorithm": algorithm,
        "param": float(param),
        "trials": trials,
        "budget": budget,
        "times": times,
        "censored_trials": int(censored.sum()),
        "mean_time": float(times.mean()),
        "median_time": float(np.median(times)),
    }
    if border_bits > 0:
        eps = math.log(border_bits) / math.log(n)
        t_ref = (n / 2.0 - 1.0) * (eps / 2.0) * math.log(n)
        summary["epsilon"] = eps
        summary["reference_time"] = t_ref
        summary["frac_at_least_reference"] = float(
            np.mean(censored | (times >= math.floor(t_ref))))
    return summary


# ---------------------------------------------------------------------------
# Oracle-equivalence verification suite (backs the verify-bounds command)


def enumerate_bernoulli_sum_pmf(probs: Sequence[float]) -> np.ndarray:
    """Brute-force pmf of a Bernoulli sum by enumerating all 2^m outcomes."""
    probs = list(map(float, probs))
    m = len(probs)
    masses = np.zeros(m + 1)
    for mask in range(1 << m):
        weight = 1.0
        ones = 0
        for i, p in enumerate(probs):
            if mask >> i & 1:
                weight *= p
                ones += 1
            else:
                weight *= 1.0 - p
        masses[ones] += weight
    return masses


def _exact_binomial_mass(n: int, k: int, p: float) -> float:
    return math.comb(n, k) * p ** k * (1.0 - p) ** (n - k)


def _check(results, family, name, value, target, passed, detail=""):
    results.append({
        "family": family,
        "check": name,
        "value": float(value) if isinstance(value, (int, float, np.floating)) else value,
        "target": target,
        "passed": bool(passed),
        "detail": detail,
    })


VERIFY_FAMILIES = ("pmf", "bstep-prob", "binomial-mode", "mode-scaling",
                   "drift-bound", "hitting-oracle", "variable-drift", "normal-cdf")


def bound_verification_suite(families: Optional[Sequence[str]] = None,
                             seed: int = 20240601) -> list[dict]:
    """Cross-check every closed-form bound against an independent oracle.

    Returns one result dict per check; callers render the table and derive
    the exit status from the `passed` flags.
    """
    import scipy.integrate

    selected = VERIFY_FAMILIES if families is None else tuple(families)
    unknown = set(selected) - set(VERIFY_FAMILIES)
    if unknown:
        raise ValueError(f"unknown verification families: {sorted(unknown)}")
    results: list[dict] = []
    rng = np.random.default_rng(seed)

    if "pmf" in selected:
        rand_probs = rng.random(10)
        for label, probs in (("m=10 random", rand_probs),
                             ("m=12 fair", np.full(12, 0.5))):
            exact = analysis.poisson_binomial_pmf(probs)
            brute = enumerate_bernoulli_sum_pmf(probs)
            err = float(np.abs(exact.masses - brute).max())
            _check(results, "pmf", f"{label} matches enumeration", err, "<= 1e-12",
                   err <= 1e-12)
        total = analysis.poisson_binomial_pmf(np.full(256, 0.5)).total()
        _check(results, "pmf", "m=256 total mass", abs(total - 1.0), "<= 1e-12",
               abs(total - 1.0) <= 1e-12)

    if "bstep-prob" in selected:
        for n in (5, 33):
            model = MarginalVector.uniform(n)
            exact = analysis.bstep_probability_exact(model, 0)
            margins, _ = frozen_step_samples(model, 0, 200_000, rng)
            emp = float(((margins == 0) | (margins == -1)).mean())
            se = math.sqrt(exact * (1.0 - exact) / margins.size)
            _check(results, "bstep-prob", f"n={n} Monte Carlo vs exact",
                   abs(emp - exact), f"<= 4 SE = {4 * se:.2e}", abs(emp - exact) <= 4 * se)
        values = {n: analysis.bstep_probability_exact(MarginalVector.uniform(n), 0)
                  for n in (17, 65, 257)}
        for a, b in ((17, 65), (65, 257)):
            ratio = values[a] / values[b]
            _check(results, "bstep-prob", f"exact ratio n={a}/{b}", ratio,
                   "in [1.7, 2.3]", 1.7 <= ratio <= 2.3)

    if "binomial-mode" in selected:
        for n, p in ((10, 0.5), (100, 0.5), (100, 1.0 / 6.0), (1000, 0.2)):
            mean = n * p
            if math.isclose(mean, round(mean), abs_tol=1e-12):
                bound = analysis.binomial_mode_bound(n, p)
                mass = _exact_binomial_mass(n, round(mean), p)
                ok = mass <= bound
                _check(results, "binomial-mode", f"n={n} p={p:.4g} integer case",
                       mass, f"<= {bound:.6g}", ok)
            else:
                for side in ("ceil", "floor"):
                    k = math.ceil(mean) if side == "ceil" else math.floor(mean)
                    bound = analysis.binomial_mode_bound(n, p, side)
                    mass = _exact_binomial_mass(n, k, p)
                    _check(results, "binomial-mode", f"n={n} p={p:.4g} {side}",
                           mass, f"<= {bound:.6g}", mass <= bound)
        for n, p in ((7, 0.5), (33, 0.3)):
            for side in ("ceil", "floor"):
                mean = n * p
                k = math.ceil(mean) if side == "ceil" else math.floor(mean)
                bound = analysis.binomial_mode_bound(n, p, side)
                mass = _exact_binomial_mass(n, k, p)
                _check(results, "binomial-mode", f"n={n} p={p:.4g} {side}",
                       mass, f"<= {bound:.6g}", mass <= bound)

    if "mode-scaling" in selected:
        ratios = []
        for m in (4, 16, 64, 256):
            max_mass, ratio = analysis.mode_bound_check(np.full(m, 0.5))
            ratios.append(ratio)
            bound = analysis.binomial_mode_bound(m, 0.5)
            _check(results, "mode-scaling", f"m={m} mass vs closed-form bound",
                   max_mass, f"<= {bound:.6g}", max_mass <= bound)
        spread = max(ratios) - min(ratios)
        _check(results, "mode-scaling", "sqrt(m)-scaled mass flat across m",
               spread, "spread <= 0.5", spread <= 0.5,
               detail=f"ratios {['%.4f' % r for r in ratios]}")
        _check(results, "mode-scaling", "sqrt(m)-scaled mass universally bounded",
               max(ratios), "<= 1.1", max(ratios) <= 1.1)

    if "drift-bound" in selected:
        n, K, steps = 33, 50.0, 200_000
        model = MarginalVector.uniform(n)
        bound = analysis.bstep_drift_lower_bound(model, 0, K)
        _, deltas = frozen_step_samples(model, 0, steps, rng, rule=core.CgaRule(K))
        emp = float(deltas.mean())
        se = float(deltas.std() / math.sqrt(steps))
        _check(results, "drift-bound", f"n={n} K={K:g} empirical drift vs bound",
               emp, f">= {bound:.3e} - 4 SE", emp >= bound - 4 * se,
               detail=f"SE = {se:.2e}")

    if "hitting-oracle" in selected:
        fair = analysis.expected_hitting_time("fair", 25, K=50)
        _check(results, "hitting-oracle", "fair walk from centre", fair,
               "== 625", abs(fair - 625.0) <= 1e-6)
        values = {K: analysis.expected_hitting_time("cga-rw", K // 2, K=K)
                  for K in (20, 40, 80)}
        for a, b in ((20, 40), (40, 80)):
            ratio = values[b] / values[a]
            _check(results, "hitting-oracle", f"model walk ratio K={b}/{a}", ratio,
                   "in [2, 8]", 2.0 <= ratio <= 8.0)
        mmas_vals = {r: analysis.expected_hitting_time("mmas-rw", 0.5, rho=r)
                     for r in (0.1, 0.05, 0.025)}
        for a, b in ((0.1, 0.05), (0.05, 0.025)):
            ratio = mmas_vals[b] / mmas_vals[a]
            _check(results, "hitting-oracle", f"evaporation walk ratio rho={a}->{b}",
                   ratio, "in [2, 8]", 2.0 <= ratio <= 8.0)

    if "variable-drift" in selected:
        const = analysis.variable_drift_bound(lambda x: 2.0, 1.0, 10.0)
        _check(results, "variable-drift", "constant drift equals additive value",
               const, "== 5", abs(const - 5.0) <= 1e-6)
        c = 101.0 / (3300.0 * 100.0)
        bound = analysis.variable_drift_bound(lambda x: math.sqrt(x) * c, 1e4, 1e6)
        closed = 1e4 / (math.sqrt(1e4) * c) + (2.0 / c) * (math.sqrt(1e6) - math.sqrt(1e4))
        rel = abs(bound - closed) / closed
        _check(results, "variable-drift", "sqrt drift matches antiderivative",
               rel, "<= 1e-5", rel <= 1e-5)

    if "normal-cdf" in selected:
        density = lambda t: math.exp(-0.5 * t * t) / math.sqrt(2.0 * math.pi)
        ok = True
        worst = 0.0
        for x in np.arange(0.5, 5.5, 0.5):
            tail, _ = scipy.integrate.quad(density, x, np.inf)
            lower, upper = analysis.normal_cdf_bounds(float(x))
            if not (lower - 1e-12 <= tail <= upper + 1e-12):
                ok = False
            worst = max(worst, max(lower - tail, tail - upper))
        _check(results, "normal-cdf", "tail sandwich at 10 points", worst,
               "bounds hold", ok)

    return results
