"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the report lines.
Monte Carlo criteria use seeds and thresholds frozen here; statistical
tolerances are expressed in standard errors of the estimate or as the
stated fixed bands.
"""

import itertools
import math

import numpy as np
import pytest
import scipy.integrate

from driftlab import analysis, core, experiments, instrument
from driftlab.core import CgaRule, MarginalVector, MmasRule, RunConfig
from driftlab.experiments import SweepConfig


def report(cid, name, ok, detail=""):
    print(f"[criterion {cid:>2}] {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {cid} ({name}): {detail}"


def bits(values):
    return np.array(values, dtype=np.int8)


# -- 1: update-rule exactness ------------------------------------------------

def _pair_with_outcome(xi, yi, relation, n=8):
    """Offspring with bit 0 set to (xi, yi) and the requested fitness order."""
    rest = n - 1
    base = {"x_wins": (3, 1), "y_wins": (1, 3), "tie": (2, 2)}
    ax, ay = base[relation]
    ax -= xi
    ay -= yi
    x = bits([xi] + [1] * ax + [0] * (rest - ax))
    y = bits([yi] + [1] * ay + [0] * (rest - ay))
    return x, y


def test_criterion_01_update_rule_exactness():
    n, K, rho = 8, 10.0, 0.125
    failures = []
    for xi, yi, relation in itertools.product((0, 1), (0, 1),
                                              ("x_wins", "y_wins", "tie")):
        x, y = _pair_with_outcome(xi, yi, relation)
        fx, fy = int(x.sum()), int(y.sum())
        w, l = (x, y) if fx >= fy else (y, x)

        for start in (0.5, 1 / n, 1 - 1 / n):
            model = MarginalVector(np.full(n, start))
            got = core.cga_update(model, w, l, K).probs[0]
            want = min(1 - 1 / n, max(1 / n, start + (int(w[0]) - int(l[0])) / K))
            if got != want:
                failures.append(("cga", xi, yi, relation, start, got, want))
            got = core.mmas_update(model, w, l, rho).probs[0]
            want = min(1 - 1 / n, max(1 / n, (1 - rho) * start + rho * int(w[0])))
            if got != want:
                failures.append(("mmas", xi, yi, relation, start, got, want))
    report(1, "update-rule case tables exact", not failures, str(failures[:3]))


# -- 2: superposition statistics ----------------------------------------------

def _frozen_records(rule, steps, n, seed, bit=0):
    rng = np.random.default_rng(seed)
    probs = MarginalVector.uniform(n).probs
    records = []
    for t in range(steps):
        u = rng.random((2, n))
        x = (u[0] < probs).view(np.int8)
        y = (u[1] < probs).view(np.int8)
        winner, loser = core.select_winner(x, y)
        after = rule.apply(probs, winner, loser, n)
        records.extend(instrument.record_step(t, x, y, probs, after, (bit,)))
    assert (probs == 0.5).all()
    return records


def test_criterion_02_superposition_statistics():
    steps, n, K, rho = 120_000, 33, 50.0, 0.1
    p = 0.5
    checks = []

    records = _frozen_records(CgaRule(K), steps, n, seed=2001)
    rw = np.array([r.delta for r in records if r.kind is instrument.StepKind.RANDOM_WALK])
    b = np.array([r.delta for r in records if r.kind is instrument.StepKind.BIASED])
    q = p * (1 - p)
    for label, freq, target in (("cga rw up", (rw > 0).mean(), q),
                                ("cga rw down", (rw < 0).mean(), q)):
        se = math.sqrt(target * (1 - target) / rw.size)
        checks.append((label, abs(freq - target) <= 4 * se,
                       f"{freq:.4f} vs {target:.4f} (4se={4 * se:.4f})"))
    target = 2 * q / K
    se = b.std() / math.sqrt(b.size)
    checks.append(("cga b-step mean", abs(b.mean() - target) <= 4 * se,
                   f"{b.mean():.6f} vs {target:.6f} (4se={4 * se:.6f})"))

    records = _frozen_records(MmasRule(rho), steps, n, seed=2002)
    rw = np.array([r.delta for r in records if r.kind is instrument.StepKind.RANDOM_WALK])
    b = np.array([r.delta for r in records if r.kind is instrument.StepKind.BIASED])
    se = math.sqrt(p * (1 - p) / rw.size)
    checks.append(("mmas rw up", abs((rw > 0).mean() - p) <= 4 * se,
                   f"{(rw > 0).mean():.4f} vs {p}"))
    target = (1 - p) ** 2
    se = math.sqrt(target * (1 - target) / b.size)
    checks.append(("mmas b-step down", abs((b < 0).mean() - target) <= 4 * se,
                   f"{(b < 0).mean():.4f} vs {target}"))

    ok = all(c[1] for c in checks)
    report(2, "superposition statistics at p=1/2, n=33",
           ok, "; ".join(f"{c[0]}: {c[2]}" for c in checks))


# -- 3: biased-step probability scaling ---------------------------------------

def test_criterion_03_bstep_scaling():
    exact = {n: analysis.bstep_probability_exact(MarginalVector.uniform(n), 0)
             for n in (17, 65, 257)}
    ratios = (exact[17] / exact[65], exact[65] / exact[257])
    bands_ok = all(abs(r - 2.0) <= 0.3 for r in ratios)

    rows = experiments.bstep_frequency_experiment((17, 65, 257), 300_000, seed=2003)
    mc_ok = True
    details = []
    for n, samples, empirical, value, _ in rows:
        se = math.sqrt(value * (1 - value) / samples)
        mc_ok &= abs(empirical - value) <= 4 * se
        details.append(f"n={n}: mc {empirical:.5f} vs exact {value:.5f}")
    report(3, "biased-step probability scaling", bands_ok and mc_ok,
           f"ratios {ratios[0]:.3f}, {ratios[1]:.3f}; " + "; ".join(details))


# -- 4: Bernoulli-sum mode bounds ---------------------------------------------

def test_criterion_04_mode_bounds():
    sizes = (4, 16, 64, 256)
    ratios = []
    bound_ok = True
    for m in sizes:
        max_mass, ratio = analysis.mode_bound_check(np.full(m, 0.5))
        ratios.append(ratio)
        bound_ok &= max_mass <= analysis.binomial_mode_bound(m, 0.5)

    # 'bounded by a single constant across all m': the scaled sequence is
    # flat (spread within 0.5) and sits below a fixed constant.  Note
    # max_mass*sqrt(m) >= 0.75 for every admissible probability vector
    # (variance is at most m/4), so the constant itself cannot be below 3/4.
    spread = max(ratios) - min(ratios)
    flat_ok = spread <= 0.5 and max(ratios) <= 1.1

    enum_ok = True
    for m in (4, 8, 12):
        masses = analysis.poisson_binomial_pmf(np.full(m, 0.5)).masses
        brute = experiments.enumerate_bernoulli_sum_pmf(np.full(m, 0.5))
        enum_ok &= float(np.abs(masses - brute).max()) <= 1e-12

    report(4, "Bernoulli-sum mode bounds", bound_ok and flat_ok and enum_ok,
           f"scaled masses {[f'{r:.4f}' for r in ratios]} (spread {spread:.4f}); "
           f"mode<=bound {bound_ok}; enumeration match {enum_ok}")


# -- 5: drift lower bound direction -------------------------------------------

def test_criterion_05_drift_bound_direction():
    n, K, steps = 33, 50.0, 1_000_000
    model = MarginalVector.uniform(n)
    bound = analysis.bstep_drift_lower_bound(model, 0, K)
    rng = np.random.default_rng(2005)
    _, deltas = experiments.frozen_step_samples(model, 0, steps, rng, rule=CgaRule(K))
    mean = float(deltas.mean())
    se = float(deltas.std() / math.sqrt(steps))
    report(5, "expected change dominates the closed-form bound",
           mean >= bound - 4 * se,
           f"mean {mean:.3e} vs bound {bound:.3e} (4se={4 * se:.2e})")


# -- 6: quadratic hitting-time scaling -----------------------------------------

def test_criterion_06_hitting_time_scaling():
    values = {K: analysis.expected_hitting_time("cga-rw", K // 2, K=K)
              for K in (20, 40, 80)}
    ratio_ok = all(2.0 <= values[b] / values[a] <= 8.0
                   for a, b in ((20, 40), (40, 80)))

    oracle = analysis.expected_hitting_time("cga-rw", 25, K=50)
    rng = np.random.default_rng(2006)
    T, code = experiments.rw_walk_cga(50, 25, 4000, 250_000, rng, s=1.0)
    assert (code == 1).all()
    rel = abs(float(T.mean()) - oracle) / oracle
    report(6, "walk hitting times scale quadratically",
           ratio_ok and rel <= 0.05,
           f"oracle ratios {values[40] / values[20]:.2f}, {values[80] / values[40]:.2f}; "
           f"MC mean {T.mean():.0f} vs oracle {oracle:.0f} (rel {rel:.3f})")


# -- 7: displacement tail bounds ----------------------------------------------

def test_criterion_07_displacement_tail_bounds():
    trials = 10_000
    _, cga = experiments.hitting_time_experiment(
        "rw", "cga", s=0.5, alpha=0.1, param=50, trials=trials, seed=2007)
    se = math.sqrt(cga["tail_bound"] * (1 - cga["tail_bound"]) / trials)
    cga_ok = cga["frac_held"] >= cga["tail_bound"] - 3 * se

    _, mmas = experiments.hitting_time_experiment(
        "rw", "mmas", s=0.5, alpha=0.1, param=0.02, trials=trials, seed=2008)
    se_m = math.sqrt(mmas["tail_bound"] * (1 - mmas["tail_bound"]) / trials)
    mmas_ok = mmas["frac_held"] >= mmas["tail_bound"] - 3 * se_m

    report(7, "displacement not bridged within the horizon",
           cga_ok and mmas_ok,
           f"cga {cga['frac_held']:.4f} >= {cga['tail_bound']:.4f}-3se; "
           f"mmas {mmas['frac_held']:.4f} >= {mmas['tail_bound']:.4f}-3se")


# -- 8: genetic-drift regimes --------------------------------------------------

def test_criterion_08_genetic_drift_regimes():
    n, trials = 100, 200
    checkpoint = math.ceil(n * math.log(n))

    risky = SweepConfig(algorithm="cga", n_values=(n,), params=(2.0,),
                        trials=trials, budget=100_000, base_seed=2009,
                        tracked_bits="all")
    rows = experiments.border_census(risky, checkpoint=checkpoint)
    lower_ever = np.array([int(r[8]) for r in rows])
    risky_frac = float((lower_ever >= 5).mean())

    K_safe = float(math.ceil(10 * math.sqrt(n) * math.log(n)))
    safe = SweepConfig(algorithm="cga", n_values=(n,), params=(K_safe,),
                       trials=trials, budget=int(100 * n * math.log(n)),
                       base_seed=2010, tracked_bits="all")
    rows = experiments.border_census(safe)
    min_marginals = np.array([float(r[12]) for r in rows])
    censored = sum(int(r[7]) for r in rows)
    safe_frac = float((min_marginals >= 1 / 3).mean())

    report(8, "strong updates fix bits, weak updates stay centred",
           risky_frac >= 0.90 and safe_frac >= 0.99 and censored == 0,
           f"K=2: P(>=5 bits at lower border)={risky_frac:.3f}; "
           f"K={K_safe:.0f}: P(no marginal below 1/3)={safe_frac:.3f}")


# -- 9: runtime scaling ----------------------------------------------------------

def _median_runtimes(algorithm, n_values, trials, seed0):
    medians = {}
    for n in n_values:
        k0 = math.ceil(math.sqrt(n) * math.log(n))
        param = float(k0) if algorithm == "cga" else 1.0 / k0
        cfg = SweepConfig(algorithm=algorithm, n_values=(n,), params=(param,),
                          trials=trials, budget=int(100 * n * math.log(n)),
                          base_seed=seed0 + n)
        _, summary = experiments.runtime_sweep(cfg)
        medians[n] = summary[0][6]
    return medians


def _mean_runtime(algorithm, n, k, trials, seed):
    param = float(k) if algorithm == "cga" else 1.0 / k
    cfg = SweepConfig(algorithm=algorithm, n_values=(n,), params=(param,),
                      trials=trials, budget=int(100 * n * math.log(n)),
                      base_seed=seed)
    _, summary = experiments.runtime_sweep(cfg)
    return summary[0][5], summary[0][4]


def test_criterion_09_runtime_scaling():
    n_values = (25, 50, 100, 200)
    details = []
    ok = True
    for algorithm, seed0 in (("cga", 9000), ("mmas", 9400)):
        medians = _median_runtimes(algorithm, n_values, trials=100, seed0=seed0)
        x = np.log([n * math.log(n) for n in n_values])
        y = np.log([medians[n] for n in n_values])
        slope = float(np.polyfit(x, y, 1)[0])
        slope_ok = 0.8 <= slope <= 1.3

        k0 = math.ceil(math.sqrt(100) * math.log(100))
        weak_mean, _ = _mean_runtime(algorithm, 100, k0, 50, seed0 + 71)
        very_weak_mean, censored = _mean_runtime(algorithm, 100, 16 * k0, 50, seed0 + 72)
        ratio = very_weak_mean / weak_mean
        ratio_ok = ratio >= 4.0 and censored == 0
        ok &= slope_ok and ratio_ok
        details.append(f"{algorithm}: slope {slope:.3f}, K-ratio {ratio:.1f}")
    report(9, "runtime grows like n log n and linearly in K", ok, "; ".join(details))


# -- 10: coupon-collector recovery ----------------------------------------------

def test_criterion_10_coupon_collector():
    summary = experiments.coupon_collector_experiment(
        100, 10, 200, param=47.0, budget=20_000, seed=2011)
    times = summary["times"]
    frac = float(np.mean((times >= 56) | (times >= summary["budget"])))
    report(10, "pinned border bits cost many iterations to unlearn",
           frac >= 0.95,
           f"P(remaining >= 56) = {frac:.3f}, median {summary['median_time']:.0f}")


# -- 11: CLT diagnostic ----------------------------------------------------------

def test_criterion_11_clt_diagnostic():
    summary = experiments.clt_diagnostic(100, 10_000, 2000, seed=4242)
    report(11, "rescaled walk increments are asymptotically normal",
           summary["ks_distance"] <= 0.05,
           f"KS distance {summary['ks_distance']:.4f} "
           f"(kept {summary['kept_trials']} of {summary['trials']})")


# -- 12: appendix calculators ----------------------------------------------------

def test_criterion_12_appendix_calculators():
    additive = analysis.variable_drift_bound(lambda x: 2.0, 1.0, 10.0)
    drift_ok = abs(additive - 5.0) <= 1e-6 * 5.0

    density = lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi)
    sandwich_ok = True
    for x in np.arange(0.5, 5.5, 0.5):
        tail, _ = scipy.integrate.quad(density, float(x), np.inf)
        lower, upper = analysis.normal_cdf_bounds(float(x))
        sandwich_ok &= lower - 1e-12 <= tail <= upper + 1e-12

    report(12, "drift integral and normal-tail sandwich",
           drift_ok and sandwich_ok,
           f"additive value {additive:.9f}; sandwich at 10 points {sandwich_ok}")


# -- 13: determinism --------------------------------------------------------------

def test_criterion_13_determinism(tmp_path):
    cfg = SweepConfig(algorithm="cga", n_values=(16, 32), params=(8.0, 16.0),
                      trials=6, budget=4000, base_seed=2013)
    paths = [tmp_path / name for name in ("a.csv", "b.csv", "c.csv")]
    experiments.runtime_sweep(cfg, out=paths[0], jobs=1)
    experiments.runtime_sweep(cfg, out=paths[1], jobs=1)
    experiments.runtime_sweep(cfg, out=paths[2], jobs=4)
    data_same = (paths[0].read_bytes() == paths[1].read_bytes()
                 == paths[2].read_bytes())
    summaries_same = (
        experiments.summary_path(paths[0]).read_bytes()
        == experiments.summary_path(paths[1]).read_bytes()
        == experiments.summary_path(paths[2]).read_bytes())
    report(13, "byte-identical sweeps, independent of --jobs",
           data_same and summaries_same,
           f"rows identical {data_same}, summaries identical {summaries_same}")
