"""Executable analytical quantities with exact small-instance oracles.

Everything here is pure: drift lower bounds, exact Poisson-binomial pmfs and
mode bounds, variance-stabilizing walk potentials, variable-drift integrals,
normal-tail sandwiches, and dense/sparse first-step solvers for expected
hitting times of the model random walks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
import scipy.special

from .core import MarginalVector

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


class DomainError(ValueError):
    """A precondition on an analytical quantity's domain was violated."""


class StructuralError(RuntimeError):
    """A chain solve failed structurally (e.g. no absorbing state reachable)."""


# ---------------------------------------------------------------------------
# Exact distributions


@dataclass(frozen=True)
class PMF:
    """Probability mass function on consecutive integers starting at offset."""

    offset: int
    masses: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.masses.size)

    def prob(self, value: int) -> float:
        idx = value - self.offset
        if idx < 0 or idx >= self.masses.size:
            return 0.0
        return float(self.masses[idx])

    def max_mass(self) -> float:
        return float(self.masses.max())

    def total(self) -> float:
        return float(math.fsum(self.masses.tolist()))


def poisson_binomial_pmf(probs: Sequence[float]) -> PMF:
    """Exact pmf of a sum of independent Bernoulli trials, by convolution.

    O(m^2) time.  Each convolution step mixes two nonnegative terms, so the
    accumulated rounding keeps the total mass within 1e-12 of one even for
    hundreds of trials.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("probs must be a flat sequence")
    if ((p < 0.0) | (p > 1.0)).any():
        raise DomainError("success probabilities must lie in [0, 1]")
    masses = np.ones(1)
    for pi in p:
        masses = np.convolve(masses, np.array([1.0 - pi, pi]))
    return PMF(offset=0, masses=masses)


def difference_pmf(a: PMF, b: PMF) -> PMF:
    """Exact pmf of A - B for independent A, B."""
    masses = np.convolve(a.masses, b.masses[::-1])
    offset = a.offset - (b.offset + b.masses.size - 1)
    return PMF(offset=offset, masses=masses)


def bstep_probability_exact(model: MarginalVector, bit: int) -> float:
    """Exact probability that a step is biased for the given bit.

    The margin is the difference of two independent Bernoulli-sum samples
    over the other n-1 bits; the step is biased iff the margin is 0 or -1.
    """
    probs = model.probs if isinstance(model, MarginalVector) else np.asarray(model, dtype=float)
    if probs.size < 2:
        raise DomainError("need at least 2 bits: with a single bit the margin is always 0")
    others = np.delete(probs, bit)
    single = poisson_binomial_pmf(others)
    margin = difference_pmf(single, single)
    return margin.prob(0) + margin.prob(-1)


def mode_bound_check(probs: Sequence[float]) -> tuple[float, float]:
    """Largest point mass of a Bernoulli-sum and its sqrt(m)-scaled value.

    Requires every success probability in [1/6, 5/6], the regime in which the
    mode mass decays like 1/sqrt(m); the returned ratio max_mass * sqrt(m)
    stays below a universal constant as m grows.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.size < 1:
        raise DomainError("need at least one trial")
    if ((p < 1.0 / 6.0 - 1e-12) | (p > 5.0 / 6.0 + 1e-12)).any():
        raise DomainError("success probabilities must lie in [1/6, 5/6]")
    max_mass = poisson_binomial_pmf(p).max_mass()
    return max_mass, max_mass * math.sqrt(p.size)


def binomial_mode_bound(n: int, p: float, side: str = "ceil") -> float:
    """Closed-form upper bound on the binomial mode mass.

    For integer n*p the bound is 1/sqrt(2*pi*n*p*(1-p)) on P(X = n*p).
    Otherwise the caller selects the rounding side: with k = ceil(n*p) or
    k = floor(n*p) and alpha = k/n, the bound is e/sqrt(2*pi*n*alpha*(1-alpha))
    on P(X = k).  Degenerate alpha (0 or >= 1) is a domain error.
    """
    if not 0.0 < p < 1.0:
        raise DomainError("p must lie strictly between 0 and 1")
    mean = n * p
    nearest = round(mean)
    if math.isclose(mean, nearest, rel_tol=0.0, abs_tol=1e-12):
        return 1.0 / math.sqrt(2.0 * math.pi * mean * (1.0 - p))
    if side == "ceil":
        k = math.ceil(mean)
    elif side == "floor":
        k = math.floor(mean)
    else:
        raise ValueError(f"side must be 'ceil' or 'floor', got {side!r}")
    alpha = k / n
    if alpha <= 0.0:
        raise DomainError(f"floor(n*p) = 0 leaves no mass point to bound (n={n}, p={p})")
    if alpha >= 1.0:
        raise DomainError(f"adjusted success rate {alpha} reaches 1 (n={n}, p={p})")
    return math.e / math.sqrt(2.0 * math.pi * n * alpha * (1.0 - alpha))


# ---------------------------------------------------------------------------
# Drift quantities and potentials


def bstep_drift_lower_bound(model: MarginalVector, bit: int, K: float) -> float:
    """Lower bound on the expected one-step marginal change under the cGA rule.

    Valid for marginals at least one step away from both borders:
        (2/11) * p(1-p)/K * (sum of q(1-q) over the other bits)^(-1/2).
    The square-root term is the sampling standard deviation contributed by
    the other bits; the biased-step frequency scales with its reciprocal.
    """
    probs = model.probs if isinstance(model, MarginalVector) else np.asarray(model, dtype=float)
    n = probs.size
    p = float(probs[bit])
    low = 1.0 / n + 1.0 / K
    high = 1.0 - 1.0 / n - 1.0 / K
    if p < low:
        raise DomainError(f"need 1/n + 1/K <= p, got p={p} < {low}")
    if p > high:
        raise DomainError(f"need p <= 1 - 1/n - 1/K, got p={p} > {high}")
    others = np.delete(probs, bit)
    variance = float((others * (1.0 - others)).sum())
    if variance <= 0.0:
        raise DomainError("all other bits are deterministic; the bound degenerates")
    return (2.0 / 11.0) * (p * (1.0 - p) / K) / math.sqrt(variance)


@lru_cache(maxsize=64)
def walk_potential_table_cga(K: int) -> np.ndarray:
    """Potential g over states {0..K} of the step-size-1/K walk (K even).

    g rescales the state space so that the one-step variance of the walk,
    self-loops included, is nearly position independent: adjacent states near
    the middle differ by about 2 in potential, states near the ends by up to
    sqrt(2K).  g is centrally antisymmetric with g(K/2) = 0.
    """
    if K < 2 or K % 2 != 0:
        raise DomainError(f"potential table needs an even K >= 2, got {K}")
    half = K // 2
    g = np.zeros(K + 1)
    # g(i) = sum over j in [i, K/2) of sqrt(2K/(j+1)), extended down to i = 0
    steps = np.sqrt(2.0 * K / np.arange(1, half + 1, dtype=np.float64))
    suffix = np.concatenate([np.cumsum(steps[::-1])[::-1], [0.0]])
    g[: half + 1] = suffix
    g[half:] = -suffix[::-1]
    table = g
    table.setflags(write=False)
    return table


def walk_potential_cga(state: int, K: int) -> float:
    """Potential of one state of the 1/K-step walk; see walk_potential_table_cga."""
    if state < 0 or state > K:
        raise DomainError(f"state must lie in 0..K, got {state}")
    return float(walk_potential_table_cga(K)[state])


def walk_potential_mmas(x: float, rho: float) -> float:
    """Continuous variance-stabilizing potential for the evaporation walk.

    Integral of 1/(rho*sqrt(z)) from x to 1/2, in closed form
    (2/rho)*(sqrt(1/2) - sqrt(x)); negative beyond 1/2.
    """
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x}")
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    return (2.0 / rho) * (math.sqrt(0.5) - math.sqrt(x))


def border_gap_potential(model: MarginalVector) -> float:
    """Total distance of the model from the all-upper-border configuration.

    Sum over bits of (1 - 1/n - p_i); zero when every marginal sits at the
    upper border, and linear in each marginal.
    """
    probs = model.probs if isinstance(model, MarginalVector) else np.asarray(model, dtype=float)
    n = probs.size
    return float((n - 1) - probs.sum())


# ---------------------------------------------------------------------------
# Variable drift and normal-tail tools


def variable_drift_bound(h: Callable[[float], float], a: float, m: float) -> float:
    """Upper bound a/h(a) + integral_a^m dx/h(x) on an expected hitting time.

    h must be positive (and monotone increasing) on [a, m]; the integral is
    evaluated by adaptive quadrature to relative tolerance 1e-6.  Constant h
    collapses to the additive-drift value m/h.
    """
    if not 0.0 < a <= m:
        raise DomainError(f"need 0 < a <= m, got a={a}, m={m}")
    h_a = h(a)
    if h_a <= 0.0:
        raise DomainError(f"drift function must be positive, h({a}) = {h_a}")

    def integrand(x: float) -> float:
        value = h(x)
        if value <= 0.0:
            raise DomainError(f"drift function must be positive, h({x}) = {value}")
        return 1.0 / value

    if m == a:
        integral = 0.0
    else:
        integral, _ = scipy.integrate.quad(integrand, a, m, epsrel=1e-6, limit=200)
    return a / h_a + integral


def standard_normal_cdf(x) -> np.ndarray | float:
    """Standard normal CDF (vectorized)."""
    return scipy.special.ndtr(x)


def normal_cdf_bounds(x: float) -> tuple[float, float]:
    """Classical sandwich for the normal tail mass beyond x.

    For x > 0 bounds 1 - Phi(x), for x < 0 bounds Phi(x) (the mirrored tail):
        (1/|x| - 1/|x|^3) * phi(x)  <=  tail  <=  (1/|x|) * phi(x),
    with phi the standard normal density.  x = 0 is rejected: both bounds
    degenerate there.
    """
    if x == 0.0:
        raise DomainError("bounds degenerate at x = 0")
    y = abs(x)
    density = math.exp(-0.5 * y * y) / SQRT_TWO_PI
    return (1.0 / y - 1.0 / y ** 3) * density, density / y


# ---------------------------------------------------------------------------
# Exact expected hitting times of the model walks


def _solve_hitting(transitions: scipy.sparse.csr_matrix | np.ndarray,
                   absorbing: np.ndarray, start: int) -> float:
    """Expected steps to reach the absorbing set, from first-step equations."""
    n_states = transitions.shape[0]
    if absorbing.dtype != bool:
        mask = np.zeros(n_states, dtype=bool)
        mask[absorbing] = True
        absorbing = mask
    if not absorbing.any():
        raise StructuralError("no absorbing state configured")
    if absorbing[start]:
        return 0.0
    transient = ~absorbing
    idx = np.flatnonzero(transient)
    pos = -np.ones(n_states, dtype=np.int64)
    pos[idx] = np.arange(idx.size)
    if scipy.sparse.issparse(transitions):
        Q = transitions[idx][:, idx]
        system = scipy.sparse.identity(idx.size, format="csc") - Q.tocsc()
        try:
            times = scipy.sparse.linalg.spsolve(system, np.ones(idx.size))
        except RuntimeError as exc:
            raise StructuralError(f"hitting-time system could not be solved: {exc}") from exc
        if not np.all(np.isfinite(times)):
            raise StructuralError("hitting-time system is singular; absorbing set unreachable")
    else:
        Q = transitions[np.ix_(idx, idx)]
        system = np.eye(idx.size) - Q
        try:
            times = scipy.linalg.solve(system, np.ones(idx.size))
        except scipy.linalg.LinAlgError as exc:
            raise StructuralError(f"hitting-time system is singular: {exc}") from exc
    value = float(times[pos[start]])
    if not math.isfinite(value) or value < -1e-9:
        raise StructuralError("hitting-time solve produced a non-physical value")
    return value


def fair_walk_matrix(K: int) -> np.ndarray:
    """Fair +-1 walk without self-loops on {0..K} (ends reflect; callers absorb)."""
    P = np.zeros((K + 1, K + 1))
    for i in range(K + 1):
        if i > 0:
            P[i, i - 1] += 0.5
        else:
            P[i, i] += 0.5
        if i < K:
            P[i, i + 1] += 0.5
        else:
            P[i, i] += 0.5
    return P


def cga_walk_matrix(K: int) -> np.ndarray:
    """Unbiased model walk on {0..K}: +-1 each w.p. p(1-p) at p = i/K, else loop."""
    states = np.arange(K + 1, dtype=np.float64)
    q = (states / K) * (1.0 - states / K)
    P = np.zeros((K + 1, K + 1))
    for i in range(K + 1):
        qi = q[i]
        if i > 0:
            P[i, i - 1] = qi
        if i < K:
            P[i, i + 1] = qi
        P[i, i] = 1.0 - P[i].sum()
    return P


def mmas_walk_matrix(rho: float, points: int) -> scipy.sparse.csr_matrix:
    """Grid-rounded unbiased evaporation walk on {0, 1/G, ..., 1}.

    From x the walk moves to x + rho*(1-x) w.p. x and to (1-rho)*x otherwise,
    rounded to the nearest of G+1 grid points.  An approximation for scaling
    studies, not for exact per-state claims.
    """
    if points < 3:
        raise ValueError("need at least 3 grid points")
    G = points - 1
    x = np.arange(points, dtype=np.float64) / G
    up = np.clip(np.rint((x + rho * (1.0 - x)) * G).astype(np.int64), 0, G)
    down = np.clip(np.rint(((1.0 - rho) * x) * G).astype(np.int64), 0, G)
    rows = np.concatenate([np.arange(points), np.arange(points)])
    cols = np.concatenate([up, down])
    vals = np.concatenate([x, 1.0 - x])
    P = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(points, points))
    return P


def mmas_grid_points(rho: float, max_states: int = 10_000) -> int:
    """Grid resolution fine enough to resolve steps of size about rho^2."""
    return int(min(max_states, max(201, math.ceil(2.0 / rho ** 2) + 1)))


def expected_hitting_time(kind: str, start, *, K: int | None = None,
                          rho: float | None = None,
                          borders=None, points: int | None = None) -> float:
    """Exact expected first hitting time of the border set for a model walk.

    kind 'fair' or 'cga-rw': states are {0..K}, start is a state index and
    borders a pair of absorbing state indices (default (0, K)).  kind
    'mmas-rw': start and borders are probabilities; the walk is grid-rounded
    and everything at or beyond a border is absorbing.  Dense solves are
    capped at 10,000 states.
    """
    if kind in ("fair", "cga-rw"):
        if K is None:
            raise ValueError("K is required for grid walks")
        if K + 1 > 10_000:
            raise ValueError("state space too large for a dense solve")
        P = fair_walk_matrix(K) if kind == "fair" else cga_walk_matrix(K)
        absorbing = np.zeros(K + 1, dtype=bool)
        for b in (borders if borders is not None else (0, K)):
            absorbing[b] = True
        return _solve_hitting(P, absorbing, int(start))
    if kind == "mmas-rw":
        if rho is None:
            raise ValueError("rho is required for the evaporation walk")
        n_points = points if points is not None else mmas_grid_points(rho)
        lo, hi = borders if borders is not None else (rho, 1.0 - rho)
        P = mmas_walk_matrix(rho, n_points)
        x = np.arange(n_points, dtype=np.float64) / (n_points - 1)
        absorbing = (x <= lo) | (x >= hi)
        start_idx = int(round(float(start) * (n_points - 1)))
        return _solve_hitting(P, absorbing, start_idx)
    raise ValueError(f"unknown walk kind {kind!r}")
