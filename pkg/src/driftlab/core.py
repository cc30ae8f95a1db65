"""Core loop of the compact GA and the two-individual MMAS on OneMax.

Both optimizers keep a probabilistic model: one Bernoulli parameter per bit,
clamped to the border interval [1/n, 1 - 1/n].  Every iteration samples two
offspring from the model, picks the fitter one (the first sample wins ties)
and nudges the model toward the winner, either by a fixed step 1/K (cGA) or
by geometric evaporation with factor rho (MMAS).  The optimum counts as
found the moment it is sampled, before the model update.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

Bits = np.ndarray  # int8 vector of 0/1 values, one entry per bit

_BORDER_EPS = 1e-12  # tolerance for "sits exactly on a border" tests


def border_interval(n: int) -> tuple[float, float]:
    """Clamp interval [1/n, 1 - 1/n] for a problem of size n."""
    lo = 1.0 / n
    return lo, 1.0 - lo


def clamp_borders(p: float, n: int) -> float:
    """Restrict a marginal probability to the border interval."""
    lo, hi = border_interval(n)
    return min(hi, max(lo, p))


class MarginalVector:
    """The probabilistic model: n marginal probabilities inside the borders.

    Sizes below 4 are rejected: for n <= 3 the border interval degenerates
    relative to the uniform initialization at 1/2.
    """

    __slots__ = ("probs",)

    def __init__(self, probs, validate: bool = True):
        arr = np.array(probs, dtype=np.float64)
        if validate:
            if arr.ndim != 1 or arr.size < 4:
                raise ValueError(f"model needs at least 4 marginals, got shape {arr.shape}")
            lo, hi = border_interval(arr.size)
            if (arr < lo - _BORDER_EPS).any() or (arr > hi + _BORDER_EPS).any():
                raise ValueError(f"marginals must lie in [{lo}, {hi}]")
        self.probs = arr

    @property
    def n(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, n: int) -> "MarginalVector":
        if n < 4:
            raise ValueError(f"model needs at least 4 marginals, got n={n}")
        return cls(np.full(n, 0.5), validate=False)

    def copy(self) -> "MarginalVector":
        return MarginalVector(self.probs.copy(), validate=False)

    def __repr__(self) -> str:
        return f"MarginalVector(n={self.n})"


def _clip_to_borders(values: np.ndarray, n: int) -> np.ndarray:
    lo, hi = border_interval(n)
    return np.clip(values, lo, hi)


@dataclass(frozen=True)
class CgaRule:
    """Symmetric +-1/K update applied where the two offspring disagree."""

    K: float

    def __post_init__(self):
        if not self.K >= 2:
            raise ValueError(f"K must be >= 2, got {self.K}")

    @property
    def name(self) -> str:
        return "cga"

    @property
    def strength(self) -> float:
        return 1.0 / self.K

    def apply(self, probs: np.ndarray, winner: Bits, loser: Bits, n: int) -> np.ndarray:
        return _clip_to_borders(probs + (winner - loser) / self.K, n)


@dataclass(frozen=True)
class MmasRule:
    """Evaporate by rho and reinforce the winner's bit values."""

    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")

    @property
    def name(self) -> str:
        return "mmas"

    @property
    def strength(self) -> float:
        return self.rho

    def apply(self, probs: np.ndarray, winner: Bits, loser: Bits, n: int) -> np.ndarray:
        return _clip_to_borders((1.0 - self.rho) * probs + self.rho * winner, n)


UpdateRule = Union[CgaRule, MmasRule]


def make_rule(algorithm: str, param: float) -> UpdateRule:
    """Build the update rule from the algorithm's native parameter (K or rho)."""
    if algorithm == "cga":
        return CgaRule(K=param)
    if algorithm == "mmas":
        return MmasRule(rho=param)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def sample_offspring(model: MarginalVector, rng: np.random.Generator) -> Bits:
    """Draw one candidate: bit i is 1 with probability probs[i], independently."""
    return (rng.random(model.n) < model.probs).view(np.int8)


def evaluate_onemax(x: Bits) -> int:
    """Number of one-bits."""
    return int(np.asarray(x).sum())


def select_winner(x: Bits, y: Bits, fitness: Callable[[Bits], float] = evaluate_onemax):
    """Order a sampled pair by fitness; the first sample wins ties."""
    if len(x) != len(y):
        raise ValueError("offspring lengths differ")
    if fitness(y) > fitness(x):
        return y, x
    return x, y


def cga_update(model: MarginalVector, winner: Bits, loser: Bits, K: float) -> MarginalVector:
    """One cGA model update for an already selected (winner, loser) pair."""
    return MarginalVector(CgaRule(K).apply(model.probs, np.asarray(winner), np.asarray(loser), model.n),
                          validate=False)


def mmas_update(model: MarginalVector, winner: Bits, loser: Bits, rho: float) -> MarginalVector:
    """One MMAS model update for an already selected (winner, loser) pair."""
    return MarginalVector(MmasRule(rho).apply(model.probs, np.asarray(winner), np.asarray(loser), model.n),
                          validate=False)


@dataclass
class AlgorithmState:
    """Mutable per-run state; identical (seed, config) gives identical trajectories."""

    model: MarginalVector
    rule: UpdateRule
    rng: np.random.Generator
    iteration: int = 0
    evaluations: int = 0

    @classmethod
    def fresh(cls, n: int, rule: UpdateRule, seed: int) -> "AlgorithmState":
        return cls(model=MarginalVector.uniform(n), rule=rule, rng=np.random.default_rng(seed))


def step(state: AlgorithmState, fitness: Callable[[Bits], float] | None = None):
    """Advance one iteration: sample x then y, select, update, count.

    Returns (state, x, y) with the offspring in sampled order so callers can
    classify the step before knowing which one won.
    """
    probs = state.model.probs
    n = probs.size
    u = state.rng.random((2, n))
    x = (u[0] < probs).view(np.int8)
    y = (u[1] < probs).view(np.int8)
    if fitness is None:
        fx, fy = int(x.sum()), int(y.sum())
    else:
        fx, fy = fitness(x), fitness(y)
    winner, loser = (y, x) if fy > fx else (x, y)
    state.model = MarginalVector(state.rule.apply(probs, winner, loser, n), validate=False)
    state.iteration += 1
    state.evaluations += 2
    return state, x, y


@dataclass(frozen=True)
class RunConfig:
    """Inputs of a single run.

    init may be a scalar (all marginals equal) or a full vector; the default
    is the uniform model at 1/2.  A custom fitness needs an explicit target
    value for optimum detection; the OneMax fast path targets n.
    """

    n: int
    rule: UpdateRule
    budget: int
    init: Optional[object] = None
    fitness: Optional[Callable[[Bits], float]] = None
    target: Optional[float] = None

    def initial_probs(self) -> np.ndarray:
        if self.init is None:
            return np.full(self.n, 0.5)
        if np.isscalar(self.init):
            probs = np.full(self.n, float(self.init))
        else:
            probs = np.asarray(self.init, dtype=np.float64).copy()
        return MarginalVector(probs).probs


@dataclass
class RunRecord:
    """Outcome of one run: runtime, border statistics and model summaries.

    gap_* fields track the distance potential sum(1 - 1/n - p_i), i.e. how
    far the model is from the all-upper-border configuration, over the run.
    """

    algorithm: str
    n: int
    strength: float
    seed: int
    iterations: int
    evaluations: int
    censored: bool
    lower_border_hits: int
    upper_border_hits: int
    min_marginal: float
    gap_min: float
    gap_max: float
    gap_final: float
    final_probs: np.ndarray = field(repr=False)


Observer = Callable[[int, Bits, Bits, np.ndarray, np.ndarray], None]


def run(config: RunConfig, seed: int, observer: Observer | None = None) -> RunRecord:
    """Run until some offspring reaches the target fitness or the budget ends.

    The observer, if given, is called after every completed model update as
    observer(t, x, y, probs_before, probs_after); the iteration in which the
    optimum is sampled performs no update and is not observed.
    """
    if config.budget < 1:
        raise ValueError(f"budget must be positive, got {config.budget}")
    n = config.n
    rule = config.rule
    if config.fitness is not None and config.target is None:
        raise ValueError("custom fitness needs an explicit target")
    target = config.target if config.target is not None else n
    onemax = config.fitness is None

    rng = np.random.default_rng(seed)
    probs = config.initial_probs()
    lo, hi = border_interval(n)
    ever_lower = probs <= lo + _BORDER_EPS
    ever_upper = probs >= hi - _BORDER_EPS
    min_marginal = float(probs.min())
    gap = (n - 1) - float(probs.sum())
    gap_min = gap_max = gap

    found = False
    iterations = 0
    for t in range(config.budget):
        u = rng.random((2, n))
        x = (u[0] < probs).view(np.int8)
        y = (u[1] < probs).view(np.int8)
        if onemax:
            fx, fy = int(x.sum()), int(y.sum())
        else:
            fx, fy = config.fitness(x), config.fitness(y)
        iterations = t + 1
        if fx >= target or fy >= target:
            found = True
            break
        winner, loser = (y, x) if fy > fx else (x, y)
        before = probs.copy() if observer is not None else probs
        probs = rule.apply(probs, winner, loser, n)
        ever_lower |= probs <= lo + _BORDER_EPS
        ever_upper |= probs >= hi - _BORDER_EPS
        m = float(probs.min())
        if m < min_marginal:
            min_marginal = m
        gap = (n - 1) - float(probs.sum())
        if gap < gap_min:
            gap_min = gap
        elif gap > gap_max:
            gap_max = gap
        if observer is not None:
            observer(t, x, y, before, probs)

    return RunRecord(
        algorithm=rule.name,
        n=n,
        strength=rule.strength,
        seed=seed,
        iterations=iterations,
        evaluations=2 * iterations,
        censored=not found,
        lower_border_hits=int(ever_lower.sum()),
        upper_border_hits=int(ever_upper.sum()),
        min_marginal=min_marginal,
        gap_min=gap_min,
        gap_max=gap_max,
        gap_final=gap,
        final_probs=probs,
    )
