"""Per-bit step classification and trajectory recording.

For a fixed bit i, an iteration is classified by the margin: the OneMax
difference between the two offspring counting every bit except i.  When the
margin is 0 or -1 the fixed bit can decide (or tie-break) the comparison and
its marginal receives a positive expected push (a biased step); any other
margin leaves the comparison to the remaining bits and the marginal performs
an unbiased move (a random-walk step).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Bits, border_interval, _BORDER_EPS


class StepKind(enum.Enum):
    RANDOM_WALK = "rw"
    BIASED = "b"


def margin_excluding_bit(x: Bits, y: Bits, bit: int) -> int:
    """OneMax(x) - x[bit] - (OneMax(y) - y[bit]) for offspring in sampled order."""
    return int(x.sum()) - int(x[bit]) - (int(y.sum()) - int(y[bit]))


def classify_step(margin: int) -> StepKind:
    """Biased step iff the margin is 0 or -1."""
    return StepKind.BIASED if margin in (0, -1) else StepKind.RANDOM_WALK


@dataclass(frozen=True)
class StepRecord:
    """Classification of one iteration for one tracked bit."""

    t: int
    bit: int
    margin: int
    kind: StepKind
    delta: float
    p_before: float


def record_step(t: int, x: Bits, y: Bits, probs_before: np.ndarray,
                probs_after: np.ndarray, tracked_bits: Sequence[int]) -> list[StepRecord]:
    """One StepRecord per tracked bit for a completed update at iteration t."""
    fx, fy = int(x.sum()), int(y.sum())
    records = []
    for bit in tracked_bits:
        margin = (fx - int(x[bit])) - (fy - int(y[bit]))
        records.append(StepRecord(
            t=t,
            bit=int(bit),
            margin=margin,
            kind=classify_step(margin),
            delta=float(probs_after[bit] - probs_before[bit]),
            p_before=float(probs_before[bit]),
        ))
    return records


@dataclass
class Trajectory:
    """Marginal probability samples (t, p) for one bit at a fixed stride."""

    bit: int
    samples: list[tuple[int, float]] = field(default_factory=list)
    stride: int = 1


@dataclass(frozen=True)
class BorderEvent:
    """First time a bit's marginal sits on a border (side: 'lower' or 'upper')."""

    bit: int
    t: int
    side: str


def detect_border_hits(trajectories: Iterable[Trajectory], n: int) -> list[BorderEvent]:
    """First-hit events per bit per side, ordered by time.

    Exact only for stride-1 trajectories; at coarser strides a hit between
    samples is seen late or, if the bit bounces back, not at all.
    """
    lo, hi = border_interval(n)
    events = []
    for traj in trajectories:
        seen_lower = seen_upper = False
        for t, p in traj.samples:
            if not seen_lower and p <= lo + _BORDER_EPS:
                events.append(BorderEvent(bit=traj.bit, t=t, side="lower"))
                seen_lower = True
            if not seen_upper and p >= hi - _BORDER_EPS:
                events.append(BorderEvent(bit=traj.bit, t=t, side="upper"))
                seen_upper = True
            if seen_lower and seen_upper:
                break
    events.sort(key=lambda e: (e.t, e.bit, e.side))
    return events


def rw_displacement(records: Iterable[StepRecord],
                    window: Optional[tuple[int, int]] = None) -> float:
    """Total marginal change contributed by random-walk steps in [t0, t1]."""
    if window is None:
        t0, t1 = -math.inf, math.inf
    else:
        t0, t1 = window
    return math.fsum(r.delta for r in records
                     if r.kind is StepKind.RANDOM_WALK and t0 <= r.t <= t1)


def default_stride(n: int) -> int:
    """Trajectory stride: exact for n <= 256, thinned 16x beyond."""
    return 1 if n <= 256 else 16


class StepCollector:
    """Observer for core.run: classifies tracked bits and samples trajectories.

    Border first-hit times are detected inline at every iteration regardless
    of the trajectory stride, so detect-style results stay exact even for
    thinned trajectories.  A collector belongs to exactly one run.
    """

    def __init__(self, n: int, tracked_bits: Sequence[int] = (),
                 record_steps: bool = False, stride: Optional[int] = None,
                 track_borders: bool = True):
        self.n = n
        self.tracked = np.asarray(sorted(set(int(b) for b in tracked_bits)), dtype=np.int64)
        if self.tracked.size and (self.tracked[0] < 0 or self.tracked[-1] >= n):
            raise ValueError("tracked bit out of range")
        self.record_steps = record_steps
        self.stride = default_stride(n) if stride is None else stride
        self.track_borders = track_borders
        self.records: list[StepRecord] = []
        self.b_counts = np.zeros(self.tracked.size, dtype=np.int64)
        self.rw_counts = np.zeros(self.tracked.size, dtype=np.int64)
        self._samples: dict[int, list[tuple[int, float]]] = {int(b): [] for b in self.tracked}
        self._first_lower = np.full(n, -1, dtype=np.int64)
        self._first_upper = np.full(n, -1, dtype=np.int64)
        self.iterations_seen = 0

    def __call__(self, t: int, x: Bits, y: Bits,
                 probs_before: np.ndarray, probs_after: np.ndarray) -> None:
        self.iterations_seen += 1
        if self.tracked.size:
            fx, fy = int(x.sum()), int(y.sum())
            xb = x[self.tracked]
            yb = y[self.tracked]
            margins = (fx - xb) - (fy - yb)
            biased = (margins == 0) | (margins == -1)
            self.b_counts += biased
            self.rw_counts += ~biased
            if self.record_steps:
                deltas = probs_after[self.tracked] - probs_before[self.tracked]
                for i, bit in enumerate(self.tracked):
                    kind = StepKind.BIASED if biased[i] else StepKind.RANDOM_WALK
                    self.records.append(StepRecord(
                        t=t, bit=int(bit), margin=int(margins[i]), kind=kind,
                        delta=float(deltas[i]), p_before=float(probs_before[bit])))
            if self.stride and t % self.stride == 0:
                for bit in self.tracked:
                    self._samples[int(bit)].append((t, float(probs_after[bit])))
        if self.track_borders:
            lo, hi = border_interval(self.n)
            new_lower = (probs_after <= lo + _BORDER_EPS) & (self._first_lower < 0)
            if new_lower.any():
                self._first_lower[new_lower] = t
            new_upper = (probs_after >= hi - _BORDER_EPS) & (self._first_upper < 0)
            if new_upper.any():
                self._first_upper[new_upper] = t

    def trajectory(self, bit: int) -> Trajectory:
        return Trajectory(bit=bit, samples=list(self._samples[bit]), stride=self.stride)

    def trajectories(self) -> list[Trajectory]:
        return [self.trajectory(int(b)) for b in self.tracked]

    def border_events(self) -> list[BorderEvent]:
        events = []
        for bit in range(self.n):
            if self._first_lower[bit] >= 0:
                events.append(BorderEvent(bit=bit, t=int(self._first_lower[bit]), side="lower"))
            if self._first_upper[bit] >= 0:
                events.append(BorderEvent(bit=bit, t=int(self._first_upper[bit]), side="upper"))
        events.sort(key=lambda e: (e.t, e.bit, e.side))
        return events

    def b_step_counts(self) -> dict[int, int]:
        return {int(b): int(c) for b, c in zip(self.tracked, self.b_counts)}
