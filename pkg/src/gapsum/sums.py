"""Streaming accumulators over the consecutive-prime gap stream.

All sums are reduced with compensated (Neumaier) summation in a fixed
segment order, so a run's final value is bit-identical for any worker
count and for a checkpointed stop/resume at a segment boundary.  Values
do depend on the segment size at the last-bit level; integer results do
not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import engine, singular
from .errors import (
    EmptyDomainError,
    UnsupportedExponentError,
    ValidationError,
)


class RunInterrupted(Exception):
    """Raised by the accumulator when a stop-after-segments budget is hit.

    Control flow for the checkpointing layer, not an error.
    """


@dataclass(frozen=True)
class WeightSpec:
    """The weight family f(t) = t^(-1) (log t)^alpha, alpha >= -1.

    For alpha < 0 the first gap d_1 = 1 is excluded (log 1 = 0 cannot be
    raised to a negative power), which forces start_index >= 2.  The
    excluded term is irrelevant to any of the asymptotics tracked here.
    For 0 <= alpha <= 1 the weight is strictly decreasing on [2, oo);
    larger alpha is accepted for plain accumulation.
    """

    alpha: float
    start_index: int = 1

    def __post_init__(self):
        if self.alpha < -1:
            raise UnsupportedExponentError("alpha must satisfy alpha >= -1")
        if self.start_index < 1:
            raise ValidationError("start_index must be >= 1")
        if self.alpha < 0 and self.start_index < 2:
            raise ValidationError(
                "alpha < 0 requires start_index >= 2 (d_1 = 1 has no log weight)"
            )

    def evaluate(self, gaps: np.ndarray) -> np.ndarray:
        g = gaps.astype(np.float64)
        if self.alpha == 0:
            return 1.0 / g
        return np.log(g) ** self.alpha / g


@dataclass(frozen=True)
class SumSnapshot:
    """Accumulator state at a limit: value, term count, and the Neumaier carry."""

    mode: str
    limit_reached: int
    value: float
    terms: int
    compensation: float


@dataclass(frozen=True)
class RangeSplit:
    """A weighted gap sum split at y = log X / loglog X and at log X."""

    limit: int
    threshold_y: float
    low: float
    mid: float
    high: float

    @property
    def total(self) -> float:
        return self.low + self.mid + self.high


class SandwichResult(NamedTuple):
    lower: int
    middle: int
    upper: int
    ok: bool


class _Kahan:
    __slots__ = ("s", "c")

    def __init__(self, s: float = 0.0, c: float = 0.0):
        self.s = s
        self.c = c

    def add(self, x: float) -> None:
        s = self.s
        t = s + x
        if abs(s) >= abs(x):
            self.c += (s - t) + x
        else:
            self.c += (x - t) + s
        self.s = t

    def total(self) -> float:
        return self.s + self.c


def default_snapshot_grid(limit: int) -> list[int]:
    """Snapshot limits at 10^k and 3*10^k below the run limit."""
    out = []
    base = 10
    while base < limit:
        out.append(base)
        if 3 * base < limit:
            out.append(3 * base)
        base *= 10
    return out


@dataclass
class AccumulatorState:
    """Resumable position of a streaming sum (one record per completed segment)."""

    next_lo: int
    last_prime: int
    next_n: int
    kahan_s: float
    kahan_c: float
    terms: int


def accumulate_terms(
    term_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    mode: str,
    limit: int,
    start_index: int = 1,
    snapshot_limits: Sequence[int] | None = None,
    workers: int | None = None,
    segment_slots: int | None = None,
    resume: AccumulatorState | None = None,
    on_segment: Callable[[AccumulatorState], None] | None = None,
    stop_after_segments: int | None = None,
) -> list[SumSnapshot]:
    """Reduce term_fn(gaps, n_indices) over the gap stream, in order.

    ``mode`` is "prime" (include gaps with p_{n+1} <= limit) or "index"
    (n <= limit).  Snapshots are emitted at each snapshot limit (the
    geometric 10^k / 3*10^k grid when none is given; pass [] for final
    only) plus a final one at the run limit.  The grid participates in
    the compensated reduction's grouping, so bit-identical reruns must
    keep it fixed.  ``on_segment`` receives the resumable state after
    every consumed segment; ``resume`` restarts from such a state
    (snapshots below the resume point are not re-emitted).
    """
    if mode not in ("prime", "index"):
        raise ValidationError(f"mode must be 'prime' or 'index', got {mode!r}")
    if snapshot_limits is None:
        snapshot_limits = default_snapshot_grid(limit)
    grid = sorted(set(int(g) for g in snapshot_limits))
    grid = [g for g in grid if g <= limit]
    kahan = _Kahan()
    terms = 0
    block_kwargs: dict = {}
    if resume is not None:
        kahan = _Kahan(resume.kahan_s, resume.kahan_c)
        terms = resume.terms
        block_kwargs = dict(
            start_lo=resume.next_lo,
            init_last=resume.last_prime,
            init_n=resume.next_n,
        )
        resume_pos = resume.last_prime if mode == "prime" else resume.next_n - 1
        grid = [g for g in grid if g > resume_pos]
    snapshots: list[SumSnapshot] = []
    gi = 0
    segments_done = 0
    limit_kw = {"prime_limit": limit} if mode == "prime" else {"index_limit": limit}
    for block in engine.gap_blocks(
        workers=workers, segment_slots=segment_slots, **limit_kw, **block_kwargs
    ):
        skip = max(0, start_index - block.n0)
        gaps = block.gaps[skip:]
        if len(gaps):
            n_idx = np.arange(block.n0 + skip, block.n0 + skip + len(gaps), dtype=np.int64)
            positions = block.rights[skip:] if mode == "prime" else n_idx
            w = term_fn(gaps, n_idx)
            prev = 0
            while gi < len(grid) and grid[gi] <= positions[-1]:
                cut = int(np.searchsorted(positions, grid[gi], side="right"))
                kahan.add(float(np.sum(w[prev:cut])))
                terms += cut - prev
                snapshots.append(
                    SumSnapshot(mode, grid[gi], kahan.total(), terms, kahan.c)
                )
                prev = cut
                gi += 1
            kahan.add(float(np.sum(w[prev:])))
            terms += len(w) - prev
        segments_done += 1
        if on_segment is not None:
            on_segment(
                AccumulatorState(
                    next_lo=block.seg_end,
                    last_prime=int(block.rights[-1]),
                    next_n=block.n0 + len(block.gaps),
                    kahan_s=kahan.s,
                    kahan_c=kahan.c,
                    terms=terms,
                )
            )
        if stop_after_segments is not None and segments_done >= stop_after_segments:
            raise RunInterrupted
    if not snapshots or snapshots[-1].limit_reached != limit:
        snapshots.append(SumSnapshot(mode, limit, kahan.total(), terms, kahan.c))
    return snapshots


# ---------------------------------------------------------------------------
# Weighted gap sums

def _coerce_weight(weight) -> tuple[Callable[[np.ndarray], np.ndarray], int]:
    if isinstance(weight, WeightSpec):
        return weight.evaluate, weight.start_index
    if callable(weight):
        # Experimental hook for user-supplied monotone decreasing weights;
        # only the WeightSpec family is exercised by the test suite.
        return weight, 1
    raise ValidationError("weight must be a WeightSpec or a callable")


def weighted_gap_sum_series(
    weight,
    *,
    prime_limit: int | None = None,
    index_limit: int | None = None,
    snapshot_limits: Sequence[int] | None = None,
    workers: int | None = None,
    segment_slots: int | None = None,
    resume: AccumulatorState | None = None,
    on_segment: Callable[[AccumulatorState], None] | None = None,
    stop_after_segments: int | None = None,
) -> list[SumSnapshot]:
    """Snapshots of sum f(d_n), f from ``weight``, over the chosen range."""
    if (prime_limit is None) == (index_limit is None):
        raise ValidationError("exactly one of prime_limit and index_limit is required")
    evaluate, start_index = _coerce_weight(weight)
    if prime_limit is not None:
        mode, limit = "prime", int(prime_limit)
        if limit < 3:
            raise EmptyDomainError("prime_limit must be >= 3")
    else:
        mode, limit = "index", int(index_limit)
        if limit < 1:
            raise EmptyDomainError("index_limit must be >= 1")
    return accumulate_terms(
        lambda gaps, n_idx: evaluate(gaps),
        mode=mode,
        limit=limit,
        start_index=start_index,
        snapshot_limits=snapshot_limits,
        workers=workers,
        segment_slots=segment_slots,
        resume=resume,
        on_segment=on_segment,
        stop_after_segments=stop_after_segments,
    )


def weighted_gap_sum(weight, **kwargs) -> SumSnapshot:
    """Final snapshot of ``weighted_gap_sum_series``."""
    return weighted_gap_sum_series(weight, **kwargs)[-1]


# ---------------------------------------------------------------------------
# The reciprocal series with loglog damping

def en_heuristic_tail(index_limit: int, c: float) -> float:
    """Crude convergence illustration for c > 2 (labeled heuristic).

    Models the summand tail with the average-gap density, giving
    integral_X^oo dt / (2 t log t (loglog t)^c) = (loglog X)^(1-c) / (2(c-1)).
    Reported alongside the series for orientation only.
    """
    if c <= 2:
        raise ValidationError("the heuristic tail is reported for c > 2 only")
    return math.log(math.log(index_limit)) ** (1.0 - c) / (2.0 * (c - 1.0))


def erdos_nathanson_series(
    index_limit: int,
    c: float,
    *,
    snapshot_limits: Sequence[int] | None = None,
    workers: int | None = None,
    segment_slots: int | None = None,
    resume: AccumulatorState | None = None,
    on_segment: Callable[[AccumulatorState], None] | None = None,
    stop_after_segments: int | None = None,
) -> list[SumSnapshot]:
    """Snapshots of sum_{3 <= n <= N} 1 / (d_n n (loglog n)^c)."""
    index_limit = int(index_limit)
    if index_limit < 3:
        raise EmptyDomainError("the series starts at n = 3")
    c = float(c)

    def terms(gaps: np.ndarray, n_idx: np.ndarray) -> np.ndarray:
        n = n_idx.astype(np.float64)
        w = gaps * n
        if c == 0:
            return 1.0 / w
        return 1.0 / (w * np.log(np.log(n)) ** c)

    return accumulate_terms(
        terms,
        mode="index",
        limit=index_limit,
        start_index=3,
        snapshot_limits=snapshot_limits,
        workers=workers,
        segment_slots=segment_slots,
        resume=resume,
        on_segment=on_segment,
        stop_after_segments=stop_after_segments,
    )


def erdos_nathanson_sum(index_limit: int, c: float, **kwargs) -> SumSnapshot:
    """Final snapshot of ``erdos_nathanson_series``."""
    return erdos_nathanson_series(index_limit, c, **kwargs)[-1]


# ---------------------------------------------------------------------------
# Three-range decomposition

def range_split_sum(
    prime_limit: int,
    weight,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> RangeSplit:
    """Split sum f(d_n) over p_{n+1} <= X at d = y and d = log X.

    y = log X / loglog X.  Requires X >= 16 so that loglog X > 1, and
    alpha <= 1 so the weight is decreasing on the whole range (the
    decomposition's reading leans on that monotonicity; for plain
    accumulation of larger alpha use ``weighted_gap_sum``).
    """
    x = int(prime_limit)
    if x < 16:
        raise ValidationError("range split needs X >= 16 (loglog X > 1)")
    if isinstance(weight, WeightSpec) and weight.alpha > 1:
        raise ValidationError("the range decomposition requires alpha <= 1")
    evaluate, start_index = _coerce_weight(weight)
    log_x = math.log(x)
    y = log_x / math.log(log_x)
    acc = [_Kahan(), _Kahan(), _Kahan()]
    for block in engine.gap_blocks(
        prime_limit=x, workers=workers, segment_slots=segment_slots
    ):
        skip = max(0, start_index - block.n0)
        gaps = block.gaps[skip:]
        if not len(gaps):
            continue
        w = evaluate(gaps)
        low = gaps <= y
        mid = (~low) & (gaps <= log_x)
        acc[0].add(float(np.sum(w[low])))
        acc[1].add(float(np.sum(w[mid])))
        acc[2].add(float(np.sum(w[~(low | mid)])))
    return RangeSplit(x, y, acc[0].total(), acc[1].total(), acc[2].total())


# ---------------------------------------------------------------------------
# Inclusion-exclusion sandwich

_SANDWICH_SCAN_CUTOFF = 100


def _scan_triple(limit: int, h: int, d: int) -> int:
    """Directly count n <= cutoff with n, n+h, n+d all prime.

    Used for inadmissible triples, whose solutions force n to equal the
    covered prime (so n <= 3); the cutoff is generous.
    """
    top = min(limit - d, _SANDWICH_SCAN_CUTOFF)
    count = 0
    for n in range(2, top + 1):
        if (
            engine._is_prime_small(n)
            and engine._is_prime_small(n + h)
            and engine._is_prime_small(n + d)
        ):
            count += 1
    return count


def sandwich_check(
    limit: int,
    d: int,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> SandwichResult:
    """Bracket the consecutive-gap count between inclusion-exclusion bounds.

    lower = pi(X; {0,d}) - sum_{h=1}^{d-1} pi(X; {0,h,d}), middle = the
    number of n with d_n = d and p_{n+1} <= X, upper = pi(X; {0,d}).
    The bracket lower <= middle <= upper is a set-theoretic certainty;
    ``ok`` is False only under an implementation bug.
    """
    d = int(d)
    limit = int(limit)
    if d < 2 or d % 2:
        raise ValidationError("the sandwich is defined for even d >= 2")
    if limit < d + 3:
        raise EmptyDomainError(f"limit must be >= d + 3 = {d + 3}")
    admissible = []
    scanned = 0
    for h in range(1, d):
        spec = singular.TupleSpec((0, h, d))
        if spec.admissible:
            admissible.append(spec.offsets)
        else:
            scanned += _scan_triple(limit, h, d)
    counts = engine.tuple_counts(
        limit, [(0, d), *admissible], workers=workers, segment_slots=segment_slots
    )
    upper = counts[0]
    triple_total = sum(counts[1:]) + scanned
    histogram = engine.consecutive_gap_counts(
        limit, workers=workers, segment_slots=segment_slots
    )
    middle = histogram.counts.get(d, 0)
    lower = upper - triple_total
    return SandwichResult(lower, middle, upper, lower <= middle <= upper)
