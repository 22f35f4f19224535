"""Segmented prime sieve with deterministic parallel segment merging.

The sieve works on odd integers only.  A segment covers a span of
``2 * slots`` consecutive integers starting at an odd bound, and slot ``i``
of a segment based at ``lo`` represents the odd number ``lo + 2*i``.
Segments are sieved independently (optionally by worker processes) and
consumed strictly in increasing order, so every derived stream (primes,
gaps, counts) is identical for any worker count.

Counting is by sieve only; there is no analytic shortcut, and no
primality proving for individual large integers.

A note on scale: the number of primes up to X grows like X/log X (the
prime number theorem), so the index of the largest prime below a desk
scale limit of 1e12 still fits comfortably in 64 bits.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, EmptyDomainError, ValidationError

CAPACITY_LIMIT = 2**63 - 1

# Default number of odd slots per segment: a 2^18-byte mask sits in L2.
# For limits past 2^31 the slot count doubles per octave (capped) so the
# per-segment dispatch overhead stays small relative to the marking work.
DEFAULT_SEGMENT_SLOTS = 1 << 18
_MAX_SEGMENT_SLOTS = 1 << 24

_FIRST_ODD = 3


def default_workers() -> int:
    env = os.environ.get("GAPSUM_WORKERS")
    if env:
        try:
            w = int(env)
        except ValueError as exc:
            raise ValidationError(f"GAPSUM_WORKERS must be an integer, got {env!r}") from exc
        if w < 1:
            raise ValidationError("GAPSUM_WORKERS must be >= 1")
        return w
    return os.cpu_count() or 1


def effective_segment_slots(limit: int, segment_slots: int | None = None) -> int:
    """Resolve the per-segment odd-slot count for a run.

    Explicit values must be a power of two.  The automatic choice grows
    with the limit so that very long runs do not pay per-segment
    dispatch overhead tens of thousands of times.
    """
    if segment_slots is not None:
        if segment_slots < 1024 or segment_slots & (segment_slots - 1):
            raise ValidationError("segment_slots must be a power of two >= 1024")
        return segment_slots
    slots = DEFAULT_SEGMENT_SLOTS
    extra = max(0, int(limit).bit_length() - 31)
    slots <<= extra
    return min(slots, _MAX_SEGMENT_SLOTS)


def _check_limit(limit: int, minimum: int, what: str = "limit") -> int:
    if not isinstance(limit, (int, np.integer)):
        raise ValidationError(f"{what} must be an integer, got {type(limit).__name__}")
    limit = int(limit)
    if limit > CAPACITY_LIMIT:
        raise CapacityError(f"{what} {limit} exceeds the supported range 2^63 - 1")
    if limit < minimum:
        raise EmptyDomainError(f"{what} must be >= {minimum}, got {limit}")
    return limit


@lru_cache(maxsize=4)
def _odd_base_primes(limit: int) -> np.ndarray:
    """Odd primes <= limit via a dense odd-only sieve (used for base primes)."""
    if limit < 3:
        return np.empty(0, dtype=np.int64)
    half = (limit + 1) // 2  # slots for odds 1, 3, 5, ...
    mask = np.ones(half, dtype=bool)
    mask[0] = False  # 1 is not prime
    for i in range(1, (math.isqrt(limit) + 1) // 2 + 1):
        if mask[i]:
            p = 2 * i + 1
            mask[(p * p - 1) // 2 :: p] = False
    return (np.flatnonzero(mask).astype(np.int64) << 1) + 1


def _sieve_mask(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Boolean mask over odd integers in [lo, hi); True means prime.

    ``lo`` must be odd and >= 3.  ``base`` must contain every odd prime
    <= sqrt(hi - 1).
    """
    n_slots = (hi - lo + 1) // 2
    mask = np.ones(n_slots, dtype=bool)
    for p in base:
        p = int(p)
        if p * p >= hi:
            break
        start = p * p
        if start < lo:
            start = ((lo + p - 1) // p) * p
            if start % 2 == 0:
                start += p
        if start < hi:
            mask[(start - lo) // 2 :: p] = False
    return mask


def _segment_bounds(limit: int, slots: int, start_lo: int = _FIRST_ODD) -> Iterator[tuple[int, int]]:
    span = 2 * slots
    lo = start_lo
    while lo <= limit:
        hi = min(lo + span, limit + 1)
        yield lo, hi
        lo = hi


# ---------------------------------------------------------------------------
# Worker functions (top level so they pickle under multiprocessing)

@lru_cache(maxsize=2)
def _worker_base(sqrt_cap: int) -> np.ndarray:
    return _odd_base_primes(sqrt_cap)


def _worker_primes(task: tuple[int, int, int]) -> np.ndarray:
    lo, hi, sqrt_cap = task
    mask = _sieve_mask(lo, hi, _worker_base(sqrt_cap))
    return (np.flatnonzero(mask).astype(np.int64) << 1) + lo


def _worker_count(task: tuple[int, int, int]) -> int:
    lo, hi, sqrt_cap = task
    return int(np.count_nonzero(_sieve_mask(lo, hi, _worker_base(sqrt_cap))))


def _worker_tuple_counts(task: tuple[int, int, int, int, tuple[tuple[int, ...], ...]]) -> np.ndarray:
    """Count tuple starts n in [lo, hi) with n + h_max <= limit, per tuple.

    The segment mask is sieved with an extension of max(h)/2 slots past
    ``hi`` so shifted lookups never cross a segment boundary.
    """
    lo, hi, limit, sqrt_cap, tuples = task
    ext = max(h[-1] for h in tuples)
    hi_ext = min(hi + ext, limit + 1)
    mask = _sieve_mask(lo, hi_ext, _worker_base(sqrt_cap))
    out = np.zeros(len(tuples), dtype=np.int64)
    for j, offsets in enumerate(tuples):
        hmax = offsets[-1]
        top = min(hi, limit - hmax + 1)  # n must satisfy n + hmax <= limit
        core = (top - lo + 1) // 2
        if core <= 0:
            continue
        acc = mask[:core].copy()
        for h in offsets[1:]:
            d = h // 2
            acc &= mask[d : d + core]
        out[j] = int(np.count_nonzero(acc))
    return out


def _ordered_map(worker, tasks: list, workers: int) -> Iterator:
    """Apply ``worker`` over ``tasks``, yielding results in task order.

    With ``workers > 1`` the tasks run in a process pool but the yield
    order is still the submission order, which keeps every downstream
    reduction deterministic.
    """
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            yield worker(t)
        return
    window = 2 * workers + 2
    with ProcessPoolExecutor(max_workers=workers) as ex:
        pending = {}
        next_submit = 0
        for next_yield in range(len(tasks)):
            while next_submit < len(tasks) and next_submit - next_yield < window:
                pending[next_submit] = ex.submit(worker, tasks[next_submit])
                next_submit += 1
            yield pending.pop(next_yield).result()


# ---------------------------------------------------------------------------
# Public types

@dataclass(frozen=True, slots=True)
class GapRecord:
    """One consecutive-prime event: the n-th prime, its successor, and their gap."""

    n: int
    p: int
    p_next: int
    gap: int


@dataclass(frozen=True)
class GapHistogram:
    """Counts of consecutive gaps d with p_next <= limit."""

    limit: int
    counts: dict[int, int]

    def total_span(self) -> int:
        """Sum of d * count(d); telescopes to (largest prime <= limit) - 2."""
        return sum(d * c for d, c in self.counts.items())


# ---------------------------------------------------------------------------
# Prime enumeration

def _prime_segments(
    limit: int,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
    start_lo: int = _FIRST_ODD,
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (segment_end, odd primes in segment) pairs in segment order."""
    limit = _check_limit(limit, 2)
    if workers is None:
        workers = default_workers()
    slots = effective_segment_slots(limit, segment_slots)
    sqrt_cap = math.isqrt(limit) + 1
    tasks = [(lo, hi, sqrt_cap) for lo, hi in _segment_bounds(limit, slots, start_lo)]
    for task, block in zip(tasks, _ordered_map(_worker_primes, tasks, workers)):
        yield task[1], block


def prime_blocks(
    limit: int,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
    start_lo: int = _FIRST_ODD,
) -> Iterator[np.ndarray]:
    """Yield int64 arrays of the odd primes in successive segments up to ``limit``.

    The prime 2 is not included; callers that need it prepend it
    themselves.  ``start_lo`` admits restarting mid-run from a segment
    boundary recorded in a checkpoint.
    """
    for _, block in _prime_segments(
        limit, workers=workers, segment_slots=segment_slots, start_lo=start_lo
    ):
        yield block


def primes_up_to(
    limit: int,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> Iterator[int]:
    """Every prime <= limit exactly once, in increasing order."""
    limit = _check_limit(limit, 2)
    yield 2
    for block in prime_blocks(limit, workers=workers, segment_slots=segment_slots):
        yield from (int(p) for p in block)


def prime_count(
    limit: int,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> int:
    """pi(limit): the number of primes <= limit."""
    limit = _check_limit(limit, 2)
    if workers is None:
        workers = default_workers()
    slots = effective_segment_slots(limit, segment_slots)
    sqrt_cap = math.isqrt(limit) + 1
    tasks = [(lo, hi, sqrt_cap) for lo, hi in _segment_bounds(limit, slots)]
    return 1 + sum(_ordered_map(_worker_count, tasks, workers))


# ---------------------------------------------------------------------------
# Gap streams

@dataclass(frozen=True)
class GapBlock:
    """A contiguous run of gaps: gap j is d_n with n = n0 + j.

    ``rights[j]`` is the larger prime of pair j, so prime-limit slicing
    (p_{n+1} <= X) is a searchsorted on ``rights``.  ``seg_end`` is the
    sieve segment boundary whose consumption produced the block; it is
    the restart point a checkpoint records.
    """

    n0: int
    gaps: np.ndarray
    rights: np.ndarray
    seg_end: int


def gap_blocks(
    *,
    prime_limit: int | None = None,
    index_limit: int | None = None,
    workers: int | None = None,
    segment_slots: int | None = None,
    start_lo: int = _FIRST_ODD,
    init_last: int = 2,
    init_n: int = 1,
) -> Iterator[GapBlock]:
    """Vectorised gap stream in segment-sized blocks.

    Exactly one of ``prime_limit`` (include gaps with p_{n+1} <= X) and
    ``index_limit`` (include gaps with n <= N) must be given.  The
    ``start_lo`` / ``init_last`` / ``init_n`` triple restarts the stream
    from checkpointed state; the defaults start from scratch, where the
    first record pairs 2 with 3.
    """
    if (prime_limit is None) == (index_limit is None):
        raise ValidationError("exactly one of prime_limit and index_limit is required")
    if prime_limit is not None:
        sieve_limit = _check_limit(prime_limit, 3, "prime_limit")
    else:
        index_limit = _check_limit(index_limit, 1, "index_limit")
        sieve_limit = _prime_value_bound(index_limit + 1)
    last = init_last
    n = init_n
    for seg_end, block in _prime_segments(
        sieve_limit, workers=workers, segment_slots=segment_slots, start_lo=start_lo
    ):
        if len(block) == 0:
            continue
        chain = np.concatenate(([last], block))
        gaps = np.diff(chain)
        rights = chain[1:]
        if index_limit is not None and n + len(gaps) - 1 >= index_limit:
            keep = index_limit - n + 1
            if keep > 0:
                yield GapBlock(n, gaps[:keep], rights[:keep], seg_end)
            return
        yield GapBlock(n, gaps, rights, seg_end)
        n += len(gaps)
        last = int(block[-1])
    if index_limit is not None:
        raise CapacityError("prime enumeration bound exhausted before index limit")


def _prime_value_bound(n: int) -> int:
    """An upper bound for the n-th prime (p_n < n(log n + log log n) for n >= 6)."""
    if n < 6:
        return 13
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 1


def gap_stream(
    *,
    prime_limit: int | None = None,
    index_limit: int | None = None,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> Iterator[GapRecord]:
    """Yield GapRecord(n, p_n, p_{n+1}, d_n) in increasing n."""
    for block in gap_blocks(
        prime_limit=prime_limit,
        index_limit=index_limit,
        workers=workers,
        segment_slots=segment_slots,
    ):
        rights = block.rights
        gaps = block.gaps
        for j in range(len(gaps)):
            g = int(gaps[j])
            r = int(rights[j])
            yield GapRecord(block.n0 + j, r - g, r, g)


def consecutive_gap_counts(
    limit: int,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> GapHistogram:
    """Histogram of consecutive gaps d_n with p_{n+1} <= limit."""
    limit = _check_limit(limit, 3)
    acc = np.zeros(0, dtype=np.int64)
    for block in gap_blocks(prime_limit=limit, workers=workers, segment_slots=segment_slots):
        counts = np.bincount(block.gaps)
        if len(counts) > len(acc):
            counts[: len(acc)] += acc
            acc = counts
        else:
            acc[: len(counts)] += counts
    return GapHistogram(limit, {int(d): int(c) for d, c in enumerate(acc) if c})


# ---------------------------------------------------------------------------
# Prime tuple counts

def _normalize_offsets(h) -> tuple[int, ...]:
    offsets = tuple(int(x) for x in getattr(h, "offsets", h))
    if not offsets:
        raise ValidationError("tuple offsets must be non-empty")
    if offsets[0] != 0:
        raise ValidationError("tuple offsets must start at 0")
    if any(b <= a for a, b in zip(offsets, offsets[1:])):
        raise ValidationError("tuple offsets must be strictly increasing")
    if offsets[-1] > CAPACITY_LIMIT:
        raise CapacityError("tuple offset exceeds supported range")
    return offsets


def _is_prime_small(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def tuple_counts(
    limit: int,
    tuple_list: Sequence,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> list[int]:
    """pi(limit; H) for each H in one sieve pass.

    Counts n with n + max(H) <= limit such that n + h is prime for every
    offset h.  Tuples with an odd offset force one member to be even, so
    n = 2 is the only candidate and is checked directly.
    """
    limit = _check_limit(limit, 2)
    normalized = [_normalize_offsets(h) for h in tuple_list]
    results: list[int | None] = [None] * len(normalized)
    even_idx = []
    for j, offsets in enumerate(normalized):
        if limit < offsets[-1] + 2:
            results[j] = 0
        elif len(offsets) == 1:
            results[j] = prime_count(limit, workers=workers, segment_slots=segment_slots)
        elif any(h % 2 for h in offsets):
            results[j] = int(all(_is_prime_small(2 + h) for h in offsets))
        else:
            even_idx.append(j)
    if even_idx:
        if workers is None:
            workers = default_workers()
        slots = effective_segment_slots(limit, segment_slots)
        sqrt_cap = math.isqrt(limit) + 1
        tuples = tuple(normalized[j] for j in even_idx)
        tasks = [
            (lo, hi, limit, sqrt_cap, tuples)
            for lo, hi in _segment_bounds(limit, slots)
        ]
        total = np.zeros(len(tuples), dtype=np.int64)
        for part in _ordered_map(_worker_tuple_counts, tasks, workers):
            total += part
        for pos, j in enumerate(even_idx):
            results[j] = int(total[pos])
    return results  # type: ignore[return-value]


def tuple_count(
    limit: int,
    h,
    *,
    workers: int | None = None,
    segment_slots: int | None = None,
) -> int:
    """pi(limit; H) for a single tuple; see ``tuple_counts``."""
    return tuple_counts(limit, [h], workers=workers, segment_slots=segment_slots)[0]
