"""Hardy-Littlewood singular series, exactly or with certified truncation error.

For a tuple H = {0, h_1, ..., h_{k-1}} the singular series is the Euler
product over all primes

    S(H) = prod_p (1 - v_H(p)/p) * (1 - 1/p)^(-k),

where v_H(p) counts the distinct residues of H mod p.  The key structural
fact used throughout this module: v_H(p) = k exactly when p divides none
of the pairwise differences of H (and p > k), so all but finitely many
factors equal the "generic" factor g_k(p) = (1 - k/p)(1 - 1/p)^(-k).
Values are therefore assembled as

    [exact factors for p <= k and p | diff(H)] * prod_{p > k} g_k(p)
    with one rational correction (p - v)/(p - k) per prime p > k
    dividing a pairwise difference.

The infinite generic product is evaluated once per k to ~1e-13 certified
relative error (direct product to Q, then a prime-zeta tail expansion)
and cached; every downstream value inherits that single audited error
source.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from mpmath import mp, mpf

from . import engine
from .errors import CapacityError, EmptyDomainError, PrecisionError, ValidationError

# Cutoff between the directly-multiplied head and the prime-zeta tail of
# the cached generic products.
_CONSTANT_CUTOFF = 100_000

# Relative error claimed for the cached constants.  The true arithmetic
# error (exactly-rounded log sums, dps-30 prime zeta, one exp) is below
# 1e-15; the claim keeps two orders of margin.
_CONSTANT_REL_ERROR = 1e-13

# Certified relative error below which float64 results are not issued.
_PRECISION_FLOOR = 1e-14

DEFAULT_TRUNCATION = 1_000_000

# pi(x) < RS_CONSTANT * x / log x for all x > 1 (Rosser-Schoenfeld).
_RS_CONSTANT = 1.25506


# ---------------------------------------------------------------------------
# Tuple specifications

@dataclass(frozen=True)
class TupleSpec:
    """A candidate tuple {0, h_1, ..., h_{k-1}} with cached admissibility."""

    offsets: tuple[int, ...]

    def __post_init__(self):
        offsets = tuple(int(x) for x in self.offsets)
        if not offsets:
            raise ValidationError("tuple offsets must be non-empty")
        if offsets[0] != 0:
            raise ValidationError("tuple offsets must start at 0")
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValidationError("tuple offsets must be strictly increasing")
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_integers(cls, values: Iterable[int]) -> "TupleSpec":
        """Normalize an arbitrary set of distinct integers by translation."""
        vals = sorted(set(int(v) for v in values))
        if not vals:
            raise ValidationError("tuple offsets must be non-empty")
        base = vals[0]
        return cls(tuple(v - base for v in vals))

    @property
    def k(self) -> int:
        return len(self.offsets)

    def residues(self, p: int) -> int:
        return len({h % p for h in self.offsets})

    @property
    def admissible(self) -> bool:
        """True iff no prime modulus is fully covered.

        Primes p > k can never be covered (v <= k < p), so only p <= k
        need checking.
        """
        return all(self.residues(p) < p for p in _primes_upto(self.k))

    def pairwise_differences(self) -> list[int]:
        off = self.offsets
        return [off[j] - off[i] for i in range(len(off)) for j in range(i + 1, len(off))]


def _coerce_tuple(h) -> TupleSpec:
    if isinstance(h, TupleSpec):
        return h
    return TupleSpec(tuple(h))


def _primes_upto(n: int) -> list[int]:
    out = []
    for p in range(2, n + 1):
        if all(p % q for q in out):
            out.append(p)
    return out


# Deterministic Miller-Rabin, valid for all 64-bit inputs.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def residue_count(h, p: int) -> int:
    """v_H(p): the number of distinct residue classes of H modulo p."""
    if not _is_prime(int(p)):
        raise ValidationError(f"modulus {p} is not prime")
    return _coerce_tuple(h).residues(int(p))


def is_admissible(h) -> bool:
    return _coerce_tuple(h).admissible


# ---------------------------------------------------------------------------
# Small factorization helpers

_SPF_SIZE = 1 << 20


@lru_cache(maxsize=1)
def _spf_table() -> np.ndarray:
    """Smallest-prime-factor table for n < 2^20."""
    n = _SPF_SIZE
    spf = np.arange(n, dtype=np.int32)
    for p in range(2, math.isqrt(n - 1) + 1):
        if spf[p] == p:
            sl = spf[p * p :: p]
            np.minimum(sl, p, out=sl)
    return spf


def _distinct_prime_factors(n: int) -> list[int]:
    """Distinct prime factors of n >= 1, smallest first."""
    n = int(n)
    out: list[int] = []
    if n < _SPF_SIZE:
        spf = _spf_table()
        while n > 1:
            p = int(spf[n])
            out.append(p)
            while n % p == 0:
                n //= p
        return out
    for p in (2, 3, 5):
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
    f = 7
    # wheel over 7, 11, 13, ... is unnecessary at the sizes seen here
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 2
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# Cached generic products and the prime zeta tail

def _moebius(n: int) -> int:
    if n == 1:
        return 1
    result = 1
    for p in _distinct_prime_factors(n):
        m = n
        count = 0
        while m % p == 0:
            m //= p
            count += 1
        if count > 1:
            return 0
        result = -result
    return result


@lru_cache(maxsize=64)
def _prime_zeta(s: int) -> float:
    """P(s) = sum_p p^(-s), via the Moebius inversion of log zeta."""
    if s < 2:
        raise ValidationError("prime zeta is evaluated for integer s >= 2 only")
    with mp.workdps(30):
        total = mpf(0)
        j = 1
        while True:
            log_z = mp.log(mp.zeta(j * s))
            mu = _moebius(j)
            if mu:
                total += mpf(mu) / j * log_z
            if abs(log_z) < mpf(10) ** -35:
                break
            j += 1
        return float(total)


@lru_cache(maxsize=1)
def _constant_primes() -> np.ndarray:
    odd = engine._odd_base_primes(_CONSTANT_CUTOFF)
    return np.concatenate(([2], odd)).astype(np.float64)


@lru_cache(maxsize=32)
def _generic_product(k: int, cutoff: int = _CONSTANT_CUTOFF) -> tuple[float, float]:
    """prod_{p > k} (1 - k/p)(1 - 1/p)^(-k) with a certified error bound.

    Head: direct product over k < p <= cutoff (exactly-rounded log sum).
    Tail: log prod_{p > cutoff} g_k(p) = -sum_{m>=2} ((k^m - k)/m) * T(m)
    where T(m) = P(m) - sum_{p <= cutoff} p^(-m).  The m-series is cut
    once the certified bound on a term drops below 1e-18; the remainder
    is geometric with ratio ~2k/cutoff.

    Returns (value, abs_error).
    """
    if k < 2:
        raise ValidationError("generic product needs k >= 2")
    if cutoff < max(20, 10 * k):
        raise ValidationError("cutoff too small for the tail expansion")
    ps = _constant_primes()
    if cutoff != _CONSTANT_CUTOFF:
        ps = ps[ps <= cutoff]
    head_ps = ps[ps > k]
    head = math.fsum((np.log1p(-k / head_ps) - k * np.log1p(-1.0 / head_ps)).tolist())
    tail = 0.0
    trunc = 0.0
    m = 2
    while True:
        coef = (k**m - k) / m
        partial = math.fsum((ps**-m).tolist())
        tail -= coef * (_prime_zeta(m) - partial)
        m += 1
        bound = ((k**m - k) / m) * ((cutoff + 1.0) ** -m + (cutoff + 1.0) ** (1 - m) / (m - 1))
        if bound < 1e-18:
            trunc = 2.0 * bound
            break
    value = math.exp(head + tail)
    return value, value * (_CONSTANT_REL_ERROR + trunc)


# ---------------------------------------------------------------------------
# Public value types

@dataclass(frozen=True)
class SingularValue:
    """A singular-series value with a certified absolute error bound.

    ``truncation_prime`` records the truncation parameter behind the
    bound; it is 0 when the value is exact relative to the cached
    constants (odd-d zeros, inadmissible zeros, pair values).
    """

    value: float
    abs_error: float
    truncation_prime: int


@dataclass(frozen=True)
class PairSumState:
    """Running sum of S({0,d}) for d <= limit and its centered error term."""

    limit: int
    total: float
    error_term: float


class RowSum(NamedTuple):
    sum: float
    ratio: float
    abs_error: float


# ---------------------------------------------------------------------------
# The twin-prime constant

def _elementary_tail_bound(p: int) -> float:
    """Certified bound for sum_{q > p} 1/(q-1)^2.

    Two provable estimates, take the smaller:
      * 1/(p-1), by comparison with sum_{j >= p} j^(-2)  (so <= 2/p);
      * partial summation against pi(x) < 1.25506 x / log x.
    """
    simple = 1.0 / (p - 1)
    rs = (2 * _RS_CONSTANT / math.log(p)) * (1.0 / (p - 1) + 0.5 / (p - 1) ** 2)
    return min(simple, rs)


def _choose_direct_truncation(target: float) -> int:
    p = 7
    while _elementary_tail_bound(p) > target:
        p *= 2
        if p > 1 << 34:
            raise CapacityError(
                "direct product truncation beyond 2^34; use the accelerated method"
            )
    lo, hi = p // 2, p
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if _elementary_tail_bound(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


_twin_cache: dict[tuple, SingularValue] = {}


def twin_prime_constant(
    target_error: float | None = None,
    *,
    truncation: int | None = None,
    method: str = "auto",
    workers: int | None = None,
) -> SingularValue:
    """C2 = prod_{p > 2} (1 - 1/(p-1)^2), certified to ``target_error``.

    Two evaluation routes:

    * ``direct``: the finite product over 2 < p <= P, streamed off the
      sieve.  P is the smallest truncation whose certified tail bound
      (see ``_elementary_tail_bound``) meets the target.  Feasible down
      to ~6e-11; cost grows linearly in P.
    * ``accelerated``: finite product to a small cutoff Q plus a
      prime-zeta tail expansion, certified to ~1e-13 regardless of Q.

    ``method="auto"`` picks direct for loose targets (>= 1e-7) and the
    accelerated route for tight ones.  ``truncation`` overrides P or Q
    for the chosen method and requires an explicit ``method``.
    """
    if method not in ("auto", "direct", "accelerated"):
        raise ValidationError(f"unknown method {method!r}")
    if target_error is None and truncation is None:
        raise ValidationError("either target_error or truncation is required")
    if target_error is not None:
        if not (target_error > 0):
            raise ValidationError("target_error must be positive")
        if target_error < _PRECISION_FLOOR:
            raise PrecisionError(
                f"cannot certify below {_PRECISION_FLOOR} in double precision"
            )
    if truncation is not None and method == "auto":
        raise ValidationError("an explicit truncation requires method='direct' or 'accelerated'")
    if method == "auto":
        method = "direct" if target_error >= 1e-7 else "accelerated"

    if method == "accelerated":
        cutoff = int(truncation) if truncation is not None else _CONSTANT_CUTOFF
        key = ("accelerated", cutoff)
        if key not in _twin_cache:
            value, err = _generic_product(2, cutoff)
            _twin_cache[key] = SingularValue(value, err, cutoff)
        result = _twin_cache[key]
    else:
        p_cut = int(truncation) if truncation is not None else _choose_direct_truncation(target_error)
        p_cut = max(p_cut, 7)
        if p_cut > 1 << 34:
            raise CapacityError("direct truncation beyond 2^34")
        key = ("direct", p_cut)
        if key not in _twin_cache:
            parts = []
            for block in engine.prime_blocks(p_cut, workers=workers):
                q = block.astype(np.float64)
                parts.append(float(np.sum(np.log1p(-((q - 1.0) ** -2)))))
            value = math.exp(math.fsum(parts))
            err = value * (_elementary_tail_bound(p_cut) + 1e-14)
            _twin_cache[key] = SingularValue(value, err, p_cut)
        result = _twin_cache[key]
    if target_error is not None and result.abs_error > target_error:
        raise PrecisionError(
            f"certified bound {result.abs_error:.3e} exceeds target {target_error:.3e} "
            f"(method={method}, truncation={result.truncation_prime})"
        )
    return result


@lru_cache(maxsize=1)
def _c2() -> SingularValue:
    """The module's working copy of C2 (certified ~1e-13, cached per process)."""
    value, err = _generic_product(2)
    return SingularValue(value, err, _CONSTANT_CUTOFF)


# ---------------------------------------------------------------------------
# Pair and tuple values

def pair_singular(d: int) -> SingularValue:
    """S({0, d}): 0 for odd d, else 2 C2 prod_{p | d, p > 2} (p-1)/(p-2).

    The rational factor depends only on the odd primes dividing d and is
    carried as an exact integer fraction until the final division, so
    the error bound is inherited from C2 alone.
    """
    d = int(d)
    if d < 1:
        raise ValidationError("d must be a positive integer")
    if d % 2:
        return SingularValue(0.0, 0.0, 0)
    num = 1
    den = 1
    for p in _distinct_prime_factors(d):
        if p > 2:
            num *= p - 1
            den *= p - 2
    c2 = _c2()
    ratio = num / den
    value = 2.0 * ratio * c2.value
    err = 2.0 * ratio * c2.abs_error + 4e-16 * value
    return SingularValue(value, err, 0)


def tuple_singular(h, truncation: int = DEFAULT_TRUNCATION) -> SingularValue:
    """S(H) for a general tuple, assembled from the cached generic product.

    The factors for p <= k and for every prime dividing a pairwise
    difference are exact; the rest are generic by construction, so the
    returned value carries no neglected-structure error.  The certified
    bound keeps the conventional shape value * (e^(k(k+1)/(P-1)) - 1)
    plus the constant's own relative error, which is monotone
    non-increasing in the truncation parameter P.
    """
    spec = _coerce_tuple(h)
    k = spec.k
    p_cut = int(truncation)
    if p_cut < k:
        raise ValidationError(f"truncation {p_cut} below tuple size {k}")
    if k == 1:
        return SingularValue(1.0, 0.0, p_cut)
    if not spec.admissible:
        return SingularValue(0.0, 0.0, 0)
    value = 1.0
    for p in _primes_upto(k):
        v = spec.residues(p)
        value *= (1.0 - v / p) * (1.0 - 1.0 / p) ** -k
    gen, gen_err = _generic_product(k)
    rel_err = gen_err / gen
    value *= gen
    correction_primes: set[int] = set()
    for diff in spec.pairwise_differences():
        correction_primes.update(q for q in _distinct_prime_factors(diff) if q > k)
    for q in sorted(correction_primes):
        v = spec.residues(q)
        value *= (q - v) / (q - k)
    abs_error = value * (math.expm1(k * (k + 1) / (p_cut - 1)) + rel_err)
    return SingularValue(value, abs_error, p_cut)


# ---------------------------------------------------------------------------
# Aggregate sums

_PAIR_SWEEP_CAP = 100_000_000  # 8 bytes per odd number below limit/2


def pair_singular_sum_grid(limits: Sequence[int]) -> list[PairSumState]:
    """sum_{d <= X} S({0, d}) for every X in ``limits``, in one sweep.

    Writing even d = 2^a * m with m odd, S({0, d}) = 2 C2 h(m) where
    h(m) = prod_{p | m} (p-1)/(p-2).  The sweep builds h for all odd
    m <= max(limits)/2 by one strided multiply per odd prime, then reads
    the total for each X as sum_{a >= 1} H(X >> a) with H a prefix sum.

    The error term is total - X + log(X)/2.
    """
    xs = [int(x) for x in limits]
    if not xs:
        raise ValidationError("at least one limit is required")
    for x in xs:
        if x < 2:
            raise EmptyDomainError(f"pair sum needs X >= 2, got {x}")
    x_max = max(xs)
    if x_max > _PAIR_SWEEP_CAP:
        raise CapacityError(
            f"sweep limit {x_max} above the documented memory cap {_PAIR_SWEEP_CAP}"
        )
    m_max = x_max // 2
    n_slots = (m_max + 1) // 2  # odd m = 2i + 1
    weights = np.ones(max(n_slots, 1))
    for p in engine._odd_base_primes(m_max):
        p = int(p)
        weights[(p - 1) // 2 :: p] *= (p - 1.0) / (p - 2.0)

    cut_slots = sorted({(x >> a) + 1 >> 1 for x in xs for a in range(1, x.bit_length())})
    prefix: dict[int, float] = {}
    running: list[float] = []
    prev = 0
    for c in cut_slots:
        running.append(float(np.sum(weights[prev:c])))
        prefix[c] = math.fsum(running)
        prev = c
    c2 = 2.0 * _c2().value
    out = []
    for x in xs:
        total = c2 * math.fsum(
            prefix[(x >> a) + 1 >> 1] for a in range(1, x.bit_length()) if (x >> a) >= 1
        )
        out.append(PairSumState(x, total, total - x + math.log(x) / 2))
    return out


def pair_singular_sum(limit: int) -> PairSumState:
    """Single-limit form of ``pair_singular_sum_grid``."""
    return pair_singular_sum_grid([limit])[0]


def triple_row_sum(d: int, truncation: int = DEFAULT_TRUNCATION) -> RowSum:
    """sum_{h=1}^{d-1} S({0, h, d}) and its ratio to d * S({0, d}).

    Only even d is meaningful (odd d makes every pair {0, d} odd-spaced).
    d = 2 is degenerate: the single row entry {0, 1, 2} is inadmissible,
    so the sum and ratio are exactly 0.
    """
    d = int(d)
    if d < 2 or d % 2:
        raise ValidationError("row sums are defined for even d >= 2")
    if d == 2:
        return RowSum(0.0, 0.0, 0.0)
    parts = []
    err = 0.0
    for h in range(1, d):
        sv = tuple_singular((0, h, d), truncation)
        if sv.value:
            parts.append(sv.value)
            err += sv.abs_error
    total = math.fsum(parts)
    denom = d * pair_singular(d).value
    return RowSum(total, total / denom, err)
