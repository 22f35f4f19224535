"""Prime-gap analytics: sieving, singular series, and asymptotics checks."""

from .engine import (
    GapHistogram,
    GapRecord,
    consecutive_gap_counts,
    gap_stream,
    prime_count,
    primes_up_to,
    tuple_count,
    tuple_counts,
)
from .errors import (
    CapacityError,
    CheckpointError,
    EmptyDomainError,
    GapsumError,
    PrecisionError,
    UnsupportedExponentError,
    ValidationError,
)
from .singular import (
    PairSumState,
    SingularValue,
    TupleSpec,
    is_admissible,
    pair_singular,
    pair_singular_sum,
    pair_singular_sum_grid,
    residue_count,
    triple_row_sum,
    tuple_singular,
    twin_prime_constant,
)
from .sums import (
    RangeSplit,
    SandwichResult,
    SumSnapshot,
    WeightSpec,
    erdos_nathanson_series,
    erdos_nathanson_sum,
    range_split_sum,
    sandwich_check,
    weighted_gap_sum,
    weighted_gap_sum_series,
)
from .verify import (
    VerificationReport,
    conjecture1_ratio,
    corollary_ratio,
    default_sieve_samples,
    lemma21_error_curve,
    lemma22_ratio_curve,
    main_term_corollary,
    main_term_theorem1,
    sieve_bound_check,
    theorem1_ratio,
)

__version__ = "0.1.0"
