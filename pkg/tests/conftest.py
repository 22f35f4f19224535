import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402

settings.register_profile(
    "gapsum",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("gapsum")


@pytest.fixture(scope="session")
def oracle_primes_1e5() -> list[int]:
    return oracles.primes_upto(100_000)


@pytest.fixture(scope="session")
def oracle_prime_set_1e5(oracle_primes_1e5) -> set[int]:
    return set(oracle_primes_1e5)
