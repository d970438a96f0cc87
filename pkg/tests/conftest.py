import random

import pytest

GALOIS_VARIANTS = (
    "grain80-galois-1",
    "grain80-galois-4",
    "grain80-galois-8",
    "grain128-galois-1",
    "grain128-galois-4",
    "grain128-galois-8",
    "grain128-galois-16",
)

ALL_VARIANTS = ("grain80-fib", "grain128-fib") + GALOIS_VARIANTS


def rand_bits(rng: random.Random, n: int) -> tuple[int, ...]:
    return tuple(rng.randrange(2) for _ in range(n))


@pytest.fixture
def rng():
    return random.Random(0xFEED)
