"""Seeded codes for the qubit-test suites."""

import numpy as np

from src.core.exceptions import ContractViolation
from src.qldt.schemas import CodeF2


def random_code(rng: np.random.Generator, max_k: int, max_n: int) -> CodeF2:
    """Full-rank [n, k] code: [Id_k | R] with R random and the columns shuffled.

    k is drawn from 1..max_k and n from k..max_n.
    """
    if max_k < 1 or max_n < max_k:
        raise ContractViolation(f"Need 1 <= max_k <= max_n, got {max_k}, {max_n}")
    k = int(rng.integers(1, max_k + 1))
    n = int(rng.integers(k, max_n + 1))
    redundancy = rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)
    generator = np.hstack([np.eye(k, dtype=np.uint8), redundancy])
    return CodeF2(generator=generator[:, rng.permutation(n)])
