"""Seeded strategy constructors for suites and tests."""

import numpy as np
from scipy import linalg as sla

from src.linalg.calculator import dagger
from src.linalg.sampling import haar_state, haar_unitary, random_hermitian, random_povm, random_pvm
from src.strategies.calculator import me_strategy, symmetric_strategy
from src.strategies.schemas import BipartiteStrategy


def povm_family(rng: np.random.Generator, n_questions: int, n_answers: int, d: int) -> np.ndarray:
    return np.stack([random_povm(rng, d, n_answers) for _ in range(n_questions)])


def pvm_family(rng: np.random.Generator, n_questions: int, n_answers: int, d: int) -> np.ndarray:
    return np.stack([random_pvm(rng, d, n_answers) for _ in range(n_questions)])


def random_strategy(
    rng: np.random.Generator, n_questions: int, n_answers: int, dim_a: int, dim_b: int
) -> BipartiteStrategy:
    """Haar-random state with independent random POVMs on each side."""
    return BipartiteStrategy(
        dim_a=dim_a,
        dim_b=dim_b,
        psi=haar_state(rng, dim_a * dim_b),
        A=povm_family(rng, n_questions, n_answers, dim_a),
        B=povm_family(rng, n_questions, n_answers, dim_b),
    )


def random_pme_strategy(
    rng: np.random.Generator, n_questions: int, n_answers: int, d: int
) -> BipartiteStrategy:
    return me_strategy(pvm_family(rng, n_questions, n_answers, d))


def random_me_strategy(
    rng: np.random.Generator, n_questions: int, n_answers: int, d: int
) -> BipartiteStrategy:
    return me_strategy(povm_family(rng, n_questions, n_answers, d))


def random_level_sizes(rng: np.random.Generator, d: int, max_levels: int = 3) -> list[int]:
    """Random composition of d into at most max_levels positive parts."""
    levels = int(rng.integers(1, min(max_levels, d) + 1))
    cuts = np.sort(rng.choice(np.arange(1, d), size=levels - 1, replace=False)) if levels > 1 else []
    bounds = [0, *cuts, d]
    return [int(b - a) for a, b in zip(bounds[:-1], bounds[1:])]


def near_synchronous_strategy(
    rng: np.random.Generator, n_questions: int, n_answers: int, d: int, eta: float
) -> BipartiteStrategy:
    """Projective symmetric strategy whose asynchronicity is O(eta^2).

    The state has a few Schmidt levels; the PVMs start block diagonal across
    those levels (exactly synchronous) and are then conjugated by
    exp(i eta H) for a random Hermitian H with ||H|| of order one.
    """
    sizes = random_level_sizes(rng, d)
    values = np.sort(rng.uniform(0.2, 1.0, size=len(sizes)))[::-1]
    coefficients = np.repeat(values, sizes)
    coefficients /= np.linalg.norm(coefficients)
    U = haar_unitary(rng, d)

    A = np.zeros((n_questions, n_answers, d, d), dtype=np.complex128)
    offsets = np.cumsum([0, *sizes])
    for x in range(n_questions):
        for start, stop in zip(offsets[:-1], offsets[1:]):
            A[x, :, start:stop, start:stop] = random_pvm(rng, int(stop - start), n_answers)
    H = random_hermitian(rng, d)
    H /= max(np.linalg.norm(H, 2), 1e-300)
    V = U @ sla.expm(1j * eta * H)
    A = V @ A @ dagger(V)
    A = (A + dagger(A)) / 2
    return symmetric_strategy(coefficients, A, basis=U)
