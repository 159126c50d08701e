"""Seeded random instance generators.

All randomness flows from an explicit integer seed through numpy's
counter-based Philox bit generator. Trial streams are derived with
``SeedSequence(entropy=seed, spawn_key=...)`` so a trial's draws depend only on
(seed, suite, trial) and never on execution order.
"""

from typing import Literal

import numpy as np
from scipy import linalg as sla

from src.config import get_settings
from src.core.exceptions import BudgetExceeded, ContractViolation
from src.linalg.calculator import dagger, hermitize, psd_inv_sqrt
from src.linalg.schemas import CMatrix

InstanceKind = Literal["haar_unitary", "haar_state", "povm", "perturbed_pvm"]


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Philox generator for a seed and an optional spawn key path."""
    if seed < 0:
        raise ContractViolation(f"Seed must be non-negative, got {seed}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(spawn_key))
    return np.random.Generator(np.random.Philox(sequence))


def check_dims(*dims: int) -> None:
    """Reject non-positive dimensions and totals above MAX_TOTAL_DIM."""
    for d in dims:
        if int(d) != d or d < 1:
            raise ContractViolation(f"Dimensions must be positive integers, got {d}")
    cap = get_settings().MAX_TOTAL_DIM
    if dims and max(dims) > cap:
        raise BudgetExceeded(f"Dimension {max(dims)} exceeds the budget of {cap}")


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> CMatrix:
    """Matrix of i.i.d. standard complex Gaussians."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(rng: np.random.Generator, d: int) -> CMatrix:
    """Haar-random unitary: QR of a Ginibre matrix with phases fixed by R's diagonal."""
    check_dims(d)
    Q, R = sla.qr(ginibre(rng, d, d))
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def haar_state(rng: np.random.Generator, d: int) -> CMatrix:
    check_dims(d)
    v = ginibre(rng, d, 1).ravel()
    return v / np.linalg.norm(v)


def random_isometry(rng: np.random.Generator, d_out: int, d_in: int) -> CMatrix:
    """Haar-random isometry C^d_in -> C^d_out (d_in <= d_out)."""
    check_dims(d_out, d_in)
    if d_in > d_out:
        raise ContractViolation(f"No isometry from dimension {d_in} into {d_out}")
    return haar_unitary(rng, d_out)[:, :d_in]


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> CMatrix:
    check_dims(d)
    G = ginibre(rng, d, d)
    return scale * (G + dagger(G)) / 2


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> CMatrix:
    """Random density matrix G G* / Tr(G G*) with G of shape d x rank."""
    check_dims(d)
    rank = d if rank is None else rank
    check_dims(rank)
    G = ginibre(rng, d, rank)
    rho = G @ dagger(G)
    return hermitize(rho / np.trace(rho).real)


def random_projection(rng: np.random.Generator, d: int, rank: int) -> CMatrix:
    if not 0 <= rank <= d:
        raise ContractViolation(f"Projection rank {rank} outside [0, {d}]")
    V = haar_unitary(rng, d)[:, :rank]
    return V @ dagger(V)


def random_povm(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    """Random n-outcome POVM on C^d, returned as an (n, d, d) array.

    Each effect is S^(-1/2) G_a S^(-1/2) with G_a = X_a X_a* of random rank
    and S = sum_a G_a. A single outcome returns exactly the identity.
    """
    check_dims(d, n)
    if n == 1:
        return np.eye(d, dtype=np.complex128)[None]
    G = np.empty((n, d, d), dtype=np.complex128)
    for a in range(n):
        X = ginibre(rng, d, int(rng.integers(1, d + 1)))
        G[a] = X @ dagger(X)
    root = psd_inv_sqrt(G.sum(axis=0))
    family = root @ G @ root
    return (family + dagger(family)) / 2


def random_pvm(rng: np.random.Generator, d: int, n: int) -> np.ndarray:
    """Random n-outcome PVM on C^d: a Haar basis with random outcome labels."""
    check_dims(d, n)
    U = haar_unitary(rng, d)
    labels = rng.integers(n, size=d)
    family = np.zeros((n, d, d), dtype=np.complex128)
    for a in range(n):
        cols = U[:, labels == a]
        family[a] = cols @ dagger(cols)
    return family


def perturbed_pvm(rng: np.random.Generator, d: int, n: int, eta: float) -> np.ndarray:
    """POVM (1 - eta) P + eta Q with P a random PVM and Q a random POVM.

    Each effect lies within operator-norm distance eta of the PVM effect.
    """
    if not 0.0 <= eta <= 1.0:
        raise ContractViolation(f"Perturbation eta must lie in [0, 1], got {eta}")
    P = random_pvm(rng, d, n)
    if eta == 0.0:
        return P
    return (1.0 - eta) * P + eta * random_povm(rng, d, n)


def random_instances(seed: int, kind: InstanceKind, *dims: int, eta: float = 0.0):
    """Sample one object of the requested kind from an explicit seed.

    Parameters
    ----------
    seed : int
        Non-negative seed; identical seeds reproduce identical objects
    kind : {"haar_unitary", "haar_state", "povm", "perturbed_pvm"}
        What to sample
    *dims : int
        (d,) for unitaries and states, (d, n) for measurement families
    eta : float
        Perturbation strength for ``perturbed_pvm``

    Raises
    ------
    ContractViolation
        On unknown kinds, wrong arity or invalid dimensions
    """
    rng = make_rng(seed)
    if kind in ("haar_unitary", "haar_state"):
        if len(dims) != 1:
            raise ContractViolation(f"{kind} takes one dimension, got {dims}")
        return haar_unitary(rng, dims[0]) if kind == "haar_unitary" else haar_state(rng, dims[0])
    if kind in ("povm", "perturbed_pvm"):
        if len(dims) != 2:
            raise ContractViolation(f"{kind} takes (d, outcomes), got {dims}")
        if kind == "povm":
            return random_povm(rng, *dims)
        return perturbed_pvm(rng, *dims, eta=eta)
    raise ContractViolation(f"Unknown instance kind: {kind!r}")
