"""Pure functions on games: synchronicity, game polynomials, gaps and values."""

import numpy as np
from loguru import logger

from src.config import get_settings
from src.core.exceptions import CompatibilityError, ContractViolation, DimensionMismatch, InvariantViolation
from src.games.schemas import (
    Correlation,
    Game,
    HolderReport,
    PolynomialGapReport,
    SynchronicityReport,
    SyncValueReport,
    ValueTransferReport,
)
from src.linalg.calculator import degeneracy_tol, herm_eigvals, opnorm
from src.linalg.schemas import CMatrix
from src.strategies.schemas import BipartiteStrategy

SYMMETRY_TOL = 1e-12


def analyze_synchronicity(G: Game) -> SynchronicityReport:
    """Report symmetry, synchronicity and the beta of a game.

    Parameters
    ----------
    G : Game
        Any valid game

    Returns
    -------
    SynchronicityReport
        beta = min_x nu(x, x) / nu_A(x) over questions with nu_A(x) > 0,
        clamped to [0, 1], and 0 whenever the game is not synchronous
    """
    violations: list[str] = []
    nu, D = G.nu, G.predicate

    nu_symmetric = bool(np.abs(nu - nu.T).max() <= SYMMETRY_TOL)
    if not nu_symmetric:
        violations.append("nu(x,y) != nu(y,x)")
    predicate_symmetric = bool(np.array_equal(D, D.transpose(1, 0, 3, 2)))
    if not predicate_symmetric:
        violations.append("D(a,b|x,y) != D(b,a|y,x)")

    diagonal = np.diagonal(nu)
    diagonal_positive = bool(np.all(diagonal > 0))
    if not diagonal_positive:
        zero = [G.questions[i] for i in np.flatnonzero(diagonal <= 0)]
        violations.append(f"nu(x,x) = 0 for x in {zero}")

    idx = np.arange(G.n_questions)
    same_question = D[idx, idx]
    off_diagonal = ~np.eye(G.max_answers, dtype=bool)
    diagonal_consistent = not bool(np.any(same_question[:, off_diagonal]))
    if not diagonal_consistent:
        violations.append("D(a,a'|x,x) != 0 for some a != a'")

    is_symmetric = nu_symmetric and predicate_symmetric
    is_synchronous = is_symmetric and diagonal_positive and diagonal_consistent

    beta = 0.0
    if is_synchronous:
        nu_a = G.nu_a
        support = nu_a > 0
        beta = float(np.clip(np.min(diagonal[support] / nu_a[support]), 0.0, 1.0))

    return SynchronicityReport(
        nu_symmetric=nu_symmetric,
        predicate_symmetric=predicate_symmetric,
        is_symmetric=is_symmetric,
        diagonal_positive=diagonal_positive,
        diagonal_consistent=diagonal_consistent,
        is_synchronous=is_synchronous,
        beta=beta,
        violations=violations,
    )


def beta_synchronise(G: Game, beta: float) -> Game:
    """The beta-synchronised version of a synchronous game.

    nu'(x, y) = beta nu_A(x) delta_xy + (1 - beta) nu(x, y); questions,
    answers and predicate are unchanged.

    Raises
    ------
    ContractViolation
        If beta is outside (0, 1) or G is not synchronous
    """
    if not 0.0 < beta < 1.0:
        raise ContractViolation(f"beta must lie in the open interval (0, 1), got {beta}")
    report = analyze_synchronicity(G)
    if not report.is_synchronous:
        raise ContractViolation(f"Game is not synchronous: {'; '.join(report.violations)}")
    nu = beta * np.diag(G.nu_a) + (1.0 - beta) * G.nu
    return G.model_copy(update={"nu": nu / nu.sum()})


def check_compatible(G: Game, S: BipartiteStrategy) -> None:
    """Raise CompatibilityError unless S answers G's questions with G's answer sets."""
    X, n = G.n_questions, G.max_answers
    for name, family in (("A", S.A), ("B", S.B)):
        if family.shape[:2] != (X, n):
            raise CompatibilityError(
                f"Strategy family {name} has shape {family.shape[:2]}, game needs ({X}, {n})"
            )
        if np.any(family[~G.answer_mask]):
            raise CompatibilityError(f"Strategy family {name} uses answers the game does not offer")


def weighted_predicate(G: Game) -> np.ndarray:
    """K[x, y, a, b] = nu(x, y) D(a, b | x, y)."""
    return G.nu[:, :, None, None] * G.predicate


def game_polynomial(G: Game, S: BipartiteStrategy) -> CMatrix:
    """T = E_(x,y)~nu sum_(a,b) D(a, b | x, y) A^x_a (x) B^y_b.

    Returns
    -------
    CMatrix
        Hermitian (dim_a dim_b) x (dim_a dim_b) matrix with 0 <= T <= Id, so
        that omega(G; S) = <psi|T|psi>

    Raises
    ------
    CompatibilityError
        If the strategy does not fit the game's question and answer sets
    """
    check_compatible(G, S)
    K = weighted_predicate(G)
    # Bob's side summed first: Bsum[x, a] = sum_(y,b) K[x,y,a,b] B^y_b
    b_sum = np.einsum("xyab,ybkl->xakl", K, S.B, optimize=True)
    T = np.einsum("xaij,xakl->ikjl", S.A, b_sum, optimize=True)
    d = S.dim_a * S.dim_b
    T = T.reshape(d, d)
    return (T + T.conj().T) / 2


def top_eigenvalues(T, count: int = 2) -> np.ndarray:
    """The `count` largest eigenvalues of a Hermitian matrix, with multiplicity."""
    return herm_eigvals(T)[:count]


def spectral_gap(T) -> float:
    """Largest minus second-largest eigenvalue, counted with multiplicity.

    Returns 0 when the top eigenvalue is degenerate within
    1e-9 * max(1, ||T||) or when T is 1 x 1.
    """
    w = herm_eigvals(T)
    if w.size < 2:
        return 0.0
    gap = float(w[0] - w[1])
    if gap <= degeneracy_tol(opnorm(T)):
        return 0.0
    return gap


def polynomial_gap(G: Game, S: BipartiteStrategy, threshold: float | None = None) -> PolynomialGapReport:
    """Top two eigenvalues and spectral gap of T, and omega = <psi|T|psi>.

    The strategy counts as perfect when omega >= 1 - threshold, the
    threshold defaulting to PERFECT_THRESHOLD.
    """
    threshold = get_settings().PERFECT_THRESHOLD if threshold is None else threshold
    if threshold < 0:
        raise ContractViolation(f"Perfect threshold must be non-negative, got {threshold}")
    T = game_polynomial(G, S)
    omega = float(np.vdot(S.psi, T @ S.psi).real)
    return PolynomialGapReport(
        top=top_eigenvalues(T, 2).tolist(),
        gap=spectral_gap(T),
        omega=omega,
        threshold=threshold,
        perfect=omega >= 1.0 - threshold,
    )


def check_correlation_shape(G: Game, C: Correlation) -> np.ndarray:
    C = np.asarray(C, dtype=np.float64)
    X, n = G.n_questions, G.max_answers
    if C.shape != (X, X, n, n):
        raise DimensionMismatch(f"Correlation has shape {C.shape}, game needs {(X, X, n, n)}")
    return C


def winning_probability(G: Game, C: Correlation) -> float:
    """omega(G; C) = E_(x,y)~nu sum_(a,b) D(a, b | x, y) C[x, y, a, b]."""
    C = check_correlation_shape(G, C)
    return float(np.sum(weighted_predicate(G) * C))


def correlation_dsync(C: Correlation, nu_a) -> float:
    """Asynchronicity 1 - E_(x~nu_A) sum_a C[x, x, a, a] of a correlation."""
    C = np.asarray(C, dtype=np.float64)
    nu_a = np.asarray(nu_a, dtype=np.float64)
    idx = np.arange(C.shape[0])
    agree = np.einsum("xaa->x", C[idx, idx])
    return float(1.0 - np.dot(nu_a, agree))


def diagonal_value(G: Game, C: Correlation) -> float:
    """E_(x~nu_A) sum_(a,b) D(a, b | x, x) C[x, x, a, b]."""
    C = check_correlation_shape(G, C)
    idx = np.arange(G.n_questions)
    per_question = np.sum(G.predicate[idx, idx] * C[idx, idx], axis=(1, 2))
    return float(np.dot(G.nu_a, per_question))


def dsync_value_bound(
    G: Game, C: Correlation, slack: float = 1e-9, strict: bool = False
) -> SyncValueReport:
    """Check omega(G; C) <= 1 - beta dsync(C; nu_A) for a beta-synchronous game.

    Raises
    ------
    InvariantViolation
        In strict mode, when the inequality fails beyond slack
    """
    beta = analyze_synchronicity(G).beta
    omega = winning_probability(G, C)
    dsync = correlation_dsync(C, G.nu_a)
    bound = 1.0 - beta * dsync
    holds = omega <= bound + slack
    if not holds:
        logger.warning("Synchronous value bound violated", omega=omega, bound=bound, beta=beta)
        if strict:
            raise InvariantViolation(f"omega {omega} exceeds 1 - beta dsync = {bound}")
    return SyncValueReport(omega=omega, dsync=dsync, beta=beta, bound=bound, holds=holds)


def value_transfer_bound(
    G: Game,
    beta: float,
    C_ref: Correlation,
    C: Correlation,
    slack: float = 1e-9,
    strict: bool = False,
) -> ValueTransferReport:
    """Transfer a winning-probability gap from the beta-synchronised game to G.

    The reference correlation must win every same-question round
    (diagonal value 1), as an optimal synchronous strategy does; then
    omega(G; C_ref) - omega(G; C) <= |omega(G'; C_ref) - omega(G'; C)| / (1 - beta).

    Raises
    ------
    ContractViolation
        If the reference correlation loses same-question rounds
    InvariantViolation
        In strict mode, when the transfer inequality fails beyond slack
    """
    if diagonal_value(G, C_ref) < 1.0 - 1e-9:
        raise ContractViolation("Reference correlation must win every same-question round")
    G_sync = beta_synchronise(G, beta)
    gap_synchronised = abs(winning_probability(G_sync, C_ref) - winning_probability(G_sync, C))
    gap_original = winning_probability(G, C_ref) - winning_probability(G, C)
    bound = gap_synchronised / (1.0 - beta)
    holds = gap_original <= bound + slack
    if not holds:
        logger.warning(
            "Value transfer bound violated", gap=gap_original, bound=bound, beta=beta
        )
        if strict:
            raise InvariantViolation(f"Gap {gap_original} exceeds {bound}")
    return ValueTransferReport(
        beta=beta,
        gap_synchronised=gap_synchronised,
        gap_original=gap_original,
        bound=bound,
        holds=holds,
    )


def correlation_distance(G: Game, C1: Correlation, C2: Correlation) -> float:
    """E_(x,y)~nu sum_(a,b) |C1 - C2|."""
    C1 = check_correlation_shape(G, C1)
    C2 = check_correlation_shape(G, C2)
    return float(np.sum(G.nu[:, :, None, None] * np.abs(C1 - C2)))


def holder_bound(G: Game, C1: Correlation, C2: Correlation, slack: float = 1e-9) -> HolderReport:
    """Winning probabilities differ by at most the nu-weighted L1 correlation distance."""
    gap = abs(winning_probability(G, C1) - winning_probability(G, C2))
    distance = correlation_distance(G, C1, C2)
    holds = gap <= distance + slack
    if not holds:
        logger.warning("Hoelder value bound violated", gap=gap, distance=distance)
    return HolderReport(omega_gap=gap, correlation_distance=distance, holds=holds)
