"""Projective rounding of POVMs and the measurement-replacement estimate.

Squared distances between measurement operators are weighted either by the
normalised trace tau = tr / d (maximally entangled picture) or by a density
matrix rho, as sum_a Tr((A_a - P_a)^2 rho).
"""

import numpy as np
from loguru import logger

from src.core.exceptions import ContractViolation, DimensionMismatch, InvariantViolation
from src.linalg.calculator import (
    dagger,
    family_hermitian_residual,
    family_min_eigenvalue,
    herm_eig,
    herm_eigvals,
    opnorm,
    pvm_residual,
    reduced_densities,
)
from src.linalg.sampling import make_rng
from src.rounding.schemas import (
    ExponentFit,
    ProjectivizeReport,
    QuestionRounding,
    ReplacementReport,
    RoundingReport,
)
from src.strategies.calculator import correlation, dsync
from src.strategies.schemas import BipartiteStrategy

POVM_TOL = 1e-10
PAIR_BOUND = 4.0
ROUNDING_FACTOR = 9.0


def _density(weight, d: int) -> np.ndarray:
    if weight is None:
        return np.eye(d, dtype=np.complex128) / d
    rho = np.asarray(weight, dtype=np.complex128)
    if rho.shape != (d, d):
        raise DimensionMismatch(f"Weight must be a {d} x {d} density matrix, got shape {rho.shape}")
    return rho


def weighted_square(D: np.ndarray, rho: np.ndarray) -> float:
    """sum_a Tr(D_a^2 rho) over a stack of Hermitian differences."""
    return float(np.einsum("aij,jk,aki->", D, D, rho, optimize=True).real) if D.size else 0.0


def _check_incomplete_povm(family: np.ndarray, name: str, complete: bool) -> None:
    if family.ndim != 3 or family.shape[1] != family.shape[2]:
        raise DimensionMismatch(f"{name} must have shape (answers, d, d), got {family.shape}")
    if family_hermitian_residual(family) > POVM_TOL or family_min_eigenvalue(family) < -POVM_TOL:
        raise ContractViolation(f"{name} contains operators that are not positive")
    total = herm_eigvals(family.sum(axis=0))
    if total[0] > 1.0 + POVM_TOL:
        raise ContractViolation(f"{name} operators sum above the identity")
    if complete and total[-1] < 1.0 - POVM_TOL:
        raise ContractViolation(f"{name} operators do not sum to the identity")


def nearest_pvm(
    A,
    weight=None,
    rng: np.random.Generator | None = None,
    slack: float = 1e-9,
) -> tuple[np.ndarray, QuestionRounding]:
    """Round one POVM to a nearby PVM.

    The mixture M = sum_a w_a A_a with distinct generic weights is
    diagonalised and each eigenvector goes to the outcome a maximising
    <v|A_a|v>; the PVM projects onto the eigenvectors of each class. A PVM
    input is returned unchanged up to rounding error.

    Parameters
    ----------
    A : array_like
        POVM of shape (n, d, d)
    weight : array_like, optional
        Density matrix for the defect; the normalised trace when omitted
    rng : Generator, optional
        Source of the mixture weights; a fixed seed when omitted

    Returns
    -------
    tuple[np.ndarray, QuestionRounding]
        The (n, d, d) PVM and its defect against 9 delta

    Raises
    ------
    ContractViolation
        If A is not a POVM
    """
    A = np.asarray(A, dtype=np.complex128)
    _check_incomplete_povm(A, "A", complete=True)
    n, d, _ = A.shape
    rho = _density(weight, d)
    rng = rng if rng is not None else make_rng(0)

    w = rng.permutation(n) + rng.uniform(0.1, 0.9, size=n)
    V = herm_eig(np.einsum("a,aij->ij", w, A)).eigenvectors
    scores = np.einsum("ij,aik,kj->aj", V.conj(), A, V, optimize=True).real
    labels = np.argmax(scores, axis=0)

    P = np.zeros_like(A)
    for a in range(n):
        cols = V[:, labels == a]
        P[a] = cols @ dagger(cols)

    defect = weighted_square(A - P, rho)
    delta = 1.0 - weighted_square(A, rho)
    bound = ROUNDING_FACTOR * delta
    holds = defect <= bound + slack
    if not holds:
        logger.warning("Rounding defect above 9 delta", defect=defect, bound=bound)
    return P, QuestionRounding(defect=defect, delta=delta, bound=bound, holds=holds)


def round_family(
    family,
    nu_a,
    weight=None,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, RoundingReport]:
    """Apply nearest_pvm to every question of an (X, n, d, d) family."""
    family = np.asarray(family, dtype=np.complex128)
    nu_a = np.asarray(nu_a, dtype=np.float64)
    if nu_a.shape != (family.shape[0],):
        raise DimensionMismatch(f"nu_A has shape {nu_a.shape}, family has {family.shape[0]} questions")
    rng = rng if rng is not None else make_rng(0)

    rounded = np.zeros_like(family)
    entries = []
    for x, povm in enumerate(family):
        rounded[x], entry = nearest_pvm(povm, weight, rng)
        entries.append(entry)
    return rounded, RoundingReport(
        questions=entries,
        gamma=float(nu_a @ [e.defect for e in entries]),
        delta=float(nu_a @ [e.delta for e in entries]),
        pvm_residual=pvm_residual(rounded),
    )


def family_defect(family, replacement, rho, nu_a) -> float:
    """E_(x~nu_A) sum_a Tr((A^x_a - Ahat^x_a)^2 rho)."""
    diff = np.asarray(family, dtype=np.complex128) - np.asarray(replacement, dtype=np.complex128)
    per_question = [weighted_square(D, rho) for D in diff]
    return float(np.asarray(nu_a, dtype=np.float64) @ per_question)


def _joint_nu(nu, X: int) -> np.ndarray:
    nu = np.asarray(nu, dtype=np.float64)
    if nu.shape != (X, X):
        raise DimensionMismatch(f"nu must have shape ({X}, {X}), got {nu.shape}")
    return nu


def replacement_bound(
    S: BipartiteStrategy,
    nu,
    Ahat=None,
    Bhat=None,
    slack: float = 1e-9,
    strict: bool = False,
) -> ReplacementReport:
    """Check E_nu sum_(a,b) |C - Chat| <= 12 delta + 4 sqrt(gamma_A) + 4 sqrt(gamma_B).

    Chat is the correlation of the same state with Ahat and Bhat, which
    default to the rounded families of S.

    Raises
    ------
    InvariantViolation
        In strict mode, when the shift exceeds the bound beyond slack
    """
    nu = _joint_nu(nu, S.n_questions)
    nu_a = nu.sum(axis=1)
    rho_a, rho_b = reduced_densities(S.psi, S.dim_a, S.dim_b)
    if Ahat is None:
        Ahat, _ = round_family(S.A, nu_a, rho_a)
    if Bhat is None:
        Bhat, _ = round_family(S.B, nu_a, rho_b)
    replaced = BipartiteStrategy(
        dim_a=S.dim_a, dim_b=S.dim_b, psi=S.psi, A=Ahat, B=Bhat, basis=S.basis
    )

    shift = float(np.sum(nu[:, :, None, None] * np.abs(correlation(S) - correlation(replaced))))
    delta = dsync(S, nu_a)
    gamma_a = family_defect(S.A, replaced.A, rho_a, nu_a)
    gamma_b = family_defect(S.B, replaced.B, rho_b, nu_a)
    bound = 12.0 * delta + 4.0 * np.sqrt(max(gamma_a, 0.0)) + 4.0 * np.sqrt(max(gamma_b, 0.0))
    holds = shift <= bound + slack
    if not holds:
        logger.warning("Replacement bound violated", shift=shift, bound=bound, dsync=delta)
        if strict:
            raise InvariantViolation(f"Correlation shift {shift} exceeds {bound}")
    return ReplacementReport(
        shift=shift, dsync=delta, gamma_a=gamma_a, gamma_b=gamma_b, bound=float(bound), holds=holds
    )


def projectivize_strategy(
    S: BipartiteStrategy, nu, rng: np.random.Generator | None = None
) -> tuple[BipartiteStrategy, ProjectivizeReport]:
    """Replace both measurement families by nearby PVMs on the same state.

    Alice's defects are weighted by rho_A and Bob's by rho_B; the report
    carries both sides and the resulting correlation shift.
    """
    nu = _joint_nu(nu, S.n_questions)
    nu_a = nu.sum(axis=1)
    rng = rng if rng is not None else make_rng(0)
    rho_a, rho_b = reduced_densities(S.psi, S.dim_a, S.dim_b)
    Ahat, alice = round_family(S.A, nu_a, rho_a, rng)
    Bhat, bob = round_family(S.B, nu_a, rho_b, rng)
    rounded = BipartiteStrategy(
        dim_a=S.dim_a, dim_b=S.dim_b, psi=S.psi, A=Ahat, B=Bhat, basis=S.basis
    )
    report = ProjectivizeReport(
        dsync=dsync(S, nu_a),
        dsync_rounded=dsync(rounded, nu_a),
        alice=alice,
        bob=bob,
        replacement=replacement_bound(S, nu, Ahat, Bhat),
    )
    logger.debug(
        "Projectivized strategy",
        gamma_a=alice.gamma,
        gamma_b=bob.gamma,
        shift=report.replacement.shift,
    )
    return rounded, report


def povm_pair_opnorm(A, Ahat) -> float:
    """||sum_i (A_i - Ahat_i)^2|| for two incomplete POVMs; at most 4.

    Raises
    ------
    ContractViolation
        If either family has non-positive operators or sums above Id
    DimensionMismatch
        If the families differ in shape
    """
    A = np.asarray(A, dtype=np.complex128)
    Ahat = np.asarray(Ahat, dtype=np.complex128)
    if A.shape != Ahat.shape:
        raise DimensionMismatch(f"Families have shapes {A.shape} and {Ahat.shape}")
    _check_incomplete_povm(A, "A", complete=False)
    _check_incomplete_povm(Ahat, "Ahat", complete=False)
    D = A - Ahat
    value = opnorm(np.einsum("aij,ajk->ik", D, D))
    if value > PAIR_BOUND + 1e-9:
        logger.warning("POVM pair norm above 4", value=value)
    return value


def exponent_curve(deltas, values) -> ExponentFit:
    """Fit log(value) against log(delta) over the strictly positive pairs.

    Raises
    ------
    ContractViolation
        If fewer than two usable points remain
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if deltas.shape != values.shape:
        raise DimensionMismatch(f"Got {deltas.size} deltas and {values.size} values")
    keep = (deltas > 0) & (values > 0) & np.isfinite(deltas) & np.isfinite(values)
    if np.count_nonzero(keep) < 2 or np.unique(deltas[keep]).size < 2:
        raise ContractViolation("Need at least two distinct positive points to fit an exponent")
    slope, intercept = np.polyfit(np.log(deltas[keep]), np.log(values[keep]), 1)
    return ExponentFit(slope=float(slope), intercept=float(intercept), points=int(np.count_nonzero(keep)))
