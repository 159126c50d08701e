"""Correlations, asynchronicity and conversions between strategy pictures."""

import numpy as np
from loguru import logger
from scipy import linalg as sla

from src.core.exceptions import ContractViolation, DimensionMismatch, InvariantViolation
from src.games.schemas import Correlation
from src.linalg.calculator import (
    dagger,
    opnorm,
    psd_sqrt,
    pvm_residual,
    takagi,
    transpose_in_basis,
)
from src.linalg.schemas import CMatrix
from src.strategies.schemas import (
    BipartiteStrategy,
    SymmetricDsyncReport,
    TracialAlgebra,
    TracialStrategy,
)

SYMMETRY_TOL = 1e-9
ANDO_TOL = 1e-9


def correlation(S: BipartiteStrategy) -> Correlation:
    """C[x, y, a, b] = <psi| A^x_a (x) B^y_b |psi>."""
    Psi = S.state_matrix
    C = np.einsum("ik,xaij,jl,ybkl->xyab", Psi.conj(), S.A, Psi, S.B, optimize=True)
    return C.real.copy()


def tracial_correlation(S: TracialStrategy) -> Correlation:
    """C[x, y, a, b] = tau(A^x_a A^y_b)."""
    C = np.einsum("i,xaij,ybji->xyab", S.algebra.density, S.A, S.A, optimize=True)
    return C.real.copy()


def dsync(S: BipartiteStrategy | TracialStrategy, nu_a) -> float:
    """Asynchronicity 1 - E_(x~nu_A) sum_a C[x, x, a, a].

    For tracial strategies this is 1 - E_x sum_a tau((A^x_a)^2).

    Raises
    ------
    DimensionMismatch
        If nu_a does not match the question count, or the players' question
        and answer sets differ
    """
    nu_a = np.asarray(nu_a, dtype=np.float64)
    if isinstance(S, TracialStrategy):
        if nu_a.shape != (S.n_questions,):
            raise DimensionMismatch(f"nu_A has shape {nu_a.shape}, strategy has {S.n_questions} questions")
        agree = np.einsum("i,xaij,xaji->x", S.algebra.density, S.A, S.A, optimize=True).real
        return float(1.0 - nu_a @ agree)

    if S.A.shape[:2] != S.B.shape[:2]:
        raise DimensionMismatch("dsync needs both players to share questions and answers")
    if nu_a.shape != (S.n_questions,):
        raise DimensionMismatch(f"nu_A has shape {nu_a.shape}, strategy has {S.n_questions} questions")
    Psi = S.state_matrix
    agree = np.einsum("ik,xaij,jl,xakl->x", Psi.conj(), S.A, Psi, S.B, optimize=True).real
    return float(1.0 - nu_a @ agree)


def symmetric_frame(S: BipartiteStrategy) -> CMatrix:
    """Frame U with psi = sum_i c_i |u_i>|u_i>: the recorded basis, else Takagi.

    Raises
    ------
    ContractViolation
        If the state matrix is not symmetric
    """
    if S.basis is not None:
        return S.basis
    Psi = S.state_matrix
    if S.dim_a != S.dim_b or opnorm(Psi - Psi.T) > SYMMETRY_TOL:
        raise ContractViolation("Strategy state is not symmetric")
    return takagi(Psi)[1]


def is_symmetric(S: BipartiteStrategy) -> bool:
    """psi symmetric and Bob's operators the transposes of Alice's in its frame."""
    try:
        U = symmetric_frame(S)
    except ContractViolation:
        return False
    if S.A.shape != S.B.shape:
        return False
    return float(np.abs(S.B - transpose_in_basis(S.A, U)).max()) <= SYMMETRY_TOL


def symmetric_strategy(coefficients, A, basis=None) -> BipartiteStrategy:
    """Symmetric strategy (sum_i c_i |u_i>|u_i>, A) with Bob using A^T in that frame.

    Parameters
    ----------
    coefficients : array_like
        Schmidt coefficients; padded with zeros up to the dimension
    A : array_like
        Alice's family, shape (X, n, d, d)
    basis : array_like | None
        Unitary whose columns are the u_i; identity when None
    """
    A = np.asarray(A, dtype=np.complex128)
    d = A.shape[-1]
    U = np.eye(d, dtype=np.complex128) if basis is None else np.asarray(basis, dtype=np.complex128)
    c = np.zeros(d)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    c[: coefficients.size] = coefficients
    Psi = (U * c) @ U.T
    return BipartiteStrategy(
        dim_a=d, dim_b=d, psi=Psi.ravel(), A=A, B=transpose_in_basis(A, U), basis=U
    )


def me_strategy(A) -> BipartiteStrategy:
    """ME strategy on the canonical state sum_i |ii> / sqrt(d)."""
    A = np.asarray(A, dtype=np.complex128)
    d = A.shape[-1]
    return symmetric_strategy(np.full(d, 1.0 / np.sqrt(d)), A)


def associated_symmetric(S: BipartiteStrategy) -> tuple[BipartiteStrategy, BipartiteStrategy]:
    """The associated symmetric strategies (S_A, S_B).

    With psi = sum_i c_i |alpha_i>|beta_i>, S_A runs Alice's family on
    sum_i c_i |alpha_i>|alpha_i> and S_B runs Bob's family on
    sum_i c_i |beta_i>|beta_i>; each records its frame.
    """
    W, s, Vh = sla.svd(S.state_matrix, full_matrices=True)
    S_A = symmetric_strategy(s, S.A, basis=W)
    S_B = symmetric_strategy(s, S.B, basis=Vh.T)
    return S_A, S_B


def ando_pairing(S: BipartiteStrategy, op1, op2) -> complex:
    """Tr(op1 rho^(1/2) op2^T rho^(1/2)) for a symmetric state, transpose in its frame.

    The value is cross-checked against <psi| op1 (x) op2 |psi>.

    Raises
    ------
    ContractViolation
        If the state is not symmetric or the operators do not act on H
    InvariantViolation
        If the two evaluations disagree beyond 1e-9
    """
    U = symmetric_frame(S)
    op1 = np.asarray(op1, dtype=np.complex128)
    op2 = np.asarray(op2, dtype=np.complex128)
    d = S.dim_a
    if op1.shape != (d, d) or op2.shape != (d, d):
        raise ContractViolation(f"Operators must be {d} x {d}")
    Psi = S.state_matrix
    root = psd_sqrt(Psi @ dagger(Psi))
    value = complex(np.trace(op1 @ root @ transpose_in_basis(op2, U) @ root))
    direct = complex(np.vdot(S.psi, np.kron(op1, op2) @ S.psi))
    if abs(value - direct) > ANDO_TOL * max(1.0, opnorm(op1) * opnorm(op2)):
        raise InvariantViolation(f"Ando pairing {value} disagrees with direct value {direct}")
    return value


def gns_realize(S: TracialStrategy) -> BipartiteStrategy:
    """GNS realisation: psi = vec(Omega^(1/2)), B = A^T in the standard basis.

    Satisfies tau(X) = <psi| X (x) Id |psi> = <psi| Id (x) X^T |psi>.
    """
    root = np.sqrt(S.algebra.density)
    d = S.algebra.dim
    return BipartiteStrategy(
        dim_a=d,
        dim_b=d,
        psi=np.diag(root).astype(np.complex128).ravel(),
        A=S.A,
        B=np.swapaxes(S.A, -1, -2).copy(),
        basis=np.eye(d, dtype=np.complex128),
    )


def is_maximally_entangled(S: BipartiteStrategy, tol: float = 1e-10) -> bool:
    if S.dim_a != S.dim_b:
        return False
    Psi = S.state_matrix
    return opnorm(Psi @ dagger(Psi) - np.eye(S.dim_a) / S.dim_a) <= tol


def tracial_from_me(S: BipartiteStrategy) -> TracialStrategy:
    """Tracial triple (M_d, tr/d, A) of a symmetric ME strategy.

    Raises
    ------
    ContractViolation
        If the strategy is not symmetric on a maximally entangled state
    """
    if not is_maximally_entangled(S) or not is_symmetric(S):
        raise ContractViolation("Strategy is not a symmetric ME strategy")
    return TracialStrategy(
        algebra=TracialAlgebra.full(S.dim_a), A=S.A, pvm=pvm_residual(S.A) <= 1e-10
    )


def symmetric_dsync_estimates(
    S: BipartiteStrategy, nu_a, slack: float = 1e-9, strict: bool = False
) -> SymmetricDsyncReport:
    """Compare dsync(S) with the asynchronicity of its associated symmetric strategies.

    Checks 1 - dsync(S) <= sqrt(1 - dsync(S_A)) sqrt(1 - dsync(S_B)) and
    dsync(S_A), dsync(S_B) <= 2 dsync(S).

    Raises
    ------
    InvariantViolation
        In strict mode when any inequality fails beyond slack
    """
    S_A, S_B = associated_symmetric(S)
    delta = dsync(S, nu_a)
    delta_a = dsync(S_A, nu_a)
    delta_b = dsync(S_B, nu_a)
    product = float(np.sqrt(max(1.0 - delta_a, 0.0)) * np.sqrt(max(1.0 - delta_b, 0.0)))
    product_holds = 1.0 - delta <= product + slack
    a_holds = delta_a <= 2.0 * delta + slack
    b_holds = delta_b <= 2.0 * delta + slack
    holds = product_holds and a_holds and b_holds
    if not holds:
        logger.warning(
            "Symmetric asynchronicity estimate violated",
            dsync=delta,
            dsync_a=delta_a,
            dsync_b=delta_b,
        )
        if strict:
            raise InvariantViolation("Symmetric asynchronicity estimate violated")
    return SymmetricDsyncReport(
        dsync=delta,
        dsync_a=delta_a,
        dsync_b=delta_b,
        product_bound=product,
        product_holds=product_holds,
        a_holds=a_holds,
        b_holds=b_holds,
        holds=holds,
    )
