"""Pure dense linear algebra on complex matrices.

Every function takes numpy arrays, returns fresh arrays and never mutates its
inputs, so results can be shared freely between suite worker threads.
"""

from functools import reduce
from typing import Literal

import numpy as np
from scipy import linalg as sla

from src.core.exceptions import ContractViolation, DimensionMismatch
from src.linalg.schemas import CMatrix, HermEig, SchmidtDecomp

HERMITIAN_RTOL = 1e-12
DEGENERACY_RTOL = 1e-9
RANK_RTOL = 1e-10
SCHMIDT_CUTOFF = 1e-13


def as_matrix(M) -> CMatrix:
    """Coerce input to a 2-D complex128 array.

    Raises
    ------
    ContractViolation
        If the input is not two dimensional
    """
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2:
        raise ContractViolation(f"Expected a matrix, got array of shape {M.shape}")
    return M


def as_square(M) -> CMatrix:
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ContractViolation(f"Expected a square matrix, got shape {M.shape}")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes (works on stacked families)."""
    return np.conj(np.swapaxes(M, -1, -2))


def opnorm(M) -> float:
    """Operator norm (largest singular value); 0 for empty matrices."""
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def hermitian_residual(M) -> float:
    """Operator norm of M - M*."""
    M = as_square(M)
    return opnorm(M - dagger(M))


def is_hermitian(M, rtol: float = HERMITIAN_RTOL) -> bool:
    """Check ||M - M*|| <= rtol * ||M|| in operator norm."""
    return hermitian_residual(M) <= rtol * opnorm(M)


def hermitize(M) -> CMatrix:
    M = as_square(M)
    return (M + dagger(M)) / 2


def degeneracy_tol(M_norm: float) -> float:
    """Absolute tolerance under which two eigenvalues count as one."""
    return DEGENERACY_RTOL * max(1.0, M_norm)


def herm_eig(M) -> HermEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Parameters
    ----------
    M : array_like
        Square Hermitian matrix (checked to 1e-12 relative tolerance)

    Returns
    -------
    HermEig
        Descending eigenvalues with the matching orthonormal eigenvectors as
        columns. Equal eigenvalues keep the solver's ascending index order.

    Raises
    ------
    ContractViolation
        If M is not square or not Hermitian
    """
    M = as_square(M)
    if not is_hermitian(M):
        raise ContractViolation(
            f"Matrix is not Hermitian (residual {hermitian_residual(M):.3e})"
        )
    w, v = sla.eigh(hermitize(M))
    order = np.argsort(-w, kind="stable")
    return HermEig(eigenvalues=w[order], eigenvectors=v[:, order])


def herm_eigvals(M) -> np.ndarray:
    """Descending eigenvalues of a Hermitian matrix, without eigenvectors."""
    M = as_square(M)
    if not is_hermitian(M):
        raise ContractViolation(
            f"Matrix is not Hermitian (residual {hermitian_residual(M):.3e})"
        )
    return sla.eigvalsh(hermitize(M))[::-1].copy()


def schmidt(psi, dim_a: int, dim_b: int) -> SchmidtDecomp:
    """Schmidt decomposition of a bipartite vector.

    Parameters
    ----------
    psi : array_like
        Vector of length dim_a * dim_b, Alice's index major
    dim_a, dim_b : int
        Local dimensions

    Returns
    -------
    SchmidtDecomp
        Coefficients are the singular values of the dim_a x dim_b reshaping,
        with values below 1e-13 (relative to the largest) dropped.

    Raises
    ------
    DimensionMismatch
        If len(psi) != dim_a * dim_b
    """
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if dim_a < 1 or dim_b < 1 or psi.size != dim_a * dim_b:
        raise DimensionMismatch(
            f"State of length {psi.size} does not factor as {dim_a} x {dim_b}"
        )
    u, s, vh = sla.svd(psi.reshape(dim_a, dim_b), full_matrices=False)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > SCHMIDT_CUTOFF * top)) if top > 0 else 0
    return SchmidtDecomp(
        coefficients=s[:rank].copy(),
        left_vectors=u[:, :rank].copy(),
        right_vectors=vh[:rank].T.copy(),
    )


def polar(A) -> tuple[CMatrix, CMatrix]:
    """Polar decomposition A = W |A| with W a partial isometry.

    Singular values at or below 1e-10 times the largest are treated as zero,
    so ker W = ker A up to that rank tolerance. Total on rectangular input.

    Returns
    -------
    tuple[CMatrix, CMatrix]
        (W, P) with W of A's shape and P = |A| = (A*A)^(1/2)
    """
    A = as_matrix(A)
    m, n = A.shape
    if A.size == 0:
        return np.zeros((m, n), dtype=np.complex128), np.zeros((n, n), dtype=np.complex128)
    u, s, vh = sla.svd(A, full_matrices=False)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    W = u[:, :rank] @ vh[:rank]
    P = (dagger(vh) * s) @ vh
    return W, hermitize(P)


def schatten_norm(A, p: int | float | str) -> float:
    """Schatten p-norm for p in {1, 2, inf}.

    Raises
    ------
    ContractViolation
        For any other p
    """
    A = as_matrix(A)
    if p in ("inf", "∞") or p == np.inf:
        return opnorm(A)
    if p == 1:
        return float(np.sum(sla.svdvals(A))) if A.size else 0.0
    if p == 2:
        return float(np.linalg.norm(A, "fro"))
    raise ContractViolation(f"Unsupported Schatten exponent: {p!r}")


def partial_trace(M, dim_a: int, dim_b: int, side: Literal["A", "B"]) -> CMatrix:
    """Trace out one tensor factor of an operator on C^dim_a (x) C^dim_b.

    Parameters
    ----------
    M : array_like
        Square matrix of size dim_a * dim_b
    side : {"A", "B"}
        The subsystem that is traced OUT; "B" returns the dim_a x dim_a
        reduced operator

    Raises
    ------
    DimensionMismatch
        If M's size does not factor as declared
    """
    M = as_square(M)
    if dim_a < 1 or dim_b < 1 or M.shape[0] != dim_a * dim_b:
        raise DimensionMismatch(
            f"Operator of size {M.shape[0]} does not factor as {dim_a} x {dim_b}"
        )
    T = M.reshape(dim_a, dim_b, dim_a, dim_b)
    if side == "B":
        return np.einsum("ijkj->ik", T)
    if side == "A":
        return np.einsum("ijik->jk", T)
    raise ContractViolation(f"side must be 'A' or 'B', got {side!r}")


def kron_all(*ops) -> CMatrix:
    """Kronecker product of the arguments, left to right."""
    return reduce(np.kron, [np.asarray(op, dtype=np.complex128) for op in ops])


def max_entangled(d: int) -> CMatrix:
    """Canonical maximally entangled vector sum_i |ii> / sqrt(d)."""
    if d < 1:
        raise ContractViolation(f"Dimension must be positive, got {d}")
    return np.eye(d, dtype=np.complex128).ravel() / np.sqrt(d)


def reduced_densities(psi, dim_a: int, dim_b: int) -> tuple[CMatrix, CMatrix]:
    """Reduced density matrices (rho_A, rho_B) of a pure bipartite state."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if psi.size != dim_a * dim_b:
        raise DimensionMismatch(
            f"State of length {psi.size} does not factor as {dim_a} x {dim_b}"
        )
    Psi = psi.reshape(dim_a, dim_b)
    return Psi @ dagger(Psi), Psi.T @ Psi.conj()


def psd_sqrt(M) -> CMatrix:
    """Square root of a positive semidefinite matrix; round-off negatives clipped."""
    eig = herm_eig(M)
    root = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    V = eig.eigenvectors
    return hermitize((V * root) @ dagger(V))


def psd_inv_sqrt(M, rtol: float = RANK_RTOL) -> CMatrix:
    """Pseudo-inverse square root of a PSD matrix (zero on the kernel)."""
    eig = herm_eig(M)
    w = eig.eigenvalues
    cutoff = rtol * max(float(w[0]) if w.size else 0.0, 0.0)
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.where(w > cutoff, w, 1.0)), 0.0)
    V = eig.eigenvectors
    return hermitize((V * inv) @ dagger(V))


def min_eigenvalue(M) -> float:
    w = herm_eigvals(M)
    return float(w[-1]) if w.size else 0.0


def transpose_in_basis(X, U) -> np.ndarray:
    """Transpose with respect to the orthonormal basis given by U's columns.

    Computes U (U* X U)^T U*. Accepts stacked operators (..., d, d).
    """
    X = np.asarray(X, dtype=np.complex128)
    U = np.asarray(U, dtype=np.complex128)
    inner = dagger(U) @ X @ U
    return U @ np.swapaxes(inner, -1, -2) @ dagger(U)


def projector_onto(columns) -> CMatrix:
    """Orthogonal projection onto the span of orthonormal columns."""
    V = as_matrix(columns)
    return V @ dagger(V)


def takagi(S) -> tuple[np.ndarray, CMatrix]:
    """Takagi factorisation S = U diag(sigma) U^T of a complex symmetric matrix.

    Positive Takagi values come from the real symmetric embedding
    [[Re S, Im S], [Im S, -Re S]], whose spectrum is +-sigma. The kernel is
    completed with an orthonormal basis of the remaining complement.

    Returns
    -------
    tuple[np.ndarray, CMatrix]
        (sigma, U) with sigma descending and U unitary

    Raises
    ------
    ContractViolation
        If S is not symmetric (S != S^T beyond 1e-10 relative)
    """
    S = as_square(S)
    d = S.shape[0]
    if opnorm(S - S.T) > RANK_RTOL * max(1.0, opnorm(S)):
        raise ContractViolation("Takagi factorisation needs a symmetric matrix")
    K = np.block([[S.real, S.imag], [S.imag, -S.real]])
    w, v = sla.eigh((K + K.T) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    cutoff = RANK_RTOL * max(1.0, float(w[0]) if w.size else 0.0)
    rank = int(np.sum(w[:d] > cutoff))
    sigma = np.zeros(d)
    sigma[:rank] = w[:rank]
    U = v[:d, :rank] + 1j * v[d:, :rank]
    if rank < d:
        complement = sla.null_space(dagger(U)) if rank else np.eye(d, dtype=np.complex128)
        U = np.hstack([U, complement[:, : d - rank]])
    return sigma, U


def stacked_opnorm(M) -> np.ndarray:
    """Operator norms over the last two axes of a stack of matrices."""
    M = np.asarray(M, dtype=np.complex128)
    if M.size == 0:
        return np.zeros(M.shape[:-2])
    return np.linalg.norm(M, ord=2, axis=(-2, -1))


def family_hermitian_residual(family) -> float:
    F = np.asarray(family, dtype=np.complex128)
    return float(stacked_opnorm(F - dagger(F)).max()) if F.size else 0.0


def family_min_eigenvalue(family) -> float:
    """Smallest eigenvalue over every operator of a (..., d, d) family."""
    F = np.asarray(family, dtype=np.complex128)
    if F.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((F + dagger(F)) / 2).min())


def completeness_residual(family) -> float:
    """max_x ||sum_a A^x_a - Id|| for a (..., n, d, d) family."""
    F = np.asarray(family, dtype=np.complex128)
    d = F.shape[-1]
    return float(stacked_opnorm(F.sum(axis=-3) - np.eye(d)).max())


def pvm_residual(family) -> float:
    """Largest idempotency, orthogonality or completeness violation.

    Parameters
    ----------
    family : array_like
        Measurement family of shape (n, d, d) or (X, n, d, d)

    Returns
    -------
    float
        0 exactly for a projection-valued family
    """
    F = np.asarray(family, dtype=np.complex128)
    if F.ndim == 3:
        F = F[None]
    X, n, d, _ = F.shape
    products = F[:, :, None] @ F[:, None, :]
    target = np.zeros_like(products)
    idx = np.arange(n)
    target[:, idx, idx] = F
    mismatch = float(stacked_opnorm(products - target).max()) if F.size else 0.0
    return max(mismatch, completeness_residual(F))
