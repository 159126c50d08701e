"""Pydantic models for strategies.

Measurement families are padded arrays of shape (questions, answers, d, d);
answers a question does not offer carry the zero operator.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.linalg.calculator import (
    completeness_residual,
    family_hermitian_residual,
    family_min_eigenvalue,
    pvm_residual,
)
from src.linalg.schemas import CMatrix

POVM_TOL = 1e-10
STATE_NORM_TOL = 1e-10

# (questions, answers, d, d) complex array
Family = np.ndarray


def check_povm_family(family: np.ndarray, dim: int, name: str) -> np.ndarray:
    """Validate shape, positivity and completeness of a measurement family."""
    family = np.asarray(family, dtype=np.complex128)
    if family.ndim != 4 or family.shape[2:] != (dim, dim):
        raise ValueError(f"{name} must have shape (questions, answers, {dim}, {dim}), got {family.shape}")
    if family.shape[0] < 1 or family.shape[1] < 1:
        raise ValueError(f"{name} needs at least one question and one answer")
    if family_hermitian_residual(family) > POVM_TOL:
        raise ValueError(f"{name} contains non-Hermitian operators")
    if family_min_eigenvalue(family) < -POVM_TOL:
        raise ValueError(f"{name} contains operators that are not positive")
    if completeness_residual(family) > POVM_TOL:
        raise ValueError(f"{name} operators do not sum to the identity")
    return family


class BipartiteStrategy(BaseModel):
    """Shared state with one POVM family per player.

    Attributes
    ----------
    dim_a, dim_b : int
        Local Hilbert space dimensions
    psi : CMatrix
        Unit vector on C^dim_a (x) C^dim_b, Alice's index major
    A : Family
        Alice's POVMs, shape (X, n, dim_a, dim_a)
    B : Family
        Bob's POVMs, shape (Y, m, dim_b, dim_b)
    basis : CMatrix | None
        Orthonormal frame in which psi = sum_i c_i |u_i>|u_i>, recorded for
        symmetric strategies; transposes are taken in this frame
    """

    dim_a: int
    dim_b: int
    psi: CMatrix
    A: Family
    B: Family
    basis: CMatrix | None = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("psi", mode="before")
    @classmethod
    def _flatten_state(cls, v):
        return np.asarray(v, dtype=np.complex128).ravel()

    @model_validator(mode="after")
    def _validate(self) -> "BipartiteStrategy":
        if self.dim_a < 1 or self.dim_b < 1:
            raise ValueError("Local dimensions must be positive")
        if self.psi.size != self.dim_a * self.dim_b:
            raise ValueError(
                f"State of length {self.psi.size} does not match {self.dim_a} x {self.dim_b}"
            )
        if abs(np.linalg.norm(self.psi) - 1.0) > STATE_NORM_TOL:
            raise ValueError("State vector is not normalised")
        object.__setattr__(self, "A", check_povm_family(self.A, self.dim_a, "A"))
        object.__setattr__(self, "B", check_povm_family(self.B, self.dim_b, "B"))
        if self.basis is not None:
            basis = np.asarray(self.basis, dtype=np.complex128)
            if basis.shape != (self.dim_a, self.dim_a) or self.dim_a != self.dim_b:
                raise ValueError("A symmetric frame needs dim_a == dim_b and a square basis")
            object.__setattr__(self, "basis", basis)
        return self

    @property
    def n_questions(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_answers(self) -> int:
        return int(self.A.shape[1])

    @property
    def state_matrix(self) -> CMatrix:
        """psi reshaped to dim_a x dim_b."""
        return self.psi.reshape(self.dim_a, self.dim_b)

    def is_projective(self, tol: float = POVM_TOL) -> bool:
        return pvm_residual(self.A) <= tol and pvm_residual(self.B) <= tol


class TracialAlgebra(BaseModel):
    """Finite direct sum of full matrix blocks with a weighted normalised trace.

    tau(X) = sum_i w_i tr(X_i) / d_i on block-diagonal X, which equals
    Tr(Omega X) for the diagonal density Omega = (+)_i (w_i / d_i) Id_{d_i}.

    Attributes
    ----------
    blocks : tuple[tuple[int, float], ...]
        (block dimension, weight) pairs; weights positive and summing to 1
    """

    blocks: tuple[tuple[int, float], ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _validate(self) -> "TracialAlgebra":
        if not self.blocks:
            raise ValueError("A tracial algebra needs at least one block")
        for dim, weight in self.blocks:
            if dim < 1 or weight <= 0:
                raise ValueError(f"Invalid block ({dim}, {weight})")
        total = sum(w for _, w in self.blocks)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"Block weights sum to {total}, expected 1")
        return self

    @classmethod
    def full(cls, dim: int) -> "TracialAlgebra":
        """M_dim with its normalised trace."""
        return cls(blocks=((dim, 1.0),))

    @property
    def dim(self) -> int:
        return sum(d for d, _ in self.blocks)

    @property
    def density(self) -> np.ndarray:
        """Diagonal of Omega."""
        return np.concatenate([np.full(d, w / d) for d, w in self.blocks])

    @property
    def block_mask(self) -> np.ndarray:
        """Boolean (dim, dim) mask of the block-diagonal pattern."""
        labels = np.repeat(np.arange(len(self.blocks)), [d for d, _ in self.blocks])
        return labels[:, None] == labels[None, :]

    def trace(self, X) -> complex:
        return complex(np.sum(self.density * np.diagonal(np.asarray(X, dtype=np.complex128))))

    def off_block_residual(self, X) -> float:
        X = np.asarray(X, dtype=np.complex128)
        outside = np.where(self.block_mask, 0.0, X)
        return float(np.abs(outside).max()) if outside.size else 0.0


class TracialStrategy(BaseModel):
    """Tracial triple (M, tau, A): one block-diagonal POVM family.

    Attributes
    ----------
    algebra : TracialAlgebra
        The finite-dimensional algebra and its trace
    A : Family
        Shape (X, n, dim, dim), block diagonal
    pvm : bool
        Whether the family is projective; checked when set
    """

    algebra: TracialAlgebra
    A: Family
    pvm: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _validate(self) -> "TracialStrategy":
        family = check_povm_family(self.A, self.algebra.dim, "A")
        if self.algebra.off_block_residual(family) > POVM_TOL:
            raise ValueError("Measurement operators must be block diagonal")
        if self.pvm and pvm_residual(family) > POVM_TOL:
            raise ValueError("Family flagged as PVM is not projective")
        object.__setattr__(self, "A", family)
        return self

    @property
    def n_questions(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_answers(self) -> int:
        return int(self.A.shape[1])


class SymmetricDsyncReport(BaseModel):
    """Asynchronicity of a strategy against its associated symmetric strategies.

    Attributes
    ----------
    dsync, dsync_a, dsync_b : float
        dsync of S, S_A and S_B under the same distribution
    product_bound : float
        sqrt(1 - dsync_a) sqrt(1 - dsync_b), which must dominate 1 - dsync
    holds : bool
        All three inequalities hold within the slack
    """

    dsync: float
    dsync_a: float
    dsync_b: float
    product_bound: float
    product_holds: bool
    a_holds: bool
    b_holds: bool
    holds: bool
