"""Pydantic containers for linear algebra results."""

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

# Dense complex matrix: states, measurement operators, isometries, polynomials
CMatrix = npt.NDArray[np.complex128]
RVector = npt.NDArray[np.float64]


class HermEig(BaseModel):
    """Eigendecomposition of a Hermitian matrix.

    Attributes
    ----------
    eigenvalues : RVector
        Real eigenvalues in descending order; ties keep the solver's index order
    eigenvectors : CMatrix
        Unitary matrix whose i-th column belongs to the i-th eigenvalue
    """

    eigenvalues: RVector
    eigenvectors: CMatrix

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class SchmidtDecomp(BaseModel):
    """Schmidt decomposition psi = sum_i c_i u_i (x) v_i.

    Attributes
    ----------
    coefficients : RVector
        Nonzero Schmidt coefficients, descending
    left_vectors : CMatrix
        dimA x r matrix with orthonormal columns u_i
    right_vectors : CMatrix
        dimB x r matrix with orthonormal columns v_i
    """

    coefficients: RVector
    left_vectors: CMatrix
    right_vectors: CMatrix

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def rank(self) -> int:
        return int(self.coefficients.size)

    def state(self) -> CMatrix:
        """Rebuild the state vector in the dimA (x) dimB ordering."""
        psi = (self.left_vectors * self.coefficients) @ self.right_vectors.T
        return psi.ravel()
