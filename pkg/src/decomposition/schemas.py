"""Pydantic models for spectral scans, level statistics and block partitions."""

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from src.linalg.calculator import dagger
from src.linalg.schemas import CMatrix


class SpectralScan(BaseModel):
    """Spectral levels P_j = chi_(>= e_j)(rho) of a density matrix.

    Level j covers thresholds lambda in (e_(j+1), e_j] with e_(m+1) = 0; its
    projection has rank ranks[j] and weight (e_j - e_(j+1)) ranks[j], so that
    rho = sum_j weight_j P_j / ranks[j].

    Attributes
    ----------
    thresholds : np.ndarray
        Distinct positive eigenvalues e_1 > e_2 > ..., one per level
    ranks : np.ndarray
        Cumulative multiplicities, strictly increasing
    weights : np.ndarray
        Level measures, positive and summing to 1
    basis : CMatrix
        Eigenvectors of rho as columns, eigenvalues descending
    """

    thresholds: np.ndarray
    ranks: np.ndarray
    weights: np.ndarray
    basis: CMatrix

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _validate(self) -> "SpectralScan":
        m = self.thresholds.size
        if m < 1 or self.ranks.shape != (m,) or self.weights.shape != (m,):
            raise ValueError("A scan needs matching, non-empty thresholds, ranks and weights")
        if np.any(np.diff(self.ranks) <= 0) or self.ranks[-1] > self.basis.shape[1]:
            raise ValueError("Level ranks must increase strictly within the dimension")
        if np.any(self.weights <= 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("Level weights must be positive and sum to 1")
        return self

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def n_levels(self) -> int:
        return int(self.thresholds.size)

    def isometry(self, j: int) -> CMatrix:
        """d x rank isometry onto the range of P_j."""
        return self.basis[:, : int(self.ranks[j])]

    def projection(self, j: int) -> CMatrix:
        W = self.isometry(j)
        return W @ dagger(W)

    def reconstruct(self) -> CMatrix:
        """sum_j weight_j P_j / rank_j."""
        return sum(
            (w / r) * self.projection(j) for j, (w, r) in enumerate(zip(self.weights, self.ranks))
        )


class LevelStats(BaseModel):
    """Statistics of the compressed ME strategy S_lambda on one level.

    Attributes
    ----------
    commutator : float
        E_x sum_a ||A P - P A||_2^2 / Tr(P)
    defect : float
        E_x sum_a Tr((A - P A P)^2 P) / Tr(P), half the commutator
    omega : float | None
        Winning probability of S_lambda, when a game is given
    dsync : float
        Asynchronicity of S_lambda
    """

    threshold: float
    rank: int
    weight: float
    commutator: float
    defect: float
    dsync: float
    omega: float | None = None


class MEComponentsReport(BaseModel):
    """Aggregated defect of the ME decomposition against sqrt(2 delta_sym).

    Attributes
    ----------
    dsync : float
        Asynchronicity of the strategy
    dsync_sym : float
        Asynchronicity of the associated symmetric strategy on the scanned side
    defect : float
        sum_lambda mu(lambda) E_x sum_a Tr((A - P A P)^2 rho_lambda)
    commutator : float
        Commutator form, equal to twice the defect
    """

    side: str
    dsync: float
    dsync_sym: float
    defect: float
    bound: float
    commutator: float
    commutator_bound: float
    holds: bool
    levels: list[LevelStats]


class LevelStatistics(BaseModel):
    """Per-level statistics with the aggregate quantities alpha and beta.

    Attributes
    ----------
    epsilon : float
        1 - omega of the full strategy
    alpha : float
        E_nu sum_(a,b) |C - sum_lambda mu(lambda) C^lambda|
    beta : float
        sum_lambda mu(lambda) commutator(lambda)
    """

    levels: list[LevelStats]
    epsilon: float
    alpha: float
    beta: float


class LambdaFilterReport(BaseModel):
    """Levels passing omega >= 1 - sqrt(alpha) - eps and commutator <= sqrt(beta).

    Attributes
    ----------
    bound : float
        1 - (alpha + eps) / (sqrt(alpha) + eps) - sqrt(beta)
    bound_eps0 : float
        1 - sqrt(alpha) - sqrt(beta), shown for comparison
    """

    members: list[int]
    measure: float
    omega_threshold: float
    commutator_threshold: float
    bound: float
    bound_eps0: float
    holds: bool


class Block(BaseModel):
    """One orthogonal block Q_i = P_(lambda_i) - P_(lambda_(i+1)) of the partition."""

    levels: list[int]
    rank: int
    commutator: float
    dsync: float
    omega: float
    commutator_holds: bool
    dsync_holds: bool
    omega_holds: bool
    commutation_dsync_holds: bool


class BlockPartition(BaseModel):
    """Orthogonal blocks built from the filtered levels by dimension halving.

    Attributes
    ----------
    commutator_bound : float
        (sqrt 2 + 1)^2 sqrt(beta)
    dsync_bound : float
        Half the commutator bound
    omega_bound : float
        1 - 2 eps - 2 sqrt(alpha) - 6 sqrt(beta) - 8 sqrt(5/2 + sqrt 2) beta^(1/4)
    orthogonality_residual : float
        max_(i != j) ||Q_i Q_j||
    completeness_residual : float
        ||sum_i Q_i - P_(lambda_1)||
    """

    blocks: list[Block]
    commutator_bound: float
    dsync_bound: float
    omega_bound: float
    orthogonality_residual: float
    completeness_residual: float
    holds: bool


class PMEComponentsReport(BaseModel):
    """Rounded PME strategies per level, with defects reported and not bounded."""

    level_defects: list[float]
    defect: float
    correlation_shift: float
