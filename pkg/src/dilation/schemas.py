"""Pydantic models for dilation witnesses, vNA witnesses and their certificates."""

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.linalg.calculator import dagger, opnorm
from src.linalg.schemas import CMatrix

ISOMETRY_TOL = 1e-10


class DilationWitness(BaseModel):
    """Isometries V_A, V_B and auxiliary state of a local dilation.

    Attributes
    ----------
    V_A : CMatrix
        (dim H~_A * dim K_A) x dim H_A isometry, H~_A the major tensor factor
    V_B : CMatrix
        (dim H~_B * dim K_B) x dim H_B isometry
    aux : CMatrix
        Unit vector on K_A (x) K_B, K_A major
    nu_hat : np.ndarray
        (X, X) distribution whose marginals weight the measurement residuals
    """

    V_A: CMatrix
    V_B: CMatrix
    aux: CMatrix
    nu_hat: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("V_A", "V_B", "aux", mode="before")
    @classmethod
    def _as_complex(cls, v):
        return np.asarray(v, dtype=np.complex128)

    @field_validator("nu_hat", mode="before")
    @classmethod
    def _as_float(cls, v):
        return np.asarray(v, dtype=np.float64)

    @model_validator(mode="after")
    def _validate(self) -> "DilationWitness":
        for name, V in (("V_A", self.V_A), ("V_B", self.V_B)):
            if V.ndim != 2 or V.shape[0] < V.shape[1]:
                raise ValueError(f"{name} must be a tall matrix, got shape {V.shape}")
            if opnorm(dagger(V) @ V - np.eye(V.shape[1])) > ISOMETRY_TOL:
                raise ValueError(f"{name} is not an isometry")
        object.__setattr__(self, "aux", self.aux.ravel())
        if abs(np.linalg.norm(self.aux) - 1.0) > ISOMETRY_TOL:
            raise ValueError("Auxiliary state must be a unit vector")
        nu = self.nu_hat
        if nu.ndim != 2 or nu.shape[0] != nu.shape[1] or np.any(nu < 0) or abs(nu.sum() - 1) > 1e-12:
            raise ValueError("nu_hat must be a square probability table")
        return self


class ResidualTriple(BaseModel):
    """The state, Alice and Bob residuals of a local dilation.

    The witness certifies an (eps, nu)-dilation for every eps >= epsilon.
    """

    r_state: float
    r_A: float
    r_B: float

    @property
    def epsilon(self) -> float:
        return max(self.r_state, self.r_A, self.r_B)


class Estimate(BaseModel):
    """A measured quantity next to the bound it is checked against."""

    name: str
    value: float
    bound: float
    holds: bool


class StrongResidualReport(BaseModel):
    """Joint-operator residual against three times the triple residual."""

    value: float
    triple: ResidualTriple
    bound: float
    holds: bool


class CounterexampleReport(BaseModel):
    """Residuals of the strategies with every POVM element split into n equal parts."""

    n: int
    strong: float
    triple: ResidualTriple


class VNAWitness(BaseModel):
    """Finite vNA-dilation witness for full matrix algebras.

    M = M_m and M_0 = M_k carry normalised traces and N = M_n. The partial
    isometry W in P (M (x) M_0)^inf I is stored by its matrix w from
    H~ (x) K into H.

    Attributes
    ----------
    w : CMatrix
        n x (m k) contraction, H~ major in the column index
    ideal_dim : int
        m = dim H~
    aux_dim : int
        k = dim K
    """

    w: CMatrix
    ideal_dim: int
    aux_dim: int

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("w", mode="before")
    @classmethod
    def _as_complex(cls, v):
        return np.asarray(v, dtype=np.complex128)

    @model_validator(mode="after")
    def _validate(self) -> "VNAWitness":
        if self.ideal_dim < 1 or self.aux_dim < 1:
            raise ValueError("Dimensions must be positive")
        if self.w.ndim != 2 or self.w.shape[1] != self.ideal_dim * self.aux_dim:
            raise ValueError(
                f"w must have {self.ideal_dim * self.aux_dim} columns, got shape {self.w.shape}"
            )
        if opnorm(self.w) > 1.0 + ISOMETRY_TOL:
            raise ValueError("W must be a contraction")
        return self

    @property
    def n(self) -> int:
        return int(self.w.shape[0])

    @property
    def is_partial_isometry(self) -> bool:
        return opnorm(self.w @ dagger(self.w) @ self.w - self.w) <= ISOMETRY_TOL

    @property
    def dim(self) -> int:
        """m k, the dimension on which I_(M (x) M_0) acts."""
        return self.ideal_dim * self.aux_dim


class Ampliation(BaseModel):
    """Truncation of (M (x) M_0)^inf to `slots` copies of H~ (x) K.

    tau^inf(X) = Tr(X) / (m k); I is the first slot and P the range of the
    canonical embedding of H into the following slots.

    Attributes
    ----------
    embed : CMatrix
        Isometry J from H onto the range of P
    base : CMatrix
        Isometry from H~ (x) K onto the first slot
    W : CMatrix
        J w base*
    """

    P: CMatrix
    I: CMatrix
    W: CMatrix
    embed: CMatrix
    base: CMatrix
    slots: int

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class VNAResiduals(BaseModel):
    """Left-hand sides of the vNA-dilation inequalities.

    Attributes
    ----------
    op_residual : float
        E_x sum_a ||A~ (x) I - W* A W||_tau^2
    p1 : float
        tau^N(P - W W*)
    p2 : float
        tau(I - W* W)
    trace_p : float
        tau^inf(P) = n / (m k)
    """

    op_residual: float
    p1: float
    p2: float
    trace_p: float

    @property
    def epsilon(self) -> float:
        return max(self.op_residual, self.p1, self.p2)


class SandwichReport(BaseModel):
    """1 - delta <= tau^inf(P) <= 1 / (1 - delta) with delta = max(p1, p2)."""

    delta: float
    trace_p: float
    lower: float
    upper: float
    holds: bool


class MeasureConversionReport(BaseModel):
    """Per-question operator distances measured in M (x) M_0 and in N.

    Attributes
    ----------
    m_side : list[float]
        sum_a ||A~ (x) I - W* A W||_tau^2
    n_side : list[float]
        sum_a ||W (A~ (x) I) W* - A||_(tau^N)^2
    m_bounds, n_bounds : list[float]
        2 eps + n_side / (1 - eps) and (2 eps + m_side) / (1 - eps)
    """

    epsilon: float
    m_side: list[float]
    n_side: list[float]
    m_bounds: list[float]
    n_bounds: list[float]
    holds: bool


class AuxRounding(BaseModel):
    """Flat Schmidt sequence near kappa with multiplicity divisible by n.

    Attributes
    ----------
    coefficients : np.ndarray
        The rounded sequence, unit norm, one nonzero value
    branch : str
        "wide" when the ME rank m is at least n, else "narrow"
    distance : float
        ||kappa' - kappa||_2
    bound : float
        2 ||lambda - kappa||_2
    """

    coefficients: np.ndarray
    multiplicity: int
    branch: str
    distance: float
    bound: float
    holds: bool

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class PartialIsometryReport(BaseModel):
    """Estimates for the partial isometries V'_A, V'_B built from P V."""

    epsilon: float
    estimates: list[Estimate]
    holds: bool


class ConversionReport(BaseModel):
    """Certificate of a conversion between local dilations and vNA-dilations.

    Attributes
    ----------
    direction : str
        "a" for dilation to vNA-dilation, "b" for the converse
    epsilon_in : float
        Parameter certified by the input witness
    bound : float
        1700 eps^2 for direction a, (4 + sqrt 2) sqrt(eps) for direction b
    epsilon_out : float
        Parameter certified by the constructed witness
    """

    direction: str
    epsilon_in: float
    bound: float
    epsilon_out: float
    holds: bool
    sandwich: SandwichReport
    aux_rounding: AuxRounding | None = None
    partial_isometry: PartialIsometryReport | None = None


class RoundTripReport(BaseModel):
    """A dilation pushed to a vNA-dilation and back.

    The composed bound is (4 + sqrt 2) sqrt(1700) eps.
    """

    epsilon: float
    vna_epsilon: float
    epsilon_out: float
    bound: float
    holds: bool
    forward: ConversionReport
    backward: ConversionReport


class DimensionReport(BaseModel):
    """dim H >= (1 - eps^2) dim H~ for a state residual eps."""

    dim: int
    dim_tilde: int
    epsilon: float
    bound: float
    holds: bool


class ClosenessReport(BaseModel):
    """Distance of an embedded state from the top eigenspace of T (x) I.

    Attributes
    ----------
    leak : float
        ||(1 - P_top) psi||
    leak_bound : float
        sqrt((lambda_1 - omega) / gap)
    closeness : float
        ||psi - psi~ (x) aux||, at most twice the leak
    aux_state : CMatrix
        Normalised auxiliary component of the projection
    """

    leak: float
    leak_bound: float
    omega: float
    top_eigenvalue: float
    gap: float
    closeness: float
    closeness_bound: float
    aux_state: CMatrix
    holds: bool

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class GapWitnessReport(BaseModel):
    """State mixing the top two eigenvectors of T, far from flat on Alice's side.

    Attributes
    ----------
    deviation : float
        max over phases of ||Id/n - rho||_1
    bound : float
        1 / (16 + 12 sqrt 2)
    omega : float
        <psi|T|psi> at the maximising phase
    expected_omega : float
        lambda_1 - gap / 2
    """

    deviation: float
    bound: float
    omega: float
    expected_omega: float
    gap: float
    phase: float
    holds: bool
