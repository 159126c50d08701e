"""Pydantic reports for projective rounding and measurement replacement."""

from pydantic import BaseModel


class QuestionRounding(BaseModel):
    """Rounding of one question's POVM.

    Attributes
    ----------
    defect : float
        sum_a ||A_a - P_a||^2 in the chosen weighting
    delta : float
        1 - sum_a ||A_a||^2 in the same weighting
    bound : float
        9 delta, the comparison target for the defect
    holds : bool
        defect <= bound (up to slack)
    """

    defect: float
    delta: float
    bound: float
    holds: bool


class RoundingReport(BaseModel):
    """Per-question rounding entries and their nu_A-averages."""

    questions: list[QuestionRounding]
    gamma: float
    delta: float
    pvm_residual: float


class ReplacementReport(BaseModel):
    """Correlation shift from swapping measurements against 12 delta + 4 sqrt(gamma_A) + 4 sqrt(gamma_B)."""

    shift: float
    dsync: float
    gamma_a: float
    gamma_b: float
    bound: float
    holds: bool


class ProjectivizeReport(BaseModel):
    """Measured quantities of rounding both sides of a strategy.

    Attributes
    ----------
    dsync : float
        Asynchronicity of the input
    dsync_rounded : float
        Asynchronicity of the rounded strategy
    alice, bob : RoundingReport
        Per-side rounding, weighted by rho_A and rho_B
    replacement : ReplacementReport
        Correlation shift between the input and the rounded strategy
    """

    dsync: float
    dsync_rounded: float
    alice: RoundingReport
    bob: RoundingReport
    replacement: ReplacementReport


class ExponentFit(BaseModel):
    """Least-squares fit log(value) = slope log(delta) + intercept."""

    slope: float
    intercept: float
    points: int
