"""Pydantic models for nonlocal games and their reports."""

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

NU_SUM_TOL = 1e-12

# Correlation table C[x, y, a, b], padded to the largest answer set
Correlation = npt.NDArray[np.float64]


class Game(BaseModel):
    """Two-player game where both players share the question and answer sets.

    Attributes
    ----------
    questions : tuple[str, ...]
        Question labels X
    answers : dict[str, tuple[str, ...]]
        Answer labels A(x) per question
    nu : np.ndarray
        (X, X) probability table on question pairs
    predicate : np.ndarray
        (X, X, n, n) 0/1 table D(a, b | x, y), n the largest answer set;
        zero on answers a question does not offer
    """

    questions: tuple[str, ...]
    answers: dict[str, tuple[str, ...]]
    nu: np.ndarray
    predicate: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("nu", "predicate", mode="before")
    @classmethod
    def _as_float(cls, v):
        return np.asarray(v, dtype=np.float64)

    @model_validator(mode="after")
    def _validate(self) -> "Game":
        if not self.questions or len(set(self.questions)) != len(self.questions):
            raise ValueError("Question labels must be non-empty and unique")
        if set(self.answers) != set(self.questions):
            raise ValueError("Answer sets must be given for exactly the listed questions")
        for x, labels in self.answers.items():
            if not labels or len(set(labels)) != len(labels):
                raise ValueError(f"Answers of question {x!r} must be non-empty and unique")

        X, n = len(self.questions), self.max_answers
        if self.nu.shape != (X, X):
            raise ValueError(f"nu must have shape ({X}, {X}), got {self.nu.shape}")
        if np.any(self.nu < 0) or abs(self.nu.sum() - 1.0) > NU_SUM_TOL:
            raise ValueError("nu must be a probability distribution on question pairs")
        if self.predicate.shape != (X, X, n, n):
            raise ValueError(f"predicate must have shape ({X}, {X}, {n}, {n}), got {self.predicate.shape}")
        if not np.all((self.predicate == 0) | (self.predicate == 1)):
            raise ValueError("predicate entries must be 0 or 1")
        if np.any(self.predicate[~self.feasible]):
            raise ValueError("predicate is nonzero on infeasible answers")
        return self

    @property
    def n_questions(self) -> int:
        return len(self.questions)

    @property
    def answer_counts(self) -> tuple[int, ...]:
        return tuple(len(self.answers[x]) for x in self.questions)

    @property
    def max_answers(self) -> int:
        return max(self.answer_counts)

    @property
    def answer_mask(self) -> np.ndarray:
        """(X, n) mask of answers offered per question."""
        counts = np.array(self.answer_counts)
        return np.arange(self.max_answers)[None, :] < counts[:, None]

    @property
    def feasible(self) -> np.ndarray:
        """(X, X, n, n) mask of feasible (x, y, a, b)."""
        m = self.answer_mask
        return m[:, None, :, None] & m[None, :, None, :]

    @property
    def nu_a(self) -> np.ndarray:
        return self.nu.sum(axis=1)

    @property
    def nu_b(self) -> np.ndarray:
        return self.nu.sum(axis=0)

    def question_index(self, label: str) -> int:
        return self.questions.index(label)

    def answer_index(self, question: str, label: str) -> int:
        return self.answers[question].index(label)


class SynchronicityReport(BaseModel):
    """Symmetry and synchronicity of a game.

    Attributes
    ----------
    nu_symmetric : bool
        nu(x, y) = nu(y, x)
    predicate_symmetric : bool
        D(a, b | x, y) = D(b, a | y, x)
    is_symmetric : bool
        Both of the above
    diagonal_positive : bool
        nu(x, x) > 0 for every question
    diagonal_consistent : bool
        D(a, a' | x, x) = 0 whenever a != a'
    is_synchronous : bool
        Symmetric, positive diagonal and consistent diagonal
    beta : float
        Largest beta with nu(x, x) >= beta nu_A(x); 0 when not synchronous
    violations : list[str]
        Human readable reasons for each failed condition
    """

    nu_symmetric: bool
    predicate_symmetric: bool
    is_symmetric: bool
    diagonal_positive: bool
    diagonal_consistent: bool
    is_synchronous: bool
    beta: float
    violations: list[str]


class SyncValueReport(BaseModel):
    """Check of omega <= 1 - beta * dsync for a beta-synchronous game."""

    omega: float
    dsync: float
    beta: float
    bound: float
    holds: bool


class ValueTransferReport(BaseModel):
    """Transfer of a winning-probability gap from G' back to G.

    Attributes
    ----------
    gap_synchronised : float
        |omega(G'; C_ref) - omega(G'; C)|
    gap_original : float
        omega(G; C_ref) - omega(G; C)
    bound : float
        gap_synchronised / (1 - beta)
    holds : bool
        gap_original <= bound
    """

    beta: float
    gap_synchronised: float
    gap_original: float
    bound: float
    holds: bool


class HolderReport(BaseModel):
    """|omega(G; C) - omega(G; C')| against E_nu sum_(a,b) |C - C'|."""

    omega_gap: float
    correlation_distance: float
    holds: bool


class PolynomialGapReport(BaseModel):
    """Top of the game polynomial's spectrum and the value it gives the strategy's state.

    Attributes
    ----------
    top : list[float]
        The two largest eigenvalues of T, with multiplicity
    perfect : bool
        Whether omega >= 1 - threshold
    """

    top: list[float]
    gap: float
    omega: float
    threshold: float
    perfect: bool
