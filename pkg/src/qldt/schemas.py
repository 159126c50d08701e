"""Pydantic models for binary codes, Pauli words and qubit-test reports."""

from typing import Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.qldt.fields import as_bits, bit_string, gf2_rank


class CodeF2(BaseModel):
    """Binary linear [n, k] code given by a k x n generator.

    Row i of the generator is the physical word of logical basis vector e_i;
    the columns are the Pauli masks S_X = S_Z of the qubit test, kept as a
    multiset.
    """

    generator: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("generator", mode="before")
    @classmethod
    def _as_bits(cls, v):
        return as_bits(v, "generator")

    @model_validator(mode="after")
    def _validate(self) -> "CodeF2":
        G = self.generator
        if G.ndim != 2 or G.shape[0] < 1:
            raise ValueError(f"Generator must be a non-empty k x n matrix, got shape {G.shape}")
        k, n = G.shape
        if k > n:
            raise ValueError(f"Generator has k={k} rows but only n={n} columns")
        if gf2_rank(G) != k:
            raise ValueError("Generator rows are linearly dependent over F_2")
        return self

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "CodeF2":
        """Build a code from '0101' row strings of equal length."""
        lengths = {len(r) for r in rows}
        if len(lengths) > 1:
            raise ValueError(f"Generator rows have different lengths {sorted(lengths)}")
        return cls(generator=np.stack([as_bits(r, "row") for r in rows]))

    @property
    def k(self) -> int:
        return int(self.generator.shape[0])

    @property
    def n(self) -> int:
        return int(self.generator.shape[1])

    @property
    def columns(self) -> np.ndarray:
        """(n, k) array; row j is column j of the generator."""
        return self.generator.T.copy()

    def rows_as_strings(self) -> list[str]:
        return [bit_string(row) for row in self.generator]


class PauliWord(BaseModel):
    """sigma^W(mask) = W^(mask_1) (x) ... (x) W^(mask_k) for W in {X, Z}."""

    kind: Literal["X", "Z"]
    mask: tuple[int, ...]

    model_config = ConfigDict(frozen=True)

    @field_validator("mask", mode="before")
    @classmethod
    def _as_tuple(cls, v):
        return tuple(int(b) for b in as_bits(v, "mask"))

    @model_validator(mode="after")
    def _validate(self) -> "PauliWord":
        if not self.mask:
            raise ValueError("Pauli word must act on at least one qubit")
        return self

    @property
    def k(self) -> int:
        return len(self.mask)


class CodeDistance(BaseModel):
    distance: int
    relative_distance: float


class QubitTestReport(BaseModel):
    """Parameters of the Pauli-pair block of a code-based qubit test.

    Attributes
    ----------
    columns : list[str]
        S_X = S_Z, one k-bit string per generator column
    spans : bool
        Whether the columns span F_2^k
    gap : float
        Spectral gap of the ideal game polynomial, d_rel / 2
    beta : float
        Synchronisation parameter of the reported distribution
    diagonal_mass : float
        beta / (4n) on each same-question pair of the synchronised block
    pair_mass : float
        (1 - beta) / (4n) on each cross pair (x1, x2), (x2, x1)
    restriction_factor : float
        c with nu' <= c nu between the block and the full test
    robustness : str
        Symbolic form of the resulting robustness function
    """

    k: int
    n: int
    columns: list[str]
    column_rank: int
    spans: bool
    distance: int
    relative_distance: float
    gap: float
    beta: float
    diagonal_mass: float
    pair_mass: float
    restriction_factor: float
    robustness: str


class ReedMullerReport(BaseModel):
    """Distance of a concatenated Reed-Muller / Hadamard code against its lower bound."""

    t: int
    m: int
    d: int
    k: int
    n: int
    distance: int | None
    distance_bound: float
    holds: bool | None
