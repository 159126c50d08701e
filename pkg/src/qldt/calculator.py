"""Codes, Pauli words and the spectral gap of the stabilizer-type game polynomial.

Qubit registers are ordered with qubit 1 as the most significant bit of a
basis index, and the two-player space is Alice's register (x) Bob's register.
"""

import itertools
from typing import Literal

import numpy as np
from loguru import logger

from src.core.exceptions import BudgetExceeded, ContractViolation, DimensionMismatch
from src.games.calculator import spectral_gap
from src.games.schemas import Game
from src.linalg.calculator import kron_all
from src.linalg.schemas import CMatrix
from src.linalg.sampling import check_dims
from src.qldt.fields import (
    ENUMERATION_LIMIT,
    as_bits,
    bit_string,
    gf2_rank,
    gf_mul,
    gf_pow,
    hadamard_bits,
    message_weights,
)
from src.qldt.schemas import CodeDistance, CodeF2, PauliWord, QubitTestReport, ReedMullerReport
from src.strategies.calculator import me_strategy
from src.strategies.schemas import BipartiteStrategy

PAULI_DENSE_LIMIT = 12
POLYNOMIAL_DENSE_LIMIT = 6
RESTRICTION_FACTOR = 4.0

PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def _generator(code: CodeF2 | np.ndarray) -> np.ndarray:
    if isinstance(code, CodeF2):
        return code.generator
    G = as_bits(code, "generator")
    if G.ndim != 2 or G.shape[0] < 1 or G.shape[1] < 1:
        raise ContractViolation(f"Generator must be a non-empty k x n matrix, got shape {G.shape}")
    return G


def codeword_weights(code: CodeF2 | np.ndarray) -> np.ndarray:
    """Hamming weight of every codeword, indexed by message integer.

    Bit i of the message index is logical bit i.

    Raises
    ------
    BudgetExceeded
        If k > 24
    """
    G = _generator(code)
    k = G.shape[0]
    if k > ENUMERATION_LIMIT:
        raise BudgetExceeded(f"Enumerating 2^{k} codewords exceeds the budget of 2^{ENUMERATION_LIMIT}")
    weights = np.empty(1 << k, dtype=np.int64)
    for offset, chunk in message_weights(G):
        weights[offset : offset + chunk.size] = chunk
    return weights


def code_distance(code: CodeF2 | np.ndarray) -> CodeDistance:
    """Minimum weight over nonzero codewords by exhaustive enumeration.

    Parameters
    ----------
    code : CodeF2 or array_like
        A validated code, or a raw k x n 0/1 matrix; dependent rows give
        distance 0

    Raises
    ------
    BudgetExceeded
        If k > 24
    """
    G = _generator(code)
    k, n = G.shape
    best = n
    for offset, weights in message_weights(G):
        if offset == 0:
            weights = weights[1:]
        if weights.size:
            best = min(best, int(weights.min()))
    logger.debug("Enumerated code distance", k=k, n=n, distance=best)
    return CodeDistance(distance=best, relative_distance=best / n)


def encode(code: CodeF2, logical) -> np.ndarray:
    """Physical word a_phys,j = sum_i a_logic,i E_ij over F_2.

    Raises
    ------
    DimensionMismatch
        If the logical word does not have k bits
    """
    a = as_bits(logical, "logical word").ravel()
    if a.size != code.k:
        raise DimensionMismatch(f"Logical word has {a.size} bits, code needs {code.k}")
    return ((a.astype(np.int64) @ code.generator) % 2).astype(np.uint8)


def _mask_int(bits) -> int:
    """Basis-index mask of a bit vector; qubit 1 is the most significant bit."""
    value = 0
    for b in np.asarray(bits).ravel():
        value = (value << 1) | int(b)
    return value


def pauli_word(w: PauliWord) -> CMatrix:
    """Dense sigma^W(mask), a self-adjoint unitary on (C^2)^(x)k.

    Raises
    ------
    BudgetExceeded
        If k > 12
    """
    if w.k > PAULI_DENSE_LIMIT:
        raise BudgetExceeded(f"Dense Pauli words are limited to {PAULI_DENSE_LIMIT} qubits, got {w.k}")
    identity = np.eye(2, dtype=np.complex128)
    return kron_all(*(PAULI[w.kind] if bit else identity for bit in w.mask))


def qldt_polynomial(code: CodeF2) -> CMatrix:
    """T = 1/2 + 1/(4n) sum_(W in {X, Z}) sum_j sigma^W(col_j) (x) sigma^W(col_j).

    Built entrywise from the signed permutations of the Pauli pairs, on 4^k
    dimensions.

    Raises
    ------
    BudgetExceeded
        If k > 6
    """
    k, n = code.k, code.n
    if k > POLYNOMIAL_DENSE_LIMIT:
        raise BudgetExceeded(f"Dense game polynomial is limited to k <= {POLYNOMIAL_DENSE_LIMIT}, got {k}")
    D = 4**k
    check_dims(D)
    index = np.arange(D, dtype=np.uint64)
    diagonal = np.full(D, 0.5)
    T = np.zeros((D, D), dtype=np.complex128)
    weight = 1.0 / (4 * n)
    for column in code.columns:
        m = _mask_int(column)
        pair = np.uint64((m << k) | m)
        # Z (x) Z is diagonal with sign (-1)^popcount
        parity = (np.bitwise_count(index & pair) & 1).astype(np.float64)
        diagonal += weight * (1.0 - 2.0 * parity)
        # X (x) X flips the masked bits on both registers
        T[index, index ^ pair] += weight
    T[index, index] += diagonal
    return T


def bell_state(a, b) -> CMatrix:
    """(x)_i |psi_(a_i b_i)> with |psi_ab> = (|0 a> + (-1)^b |1 a'>) / sqrt 2.

    Pair i couples Alice's qubit i with Bob's qubit i; the result is laid
    out as Alice's register (x) Bob's register.
    """
    a = as_bits(a, "a").ravel()
    b = as_bits(b, "b").ravel()
    if a.size != b.size:
        raise DimensionMismatch(f"Bell labels have {a.size} and {b.size} bits")
    k = a.size
    dim = 2**k
    alice = np.arange(dim, dtype=np.uint64)
    bob = alice ^ np.uint64(_mask_int(a))
    signs = 1.0 - 2.0 * (np.bitwise_count(alice & np.uint64(_mask_int(b))) & 1)
    psi = np.zeros(dim * dim, dtype=np.complex128)
    psi[(alice * np.uint64(dim) + bob).astype(np.int64)] = signs / np.sqrt(dim)
    return psi


def _message_bits(m: int, k: int) -> np.ndarray:
    return np.array([(m >> i) & 1 for i in range(k)], dtype=np.uint8)


def bell_frame(k: int) -> CMatrix:
    """Unitary whose column (m_a 2^k + m_b) is bell_state of the message bits of m_a, m_b."""
    if k > POLYNOMIAL_DENSE_LIMIT:
        raise BudgetExceeded(f"Dense Bell frame is limited to k <= {POLYNOMIAL_DENSE_LIMIT}, got {k}")
    dim = 2**k
    columns = [
        bell_state(_message_bits(ma, k), _message_bits(mb, k))
        for ma, mb in itertools.product(range(dim), repeat=2)
    ]
    return np.stack(columns, axis=1)


def bell_eigenvalue(code: CodeF2, a, b) -> float:
    """1 - (w(encode(a)) + w(encode(b))) / (2n), the eigenvalue of T on |psi_ab>."""
    weight = int(encode(code, a).sum()) + int(encode(code, b).sum())
    return 1.0 - weight / (2 * code.n)


def bell_spectrum(code: CodeF2) -> np.ndarray:
    """All 4^k eigenvalues of T in Bell-frame order, from codeword weights alone."""
    w = codeword_weights(code)
    return 1.0 - (w[:, None] + w[None, :]).ravel() / (2 * code.n)


def qldt_gap(code: CodeF2, method: Literal["fast", "dense"] = "fast") -> float:
    """Spectral gap of the stabilizer-type game polynomial.

    The fast path returns d / (2n) from codeword enumeration (k <= 24); the
    dense path diagonalises qldt_polynomial (k <= 6).
    """
    if method == "fast":
        return code_distance(code).relative_distance / 2
    if method == "dense":
        return spectral_gap(qldt_polynomial(code))
    raise ContractViolation(f"method must be 'fast' or 'dense', got {method!r}")


def stabilizer_game(code: CodeF2, beta: float | None = None) -> Game:
    """The Pauli-pair block of the qubit test as a game on 4n questions.

    Question "W<j>.<s>" asks for the +1/-1 outcome (answers "0"/"1") of
    sigma^W(col_j), copy s in {1, 2}. The two copies of each (W, j) are
    asked together and win on equal answers. Without beta the cross pairs
    (x1, x2), (x2, x1) carry 1/(4n) each; with beta each same-question pair
    gets beta / (4n) and the cross pairs (1 - beta) / (4n).
    """
    if beta is not None and not 0.0 < beta < 1.0:
        raise ContractViolation(f"beta must lie in the open interval (0, 1), got {beta}")
    n = code.n
    questions = tuple(f"{W}{j}.{s}" for W in ("X", "Z") for j in range(n) for s in (1, 2))
    X = len(questions)
    nu = np.zeros((X, X))
    predicate = np.zeros((X, X, 2, 2))
    same = 0.0 if beta is None else beta
    for first in range(0, X, 2):
        block = slice(first, first + 2)
        nu[block, block] = (1.0 - same) / (4 * n)
        nu[first, first] = nu[first + 1, first + 1] = same / (4 * n)
        predicate[block, block] = np.eye(2)
    return Game(
        questions=questions,
        answers={q: ("0", "1") for q in questions},
        nu=nu,
        predicate=predicate,
    )


def ideal_pauli_strategy(code: CodeF2) -> BipartiteStrategy:
    """PME strategy answering "W<j>.<s>" with the spectral projections of sigma^W(col_j)."""
    family = []
    identity = np.eye(2**code.k, dtype=np.complex128)
    for W in ("X", "Z"):
        for column in code.columns:
            sigma = pauli_word(PauliWord(kind=W, mask=tuple(int(c) for c in column)))
            projections = np.stack([(identity + sigma) / 2, (identity - sigma) / 2])
            family.extend([projections, projections])
    return me_strategy(np.stack(family))


def qubit_test_report(code: CodeF2 | np.ndarray, beta: float = 0.5) -> QubitTestReport:
    """Summarise a code as a qubit test: column set, spanning, distance and gap.

    Parameters
    ----------
    code : CodeF2 or array_like
        A validated code or a raw k x n 0/1 column-set matrix
    beta : float
        Synchronisation parameter in (0, 1)
    """
    if not 0.0 < beta < 1.0:
        raise ContractViolation(f"beta must lie in the open interval (0, 1), got {beta}")
    G = _generator(code)
    k, n = G.shape
    rank = gf2_rank(G)
    spans = rank == k
    distance = code_distance(G)
    if not spans:
        logger.warning("Column set does not span F_2^k", k=k, rank=rank)
    return QubitTestReport(
        k=k,
        n=n,
        columns=[bit_string(c) for c in G.T],
        column_rank=rank,
        spans=spans,
        distance=distance.distance,
        relative_distance=distance.relative_distance,
        gap=distance.relative_distance / 2,
        beta=beta,
        diagonal_mass=beta / (4 * n),
        pair_mass=(1.0 - beta) / (4 * n),
        restriction_factor=RESTRICTION_FACTOR,
        robustness=(
            "kappa'(eps) = poly(kappa(C eps) / gap) with universal constants;"
            " the constants are not computable from this construction"
        ),
    )


def reed_muller_generator(t: int, m: int, d: int) -> CodeF2:
    """Binary code from degree-<=d polynomials in m variables over F_(2^t).

    A message is one coefficient per monomial of individual degree <= d,
    each a t-bit field symbol, so k = t (d+1)^m. Every polynomial is
    evaluated on all of F_(2^t)^m and each symbol Hadamard-encoded into 2^t
    bits, so n = 2^(t(m+1)).

    Raises
    ------
    ContractViolation
        If d >= 2^t (the evaluation map is then not injective)
    """
    if m < 1 or d < 0:
        raise ContractViolation(f"Need m >= 1 and d >= 0, got m={m}, d={d}")
    q = 2**t
    if d >= q:
        raise ContractViolation(f"Individual degree d={d} must be below the field size {q}")
    check_dims(t * (d + 1) ** m, q ** (m + 1))
    points = list(itertools.product(range(q), repeat=m))
    monomials = list(itertools.product(range(d + 1), repeat=m))
    rows = []
    for exponents in monomials:
        values = []
        for point in points:
            value = 1
            for x, e in zip(point, exponents):
                value = gf_mul(value, gf_pow(x, e, t), t)
            values.append(value)
        for bit in range(t):
            symbol = 1 << bit
            rows.append(np.concatenate([hadamard_bits(gf_mul(symbol, v, t), t) for v in values]))
    return CodeF2(generator=np.stack(rows))


def reed_muller_report(t: int, m: int, d: int) -> ReedMullerReport:
    """Check D >= (1/2)(1 - m d / 2^t) 2^(t(m+1)) by enumeration when k <= 24."""
    code = reed_muller_generator(t, m, d)
    q = 2**t
    bound = 0.5 * (1 - m * d / q) * q ** (m + 1)
    distance = holds = None
    if code.k <= ENUMERATION_LIMIT:
        distance = code_distance(code).distance
        holds = distance >= bound - 1e-9
        if not holds:
            logger.warning("Reed-Muller distance bound violated", t=t, m=m, d=d, distance=distance)
    return ReedMullerReport(
        t=t, m=m, d=d, k=code.k, n=code.n, distance=distance, distance_bound=bound, holds=holds
    )
