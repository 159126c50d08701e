"""Arithmetic over F_2 and the small binary extension fields F_(2^t).

F_2 vectors are numpy uint8 arrays of 0/1 entries. Elements of F_(2^t) are
ints in [0, 2^t) read as polynomials in a primitive root over F_2.
"""

import numpy as np

from src.core.exceptions import BudgetExceeded, ContractViolation

# Primitive polynomials x^t + ... + 1, bit i = coefficient of x^i
PRIMITIVE_POLYNOMIALS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
}

ENUMERATION_LIMIT = 24
LOW_BITS = 12


def as_bits(bits, name: str = "bits") -> np.ndarray:
    """Coerce a 0/1 sequence, array or '0101' string to a uint8 array."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise ContractViolation(f"{name} must only contain 0 and 1, got {bits!r}")
        return np.fromiter((int(c) for c in bits), dtype=np.uint8, count=len(bits))
    arr = np.asarray(bits)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ContractViolation(f"{name} must only contain 0 and 1")
    return arr.astype(np.uint8)


def bit_string(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


def gf2_rank(matrix) -> int:
    """Rank over F_2 by Gaussian elimination on a copy."""
    M = as_bits(matrix, "matrix").copy()
    if M.ndim != 2:
        raise ContractViolation(f"Expected a 0/1 matrix, got shape {M.shape}")
    rows, cols = M.shape
    rank = 0
    for col in range(cols):
        pivots = np.flatnonzero(M[rank:, col]) + rank
        if pivots.size == 0:
            continue
        pivot = pivots[0]
        M[[rank, pivot]] = M[[pivot, rank]]
        below = np.flatnonzero(M[:, col])
        below = below[below != rank]
        M[below] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def subset_xor_table(rows: np.ndarray) -> np.ndarray:
    """XOR of every subset of packed rows.

    Entry m is the XOR of rows[i] over the set bits i of m, so the table has
    2^len(rows) entries built by doubling. Only used for the low chunk of
    `message_weights`, at most 2^LOW_BITS entries.
    """
    table = np.zeros((1, rows.shape[1]), dtype=np.uint8)
    for row in rows:
        table = np.concatenate([table, table ^ row])
    return table


def message_weights(generator, limit: int = ENUMERATION_LIMIT):
    """Yield (offset, weights) chunks of Hamming weights of every codeword.

    The message with integer index m has logical bit i equal to bit i of m.
    The low LOW_BITS message bits are tabulated once; the high bits are
    walked in Gray-code order, so each step XORs a single generator row into
    the running word. Chunks therefore arrive out of offset order.

    Raises
    ------
    BudgetExceeded
        If the generator has more than `limit` rows
    """
    G = as_bits(generator, "generator")
    k = G.shape[0]
    if k > limit:
        raise BudgetExceeded(f"Enumerating 2^{k} codewords exceeds the budget of 2^{limit}")
    packed = np.packbits(G, axis=1)
    low_bits = min(k, LOW_BITS)
    low = subset_xor_table(packed[:low_bits])
    chunk = low.shape[0]
    word = np.zeros(packed.shape[1], dtype=np.uint8)
    for h in range(1 << (k - low_bits)):
        if h:
            word ^= packed[low_bits + (h & -h).bit_length() - 1]
        gray = h ^ (h >> 1)
        yield gray * chunk, np.bitwise_count(low ^ word).sum(axis=1, dtype=np.int64)


def _check_degree(t: int) -> None:
    if t not in PRIMITIVE_POLYNOMIALS:
        raise ContractViolation(
            f"Field degree t must be in {sorted(PRIMITIVE_POLYNOMIALS)}, got {t}"
        )


def gf_mul(x: int, y: int, t: int) -> int:
    """Product in F_(2^t): carry-less multiply reduced by the primitive polynomial."""
    _check_degree(t)
    modulus = PRIMITIVE_POLYNOMIALS[t]
    result = 0
    while y:
        if y & 1:
            result ^= x
        y >>= 1
        x <<= 1
        if x >> t:
            x ^= modulus
    return result


def gf_pow(x: int, e: int, t: int) -> int:
    result = 1
    for _ in range(e):
        result = gf_mul(result, x, t)
    return result


def hadamard_bits(symbol: int, t: int) -> np.ndarray:
    """Hadamard encoding of a field symbol: <symbol, r> over F_2 for every r in F_2^t."""
    r = np.arange(2**t, dtype=np.uint64)
    return (np.bitwise_count(r & np.uint64(symbol)) & 1).astype(np.uint8)
