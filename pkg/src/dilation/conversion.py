"""Conversions between local dilations and vNA-dilations of ME strategies.

Going to the vNA picture first replaces the auxiliary state by a maximally
entangled one, then cuts the isometries down to partial isometries into
H~ (x) K'. Coming back completes W* to an isometry and reads the auxiliary
state off the GNS vector of the auxiliary algebra.
"""

import math
from typing import Literal

import numpy as np
from loguru import logger
from scipy import linalg as sla

from src.core.exceptions import ContractViolation, DimensionMismatch, InvariantViolation
from src.dilation.calculator import (
    SLACK,
    aux_dims,
    dilation_residuals,
    tensor_aux,
    trace_sandwich,
    vna_residuals,
    weighted_square,
)
from src.dilation.schemas import (
    AuxRounding,
    ConversionReport,
    DilationWitness,
    Estimate,
    PartialIsometryReport,
    RoundTripReport,
    VNAWitness,
)
from src.linalg.calculator import dagger, herm_eig, max_entangled, opnorm, polar, schmidt
from src.strategies.calculator import is_maximally_entangled, tracial_from_me
from src.strategies.schemas import BipartiteStrategy, TracialAlgebra, TracialStrategy

ZERO_TOL = 1e-12
PROJECTION_TOL = 1e-10
CANONICAL_TOL = 1e-10
VNA_FACTOR = 1700.0
DILATION_FACTOR = 4.0 + math.sqrt(2.0)

Direction = Literal["a", "b"]


def me_aux_round(lam, kappa, n: int, slack: float = SLACK) -> AuxRounding:
    """Flat Schmidt sequence with multiplicity divisible by n, close to kappa.

    Parameters
    ----------
    lam : array_like
        Descending Schmidt coefficients of the dilated ME state, flat on m entries
    kappa : array_like
        Descending Schmidt coefficients of psi~ (x) aux, constant on aligned
        blocks of n
    n : int
        dim H~

    Returns
    -------
    AuxRounding
        With m >= n the first floor(m/n) n entries get 1/sqrt(m), the next
        block of n keeps that value only if kappa there reaches 1/(2 sqrt m),
        and the result is normalised. With m < n the output is 1/sqrt(n) on
        n entries.
    """
    if n < 1:
        raise ContractViolation(f"Block size must be positive, got {n}")
    lam = np.asarray(lam, dtype=np.float64).ravel()
    kappa = np.asarray(kappa, dtype=np.float64).ravel()
    for name, seq in (("lam", lam), ("kappa", kappa)):
        if np.any(seq < -ZERO_TOL) or np.any(np.diff(seq) > ZERO_TOL):
            raise ContractViolation(f"{name} must be descending and non-negative")

    m = int(np.sum(lam > ZERO_TOL))
    q = m // n
    size = max(lam.size, kappa.size, (q + 1) * n)
    lam = np.pad(lam, (0, size - lam.size))
    kappa = np.pad(kappa, (0, size - kappa.size))

    rounded = np.zeros(size)
    if m >= n:
        value = 1.0 / math.sqrt(m)
        rounded[: q * n] = value
        if kappa[q * n] >= value / 2.0:
            rounded[q * n : (q + 1) * n] = value
        rounded /= np.linalg.norm(rounded)
        branch = "wide"
    else:
        rounded[:n] = 1.0 / math.sqrt(n)
        branch = "narrow"

    distance = float(np.linalg.norm(rounded - kappa))
    bound = 2.0 * float(np.linalg.norm(lam - kappa))
    holds = distance <= bound + slack
    if not holds:
        logger.warning("Auxiliary rounding exceeds twice the Schmidt distance", distance=distance, bound=bound)
    return AuxRounding(
        coefficients=rounded,
        multiplicity=int(np.sum(rounded > 0)),
        branch=branch,
        distance=distance,
        bound=bound,
        holds=holds,
    )


def _check_projection(P, dim: int, name: str) -> np.ndarray:
    P = np.asarray(P, dtype=np.complex128)
    if P.shape != (dim, dim):
        raise DimensionMismatch(f"{name} must be {dim} x {dim}, got {P.shape}")
    if opnorm(P @ P - P) > PROJECTION_TOL or opnorm(P - dagger(P)) > PROJECTION_TOL:
        raise ContractViolation(f"{name} is not an orthogonal projection")
    return P


def _is_flat(M: np.ndarray) -> bool:
    s = sla.svdvals(M)
    s = s[s > ZERO_TOL]
    return bool(s.size) and float(s.max() - s.min()) <= PROJECTION_TOL


def partial_isometrize(
    witness: DilationWitness,
    P_A,
    P_B,
    S: BipartiteStrategy,
    S_tilde: BipartiteStrategy,
    moreover: bool = True,
    slack: float = SLACK,
    strict: bool = False,
) -> tuple[np.ndarray, np.ndarray, PartialIsometryReport]:
    """Partial isometries V'_A, V'_B from the polar decompositions of P_A V_A, P_B V_B.

    With eps = max(state, Alice) residual of the witness, the report checks
    the state residual against (1 + 2 sqrt 2) eps, Alice's residual against
    (1 + 4 sqrt 2) eps, the two kept masses against 4 eps^2 and eps^2, and,
    when ``moreover`` is set, the cross estimate against 7 eps.

    Raises
    ------
    ContractViolation
        If psi is not maximally entangled, a P is not a projection fixing
        psi~ (x) aux, or psi~ (x) aux is not maximally entangled while
        ``moreover`` is set
    InvariantViolation
        In strict mode, when an estimate fails beyond slack
    """
    if not is_maximally_entangled(S):
        raise ContractViolation("Partial isometries are built for a maximally entangled psi")
    ka, kb = aux_dims(S, S_tilde, witness)
    VA, VB = witness.V_A, witness.V_B
    P_A = _check_projection(P_A, VA.shape[0], "P_A")
    P_B = _check_projection(P_B, VB.shape[0], "P_B")

    Aux = witness.aux.reshape(ka, kb)
    # H~ major on both sides
    target = tensor_aux(S_tilde.state_matrix, Aux)
    if opnorm(P_A @ target @ P_B.T - target) > PROJECTION_TOL:
        raise ContractViolation("psi~ (x) aux must lie in the range of P_A (x) P_B")

    triple = dilation_residuals(S, S_tilde, witness)
    eps = max(triple.r_state, triple.r_A)
    VA1, _ = polar(P_A @ VA)
    VB1, _ = polar(P_B @ VB)
    Psi = S.state_matrix
    nu_a = witness.nu_hat.sum(axis=1)

    state = float(np.linalg.norm(VA1 @ Psi @ VB1.T - target))
    lhs = VA1 @ S.A @ Psi @ VB1.T
    rhs = tensor_aux(S_tilde.A @ S_tilde.state_matrix, Aux)
    measurement = math.sqrt(weighted_square(lhs - rhs, nu_a))
    kept = 1.0 - float(np.linalg.norm(VA1 @ Psi)) ** 2
    pulled = 1.0 - float(np.linalg.norm(dagger(VA1) @ target)) ** 2

    checks = [
        ("state", state, (1.0 + 2.0 * math.sqrt(2.0)) * eps),
        ("measurement", measurement, (1.0 + 4.0 * math.sqrt(2.0)) * eps),
        ("kept_mass", kept, 4.0 * eps**2),
        ("pulled_mass", pulled, eps**2),
    ]
    if moreover:
        if not _is_flat(target):
            raise ContractViolation("The cross estimate needs psi~ (x) aux to be maximally entangled")
        cross = float(np.linalg.norm(Psi @ VB1.T - dagger(VA1) @ target))
        checks.append(("cross", cross, 7.0 * eps))

    estimates = [
        Estimate(name=name, value=value, bound=bound, holds=value <= bound + slack)
        for name, value, bound in checks
    ]
    holds = all(e.holds for e in estimates)
    if not holds:
        failed = [e.name for e in estimates if not e.holds]
        logger.warning("Partial isometry estimates violated", failed=failed, epsilon=eps)
        if strict:
            raise InvariantViolation(f"Partial isometry estimates violated: {failed}")
    return VA1, VB1, PartialIsometryReport(epsilon=eps, estimates=estimates, holds=holds)


def _require_canonical(S: BipartiteStrategy, name: str) -> TracialStrategy:
    tracial = tracial_from_me(S)
    d = S.dim_a
    if np.linalg.norm(S.psi - max_entangled(d)) > CANONICAL_TOL:
        raise ContractViolation(f"{name} must use the canonical maximally entangled state")
    if np.abs(S.B - np.swapaxes(S.A, -1, -2)).max() > CANONICAL_TOL:
        raise ContractViolation(f"{name} must answer Bob's questions with the transposed family")
    return tracial


def _to_vna(
    S: BipartiteStrategy, S_tilde: BipartiteStrategy, witness: DilationWitness, slack: float
) -> tuple[VNAWitness, ConversionReport]:
    if not (is_maximally_entangled(S) and is_maximally_entangled(S_tilde)):
        raise ContractViolation("Conversion to a vNA-dilation needs ME strategies")
    ka, kb = aux_dims(S, S_tilde, witness)
    m = S_tilde.dim_a
    eps = dilation_residuals(S, S_tilde, witness).epsilon

    U, mu, Vh = sla.svd(witness.aux.reshape(ka, kb), full_matrices=False)
    lam = schmidt(S.psi, S.dim_a, S.dim_b).coefficients
    ideal = schmidt(S_tilde.psi, S_tilde.dim_a, S_tilde.dim_b).coefficients
    kappa = np.sort(np.outer(ideal, mu).ravel())[::-1]
    rounding = me_aux_round(lam, kappa, m, slack)

    flat = math.sqrt(m) * rounding.coefficients[m - 1 :: m]
    k = int(np.sum(flat > ZERO_TOL))
    if k > mu.size:
        raise ContractViolation(f"Auxiliary space of Schmidt rank {mu.size} cannot hold {k} flat values")
    KA, KB = U[:, :k], Vh[:k].T
    aux = ((KA * flat[:k]) @ KB.T).ravel()
    rounded_witness = DilationWitness(V_A=witness.V_A, V_B=witness.V_B, aux=aux, nu_hat=witness.nu_hat)

    P_A = np.kron(np.eye(m), KA @ dagger(KA))
    P_B = np.kron(np.eye(S_tilde.dim_b), KB @ dagger(KB))
    VA1, _, iso = partial_isometrize(rounded_witness, P_A, P_B, S, S_tilde, slack=slack)

    w = dagger(VA1) @ np.kron(np.eye(m), KA)
    vna = VNAWitness(w=w, ideal_dim=m, aux_dim=k)
    residuals = vna_residuals(
        TracialStrategy(algebra=TracialAlgebra.full(S.dim_a), A=S.A),
        TracialStrategy(algebra=TracialAlgebra.full(m), A=S_tilde.A),
        vna,
        witness.nu_hat.sum(axis=1),
    )
    sandwich = trace_sandwich(residuals, slack)
    bound = VNA_FACTOR * eps**2
    holds = residuals.epsilon <= bound + slack and sandwich.holds and rounding.holds and iso.holds
    return vna, ConversionReport(
        direction="a",
        epsilon_in=eps,
        bound=bound,
        epsilon_out=residuals.epsilon,
        holds=holds,
        sandwich=sandwich,
        aux_rounding=rounding,
        partial_isometry=iso,
    )


def _to_dilation(
    S: BipartiteStrategy, S_tilde: BipartiteStrategy, witness: VNAWitness, nu_hat, slack: float
) -> tuple[DilationWitness, ConversionReport]:
    tracial = _require_canonical(S, "S")
    tracial_tilde = _require_canonical(S_tilde, "S_tilde")
    if nu_hat is None:
        raise ContractViolation("Conversion to a local dilation needs nu_hat")
    nu_hat = np.asarray(nu_hat, dtype=np.float64)
    if nu_hat.ndim != 2 or np.abs(nu_hat - nu_hat.T).max() > ZERO_TOL:
        raise ContractViolation("nu_hat must be a symmetric distribution on question pairs")
    if not witness.is_partial_isometry:
        raise ContractViolation("Conversion to a local dilation needs W to be a partial isometry")

    residuals = vna_residuals(tracial, tracial_tilde, witness, nu_hat.sum(axis=1))
    sandwich = trace_sandwich(residuals, slack)
    eps = residuals.epsilon
    m, k, n = witness.ideal_dim, witness.aux_dim, witness.n

    # W_1* maps the complement of W W* into fresh slots H~ (x) H_1, in index order
    eig = herm_eig(np.eye(n) - witness.w @ dagger(witness.w))
    Q1 = eig.eigenvectors[:, eig.eigenvalues > 0.5]
    r1 = Q1.shape[1]
    h1 = math.ceil(r1 / m)
    V = np.zeros((m, k + h1, n), dtype=np.complex128)
    V[:, :k, :] = dagger(witness.w).reshape(m, k, n)
    if r1:
        fill = np.zeros((m * h1, n), dtype=np.complex128)
        fill[:r1] = dagger(Q1)
        V[:, k:, :] = fill.reshape(m, h1, n)
    V = V.reshape(m * (k + h1), n)

    aux = np.zeros((k + h1, k + h1), dtype=np.complex128)
    aux[:k, :k] = np.eye(k) / math.sqrt(k)
    # the two GNS vectors coincide after normalisation, so U is the identity
    dilation = DilationWitness(V_A=V, V_B=np.conj(V), aux=aux.ravel(), nu_hat=nu_hat)
    out = dilation_residuals(S, S_tilde, dilation).epsilon
    bound = DILATION_FACTOR * math.sqrt(max(eps, 0.0))
    holds = out <= bound + slack and sandwich.holds
    return dilation, ConversionReport(
        direction="b", epsilon_in=eps, bound=bound, epsilon_out=out, holds=holds, sandwich=sandwich
    )


def pme_vna_convert(
    S: BipartiteStrategy,
    S_tilde: BipartiteStrategy,
    witness: DilationWitness | VNAWitness,
    direction: Direction = "a",
    nu_hat=None,
    slack: float = SLACK,
    strict: bool = False,
) -> tuple[VNAWitness | DilationWitness, ConversionReport]:
    """Convert a witness between the two pictures and certify the new parameter.

    Direction "a" turns a local eps-dilation into a vNA-dilation with
    parameter at most 1700 eps^2 for nu_hat_A. Direction "b" turns a
    vNA-dilation with parameter eps into a local dilation with parameter at
    most (4 + sqrt 2) sqrt(eps) for ``nu_hat``; both strategies must then be
    canonical ME strategies and W a partial isometry.

    Raises
    ------
    ContractViolation
        On non-ME inputs, a witness of the wrong kind or an unknown direction
    InvariantViolation
        In strict mode, when the certified bound fails
    """
    if direction == "a":
        if not isinstance(witness, DilationWitness):
            raise ContractViolation("Direction a converts a local dilation witness")
        converted, report = _to_vna(S, S_tilde, witness, slack)
    elif direction == "b":
        if not isinstance(witness, VNAWitness):
            raise ContractViolation("Direction b converts a vNA-dilation witness")
        converted, report = _to_dilation(S, S_tilde, witness, nu_hat, slack)
    else:
        raise ContractViolation(f"direction must be 'a' or 'b', got {direction!r}")

    logger.debug(
        "Converted witness",
        direction=direction,
        epsilon_in=report.epsilon_in,
        epsilon_out=report.epsilon_out,
    )
    if not report.holds:
        logger.warning(
            "Conversion bound violated", direction=direction, value=report.epsilon_out, bound=report.bound
        )
        if strict:
            raise InvariantViolation(f"Conversion {direction} exceeds its certified bound")
    return converted, report


def vna_roundtrip(
    S: BipartiteStrategy, S_tilde: BipartiteStrategy, witness: DilationWitness, slack: float = SLACK
) -> RoundTripReport:
    """Run direction a then direction b and compare with (4 + sqrt 2) sqrt(1700) eps."""
    vna, forward = pme_vna_convert(S, S_tilde, witness, "a", slack=slack)
    _, backward = pme_vna_convert(S, S_tilde, vna, "b", nu_hat=witness.nu_hat, slack=slack)
    bound = DILATION_FACTOR * math.sqrt(VNA_FACTOR) * forward.epsilon_in
    holds = forward.holds and backward.holds and backward.epsilon_out <= bound + slack
    return RoundTripReport(
        epsilon=forward.epsilon_in,
        vna_epsilon=forward.epsilon_out,
        epsilon_out=backward.epsilon_out,
        bound=bound,
        holds=holds,
        forward=forward,
        backward=backward,
    )
