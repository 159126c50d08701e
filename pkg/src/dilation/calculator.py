"""Residuals of local dilations and vNA-dilations, and the estimates around them.

Vectors on (H~_A (x) K_A) (x) (H~_B (x) K_B) are handled as matrices whose
rows index Alice's dilated space; H~ is the major factor on each side, so
(V_A (x) V_B) psi is the matrix V_A Psi V_B^T.
"""

import math
from collections.abc import Callable

import numpy as np
from loguru import logger

from src.config import get_settings
from src.core.exceptions import (
    ContractViolation,
    DegenerateSpectrum,
    DimensionMismatch,
    InvariantViolation,
    TruncationError,
)
from src.dilation.schemas import (
    Ampliation,
    ClosenessReport,
    CounterexampleReport,
    DilationWitness,
    DimensionReport,
    Estimate,
    GapWitnessReport,
    MeasureConversionReport,
    ResidualTriple,
    SandwichReport,
    StrongResidualReport,
    VNAResiduals,
    VNAWitness,
)
from src.linalg.calculator import (
    as_matrix,
    as_square,
    dagger,
    degeneracy_tol,
    herm_eig,
    herm_eigvals,
    hermitize,
    opnorm,
    polar,
    schatten_norm,
    schmidt,
)
from src.linalg.schemas import CMatrix
from src.strategies.calculator import is_maximally_entangled
from src.strategies.schemas import BipartiteStrategy, TracialStrategy

SLACK = 1e-9
LEAK_TOL = 1e-9
UNIT_TOL = 1e-10
OVERLAP_TOL = 1e-8
GAP_WITNESS_BOUND = 1.0 / (16.0 + 12.0 * np.sqrt(2.0))
PHASE_GRID = 16


def _violated(message: str, strict: bool, **extra) -> None:
    logger.warning(message, **extra)
    if strict:
        raise InvariantViolation(message)


def reorder_dilated_state(vec, ta: int, tb: int, ka: int, kb: int, inverse: bool = False) -> CMatrix:
    """Regroup H~_A (x) H~_B (x) K_A (x) K_B as (H~_A (x) K_A) (x) (H~_B (x) K_B).

    With inverse=True the map goes the other way.
    """
    vec = np.asarray(vec, dtype=np.complex128).ravel()
    if vec.size != ta * tb * ka * kb:
        raise DimensionMismatch(f"Vector of length {vec.size} does not factor as {ta}x{tb}x{ka}x{kb}")
    shape = (ta, ka, tb, kb) if inverse else (ta, tb, ka, kb)
    return vec.reshape(shape).transpose(0, 2, 1, 3).ravel()


def tensor_aux(M: np.ndarray, aux: np.ndarray) -> np.ndarray:
    """Stacked (..., ta, tb) matrices tensored with a ka x kb auxiliary matrix."""
    ta, tb = M.shape[-2:]
    ka, kb = aux.shape
    out = np.einsum("...ij,ab->...iajb", M, aux, optimize=True)
    return out.reshape(*M.shape[:-2], ta * ka, tb * kb)


def weighted_square(diff: np.ndarray, nu: np.ndarray) -> float:
    """sum_x nu(x) sum_a ||diff[x, a]||_F^2."""
    return float(nu @ np.sum(np.abs(diff) ** 2, axis=(1, 2, 3)))


def aux_dims(S: BipartiteStrategy, S_tilde: BipartiteStrategy, witness: DilationWitness) -> tuple[int, int]:
    """(dim K_A, dim K_B) implied by the witness, after checking every shape.

    Raises
    ------
    DimensionMismatch
        If the isometries, auxiliary state, question or answer sets disagree
    """
    rows_a, cols_a = witness.V_A.shape
    rows_b, cols_b = witness.V_B.shape
    if cols_a != S.dim_a or cols_b != S.dim_b:
        raise DimensionMismatch(
            f"Isometries act on {cols_a} x {cols_b}, strategy lives on {S.dim_a} x {S.dim_b}"
        )
    ka, rest_a = divmod(rows_a, S_tilde.dim_a)
    kb, rest_b = divmod(rows_b, S_tilde.dim_b)
    if rest_a or rest_b or ka * kb != witness.aux.size:
        raise DimensionMismatch(
            f"Isometry ranges {rows_a} x {rows_b} do not factor through {S_tilde.dim_a} x {S_tilde.dim_b}"
            f" with an auxiliary state of length {witness.aux.size}"
        )
    X = witness.nu_hat.shape[0]
    if any(family.shape[0] != X for family in (S.A, S.B, S_tilde.A, S_tilde.B)):
        raise DimensionMismatch(f"Strategies must have {X} questions per player")
    if S.A.shape[1] != S_tilde.A.shape[1] or S.B.shape[1] != S_tilde.B.shape[1]:
        raise DimensionMismatch("Strategies offer different answer sets")
    return ka, kb


def dilation_residuals(
    S: BipartiteStrategy, S_tilde: BipartiteStrategy, witness: DilationWitness
) -> ResidualTriple:
    """State, Alice and Bob residuals of a local dilation witness.

    The measurement residuals are weighted by the marginals of witness.nu_hat.

    Raises
    ------
    DimensionMismatch
        If the witness does not fit the two strategies
    """
    ka, kb = aux_dims(S, S_tilde, witness)
    VA, VB = witness.V_A, witness.V_B
    Aux = witness.aux.reshape(ka, kb)
    Psi, Psi_t = S.state_matrix, S_tilde.state_matrix
    nu_a = witness.nu_hat.sum(axis=1)
    nu_b = witness.nu_hat.sum(axis=0)

    target = reorder_dilated_state(
        np.kron(S_tilde.psi, witness.aux), S_tilde.dim_a, S_tilde.dim_b, ka, kb
    ).reshape(VA.shape[0], VB.shape[0])
    r_state = float(np.linalg.norm(VA @ Psi @ VB.T - target))

    lhs_a = VA @ S.A @ Psi @ VB.T
    rhs_a = tensor_aux(S_tilde.A @ Psi_t, Aux)
    lhs_b = VA @ Psi @ np.swapaxes(S.B, -1, -2) @ VB.T
    rhs_b = tensor_aux(Psi_t @ np.swapaxes(S_tilde.B, -1, -2), Aux)
    return ResidualTriple(
        r_state=r_state,
        r_A=float(np.sqrt(weighted_square(lhs_a - rhs_a, nu_a))),
        r_B=float(np.sqrt(weighted_square(lhs_b - rhs_b, nu_b))),
    )


def strong_residual(
    S: BipartiteStrategy,
    S_tilde: BipartiteStrategy,
    witness: DilationWitness,
    slack: float = SLACK,
    strict: bool = False,
) -> StrongResidualReport:
    """Joint-operator residual over (x, y) ~ nu_hat, checked against 3 max(triple).

    Raises
    ------
    InvariantViolation
        In strict mode, when the joint residual exceeds three times the triple
    """
    ka, kb = aux_dims(S, S_tilde, witness)
    VA, VB = witness.V_A, witness.V_B
    Aux = witness.aux.reshape(ka, kb)

    left = VA @ S.A @ S.state_matrix
    right = np.swapaxes(S.B, -1, -2) @ VB.T
    lhs = np.einsum("xaij,ybjk->xaybik", left, right, optimize=True)
    joint = np.einsum(
        "xaij,jk,ybkl->xaybil",
        S_tilde.A,
        S_tilde.state_matrix,
        np.swapaxes(S_tilde.B, -1, -2),
        optimize=True,
    )
    rhs = tensor_aux(joint, Aux)
    per_pair = np.sum(np.abs(lhs - rhs) ** 2, axis=(1, 3, 4, 5))
    value = float(np.sqrt(np.sum(witness.nu_hat * per_pair)))

    triple = dilation_residuals(S, S_tilde, witness)
    bound = 3.0 * triple.epsilon
    holds = value <= bound + slack
    if not holds:
        _violated("Joint residual exceeds three times the triple residual", strict, value=value, bound=bound)
    return StrongResidualReport(value=value, triple=triple, bound=bound, holds=holds)


def split_answers(S: BipartiteStrategy, n: int) -> BipartiteStrategy:
    """Strategy answering (a, i) for i < n with the operators A^x_a / n."""
    if n < 1:
        raise ContractViolation(f"Split factor must be positive, got {n}")
    return S.model_copy(
        update={"A": np.repeat(S.A, n, axis=1) / n, "B": np.repeat(S.B, n, axis=1) / n}
    )


def scaled_povm_counterexample(
    S: BipartiteStrategy, S_tilde: BipartiteStrategy, witness: DilationWitness, n: int
) -> CounterexampleReport:
    """Strong and triple residuals once every answer is split into n equal parts.

    The joint residual shrinks like 1/n and the measurement residuals like
    1/sqrt(n), so no constant bounds the triple by the joint residual.
    """
    S_n, S_tilde_n = split_answers(S, n), split_answers(S_tilde, n)
    report = strong_residual(S_n, S_tilde_n, witness)
    return CounterexampleReport(n=n, strong=report.value, triple=report.triple)


def _unit(psi, name: str) -> CMatrix:
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > UNIT_TOL:
        raise ContractViolation(f"{name} must be a unit vector")
    return psi


def schmidt_distance_bound(psi, psi_tilde, dim_a: int, dim_b: int, slack: float = SLACK) -> Estimate:
    """||lambda - mu||_2 <= ||psi - psi~|| for the descending Schmidt sequences."""
    psi = _unit(psi, "psi")
    psi_tilde = _unit(psi_tilde, "psi_tilde")
    lam = schmidt(psi, dim_a, dim_b).coefficients
    mu = schmidt(psi_tilde, dim_a, dim_b).coefficients
    size = max(lam.size, mu.size)
    value = float(np.linalg.norm(np.pad(lam, (0, size - lam.size)) - np.pad(mu, (0, size - mu.size))))
    bound = float(np.linalg.norm(psi - psi_tilde))
    return Estimate(name="schmidt_distance", value=value, bound=bound, holds=value <= bound + slack)


def isometry_estimate(V, P, slack: float = 1e-10) -> Estimate:
    """Largest eigenvalue of (V - W)*(V - W) - 2 (V - PV)*(V - PV), W = polar part of PV.

    The operator inequality holds when the value is at most zero.

    Raises
    ------
    ContractViolation
        If V is not an isometry or P not a projection
    DimensionMismatch
        If P does not act on the range of V
    """
    V = as_matrix(V)
    P = as_square(P)
    if P.shape[0] != V.shape[0]:
        raise DimensionMismatch(f"Projection of size {P.shape[0]} cannot act on {V.shape[0]} rows")
    if opnorm(dagger(V) @ V - np.eye(V.shape[1])) > UNIT_TOL:
        raise ContractViolation("V is not an isometry")
    if opnorm(P @ P - P) > UNIT_TOL or opnorm(P - dagger(P)) > UNIT_TOL:
        raise ContractViolation("P is not an orthogonal projection")
    W, _ = polar(P @ V)
    D = V - P @ V
    E = V - W
    value = float(herm_eigvals(hermitize(dagger(E) @ E - 2.0 * dagger(D) @ D))[0])
    return Estimate(name="isometry_estimate", value=value, bound=0.0, holds=value <= slack)


def nearby_dimension_bound(dim: int, dim_tilde: int, epsilon: float, slack: float = SLACK) -> DimensionReport:
    """dim H >= (1 - eps^2) dim H~ for ME states eps apart after a local dilation."""
    if dim < 1 or dim_tilde < 1 or epsilon < 0:
        raise ContractViolation("Dimensions must be positive and epsilon non-negative")
    bound = (1.0 - epsilon**2) * dim_tilde
    return DimensionReport(
        dim=dim, dim_tilde=dim_tilde, epsilon=epsilon, bound=bound, holds=dim >= bound - slack
    )


def kappa_conversion(kappa: Callable[[float], float], eps: float, delta: float, c: float = 1.0) -> float:
    """Robustness of the lifted self-test: kappa(24 sqrt(delta) + eps) + 9 c delta."""
    if eps < 0 or delta < 0:
        raise ContractViolation(f"eps and delta must be non-negative, got {eps}, {delta}")
    if c < 1:
        raise ContractViolation(f"Marginal ratio c must be at least 1, got {c}")
    return float(kappa(24.0 * math.sqrt(delta) + eps) + 9.0 * c * delta)


def _full_block(S: TracialStrategy, name: str) -> int:
    if len(S.algebra.blocks) != 1:
        raise ContractViolation(f"{name} must live on a single full matrix algebra")
    return S.algebra.dim


def _check_vna(S: TracialStrategy, S_tilde: TracialStrategy, witness: VNAWitness) -> None:
    n = _full_block(S, "S")
    m = _full_block(S_tilde, "S_tilde")
    if n != witness.n or m != witness.ideal_dim:
        raise DimensionMismatch(
            f"Witness maps {witness.ideal_dim} x {witness.aux_dim} into {witness.n},"
            f" strategies live on {m} and {n}"
        )
    if S.A.shape[:2] != S_tilde.A.shape[:2]:
        raise DimensionMismatch("Strategies have different question or answer sets")


def ampliate(witness: VNAWitness, slots: int | None = None) -> Ampliation:
    """Finite truncation of (M (x) M_0)^inf holding I, P and W.

    By default the truncation spans TRUNCATION_FACTOR times the largest
    dimension in play, and at least enough slots to fit P beside I.

    Raises
    ------
    TruncationError
        If explicit slots cannot hold P, or W leaks outside P (.) I
    """
    mk, n = witness.dim, witness.n
    needed = 1 + math.ceil(n / mk)
    if slots is None:
        factor = get_settings().TRUNCATION_FACTOR
        slots = max(math.ceil(factor * max(n, mk) / mk), needed)
    elif slots < needed:
        raise TruncationError(f"{slots} slots of dimension {mk} cannot hold I and a projection of rank {n}")

    total = slots * mk
    identity = np.eye(total, dtype=np.complex128)
    base = identity[:, :mk]
    embed = identity[:, mk : mk + n]
    P = embed @ dagger(embed)
    I = base @ dagger(base)
    W = embed @ witness.w @ dagger(base)
    leak = opnorm(W - P @ W @ I)
    if leak > LEAK_TOL:
        raise TruncationError(f"W leaks {leak:.3e} outside the truncation")
    return Ampliation(P=P, I=I, W=W, embed=embed, base=base, slots=slots)


def vna_residuals(
    S: TracialStrategy,
    S_tilde: TracialStrategy,
    witness: VNAWitness,
    nu_a,
    slots: int | None = None,
) -> VNAResiduals:
    """Operator residual and trace deficits of a vNA-dilation witness.

    Both strategies must live on full matrix algebras, M_n for S and M_m for
    S_tilde; the auxiliary algebra is M_k with its normalised trace.

    Raises
    ------
    ContractViolation
        If either algebra has more than one block
    DimensionMismatch
        If the witness, strategies and nu_a disagree
    TruncationError
        If the truncation cannot hold the witness
    """
    _check_vna(S, S_tilde, witness)
    nu_a = np.asarray(nu_a, dtype=np.float64)
    if nu_a.shape != (S.A.shape[0],):
        raise DimensionMismatch(f"nu_a must have length {S.A.shape[0]}, got {nu_a.shape}")
    amp = ampliate(witness, slots)
    mk, n = witness.dim, witness.n

    lifted = amp.embed @ S.A @ dagger(amp.embed)
    pulled = dagger(amp.base) @ dagger(amp.W) @ lifted @ amp.W @ amp.base
    ideal = np.kron(S_tilde.A, np.eye(witness.aux_dim))
    op_residual = weighted_square(ideal - pulled, nu_a) / mk

    WW = amp.W @ dagger(amp.W)
    return VNAResiduals(
        op_residual=op_residual,
        p1=float(np.trace(amp.P - WW).real) / n,
        p2=float(np.trace(amp.I - dagger(amp.W) @ amp.W).real) / mk,
        trace_p=float(np.trace(amp.P).real) / mk,
    )


def trace_sandwich(residuals: VNAResiduals, slack: float = SLACK) -> SandwichReport:
    """1 - delta <= tau^inf(P) <= 1 / (1 - delta) with delta = max(p1, p2)."""
    delta = max(residuals.p1, residuals.p2)
    lower = 1.0 - delta
    upper = 1.0 / (1.0 - delta) if delta < 1.0 else np.inf
    holds = lower - slack <= residuals.trace_p <= upper + slack
    if not holds:
        logger.warning("Trace sandwich violated", delta=delta, trace_p=residuals.trace_p)
    return SandwichReport(delta=delta, trace_p=residuals.trace_p, lower=lower, upper=upper, holds=holds)


def measure_conversion(
    S: TracialStrategy,
    S_tilde: TracialStrategy,
    witness: VNAWitness,
    slack: float = SLACK,
    strict: bool = False,
) -> MeasureConversionReport:
    """Compare measurement distances in M (x) M_0 and in N, question by question.

    Raises
    ------
    ContractViolation
        If W is not a partial isometry
    InvariantViolation
        In strict mode, when either side exceeds its bound
    """
    if not witness.is_partial_isometry:
        raise ContractViolation("Measurement conversion needs W to be a partial isometry")
    _check_vna(S, S_tilde, witness)
    w = witness.w
    mk, n = witness.dim, witness.n
    ideal = np.kron(S_tilde.A, np.eye(witness.aux_dim))

    m_side = np.sum(np.abs(ideal - dagger(w) @ S.A @ w) ** 2, axis=(1, 2, 3)) / mk
    n_side = np.sum(np.abs(w @ ideal @ dagger(w) - S.A) ** 2, axis=(1, 2, 3)) / n
    eps = max(1.0 - float(np.trace(w @ dagger(w)).real) / n, 1.0 - float(np.trace(dagger(w) @ w).real) / mk)
    if eps < 1.0:
        m_bounds = 2.0 * eps + n_side / (1.0 - eps)
        n_bounds = (2.0 * eps + m_side) / (1.0 - eps)
    else:
        m_bounds = n_bounds = np.full_like(m_side, np.inf)
    holds = bool(np.all(m_side <= m_bounds + slack) and np.all(n_side <= n_bounds + slack))
    if not holds:
        _violated("Measurement conversion bound violated", strict, epsilon=eps)
    return MeasureConversionReport(
        epsilon=eps,
        m_side=m_side.tolist(),
        n_side=n_side.tolist(),
        m_bounds=m_bounds.tolist(),
        n_bounds=n_bounds.tolist(),
        holds=holds,
    )


def _simple_top(T) -> tuple[np.ndarray, np.ndarray, float]:
    eig = herm_eig(T)
    w = eig.eigenvalues
    if w.size < 2:
        raise DegenerateSpectrum("Polynomial needs at least two eigenvalues")
    gap = float(w[0] - w[1])
    if gap <= degeneracy_tol(opnorm(T)):
        raise DegenerateSpectrum(f"Top eigenvalue is degenerate (gap {gap:.3e})")
    return w, eig.eigenvectors, gap


def top_eigenspace_closeness(
    T, psi_embedded, aux_dim: int, psi_tilde=None, slack: float = SLACK, strict: bool = False
) -> ClosenessReport:
    """How far an embedded state sits from the top eigenspace of T (x) Id_K.

    Parameters
    ----------
    T : array_like
        Hermitian polynomial on H~ with a simple top eigenvalue
    psi_embedded : array_like
        Unit vector on H~ (x) K, K the minor factor
    aux_dim : int
        dim K
    psi_tilde : array_like | None
        Top eigenvector; computed from T when None

    Raises
    ------
    DegenerateSpectrum
        If the top eigenvalue of T is not simple
    ContractViolation
        If psi_tilde is given but is not the top eigenvector
    InvariantViolation
        In strict mode, when the leak or closeness exceeds its bound
    """
    w, vectors, gap = _simple_top(T)
    D = vectors.shape[0]
    top = vectors[:, 0]
    if psi_tilde is not None:
        psi_tilde = _unit(psi_tilde, "psi_tilde")
        if abs(abs(np.vdot(top, psi_tilde)) - 1.0) > OVERLAP_TOL:
            raise ContractViolation("psi_tilde is not the top eigenvector of T")
        top = psi_tilde
    psi = _unit(psi_embedded, "psi_embedded")
    if psi.size != D * aux_dim:
        raise DimensionMismatch(f"State of length {psi.size} does not factor as {D} x {aux_dim}")

    Phi = psi.reshape(D, aux_dim)
    T = np.asarray(T, dtype=np.complex128)
    omega = float(np.trace(dagger(Phi) @ T @ Phi).real)
    component = np.conj(top) @ Phi
    leak = float(np.linalg.norm(Phi - np.outer(top, component)))
    leak_bound = float(np.sqrt(max(w[0] - omega, 0.0) / gap))

    weight = float(np.linalg.norm(component))
    aux_state = component / weight if weight > 0 else np.eye(aux_dim, dtype=np.complex128)[0]
    closeness = float(np.linalg.norm(Phi - np.outer(top, aux_state)))
    holds = leak <= leak_bound + slack and closeness <= 2.0 * leak_bound + slack
    if not holds:
        _violated("Top eigenspace closeness violated", strict, leak=leak, bound=leak_bound)
    return ClosenessReport(
        leak=leak,
        leak_bound=leak_bound,
        omega=omega,
        top_eigenvalue=float(w[0]),
        gap=gap,
        closeness=closeness,
        closeness_bound=2.0 * leak_bound,
        aux_state=aux_state,
        holds=holds,
    )


def spec_gap_witness(
    S: BipartiteStrategy, T, slack: float = SLACK, strict: bool = False
) -> GapWitnessReport:
    """Mix the perfect ME state with a second eigenvector of T.

    Scans psi = (psi_0 + e^(i theta) psi_1) / sqrt 2 over a phase grid that
    contains the quarter turns and keeps the largest ||Id/n - rho_A||_1.
    Every such state wins with lambda_1 - gap / 2.

    Raises
    ------
    ContractViolation
        If the strategy is not ME or its state is not the top eigenvector
    DegenerateSpectrum
        If the top eigenvalue of T is not simple
    InvariantViolation
        In strict mode, when the deviation falls below 1 / (16 + 12 sqrt 2)
    """
    if not is_maximally_entangled(S):
        raise ContractViolation("Gap witness needs a maximally entangled strategy")
    T = np.asarray(T, dtype=np.complex128)
    if T.shape != (S.psi.size, S.psi.size):
        raise DimensionMismatch(f"Polynomial of shape {T.shape} does not act on the strategy's state")
    w, vectors, gap = _simple_top(T)
    psi0 = S.psi
    if abs(abs(np.vdot(vectors[:, 0], psi0)) - 1.0) > OVERLAP_TOL:
        raise ContractViolation("The strategy's state is not the top eigenvector of T")
    psi1 = vectors[:, 1]

    n = S.dim_a
    flat = np.eye(n) / n
    best = (-1.0, 0.0, 0.0)
    for theta in 2.0 * np.pi * np.arange(PHASE_GRID) / PHASE_GRID:
        psi = (psi0 + np.exp(1j * theta) * psi1) / np.sqrt(2.0)
        Psi = psi.reshape(n, S.dim_b)
        deviation = schatten_norm(flat - Psi @ dagger(Psi), 1)
        if deviation > best[0]:
            best = (deviation, float(theta), float(np.vdot(psi, T @ psi).real))
    deviation, phase, omega = best

    expected = float(w[0] - gap / 2.0)
    holds = deviation >= GAP_WITNESS_BOUND - slack and abs(omega - expected) <= slack * max(1.0, opnorm(T))
    if not holds:
        _violated("Gap witness deviation below bound", strict, deviation=deviation, omega=omega)
    return GapWitnessReport(
        deviation=deviation,
        bound=GAP_WITNESS_BOUND,
        omega=omega,
        expected_omega=expected,
        gap=gap,
        phase=phase,
        holds=holds,
    )
