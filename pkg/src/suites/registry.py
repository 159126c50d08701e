"""Registered property suites: one seeded trial function per invariant family.

A trial receives its own generator, the configured dimension range and the
slack, and returns a Check. The position of a suite in SUITES is its spawn
index, so adding a suite at the end never changes earlier trials.
"""

from collections.abc import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.exceptions import ContractViolation
from src.decomposition.calculator import me_components, spectral_scan
from src.dilation.calculator import (
    dilation_residuals,
    isometry_estimate,
    nearby_dimension_bound,
    schmidt_distance_bound,
    spec_gap_witness,
    strong_residual,
    trace_sandwich,
    vna_residuals,
)
from src.dilation.conversion import vna_roundtrip
from src.dilation.instances import finite_vna_witness, perturbed_witness
from src.dilation.schemas import DilationWitness
from src.games.calculator import dsync_value_bound, holder_bound, value_transfer_bound
from src.games.instances import random_synchronous_game, uniform_nu
from src.linalg.calculator import dagger, schatten_norm
from src.linalg.sampling import (
    haar_state,
    perturbed_pvm,
    random_density,
    random_isometry,
    random_povm,
    random_projection,
)
from src.qldt.calculator import (
    bell_frame,
    bell_spectrum,
    ideal_pauli_strategy,
    qldt_gap,
    qldt_polynomial,
)
from src.qldt.instances import random_code
from src.rounding.calculator import exponent_curve, nearest_pvm, povm_pair_opnorm, replacement_bound
from src.strategies.calculator import correlation, me_strategy, symmetric_dsync_estimates
from src.strategies.instances import near_synchronous_strategy, random_pme_strategy, random_strategy
from src.suites.schemas import Check

Dims = tuple[int, int]
Trial = Callable[[np.random.Generator, Dims, float], Check]

SCAN_TOL = 1e-10
AGREEMENT_TOL = 1e-9
ROUNDING_ETA = 0.05
ROUNDTRIP_ETA = 0.01
EXPONENT_ETAS = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)


class Suite(BaseModel):
    """A named invariant family and the trial that samples it.

    Attributes
    ----------
    min_pass_rate : float
        Pass rate below which the suite fails
    hard : bool
        False for suites that only report numbers
    """

    name: str
    trial: Trial
    min_pass_rate: float = 1.0
    hard: bool = True

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def _dim(rng: np.random.Generator, dims: Dims) -> int:
    return int(rng.integers(dims[0], dims[1] + 1))


def sync_value(rng, dims, slack) -> Check:
    game = random_synchronous_game(rng, 3, 2)
    d = _dim(rng, dims)
    report = dsync_value_bound(game, correlation(random_strategy(rng, 3, 2, d, d)), slack)
    return Check(holds=report.holds, value=report.omega, bound=report.bound)


def beta_transfer(rng, dims, slack) -> Check:
    game = random_synchronous_game(rng, 3, 2)
    d = _dim(rng, dims)
    beta = float(rng.uniform(0.05, 0.95))
    reference = correlation(random_pme_strategy(rng, 3, 2, d))
    other = correlation(random_strategy(rng, 3, 2, d, d))
    report = value_transfer_bound(game, beta, reference, other, slack)
    return Check(holds=report.holds, value=report.gap_original, bound=report.bound)


def symmetric_dsync(rng, dims, slack) -> Check:
    S = random_strategy(rng, 3, 2, _dim(rng, dims), _dim(rng, dims))
    report = symmetric_dsync_estimates(S, rng.dirichlet(np.ones(3)), slack)
    return Check(holds=report.holds, value=1.0 - report.dsync, bound=report.product_bound)


def replacement(rng, dims, slack) -> Check:
    S = near_synchronous_strategy(rng, 3, 2, _dim(rng, dims), float(rng.uniform(0.0, 0.3)))
    report = replacement_bound(S, uniform_nu(3), slack=slack)
    return Check(holds=report.holds, value=report.shift, bound=report.bound)


def holder(rng, dims, slack) -> Check:
    game = random_synchronous_game(rng, 3, 3)
    d = _dim(rng, dims)
    first = correlation(random_strategy(rng, 3, 3, d, d))
    second = correlation(random_strategy(rng, 3, 3, d, d))
    report = holder_bound(game, first, second, slack)
    return Check(holds=report.holds, value=report.omega_gap, bound=report.correlation_distance)


def povm_pair(rng, dims, slack) -> Check:
    d, n = _dim(rng, dims), int(rng.integers(1, 5))
    value = povm_pair_opnorm(random_povm(rng, d, n + 1)[:n], random_povm(rng, d, n + 1)[:n])
    return Check(holds=value <= 4.0 + slack, value=value, bound=4.0)


def schmidt_bound(rng, dims, slack) -> Check:
    da, db = _dim(rng, dims), _dim(rng, dims)
    report = schmidt_distance_bound(haar_state(rng, da * db), haar_state(rng, da * db), da, db, slack)
    return Check(holds=report.holds, value=report.value, bound=report.bound)


def isometry(rng, dims, slack) -> Check:
    d = _dim(rng, dims)
    D = d + _dim(rng, dims)
    report = isometry_estimate(random_isometry(rng, D, d), random_projection(rng, D, int(rng.integers(0, D + 1))), slack)
    return Check(holds=report.holds, value=report.value, bound=report.bound)


def dimension_bound(rng, dims, slack) -> Check:
    m = _dim(rng, dims) + 1
    d = int(rng.integers(1, m + 1))
    V = random_isometry(rng, m, d)
    witness = DilationWitness(V_A=V, V_B=np.conj(V), aux=[1.0], nu_hat=[[1.0]])
    S = me_strategy(np.eye(d, dtype=np.complex128)[None, None])
    S_tilde = me_strategy(np.eye(m, dtype=np.complex128)[None, None])
    eps = dilation_residuals(S, S_tilde, witness).r_state
    report = nearby_dimension_bound(d, m, eps, slack)
    return Check(holds=report.holds, value=float(d), bound=report.bound)


def sandwich(rng, dims, slack) -> Check:
    m, k = _dim(rng, dims), int(rng.integers(1, 3))
    n = int(rng.integers(1, m * k + 1))
    S, S_tilde, witness = finite_vna_witness(rng, 2, 2, m, k, n, float(rng.uniform(0.0, 0.5)))
    report = trace_sandwich(vna_residuals(S, S_tilde, witness, np.full(2, 0.5)), slack)
    return Check(holds=report.holds, value=report.trace_p, bound=report.lower)


def scan_identity(rng, dims, slack) -> Check:
    rho = random_density(rng, 2 * _dim(rng, dims))
    value = schatten_norm(spectral_scan(rho).reconstruct() - rho, 1)
    return Check(holds=value <= SCAN_TOL, value=value, bound=SCAN_TOL)


def decomposition_bound(rng, dims, slack) -> Check:
    S = near_synchronous_strategy(rng, 3, 2, 2 * _dim(rng, dims), float(rng.uniform(0.0, 0.1)))
    _, report = me_components(S, np.full(3, 1 / 3), slack=slack)
    return Check(holds=report.holds, value=report.defect, bound=report.bound)


def rounding(rng, dims, slack) -> Check:
    family = perturbed_pvm(rng, _dim(rng, dims), 3, float(rng.uniform(0.0, ROUNDING_ETA)))
    _, report = nearest_pvm(family, rng=rng, slack=slack)
    return Check(holds=report.holds, value=report.defect, bound=report.bound)


def qldt_agreement(rng, dims, slack) -> Check:
    code = random_code(rng, 4, 6)
    fast, dense = qldt_gap(code, "fast"), qldt_gap(code, "dense")
    spectrum = np.sort(bell_spectrum(code))[::-1]
    frame = bell_frame(code.k)
    rotated = dagger(frame) @ qldt_polynomial(code) @ frame
    off_diagonal = float(np.abs(rotated - np.diag(np.diag(rotated))).max())
    value = max(abs(fast - dense), abs(fast - (spectrum[0] - spectrum[1])), off_diagonal)
    return Check(holds=value <= AGREEMENT_TOL, value=value, bound=AGREEMENT_TOL)


def gap_witness(rng, dims, slack) -> Check:
    code = random_code(rng, 3, 5)
    report = spec_gap_witness(ideal_pauli_strategy(code), qldt_polynomial(code), slack)
    return Check(holds=report.holds, value=report.deviation, bound=report.bound)


def roundtrip(rng, dims, slack) -> Check:
    S, S_tilde, witness = perturbed_witness(rng, 2, 2, 2, 2, float(rng.uniform(0.0, ROUNDTRIP_ETA)))
    report = vna_roundtrip(S, S_tilde, witness, slack)
    return Check(holds=report.holds, value=report.epsilon_out, bound=report.bound)


def strong(rng, dims, slack) -> Check:
    S, S_tilde, witness = perturbed_witness(rng, 2, 2, 2, 2, float(rng.uniform(0.0, 0.5)))
    report = strong_residual(S, S_tilde, witness, slack)
    return Check(holds=report.holds, value=report.value, bound=report.bound)


def exponents(rng, dims, slack) -> Check:
    d = _dim(rng, dims)
    deltas, defects = [], []
    for eta in EXPONENT_ETAS:
        _, report = nearest_pvm(perturbed_pvm(rng, d, 3, eta), rng=rng, slack=slack)
        deltas.append(report.delta)
        defects.append(report.defect)
    try:
        fit = exponent_curve(deltas, defects)
    except ContractViolation as e:
        return Check(holds=True, detail=str(e))
    return Check(holds=True, value=fit.slope, detail=f"intercept={fit.intercept:.17g}")


SUITES: tuple[Suite, ...] = (
    Suite(name="sync-value", trial=sync_value),
    Suite(name="beta-transfer", trial=beta_transfer),
    Suite(name="symmetric-dsync", trial=symmetric_dsync),
    Suite(name="replacement", trial=replacement),
    Suite(name="holder", trial=holder),
    Suite(name="povm-pair", trial=povm_pair),
    Suite(name="schmidt-bound", trial=schmidt_bound),
    Suite(name="isometry-estimate", trial=isometry),
    Suite(name="dimension-bound", trial=dimension_bound),
    Suite(name="trace-sandwich", trial=sandwich),
    Suite(name="scan-identity", trial=scan_identity),
    Suite(name="decomposition-bound", trial=decomposition_bound),
    Suite(name="rounding", trial=rounding, min_pass_rate=0.99),
    Suite(name="qldt-gap", trial=qldt_agreement),
    Suite(name="gap-witness", trial=gap_witness),
    Suite(name="vna-roundtrip", trial=roundtrip),
    Suite(name="strong-residual", trial=strong),
    Suite(name="exponents", trial=exponents, hard=False),
)

SUITE_NAMES: tuple[str, ...] = tuple(s.name for s in SUITES)


def select(names) -> list[tuple[int, Suite]]:
    """(spawn index, suite) pairs for the requested names, all suites when empty.

    Raises
    ------
    ContractViolation
        On an unknown suite name
    """
    names = tuple(names)
    unknown = sorted(set(names) - set(SUITE_NAMES))
    if unknown:
        raise ContractViolation(f"Unknown suite(s) {unknown}; known suites are {list(SUITE_NAMES)}")
    return [(i, s) for i, s in enumerate(SUITES) if not names or s.name in names]
