"""Spectral-scan decomposition of almost synchronous strategies into ME pieces.

A projective strategy is cut along the spectral projections P = chi_(>= l)(rho)
of one player's reduced density; compressing the measurements to each range
gives maximally entangled strategies whose mixture approximates the original.
"""

from typing import Literal

import numpy as np
from loguru import logger

from src.core.exceptions import ContractViolation, InvariantViolation
from src.decomposition.schemas import (
    Block,
    BlockPartition,
    LambdaFilterReport,
    LevelStatistics,
    LevelStats,
    MEComponentsReport,
    PMEComponentsReport,
    SpectralScan,
)
from src.games.calculator import winning_probability
from src.games.schemas import Game
from src.linalg.calculator import dagger, herm_eig, opnorm, pvm_residual, reduced_densities
from src.rounding.calculator import round_family
from src.strategies.calculator import associated_symmetric, correlation, dsync, me_strategy
from src.strategies.schemas import BipartiteStrategy

MERGE_TOL = 1e-11
DENSITY_TOL = 1e-10
PVM_TOL = 1e-10
MEMBER_TOL = 1e-12
CLAIM_FACTOR = (np.sqrt(2.0) + 1.0) ** 2
OMEGA_FACTOR = 8.0 * np.sqrt(2.5 + np.sqrt(2.0))

Side = Literal["A", "B"]


def spectral_scan(rho) -> SpectralScan:
    """Finite spectral scan of a density matrix.

    Eigenvalues within 1e-11 of each other share a level and zero
    eigenvalues carry no weight.

    Raises
    ------
    ContractViolation
        If rho is not Hermitian, positive and of unit trace
    """
    eig = herm_eig(rho)
    w = eig.eigenvalues
    if w[-1] < -DENSITY_TOL or abs(w.sum() - 1.0) > DENSITY_TOL:
        raise ContractViolation("Input is not a density matrix")

    thresholds, ranks = [], []
    for i, value in enumerate(w):
        if value <= MERGE_TOL:
            break
        if thresholds and thresholds[-1] - value <= MERGE_TOL:
            ranks[-1] = i + 1
        else:
            thresholds.append(float(value))
            ranks.append(i + 1)
    thresholds = np.array(thresholds)
    ranks = np.array(ranks)
    gaps = thresholds - np.append(thresholds[1:], 0.0)
    return SpectralScan(
        thresholds=thresholds, ranks=ranks, weights=gaps * ranks, basis=eig.eigenvectors
    )


def compress(family, W) -> np.ndarray:
    """W* A W for every operator of an (X, n, d, d) family and a d x r isometry."""
    return np.einsum("ip,xaij,jq->xapq", np.conj(W), family, W, optimize=True)


def projection_commutator(family, Q, nu_a) -> float:
    """E_(x~nu_A) sum_a ||A Q - Q A||_2^2 / Tr(Q)."""
    D = family @ Q - Q @ family
    per_question = np.sum(np.abs(D) ** 2, axis=(1, 2, 3))
    return float(np.asarray(nu_a) @ per_question / np.trace(Q).real)


def compression_defect(family, Q, nu_a) -> float:
    """E_(x~nu_A) sum_a Tr((A - Q A Q)^2 Q) / Tr(Q)."""
    E = family - Q @ family @ Q
    per_question = np.einsum("xaij,xajk,ki->x", E, E, Q, optimize=True).real
    return float(np.asarray(nu_a) @ per_question / np.trace(Q).real)


def _side(S: BipartiteStrategy, side: Side) -> tuple[np.ndarray, np.ndarray, int]:
    rho_a, rho_b = reduced_densities(S.psi, S.dim_a, S.dim_b)
    if side == "A":
        return S.A, rho_a, 0
    if side == "B":
        return S.B, rho_b, 1
    raise ContractViolation(f"side must be 'A' or 'B', got {side!r}")


def _require_projective(family: np.ndarray) -> None:
    residual = pvm_residual(family)
    if residual > PVM_TOL:
        raise ContractViolation(f"Decomposition needs a projective strategy (residual {residual:.3e})")


def level_strategy(family, scan: SpectralScan, j: int) -> BipartiteStrategy:
    """The ME strategy on H_lambda with the compressed family P A P."""
    return me_strategy(compress(family, scan.isometry(j)))


def _level_stats(
    family, scan: SpectralScan, j: int, nu_a, game: Game | None
) -> tuple[BipartiteStrategy, LevelStats]:
    P = scan.projection(j)
    S_level = level_strategy(family, scan, j)
    omega = None if game is None else winning_probability(game, correlation(S_level))
    return S_level, LevelStats(
        threshold=float(scan.thresholds[j]),
        rank=int(scan.ranks[j]),
        weight=float(scan.weights[j]),
        commutator=projection_commutator(family, P, nu_a),
        defect=compression_defect(family, P, nu_a),
        dsync=dsync(S_level, nu_a),
        omega=omega,
    )


def me_components(
    S: BipartiteStrategy,
    nu_a,
    side: Side = "A",
    slack: float = 1e-9,
    strict: bool = False,
) -> tuple[list[BipartiteStrategy], MEComponentsReport]:
    """Decompose a projective strategy into ME strategies along one side's spectrum.

    Returns the per-level ME strategies and a report checking the averaged
    compression defect against sqrt(2 delta_sym) and its commutator form
    against 2 sqrt(2 delta_sym), where delta_sym is the asynchronicity of the
    associated symmetric strategy on that side.

    Raises
    ------
    ContractViolation
        If the strategy is not projective
    InvariantViolation
        In strict mode, when either bound fails beyond slack
    """
    family, rho, index = _side(S, side)
    _require_projective(family)
    scan = spectral_scan(rho)
    nu_a = np.asarray(nu_a, dtype=np.float64)

    strategies, levels = [], []
    for j in range(scan.n_levels):
        S_level, stats = _level_stats(family, scan, j, nu_a, None)
        strategies.append(S_level)
        levels.append(stats)

    defect = float(sum(s.weight * s.defect for s in levels))
    commutator = float(sum(s.weight * s.commutator for s in levels))
    delta = dsync(S, nu_a)
    delta_sym = dsync(associated_symmetric(S)[index], nu_a)
    bound = float(np.sqrt(2.0 * max(delta_sym, 0.0)))
    holds = defect <= bound + slack and commutator <= 2.0 * bound + slack
    if not holds:
        logger.warning(
            "ME decomposition bound violated", side=side, defect=defect, bound=bound, dsync=delta
        )
        if strict:
            raise InvariantViolation(f"Decomposition defect {defect} exceeds {bound}")
    return strategies, MEComponentsReport(
        side=side,
        dsync=delta,
        dsync_sym=delta_sym,
        defect=defect,
        bound=bound,
        commutator=commutator,
        commutator_bound=2.0 * bound,
        holds=holds,
        levels=levels,
    )


def level_statistics(
    G: Game, S: BipartiteStrategy, scan: SpectralScan | None = None, side: Side = "A"
) -> LevelStatistics:
    """Winning probability, commutator and defect of every level, plus alpha and beta."""
    family, rho, _ = _side(S, side)
    scan = scan if scan is not None else spectral_scan(rho)
    nu_a = G.nu_a

    C = correlation(S)
    mixture = np.zeros_like(C)
    levels = []
    for j in range(scan.n_levels):
        S_level, stats = _level_stats(family, scan, j, nu_a, G)
        mixture += stats.weight * correlation(S_level)
        levels.append(stats)

    alpha = float(np.sum(G.nu[:, :, None, None] * np.abs(C - mixture)))
    beta = float(sum(s.weight * s.commutator for s in levels))
    epsilon = 1.0 - winning_probability(G, C)
    return LevelStatistics(levels=levels, epsilon=epsilon, alpha=alpha, beta=beta)


def lambda_filter(stats: LevelStatistics, slack: float = 1e-9) -> LambdaFilterReport:
    """Keep the levels with omega >= 1 - sqrt(alpha) - eps and commutator <= sqrt(beta).

    Two Markov bounds give mu(Lambda) >= 1 - (alpha + eps)/(sqrt(alpha) + eps) - sqrt(beta).

    Raises
    ------
    ContractViolation
        If the statistics were computed without a game
    """
    if any(level.omega is None for level in stats.levels):
        raise ContractViolation("Level statistics need winning probabilities")
    eps = max(stats.epsilon, 0.0)
    root_alpha = float(np.sqrt(max(stats.alpha, 0.0)))
    root_beta = float(np.sqrt(max(stats.beta, 0.0)))
    omega_threshold = 1.0 - root_alpha - eps
    members = [
        j
        for j, level in enumerate(stats.levels)
        if level.omega >= omega_threshold - MEMBER_TOL and level.commutator <= root_beta + MEMBER_TOL
    ]
    measure = float(sum(stats.levels[j].weight for j in members))

    denominator = root_alpha + eps
    markov = (max(stats.alpha, 0.0) + eps) / denominator if denominator > 0 else 0.0
    bound = 1.0 - markov - root_beta
    holds = measure >= bound - slack
    if not holds:
        logger.warning("Level filter measure below its bound", measure=measure, bound=bound)
    return LambdaFilterReport(
        members=members,
        measure=measure,
        omega_threshold=omega_threshold,
        commutator_threshold=root_beta,
        bound=bound,
        bound_eps0=1.0 - root_alpha - root_beta,
        holds=holds,
    )


def _halving_groups(members: list[int], scan: SpectralScan) -> list[list[int]]:
    """Group levels from the largest rank down; a group keeps ranks above half its head's."""
    groups: list[list[int]] = []
    for j in sorted(members, key=lambda j: -scan.ranks[j]):
        if groups and scan.ranks[j] > scan.ranks[groups[-1][0]] / 2:
            groups[-1].append(j)
        else:
            groups.append([j])
    return groups


def block_partition(
    G: Game,
    S: BipartiteStrategy,
    scan: SpectralScan,
    stats: LevelStatistics,
    selection: LambdaFilterReport,
    side: Side = "A",
    slack: float = 1e-9,
) -> tuple[list[BipartiteStrategy], BlockPartition]:
    """Orthogonal blocks Q_i = P_(lambda_i) - P_(lambda_(i+1)) over the filtered levels.

    Each block is checked against commutator <= (sqrt 2 + 1)^2 sqrt(beta),
    dsync <= half of that, the winning-probability lower bound, and
    dsync = commutator / 2 for its compressed ME strategy.

    Raises
    ------
    ContractViolation
        If no level passed the filter or the strategy is not projective
    """
    if not selection.members:
        raise ContractViolation("The level filter kept no levels")
    family, _, _ = _side(S, side)
    _require_projective(family)
    nu_a = G.nu_a
    groups = _halving_groups(selection.members, scan)
    heads = [int(scan.ranks[g[0]]) for g in groups] + [0]

    eps = max(stats.epsilon, 0.0)
    beta = max(stats.beta, 0.0)
    commutator_bound = CLAIM_FACTOR * np.sqrt(beta)
    dsync_bound = commutator_bound / 2
    omega_bound = (
        1.0 - 2 * eps - 2 * np.sqrt(max(stats.alpha, 0.0)) - 6 * np.sqrt(beta) - OMEGA_FACTOR * beta**0.25
    )

    strategies, blocks, projections = [], [], []
    for group, top, bottom in zip(groups, heads[:-1], heads[1:]):
        W = scan.basis[:, bottom:top]
        Q = W @ dagger(W)
        S_block = me_strategy(compress(family, W))
        commutator = projection_commutator(family, Q, nu_a)
        block_dsync = dsync(S_block, nu_a)
        omega = winning_probability(G, correlation(S_block))
        strategies.append(S_block)
        projections.append(Q)
        blocks.append(
            Block(
                levels=group,
                rank=top - bottom,
                commutator=commutator,
                dsync=block_dsync,
                omega=omega,
                commutator_holds=commutator <= commutator_bound + slack,
                dsync_holds=block_dsync <= dsync_bound + slack,
                omega_holds=omega >= omega_bound - slack,
                commutation_dsync_holds=block_dsync <= commutator / 2 + slack,
            )
        )

    orthogonality = max(
        (opnorm(Qi @ Qj) for i, Qi in enumerate(projections) for Qj in projections[i + 1 :]),
        default=0.0,
    )
    completeness = opnorm(sum(projections) - scan.projection(groups[0][0]))
    holds = (
        all(
            b.commutator_holds and b.dsync_holds and b.omega_holds and b.commutation_dsync_holds
            for b in blocks
        )
        and orthogonality <= 1e-10
        and completeness <= 1e-10
    )
    if not holds:
        logger.warning("Block partition check failed", blocks=len(blocks), beta=beta)
    return strategies, BlockPartition(
        blocks=blocks,
        commutator_bound=float(commutator_bound),
        dsync_bound=float(dsync_bound),
        omega_bound=float(omega_bound),
        orthogonality_residual=orthogonality,
        completeness_residual=completeness,
        holds=holds,
    )


def pme_components(
    S: BipartiteStrategy,
    nu,
    side: Side = "A",
    rng: np.random.Generator | None = None,
) -> tuple[list[BipartiteStrategy], PMEComponentsReport]:
    """Round every compressed level to a PVM and report the resulting defects.

    No bound is asserted; the report gives the per-level tau-weighted
    rounding defect, its mu-average and the correlation shift of the PME
    mixture.
    """
    family, rho, _ = _side(S, side)
    nu = np.asarray(nu, dtype=np.float64)
    nu_a = nu.sum(axis=1)
    scan = spectral_scan(rho)

    strategies, defects = [], []
    mixture = np.zeros((S.n_questions, S.n_questions, S.n_answers, S.n_answers))
    for j in range(scan.n_levels):
        rounded, report = round_family(compress(family, scan.isometry(j)), nu_a, None, rng)
        S_level = me_strategy(rounded)
        strategies.append(S_level)
        defects.append(report.gamma)
        mixture += scan.weights[j] * correlation(S_level)

    shift = float(np.sum(nu[:, :, None, None] * np.abs(correlation(S) - mixture)))
    return strategies, PMEComponentsReport(
        level_defects=defects,
        defect=float(np.dot(scan.weights, defects)),
        correlation_shift=shift,
    )
