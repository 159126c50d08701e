import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from src.core.exceptions import ContractViolation
from src.decomposition.calculator import (
    block_partition,
    lambda_filter,
    level_statistics,
    me_components,
    pme_components,
    spectral_scan,
)
from src.decomposition.schemas import LambdaFilterReport, LevelStatistics, LevelStats
from src.games.instances import agreement_game, uniform_nu
from src.linalg.calculator import opnorm, pvm_residual
from src.linalg.sampling import make_rng, random_density
from src.strategies.calculator import correlation, symmetric_strategy
from src.strategies.instances import near_synchronous_strategy, random_me_strategy, random_pme_strategy
from tests.conftest import seeds


def diagonal_two_level_strategy():
    """Diagonal PVMs on rho = diag(0.4, 0.2, 0.2, 0.2): exactly synchronous, two levels."""
    even, odd = np.diag([1.0, 0, 1, 0]), np.diag([0.0, 1, 0, 1])
    low, high = np.diag([1.0, 1, 0, 0]), np.diag([0.0, 0, 1, 1])
    A = np.array([[even, odd], [low, high]], dtype=complex)
    return symmetric_strategy(np.sqrt([0.4, 0.2, 0.2, 0.2]), A)


class TestSpectralScan:
    def test_flat(self):
        scan = spectral_scan(np.eye(3) / 3)
        assert scan.n_levels == 1
        assert scan.weights[0] == pytest.approx(1.0)
        np.testing.assert_allclose(scan.projection(0), np.eye(3), atol=1e-12)

    def test_two_levels(self):
        scan = spectral_scan(np.diag([0.75, 0.25]))
        np.testing.assert_allclose(scan.thresholds, [0.75, 0.25])
        np.testing.assert_array_equal(scan.ranks, [1, 2])
        np.testing.assert_allclose(scan.weights, [0.5, 0.5])
        np.testing.assert_allclose(np.abs(scan.projection(0)), np.diag([1.0, 0.0]), atol=1e-12)

    def test_merges_close_eigenvalues(self):
        scan = spectral_scan(np.diag([0.5 + 1e-13, 0.5 - 1e-13, 0.0]))
        assert scan.n_levels == 1
        assert scan.ranks[0] == 2

    def test_drops_kernel(self):
        scan = spectral_scan(np.diag([0.6, 0.4, 0.0, 0.0]))
        assert scan.ranks[-1] == 2
        assert scan.weights.sum() == pytest.approx(1.0)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(1, 8))
    def test_reconstruction(self, seed, d):
        rho = random_density(make_rng(seed), d)
        scan = spectral_scan(rho)
        assert opnorm(scan.reconstruct() - rho) <= 1e-10

    @pytest.mark.parametrize(
        "rho",
        [np.eye(2), np.diag([1.5, -0.5]), np.array([[0.5, 0.5], [0.0, 0.5]])],
        ids=["trace", "negative", "non-hermitian"],
    )
    def test_rejects_non_density(self, rho):
        with pytest.raises(ContractViolation):
            spectral_scan(rho)


class TestMEComponents:
    def test_pme_single_component(self):
        S = random_pme_strategy(make_rng(1), 2, 3, 4)
        components, report = me_components(S, [0.5, 0.5])
        assert len(components) == 1
        assert report.defect == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(correlation(components[0]), correlation(S), atol=1e-12)

    def test_rejects_povm(self):
        S = random_me_strategy(make_rng(2), 2, 2, 3)
        with pytest.raises(ContractViolation):
            me_components(S, [0.5, 0.5])

    def test_rejects_unknown_side(self):
        S = random_pme_strategy(make_rng(3), 2, 2, 2)
        with pytest.raises(ContractViolation):
            me_components(S, [0.5, 0.5], side="C")

    def test_exact_synchronous_commutes(self):
        _, report = me_components(diagonal_two_level_strategy(), [0.5, 0.5])
        assert len(report.levels) == 2
        assert report.dsync == pytest.approx(0.0, abs=1e-12)
        assert report.commutator == pytest.approx(0.0, abs=1e-12)
        assert report.holds

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, d=st.integers(2, 6), eta=st.floats(0.0, 0.2))
    def test_near_synchronous(self, seed, d, eta):
        S = near_synchronous_strategy(make_rng(seed), 3, 2, d, eta)
        _, report = me_components(S, uniform_nu(3).sum(axis=1))
        assert report.holds
        assert report.commutator == pytest.approx(2 * report.defect, rel=1e-8, abs=1e-12)

    def test_bob_side(self):
        S = near_synchronous_strategy(make_rng(4), 2, 2, 4, 0.05)
        _, report = me_components(S, [0.5, 0.5], side="B")
        assert report.side == "B"
        assert report.holds


class TestLevelFilter:
    def test_pme_is_perfect(self, consistent_game, consistent_pme):
        stats = level_statistics(consistent_game, consistent_pme)
        assert stats.alpha == pytest.approx(0.0, abs=1e-12)
        assert stats.beta == pytest.approx(0.0, abs=1e-12)
        assert stats.epsilon == pytest.approx(0.0, abs=1e-12)
        selection = lambda_filter(stats)
        assert selection.members == [0]
        assert selection.measure == pytest.approx(1.0)
        assert selection.holds

    def test_zero_alpha_beta_thresholds(self):
        G = agreement_game(uniform_nu(2), 2)
        stats = level_statistics(G, diagonal_two_level_strategy())
        selection = lambda_filter(stats)
        assert selection.omega_threshold == pytest.approx(1.0 - stats.epsilon)
        assert selection.commutator_threshold == pytest.approx(0.0, abs=1e-6)
        assert selection.members == [0, 1]

    def test_needs_winning_probabilities(self):
        level = LevelStats(threshold=1.0, rank=1, weight=1.0, commutator=0.0, defect=0.0, dsync=0.0)
        stats = LevelStatistics(levels=[level], epsilon=0.0, alpha=0.0, beta=0.0)
        with pytest.raises(ContractViolation):
            lambda_filter(stats)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(2, 6), eta=st.floats(0.0, 0.3))
    def test_markov_bound(self, seed, d, eta):
        G = agreement_game(uniform_nu(3), 2, off_diagonal="always")
        S = near_synchronous_strategy(make_rng(seed), 3, 2, d, eta)
        selection = lambda_filter(level_statistics(G, S))
        assert selection.holds
        assert selection.measure <= 1.0 + 1e-9


class TestBlockPartition:
    def test_flat_spectrum_single_block(self, consistent_game, consistent_pme):
        scan = spectral_scan(np.eye(2) / 2)
        stats = level_statistics(consistent_game, consistent_pme, scan)
        blocks, partition = block_partition(consistent_game, consistent_pme, scan, stats, lambda_filter(stats))
        assert len(blocks) == 1
        assert partition.blocks[0].rank == 2
        assert partition.completeness_residual <= 1e-10
        assert partition.holds

    def test_two_blocks_are_orthogonal(self):
        G = agreement_game(uniform_nu(2), 2)
        S = diagonal_two_level_strategy()
        scan = spectral_scan(np.diag([0.4, 0.2, 0.2, 0.2]))
        stats = level_statistics(G, S, scan)
        _, partition = block_partition(G, S, scan, stats, lambda_filter(stats))
        assert [b.rank for b in partition.blocks] == [3, 1]
        assert partition.orthogonality_residual <= 1e-10
        assert partition.completeness_residual <= 1e-10
        assert all(b.omega == pytest.approx(1.0) for b in partition.blocks)
        assert partition.holds

    def test_rejects_empty_selection(self, consistent_game, consistent_pme):
        scan = spectral_scan(np.eye(2) / 2)
        stats = level_statistics(consistent_game, consistent_pme, scan)
        empty = LambdaFilterReport(
            members=[], measure=0.0, omega_threshold=1.0, commutator_threshold=0.0,
            bound=1.0, bound_eps0=1.0, holds=False,
        )
        with pytest.raises(ContractViolation):
            block_partition(consistent_game, consistent_pme, scan, stats, empty)

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, d=st.integers(2, 8), eta=st.floats(0.0, 0.2))
    def test_block_bounds(self, seed, d, eta):
        G = agreement_game(uniform_nu(2), 2, off_diagonal="always")
        S = near_synchronous_strategy(make_rng(seed), 2, 2, d, eta)
        rho_a = S.state_matrix @ S.state_matrix.conj().T
        scan = spectral_scan(rho_a)
        stats = level_statistics(G, S, scan)
        selection = lambda_filter(stats)
        assume(selection.members)
        _, partition = block_partition(G, S, scan, stats, selection)
        assert partition.orthogonality_residual <= 1e-10
        assert partition.completeness_residual <= 1e-10
        for block in partition.blocks:
            assert block.commutator_holds and block.dsync_holds and block.commutation_dsync_holds
            assert block.dsync == pytest.approx(block.commutator / 2, abs=1e-10)


class TestPMEComponents:
    def test_projective_levels_unchanged(self):
        S = random_pme_strategy(make_rng(5), 2, 2, 3)
        components, report = pme_components(S, uniform_nu(2))
        assert len(components) == 1
        assert report.defect == pytest.approx(0.0, abs=1e-12)
        assert report.correlation_shift == pytest.approx(0.0, abs=1e-10)

    def test_rounds_povm_levels(self):
        rng = make_rng(6)
        S = random_me_strategy(rng, 2, 3, 4)
        components, report = pme_components(S, uniform_nu(2), rng=rng)
        assert all(pvm_residual(c.A) <= 1e-10 for c in components)
        assert report.defect >= 0.0
        assert len(report.level_defects) == len(components)
