import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.exceptions import ContractViolation, DimensionMismatch
from src.linalg.calculator import pvm_residual
from src.linalg.sampling import make_rng, perturbed_pvm, random_povm, random_projection, random_pvm
from src.rounding.calculator import (
    exponent_curve,
    nearest_pvm,
    povm_pair_opnorm,
    projectivize_strategy,
    replacement_bound,
    round_family,
)
from src.strategies.calculator import correlation, dsync, me_strategy
from src.strategies.instances import near_synchronous_strategy, random_pme_strategy, random_strategy
from tests.conftest import seeds


def uniform_nu(X: int) -> np.ndarray:
    return np.full((X, X), 1.0 / X**2)


class TestNearestPVM:
    def test_pvm_is_fixed(self):
        P = random_pvm(make_rng(1), 4, 3)
        rounded, report = nearest_pvm(P)
        np.testing.assert_allclose(rounded, P, atol=1e-10)
        assert report.defect == pytest.approx(0.0, abs=1e-12)
        assert report.delta == pytest.approx(0.0, abs=1e-12)

    def test_uniform_noise(self):
        A = np.stack([np.eye(2), np.eye(2)]).astype(complex) / 2
        rounded, report = nearest_pvm(A)
        assert pvm_residual(rounded) <= 1e-10
        assert report.defect == pytest.approx(0.5)
        assert report.delta == pytest.approx(0.5)
        assert report.holds

    def test_rejects_non_povm(self):
        with pytest.raises(ContractViolation):
            nearest_pvm(np.stack([np.eye(2), np.eye(2)]))

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, d=st.integers(1, 6), n=st.integers(1, 4))
    def test_output_is_pvm(self, seed, d, n):
        rng = make_rng(seed)
        rounded, report = nearest_pvm(random_povm(rng, d, n), rng=rng)
        assert pvm_residual(rounded) <= 1e-10
        assert report.defect >= -1e-12 and report.delta >= -1e-12

    def test_density_weight(self):
        rng = make_rng(3)
        rho = np.diag([0.9, 0.1]).astype(complex)
        _, weighted = nearest_pvm(random_povm(rng, 2, 2), weight=rho, rng=make_rng(4))
        assert weighted.defect >= 0.0

    def test_perturbed_pass_rate(self):
        passed = 0
        trials = 200
        for trial in range(trials):
            rng = make_rng(2024, trial)
            _, report = nearest_pvm(perturbed_pvm(rng, 4, 3, 0.02), rng=rng)
            passed += report.holds
        assert passed / trials >= 0.99


class TestRoundFamily:
    def test_averages(self):
        rng = make_rng(5)
        family = np.stack([random_povm(rng, 3, 2) for _ in range(2)])
        rounded, report = round_family(family, [0.25, 0.75])
        assert report.pvm_residual <= 1e-10
        expected = 0.25 * report.questions[0].defect + 0.75 * report.questions[1].defect
        assert report.gamma == pytest.approx(expected)
        assert rounded.shape == family.shape

    def test_nu_shape(self):
        family = np.stack([np.eye(2)[None]] * 2).astype(complex)
        with pytest.raises(DimensionMismatch):
            round_family(family, [1.0])


class TestReplacement:
    def test_identity_replacement(self):
        S = random_strategy(make_rng(6), 2, 2, 2, 3)
        report = replacement_bound(S, uniform_nu(2), S.A, S.B)
        assert report.shift == pytest.approx(0.0, abs=1e-14)
        assert report.holds

    def test_single_operator_swap(self):
        rng = make_rng(7)
        S = random_pme_strategy(rng, 2, 2, 3)
        Ahat = S.A.copy()
        Ahat[0] = S.A[0, ::-1].copy()
        report = replacement_bound(S, uniform_nu(2), Ahat, S.B)
        swapped = S.model_copy(update={"A": Ahat})
        direct = np.sum(uniform_nu(2)[:, :, None, None] * np.abs(correlation(S) - correlation(swapped)))
        assert report.shift == pytest.approx(direct, abs=1e-12)
        assert report.holds

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, eta=st.floats(0.0, 0.3))
    def test_near_synchronous(self, seed, eta):
        S = near_synchronous_strategy(make_rng(seed), 3, 2, 4, eta)
        assert replacement_bound(S, uniform_nu(3)).holds

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds)
    def test_random_strategy(self, seed):
        S = random_strategy(make_rng(seed), 2, 3, 2, 2)
        assert replacement_bound(S, uniform_nu(2)).holds


class TestProjectivize:
    def test_projective_input_unchanged(self):
        S = random_pme_strategy(make_rng(8), 3, 2, 3)
        rounded, report = projectivize_strategy(S, uniform_nu(3))
        np.testing.assert_allclose(rounded.A, S.A, atol=1e-10)
        assert report.alice.gamma == pytest.approx(0.0, abs=1e-12)
        assert report.replacement.shift == pytest.approx(0.0, abs=1e-10)

    def test_uniform_noise(self):
        family = (np.stack([np.eye(2), np.eye(2)])[None] / 2).astype(complex)
        S = me_strategy(family)
        rounded, report = projectivize_strategy(S, np.ones((1, 1)))
        assert report.alice.gamma > 0 and report.bob.gamma > 0
        assert pvm_residual(rounded.A) <= 1e-10 and pvm_residual(rounded.B) <= 1e-10
        assert report.replacement.holds

    def test_rounded_me_is_synchronous(self):
        rng = make_rng(9)
        S = random_strategy(rng, 2, 2, 3, 3)
        rounded, _ = projectivize_strategy(S, uniform_nu(2), rng)
        assert dsync(me_strategy(rounded.A), [0.5, 0.5]) == pytest.approx(0.0, abs=1e-10)


class TestPovmPair:
    def test_equal(self):
        A = random_povm(make_rng(10), 3, 3)
        assert povm_pair_opnorm(A, A) == pytest.approx(0.0, abs=1e-14)

    def test_swapped_projection(self):
        P = random_projection(make_rng(11), 4, 2)
        identity = np.eye(4)
        value = povm_pair_opnorm(np.stack([P, identity - P]), np.stack([identity - P, P]))
        assert value == pytest.approx(2.0)

    def test_rejects_excess(self):
        with pytest.raises(ContractViolation):
            povm_pair_opnorm(np.stack([np.eye(2), np.eye(2)]), np.zeros((2, 2, 2)))

    @settings(max_examples=100, deadline=None)
    @given(seed=seeds, d=st.integers(2, 16), n=st.integers(1, 4))
    def test_universal_bound(self, seed, d, n):
        rng = make_rng(seed)
        A = random_povm(rng, d, n + 1)[:n]
        Ahat = random_povm(rng, d, n + 1)[:n]
        assert povm_pair_opnorm(A, Ahat) <= 4 + 1e-9


class TestExponentCurve:
    def test_power_law(self):
        deltas = np.array([1e-4, 1e-3, 1e-2, 1e-1])
        fit = exponent_curve(deltas, 3.0 * deltas**0.25)
        assert fit.slope == pytest.approx(0.25)
        assert fit.intercept == pytest.approx(np.log(3.0))
        assert fit.points == 4

    def test_skips_zeros(self):
        fit = exponent_curve([0.0, 1e-2, 1e-1], [0.0, 1e-2, 1e-1])
        assert fit.points == 2 and fit.slope == pytest.approx(1.0)

    def test_too_few_points(self):
        with pytest.raises(ContractViolation):
            exponent_curve([0.1, 0.0], [0.2, 0.0])
