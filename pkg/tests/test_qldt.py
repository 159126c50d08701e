import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.core.exceptions import BudgetExceeded, ContractViolation, DimensionMismatch
from src.games.calculator import analyze_synchronicity, game_polynomial, spectral_gap
from src.linalg.calculator import max_entangled
from src.linalg.sampling import make_rng
from src.qldt.calculator import (
    bell_eigenvalue,
    bell_frame,
    bell_spectrum,
    bell_state,
    code_distance,
    codeword_weights,
    encode,
    ideal_pauli_strategy,
    pauli_word,
    qldt_gap,
    qldt_polynomial,
    qubit_test_report,
    reed_muller_generator,
    reed_muller_report,
    stabilizer_game,
)
from src.qldt.fields import gf2_rank, gf_mul, message_weights
from src.qldt.schemas import CodeF2, PauliWord
from tests.conftest import X, Z


def generators(max_k: int = 3, max_n: int = 5):
    """Full-rank k x n generators as nested 0/1 lists."""

    @st.composite
    def draw(draw_):
        k = draw_(st.integers(1, max_k))
        n = draw_(st.integers(k, max_n))
        rows = draw_(
            st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=k, max_size=k)
        )
        assume(gf2_rank(rows) == k)
        return CodeF2(generator=rows)

    return draw()


class TestCodeF2:
    def test_rejects_dependent_rows(self):
        with pytest.raises(ValidationError):
            CodeF2.from_rows(["110", "110"])

    def test_rejects_wide_generator(self):
        with pytest.raises(ValidationError):
            CodeF2(generator=np.eye(2, 1))

    def test_rejects_non_binary(self):
        with pytest.raises(ValidationError):
            CodeF2.from_rows(["120"])

    def test_columns(self, hamming_code):
        assert hamming_code.k == 4 and hamming_code.n == 7
        assert hamming_code.columns.shape == (7, 4)
        np.testing.assert_array_equal(hamming_code.columns[4], [1, 1, 0, 1])


class TestDistance:
    def test_repetition(self, repetition_code):
        result = code_distance(repetition_code)
        assert result.distance == 3
        assert result.relative_distance == pytest.approx(1.0)

    def test_hamming(self, hamming_code):
        result = code_distance(hamming_code)
        assert result.distance == 3
        assert result.relative_distance == pytest.approx(3 / 7)

    def test_identity(self):
        assert code_distance(CodeF2(generator=np.eye(4, dtype=int))).distance == 1

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            code_distance(np.eye(25, dtype=int))
        with pytest.raises(BudgetExceeded):
            codeword_weights(np.eye(25, dtype=int))

    def test_weights_beyond_one_chunk(self):
        rng = make_rng(14)
        k, n = 14, 18
        generator = np.hstack([np.eye(k, dtype=np.uint8), rng.integers(0, 2, size=(k, n - k), dtype=np.uint8)])
        messages = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
        expected = ((messages @ generator) % 2).sum(axis=1)
        np.testing.assert_array_equal(codeword_weights(generator), expected)
        offsets = sorted(offset for offset, _ in message_weights(generator))
        assert offsets == [h << 12 for h in range(4)]
        assert code_distance(generator).distance == expected[1:].min()

    def test_raw_dependent_rows(self):
        assert code_distance(np.array([[1, 1, 0], [1, 1, 0]])).distance == 0

    def test_hamming_weight_enumerator(self, hamming_code):
        counts = np.bincount(codeword_weights(hamming_code), minlength=8)
        np.testing.assert_array_equal(counts, [1, 0, 0, 7, 7, 0, 0, 1])


class TestEncode:
    def test_examples(self, repetition_code, hamming_code):
        np.testing.assert_array_equal(encode(hamming_code, "0000"), np.zeros(7))
        np.testing.assert_array_equal(encode(repetition_code, [1]), [1, 1, 1])

    def test_length_mismatch(self, hamming_code):
        with pytest.raises(DimensionMismatch):
            encode(hamming_code, "101")

    @given(
        a=st.lists(st.integers(0, 1), min_size=4, max_size=4),
        b=st.lists(st.integers(0, 1), min_size=4, max_size=4),
    )
    def test_linear(self, a, b):
        hamming_code = CodeF2.from_rows(["1000110", "0100101", "0010011", "0001111"])
        summed = np.bitwise_xor(a, b)
        np.testing.assert_array_equal(
            encode(hamming_code, summed), encode(hamming_code, a) ^ encode(hamming_code, b)
        )


class TestPauliWord:
    def test_identity(self):
        np.testing.assert_array_equal(pauli_word(PauliWord(kind="X", mask="000")), np.eye(8))

    def test_single_z(self):
        np.testing.assert_array_equal(pauli_word(PauliWord(kind="Z", mask=(1,))), Z)

    def test_tensor_order(self):
        expected = np.kron(X, np.eye(2))
        np.testing.assert_array_equal(pauli_word(PauliWord(kind="X", mask="10")), expected)

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            pauli_word(PauliWord(kind="Z", mask=(1,) * 13))

    @settings(max_examples=40, deadline=None)
    @given(
        a=st.lists(st.integers(0, 1), min_size=3, max_size=3),
        b=st.lists(st.integers(0, 1), min_size=3, max_size=3),
    )
    def test_commutation_sign(self, a, b):
        sx = pauli_word(PauliWord(kind="X", mask=a))
        sz = pauli_word(PauliWord(kind="Z", mask=b))
        sign = (-1) ** int(np.dot(a, b) % 2)
        np.testing.assert_allclose(sx @ sz, sign * sz @ sx, atol=1e-15)
        np.testing.assert_allclose(sx @ sx, np.eye(8), atol=1e-15)


class TestPolynomial:
    @pytest.mark.parametrize("rows", [["111"], ["1"]])
    def test_single_logical_qubit(self, rows):
        T = qldt_polynomial(CodeF2.from_rows(rows))
        expected = np.eye(4) / 2 + (np.kron(X, X) + np.kron(Z, Z)) / 4
        np.testing.assert_allclose(T, expected, atol=1e-15)

    def test_max_entangled_is_fixed(self, hamming_code):
        T = qldt_polynomial(hamming_code)
        phi = max_entangled(2**hamming_code.k)
        assert np.vdot(phi, T @ phi).real == pytest.approx(1.0, abs=1e-12)
        w = np.linalg.eigvalsh(T)
        assert w.min() >= -1e-12 and w.max() <= 1 + 1e-12

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            qldt_polynomial(CodeF2(generator=np.eye(7, dtype=int)))


class TestBellFrame:
    def test_zero_labels_is_max_entangled(self):
        np.testing.assert_allclose(bell_state("00", "00"), max_entangled(4), atol=1e-15)

    def test_unitary(self):
        F = bell_frame(2)
        np.testing.assert_allclose(F.conj().T @ F, np.eye(16), atol=1e-12)

    @pytest.mark.parametrize("k", [1, 2])
    def test_pauli_pair_eigenvalues(self, k):
        labels = list(itertools.product((0, 1), repeat=k))
        for a, b, c in itertools.product(labels, repeat=3):
            psi = bell_state(a, b)
            xx = np.kron(pauli_word(PauliWord(kind="X", mask=c)), pauli_word(PauliWord(kind="X", mask=c)))
            zz = np.kron(pauli_word(PauliWord(kind="Z", mask=c)), pauli_word(PauliWord(kind="Z", mask=c)))
            assert np.vdot(psi, xx @ psi).real == pytest.approx((-1) ** (np.dot(b, c) % 2))
            assert np.vdot(psi, zz @ psi).real == pytest.approx((-1) ** (np.dot(a, c) % 2))

    def test_diagonalises_polynomial(self, hamming_code):
        F = bell_frame(hamming_code.k)
        D = F.conj().T @ qldt_polynomial(hamming_code) @ F
        np.testing.assert_allclose(np.diag(D).real, bell_spectrum(hamming_code), atol=1e-10)
        assert np.abs(D - np.diag(np.diag(D))).max() <= 1e-10

    def test_eigenvalue_examples(self, repetition_code):
        assert bell_eigenvalue(repetition_code, [0], [0]) == pytest.approx(1.0)
        assert bell_eigenvalue(repetition_code, [1], [0]) == pytest.approx(0.5)

    @settings(max_examples=25, deadline=None)
    @given(code=generators(max_k=4, max_n=5))
    def test_spectrum_matches_dense(self, code):
        dense = np.sort(np.linalg.eigvalsh(qldt_polynomial(code)))
        np.testing.assert_allclose(dense, np.sort(bell_spectrum(code)), atol=1e-10)


class TestGap:
    def test_repetition(self, repetition_code):
        assert qldt_gap(repetition_code) == pytest.approx(0.5)
        assert qldt_gap(repetition_code, method="dense") == pytest.approx(0.5, abs=1e-9)

    def test_hamming(self, hamming_code):
        assert qldt_gap(hamming_code) == pytest.approx(3 / 14)
        assert qldt_gap(hamming_code, method="dense") == pytest.approx(3 / 14, abs=1e-9)

    def test_identity(self):
        code = CodeF2(generator=np.eye(3, dtype=int))
        assert qldt_gap(code) == pytest.approx(1 / 6)

    def test_unknown_method(self, repetition_code):
        with pytest.raises(ContractViolation):
            qldt_gap(repetition_code, method="sparse")

    def test_four_logical_qubits(self):
        code = CodeF2.from_rows(["10001", "01001", "00101", "00011"])
        fast, dense = qldt_gap(code, "fast"), qldt_gap(code, "dense")
        spectrum = np.sort(bell_spectrum(code))[::-1]
        F = bell_frame(code.k)
        D = F.conj().T @ qldt_polynomial(code) @ F
        assert fast == pytest.approx(dense, abs=1e-9)
        assert fast == pytest.approx(spectrum[0] - spectrum[1], abs=1e-9)
        assert np.abs(D - np.diag(np.diag(D))).max() <= 1e-10

    @settings(max_examples=50, deadline=None)
    @given(code=generators(max_k=4, max_n=6))
    def test_fast_matches_dense(self, code):
        assert qldt_gap(code, "fast") == pytest.approx(qldt_gap(code, "dense"), abs=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(code=generators(max_k=3, max_n=6), data=st.data())
    def test_row_operations(self, code, data):
        assume(code.k >= 2)
        i, j = data.draw(st.permutations(range(code.k)))[:2]
        G = code.generator.copy()
        G[i] ^= G[j]
        assert qldt_gap(CodeF2(generator=G)) == pytest.approx(qldt_gap(code))


class TestStabilizerGame:
    def test_distribution(self, hamming_code):
        game = stabilizer_game(hamming_code)
        assert game.n_questions == 4 * hamming_code.n
        assert game.nu.sum() == pytest.approx(1.0)
        assert np.all(np.diag(game.nu) == 0)
        assert game.nu[0, 1] == pytest.approx(1 / 28)

    def test_synchronised_beta(self, hamming_code):
        report = analyze_synchronicity(stabilizer_game(hamming_code, beta=0.5))
        assert report.is_synchronous
        assert report.beta == pytest.approx(0.5)

    @pytest.mark.parametrize("beta", [None, 0.25, 0.5])
    def test_ideal_polynomial(self, repetition_code, beta):
        game = stabilizer_game(repetition_code, beta=beta)
        T = game_polynomial(game, ideal_pauli_strategy(repetition_code))
        np.testing.assert_allclose(T, qldt_polynomial(repetition_code), atol=1e-12)

    def test_hamming_gap(self, hamming_code):
        T = game_polynomial(stabilizer_game(hamming_code), ideal_pauli_strategy(hamming_code))
        assert spectral_gap(T) == pytest.approx(3 / 14, abs=1e-9)


class TestQubitTestReport:
    def test_repetition(self, repetition_code):
        report = qubit_test_report(repetition_code, 0.5)
        assert report.spans
        assert report.columns == ["1", "1", "1"]
        assert report.gap == pytest.approx(0.5)

    def test_hamming(self, hamming_code):
        report = qubit_test_report(hamming_code, 0.5)
        assert report.gap == pytest.approx(3 / 14)
        assert report.restriction_factor == 4.0
        assert report.diagonal_mass == pytest.approx(1 / 56)
        assert report.pair_mass == pytest.approx(1 / 56)

    def test_rank_deficient_columns(self):
        report = qubit_test_report(np.array([[1, 0, 1], [1, 0, 1]]), 0.5)
        assert not report.spans
        assert report.column_rank == 1
        assert report.gap == 0.0

    def test_rejects_beta(self, repetition_code):
        with pytest.raises(ContractViolation):
            qubit_test_report(repetition_code, 1.0)


class TestReedMuller:
    def test_field_multiplication(self):
        assert gf_mul(2, 2, 2) == 3
        for t in (1, 2, 3, 4):
            for x in range(1, 2**t):
                assert sorted(gf_mul(x, y, t) for y in range(1, 2**t)) == list(range(1, 2**t))

    def test_parameters(self):
        code = reed_muller_generator(2, 1, 1)
        assert (code.k, code.n) == (4, 16)

    @pytest.mark.parametrize("t, m, d", [(1, 1, 0), (2, 1, 1), (2, 1, 2), (3, 1, 1), (2, 2, 1)])
    def test_distance_bound(self, t, m, d):
        report = reed_muller_report(t, m, d)
        assert report.holds
        assert report.distance >= report.distance_bound

    def test_rejects_degree(self):
        with pytest.raises(ContractViolation):
            reed_muller_generator(1, 1, 2)
