import numpy as np
import pytest
from hypothesis import strategies as st

from src.games.instances import agreement_game, uniform_nu
from src.linalg.sampling import make_rng
from src.qldt.schemas import CodeF2
from src.strategies.calculator import me_strategy

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def rng():
    return make_rng(20241017)


@pytest.fixture
def diagonal_pvm():
    """Two questions answered by the computational-basis measurement on a qubit."""
    P = np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]).astype(complex)
    return np.stack([P, P])


@pytest.fixture
def consistent_game():
    """Two-question synchronous game, uniform nu, cross pairs always won."""
    return agreement_game(uniform_nu(2), 2, off_diagonal="always")


@pytest.fixture
def consistent_pme(diagonal_pvm):
    return me_strategy(diagonal_pvm)


@pytest.fixture
def repetition_code():
    return CodeF2.from_rows(["111"])


@pytest.fixture
def hamming_code():
    return CodeF2.from_rows(["1000110", "0100101", "0010011", "0001111"])
