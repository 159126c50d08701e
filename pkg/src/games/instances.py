"""Game constructors used by the suites, the tests and the CLI examples."""

from typing import Literal

import numpy as np

from src.games.schemas import Game


def labelled_game(nu, n_answers: int, predicate) -> Game:
    """Game with questions "0".."X-1" and answers "0".."n-1" for every question."""
    nu = np.asarray(nu, dtype=np.float64)
    X = nu.shape[0]
    questions = tuple(str(x) for x in range(X))
    answers = {x: tuple(str(a) for a in range(n_answers)) for x in questions}
    return Game(questions=questions, answers=answers, nu=nu, predicate=predicate)


def agreement_game(
    nu, n_answers: int, off_diagonal: Literal["always", "agree", "disagree"] = "always"
) -> Game:
    """Synchronous game won on equal questions iff the answers agree.

    Off-diagonal question pairs are always won, won on agreement or won on
    disagreement, depending on `off_diagonal`.
    """
    nu = np.asarray(nu, dtype=np.float64)
    X, n = nu.shape[0], n_answers
    agree = np.eye(n)
    off = {"always": np.ones((n, n)), "agree": agree, "disagree": 1.0 - agree}[off_diagonal]
    predicate = np.broadcast_to(off, (X, X, n, n)).copy()
    idx = np.arange(X)
    predicate[idx, idx] = agree
    return labelled_game(nu, n, predicate)


def uniform_nu(n_questions: int, diagonal_only: bool = False) -> np.ndarray:
    if diagonal_only:
        return np.eye(n_questions) / n_questions
    return np.full((n_questions, n_questions), 1.0 / n_questions**2)


def random_synchronous_game(rng: np.random.Generator, n_questions: int, n_answers: int) -> Game:
    """Random synchronous game with positive diagonal mass.

    nu is a random symmetric table with every diagonal entry at least a fifth
    of the mean; same-question rounds are won exactly on agreement and
    cross-question rounds carry a random symmetric predicate.
    """
    X, n = n_questions, n_answers
    M = rng.random((X, X))
    nu = M + M.T + np.diag(np.full(X, 0.2 + rng.random()))
    nu /= nu.sum()

    predicate = np.zeros((X, X, n, n))
    for x in range(X):
        predicate[x, x] = np.eye(n)
        for y in range(x + 1, X):
            block = (rng.random((n, n)) < 0.5).astype(np.float64)
            predicate[x, y] = block
            predicate[y, x] = block.T
    return labelled_game(nu, n, predicate)
