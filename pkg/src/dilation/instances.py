"""Seeded dilation and vNA-dilation witnesses with known residuals."""

import numpy as np
from scipy import linalg as sla

from src.core.exceptions import ContractViolation
from src.dilation.schemas import DilationWitness, VNAWitness
from src.games.instances import uniform_nu
from src.linalg.calculator import max_entangled
from src.linalg.sampling import check_dims, ginibre, random_hermitian
from src.strategies.calculator import me_strategy
from src.strategies.instances import pvm_family
from src.strategies.schemas import BipartiteStrategy, TracialAlgebra, TracialStrategy

DilationInstance = tuple[BipartiteStrategy, BipartiteStrategy, DilationWitness]
VNAInstance = tuple[TracialStrategy, TracialStrategy, VNAWitness]


def _unitary_near_identity(rng: np.random.Generator, d: int, eta: float) -> np.ndarray:
    H = random_hermitian(rng, d)
    H /= max(np.linalg.norm(H, 2), 1e-300)
    return sla.expm(1j * eta * H)


def exact_witness(
    rng: np.random.Generator, n_questions: int, n_answers: int, m: int, k: int
) -> DilationInstance:
    """S = S~ (x) Id_k on the ME state of dimension m k, with V = Id and aux = ME_k.

    Every residual of the witness is zero.
    """
    check_dims(n_questions, n_answers, m, k)
    ideal = pvm_family(rng, n_questions, n_answers, m)
    S_tilde = me_strategy(ideal)
    S = me_strategy(np.kron(ideal, np.eye(k)))
    identity = np.eye(m * k, dtype=np.complex128)
    witness = DilationWitness(
        V_A=identity, V_B=identity, aux=max_entangled(k), nu_hat=uniform_nu(n_questions)
    )
    return S, S_tilde, witness


def perturbed_witness(
    rng: np.random.Generator,
    n_questions: int,
    n_answers: int,
    m: int,
    k: int,
    eta: float,
    perturb: tuple[str, ...] = ("isometry", "aux"),
) -> DilationInstance:
    """The exact witness with V_A = exp(i eta H) and/or aux pushed eta away from ME_k."""
    S, S_tilde, witness = exact_witness(rng, n_questions, n_answers, m, k)
    V_A, aux = witness.V_A, witness.aux
    if "isometry" in perturb:
        V_A = _unitary_near_identity(rng, m * k, eta)
    if "aux" in perturb:
        aux = aux + eta * ginibre(rng, k * k, 1).ravel() / k
        aux = aux / np.linalg.norm(aux)
    return S, S_tilde, DilationWitness(V_A=V_A, V_B=witness.V_B, aux=aux, nu_hat=witness.nu_hat)


def finite_vna_witness(
    rng: np.random.Generator, n_questions: int, n_answers: int, m: int, k: int, n: int, eta: float = 0.0
) -> VNAInstance:
    """Coisometry w = first n rows of exp(i eta H) on C^(m k), with A = w (A~ (x) Id) w*.

    tau^N(P - W W*) is zero and tau(I - W* W) equals 1 - n / (m k).
    """
    check_dims(n_questions, n_answers, m, k, n)
    if n > m * k:
        raise ContractViolation(f"A coisometry onto C^{n} needs n <= m k = {m * k}")
    ideal = pvm_family(rng, n_questions, n_answers, m)
    w = _unitary_near_identity(rng, m * k, eta)[:n]
    A = w @ np.kron(ideal, np.eye(k)) @ w.conj().T
    A = (A + np.swapaxes(A.conj(), -1, -2)) / 2
    S = TracialStrategy(algebra=TracialAlgebra.full(n), A=A)
    S_tilde = TracialStrategy(algebra=TracialAlgebra.full(m), A=ideal, pvm=True)
    return S, S_tilde, VNAWitness(w=w, ideal_dim=m, aux_dim=k)
