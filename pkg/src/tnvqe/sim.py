"""Statevector simulation of two-qubit-gate circuits and exact gradients.

States are dense complex vectors of length 2^n with qubit i on bit i of the
index (qubit 0 least significant).  Reshaped to (2,)*n, qubit i lives on axis
n-1-i, consistent with the tensor-network site ordering.
"""

from __future__ import annotations

import numpy as np

from .circuits import Circuit, Gate, su4_from_angles, su4_param_derivatives
from .hamiltonians import PairHamiltonian, apply_term_to_state

__all__ = [
    "zero_state",
    "apply_gate",
    "run_circuit",
    "expectation",
    "energy",
    "grad_parameter_shift",
    "grad_adjoint",
]

# Angle slots 6..8 of each gate multiply sigma(x)sigma generators with
# eigenvalues +-1; Euler slots carry sigma/2 generators with eigenvalues
# +-1/2.  The two families need different parameter-shift rules.
_K_SLOTS = frozenset((6, 7, 8))


def zero_state(n_qubits: int) -> np.ndarray:
    state = np.zeros(2**n_qubits, dtype=complex)
    state[0] = 1.0
    return state


def apply_gate(state: np.ndarray, gate: Gate | np.ndarray, pair: tuple[int, int] | None = None) -> np.ndarray:
    """Apply a two-qubit gate; returns a new statevector.

    ``gate`` is a Gate (pair taken from it) or a raw 4x4 matrix with ``pair``
    giving the sorted wire pair (p, q); matrix rows/columns are indexed by
    2*b_p + b_q.
    """
    if isinstance(gate, Gate):
        mat, (p, q) = gate.unitary(), (gate.p, gate.q)
    else:
        mat = np.asarray(gate, dtype=complex)
        if pair is None:
            raise ValueError("pair is required when passing a raw matrix")
        p, q = pair
    n = int(np.log2(state.size))
    return apply_term_to_state(state, mat, p, q, n)


def run_circuit(circuit: Circuit, theta: np.ndarray | None = None) -> np.ndarray:
    """State prepared by the circuit from |0...0>, optionally at parameters theta."""
    state = zero_state(circuit.n_qubits)
    if theta is None:
        for gate in circuit.gates:
            state = apply_gate(state, gate)
        return state
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {theta.shape}")
    for k, gate in enumerate(circuit.gates):
        state = apply_gate(state, su4_from_angles(theta[15 * k : 15 * k + 15]), (gate.p, gate.q))
    return state


def expectation(state: np.ndarray, hamiltonian: PairHamiltonian) -> float:
    """<state| sum of terms |state>, without the recorded constant shift."""
    n = hamiltonian.n_sites
    if state.size != 2**n:
        raise ValueError(f"state has {state.size} amplitudes, expected 2^{n}")
    acc = 0.0 + 0.0j
    for term in hamiltonian.terms:
        acc += np.vdot(state, apply_term_to_state(state, term.matrix, term.i, term.j, n))
    if abs(acc.imag) > 1e-8 * max(1.0, abs(acc.real)):
        raise ArithmeticError(f"expectation has imaginary part {acc.imag:.2e}")
    return float(acc.real)


def energy(circuit: Circuit, theta: np.ndarray | None, hamiltonian: PairHamiltonian) -> float:
    """Shifted-term energy of the circuit state at parameters theta."""
    return expectation(run_circuit(circuit, theta), hamiltonian)


def _apply_hamiltonian(state: np.ndarray, hamiltonian: PairHamiltonian) -> np.ndarray:
    out = np.zeros_like(state)
    n = hamiltonian.n_sites
    for term in hamiltonian.terms:
        out += apply_term_to_state(state, term.matrix, term.i, term.j, n)
    return out


def grad_parameter_shift(
    circuit: Circuit,
    theta: np.ndarray,
    hamiltonian: PairHamiltonian,
    components: "list[int] | None" = None,
) -> np.ndarray:
    """Exact gradient from shifted-parameter energy differences.

    Euler angles generate rotations with eigenvalue gap 1, so their rule is
    [E(+pi/2) - E(-pi/2)] / 2.  Interaction angles generate sigma(x)sigma
    with eigenvalue gap 2 and need [E(+pi/4) - E(-pi/4)]; the pi/2 shift
    would difference E across a full period and return zero identically.

    ``components`` restricts evaluation to those indices (two energy runs
    per entry is costly on large circuits); unevaluated entries are NaN.
    """
    theta = np.asarray(theta, dtype=float)
    if components is None:
        todo = range(theta.size)
        grad = np.empty(theta.size)
    else:
        todo = components
        grad = np.full(theta.size, np.nan)
    for l in todo:
        if l % 15 in _K_SLOTS:
            shift, scale = 0.25 * np.pi, 1.0
        else:
            shift, scale = 0.5 * np.pi, 0.5
        plus = theta.copy()
        plus[l] += shift
        minus = theta.copy()
        minus[l] -= shift
        grad[l] = scale * (energy(circuit, plus, hamiltonian) - energy(circuit, minus, hamiltonian))
    return grad


def _pair_major(state: np.ndarray, p: int, q: int, n: int) -> np.ndarray:
    """View of the state as (4, 2^(n-2)) with the (p, q) pair leading."""
    arr = state.reshape((2,) * n)
    arr = np.moveaxis(arr, (n - 1 - p, n - 1 - q), (0, 1))
    return arr.reshape(4, -1)


def grad_adjoint(circuit: Circuit, theta: np.ndarray, hamiltonian: PairHamiltonian) -> np.ndarray:
    """Gradient in one forward and one backward pass.

    Backward sweep peels one gate at a time: with lam = (product of later
    gates)^dag H |psi> and phi the state just before gate k,

        dE/d(theta_kl) = 2 Re sum_ab (dU_k/d theta_kl)[a, b] C[a, b],
        C[a, b] = sum_rest conj(lam)[a, rest] phi[b, rest],

    then both lam and the running state are pulled back through U_k^dag.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {theta.shape}")
    n = circuit.n_qubits
    psi = run_circuit(circuit, theta)
    lam = _apply_hamiltonian(psi, hamiltonian)
    grad = np.empty(theta.size)
    for k in range(len(circuit.gates) - 1, -1, -1):
        gate = circuit.gates[k]
        block = theta[15 * k : 15 * k + 15]
        u = su4_from_angles(block)
        psi = apply_gate(psi, np.conj(u).T, (gate.p, gate.q))  # state before gate k
        cmat = np.conj(_pair_major(lam, gate.p, gate.q, n)) @ _pair_major(psi, gate.p, gate.q, n).T
        for l, du in enumerate(su4_param_derivatives(block)):
            grad[15 * k + l] = 2.0 * np.real(np.sum(du * cmat))
        lam = apply_gate(lam, np.conj(u).T, (gate.p, gate.q))
    return grad
