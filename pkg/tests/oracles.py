"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written against the *documented* conventions
only, using different mechanics than the library: explicit bit arithmetic
instead of axis reshuffling, ``scipy.linalg.expm`` instead of closed-form
rotation matrices, ``einsum`` with per-segment labels instead of compiled
tensordot plans.  A bug in the main code paths should not be reproducible
here by construction.

Conventions (shared with the package docs):
  * statevector index = sum_k q_k 2^k, site/qubit 0 least significant;
  * a 4x4 pair operator on sites (i, j), i < j, is indexed by 2*b_i + b_j.
"""

from __future__ import annotations

import string

import numpy as np
from scipy.linalg import expm

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


# ---------------------------------------------------------------------------
# Pair operators by bit arithmetic
# ---------------------------------------------------------------------------


def dense_term_operator(mat4: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """2^n x 2^n matrix of a pair term, built entry-by-entry from bit masks."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    mask = ~((1 << i) | (1 << j))
    for col in range(dim):
        ci, cj = (col >> i) & 1, (col >> j) & 1
        base = col & mask
        for ri in (0, 1):
            for rj in (0, 1):
                row = base | (ri << i) | (rj << j)
                out[row, col] += mat4[2 * ri + rj, 2 * ci + cj]
    return out


def dense_hamiltonian(H) -> np.ndarray:
    """Sum of the (possibly shifted) term operators, accumulated in reverse
    term order so any order-dependent bug in the library path would show."""
    dim = 1 << H.n_sites
    out = np.zeros((dim, dim), dtype=complex)
    for t in reversed(H.terms):
        out += dense_term_operator(t.matrix, t.i, t.j, H.n_sites)
    return out


def term_expectation(psi: np.ndarray, mat4: np.ndarray, i: int, j: int) -> float:
    """<psi| h_ij |psi> via vectorized bit masks (no axis reshaping)."""
    n = int(psi.size).bit_length() - 1
    idx = np.arange(psi.size)
    bi, bj = (idx >> i) & 1, (idx >> j) & 1
    base = idx & ~((1 << i) | (1 << j))
    acc = 0.0 + 0.0j
    for ri in (0, 1):
        for rj in (0, 1):
            rows = base | (ri << i) | (rj << j)
            acc += np.sum(np.conj(psi[rows]) * mat4[2 * ri + rj, 2 * bi + bj] * psi)
    assert abs(acc.imag) < 1e-8 * max(1.0, abs(acc.real))
    return float(acc.real)


def hamiltonian_expectation(psi: np.ndarray, H, unshifted: bool = False) -> float:
    e = sum(term_expectation(psi, t.matrix, t.i, t.j) for t in H.terms)
    return e + H.total_shift if unshifted else e


# ---------------------------------------------------------------------------
# Network contraction by labelled einsum
# ---------------------------------------------------------------------------


def mera_statevector(net) -> np.ndarray:
    """Full statevector of a (branching) MERA, one einsum per node."""
    psi = np.ones((), dtype=complex)
    carried: list[int] = []  # segment id held by each axis of psi
    for nd in reversed(net.nodes):
        letters = iter(string.ascii_letters)
        psi_sub = [next(letters) for _ in carried]
        low_sub = [next(letters) for _ in nd.lower_segs]
        t_sub = low_sub + [psi_sub[carried.index(s)] for s in nd.upper_segs]
        keep = [k for k, s in enumerate(carried) if s not in nd.upper_segs]
        out_sub = [psi_sub[k] for k in keep] + low_sub
        spec = f"{''.join(psi_sub)},{''.join(t_sub)}->{''.join(out_sub)}"
        psi = np.einsum(spec, psi, nd.tensor)
        carried = [carried[k] for k in keep] + list(nd.lower_segs)
    order = [carried.index(net.site_segs[s]) for s in reversed(range(net.n_sites))]
    return np.transpose(psi, order).reshape(-1)


# ---------------------------------------------------------------------------
# Gate matrices by matrix exponentials, circuits by bit-indexed application
# ---------------------------------------------------------------------------


def su4(angles: np.ndarray) -> np.ndarray:
    """15-angle two-qubit unitary rebuilt from expm of the documented generators."""
    a = np.asarray(angles, dtype=float)

    def euler(tri):
        return (
            expm(-0.5j * tri[0] * _Z)
            @ expm(-0.5j * tri[1] * _Y)
            @ expm(-0.5j * tri[2] * _Z)
        )

    gen = (
        a[6] * np.kron(_X, _X) + a[7] * np.kron(_Y, _Y) + a[8] * np.kron(_Z, _Z)
    )
    return (
        np.kron(euler(a[9:12]), euler(a[12:15]))
        @ expm(-1j * gen)
        @ np.kron(euler(a[0:3]), euler(a[3:6]))
    )


def apply_u4(psi: np.ndarray, u: np.ndarray, p: int, q: int) -> np.ndarray:
    """Apply a 4x4 unitary to qubits (p, q), p < q, via bit masks."""
    idx = np.arange(psi.size)
    bp, bq = (idx >> p) & 1, (idx >> q) & 1
    base = idx & ~((1 << p) | (1 << q))
    out = np.zeros_like(psi)
    for rp in (0, 1):
        for rq in (0, 1):
            rows = base | (rp << p) | (rq << q)
            np.add.at(out, rows, u[2 * rp + rq, 2 * bp + bq] * psi)
    return out


def circuit_state(circuit, theta: np.ndarray | None = None) -> np.ndarray:
    """|0...0> pushed through the gate list with the oracle primitives."""
    psi = np.zeros(1 << circuit.n_qubits, dtype=complex)
    psi[0] = 1.0
    for k, gate in enumerate(circuit.gates):
        block = gate.angles if theta is None else theta[15 * k : 15 * k + 15]
        psi = apply_u4(psi, su4(block), gate.p, gate.q)
    return psi


# ---------------------------------------------------------------------------
# Numerical differentiation
# ---------------------------------------------------------------------------


def fd_gradient(f, x: np.ndarray, eps: float = 1e-5, components=None) -> np.ndarray:
    """Central finite differences; ``components`` restricts to an index subset
    (untouched entries come back as NaN)."""
    x = np.asarray(x, dtype=float)
    idx = range(x.size) if components is None else components
    grad = np.full(x.size, np.nan)
    for k in idx:
        plus = x.copy()
        plus[k] += eps
        minus = x.copy()
        minus[k] -= eps
        grad[k] = (f(plus) - f(minus)) / (2.0 * eps)
    return grad
