"""Two-body spin Hamiltonians: random all-to-all models and the rainbow chain.

A Hamiltonian is stored as a list of 4x4 Hermitian pair terms h_ij (i < j),
H = sum_{i<j} h_ij.  One-body fields are folded into an adjacent pair term so
the rest of the code only ever sees two-body terms; the folding preserves H
exactly.  ``shift_negative`` subtracts each term's positive part so every
term becomes negative semidefinite, recording the total shift so reported
energies can always be mapped back to the unshifted convention.

Coupling draw order is fixed and documented per generator (pairs in
lexicographic order first, then site fields), so a (model, N, seed) triple
pins a realization unambiguously.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

__all__ = [
    "PairTerm",
    "PairHamiltonian",
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "gen_ising",
    "gen_xyz",
    "gen_heisenberg",
    "gen_rainbow",
    "shift_negative",
    "dense_matrix",
    "exact_ground_energy",
    "apply_term_to_state",
    "save_hamiltonian",
    "load_hamiltonian",
    "serialize_hamiltonian",
    "hamiltonian_hash",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)

_DENSE_MAX_SITES = 12  # 2^(2N) complex entries; 12 keeps the dense oracle under ~0.3 GB


@dataclass
class PairTerm:
    """Hermitian 4x4 term acting on sites (i, j), i < j.

    ``gamma`` records the non-negative shift already subtracted from the
    matrix by ``shift_negative`` (0 for unshifted terms).
    """

    i: int
    j: int
    matrix: np.ndarray
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not (0 <= self.i < self.j):
            raise ValueError(f"require 0 <= i < j, got ({self.i}, {self.j})")
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (4, 4):
            raise ValueError(f"term matrix must be 4x4, got {self.matrix.shape}")
        asym = np.max(np.abs(self.matrix - self.matrix.conj().T))
        if asym > 1e-12:
            raise ValueError(f"term ({self.i},{self.j}) not Hermitian: {asym:.3e}")


@dataclass
class PairHamiltonian:
    """Sum of two-body terms on ``n_sites`` spins, with shift bookkeeping."""

    n_sites: int
    terms: list[PairTerm]
    total_shift: float = 0.0
    model_tag: str = "custom"
    seed: int = 0
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        seen = set()
        for t in self.terms:
            if t.j >= self.n_sites:
                raise ValueError(f"term ({t.i},{t.j}) outside {self.n_sites} sites")
            if (t.i, t.j) in seen:
                raise ValueError(f"duplicate pair ({t.i},{t.j})")
            seen.add((t.i, t.j))

    def is_shifted(self, slack: float = 1e-10) -> bool:
        """True if every term is negative semidefinite (up to ``slack``)."""
        return all(np.linalg.eigvalsh(t.matrix)[-1] <= slack for t in self.terms)


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _build(n, mats, tag, seed, extra=None) -> PairHamiltonian:
    terms = [PairTerm(i, j, m) for (i, j), m in sorted(mats.items())]
    return PairHamiltonian(n, terms, 0.0, tag, seed, extra or {})


def gen_ising(N: int, seed: int) -> PairHamiltonian:
    """All-to-all random transverse-field Ising model.

    J_ij sigma^z_i sigma^z_j for every pair i < j plus a field h_i sigma^x_i
    per site, all coefficients U[-1, 1).  The site-i field is folded into
    pair (i, i+1); the last site's field goes into (N-2, N-1).
    """
    if N < 2:
        raise ValueError(f"need at least 2 sites, got {N}")
    rng = np.random.default_rng(seed)
    pairs = _pairs(N)
    couplings = rng.uniform(-1.0, 1.0, len(pairs))
    fields = rng.uniform(-1.0, 1.0, N)
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    mats = {p: couplings[k] * zz for k, p in enumerate(pairs)}
    for i in range(N):
        tgt = (i, i + 1) if i < N - 1 else (N - 2, N - 1)
        op = np.kron(SIGMA_X, _ID2) if i == tgt[0] else np.kron(_ID2, SIGMA_X)
        mats[tgt] = mats[tgt] + fields[i] * op
    return _build(N, mats, "ising", seed)


def gen_xyz(N: int, seed: int) -> PairHamiltonian:
    """All-to-all random XYZ model: sum_a J^a_ij sigma^a_i sigma^a_j, no fields.

    Three independent U[-1, 1) couplings per pair, drawn pair-by-pair in
    lexicographic order (x, y, z within each pair).
    """
    if N < 2:
        raise ValueError(f"need at least 2 sites, got {N}")
    rng = np.random.default_rng(seed)
    pairs = _pairs(N)
    couplings = rng.uniform(-1.0, 1.0, (len(pairs), 3))
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    mats = {}
    for k, p in enumerate(pairs):
        mats[p] = sum(couplings[k, a] * np.kron(paulis[a], paulis[a]) for a in range(3))
    return _build(N, mats, "xyz", seed)


def gen_heisenberg(N: int, seed: int) -> PairHamiltonian:
    """All-to-all random Heisenberg model in a random vector field.

    J_ij (XX + YY + ZZ) per pair plus h_i . sigma_i per site, couplings then
    fields U[-1, 1); fields folded like in ``gen_ising``.
    """
    if N < 2:
        raise ValueError(f"need at least 2 sites, got {N}")
    rng = np.random.default_rng(seed)
    pairs = _pairs(N)
    couplings = rng.uniform(-1.0, 1.0, len(pairs))
    fields = rng.uniform(-1.0, 1.0, (N, 3))
    paulis = (SIGMA_X, SIGMA_Y, SIGMA_Z)
    dot = sum(np.kron(s, s) for s in paulis)
    mats = {p: couplings[k] * dot for k, p in enumerate(pairs)}
    for i in range(N):
        tgt = (i, i + 1) if i < N - 1 else (N - 2, N - 1)
        for a in range(3):
            op = np.kron(paulis[a], _ID2) if i == tgt[0] else np.kron(_ID2, paulis[a])
            mats[tgt] = mats[tgt] + fields[i, a] * op
    return _build(N, mats, "heisenberg", seed)


def gen_rainbow(N: int, h: float) -> PairHamiltonian:
    """Inhomogeneous Heisenberg chain whose ground state is a rainbow of singlets.

    Sites carry half-integer labels l = -(N-1)/2 ... (N-1)/2.  The central
    bond (l = -1/2, 1/2) has coefficient 1; the bond whose inner site sits at
    distance l from the center is damped by exp(-2 h l).  h = 0 gives the
    uniform open-boundary Heisenberg chain; for large h the ground state
    approaches a product of singlets connecting mirror-opposite sites.
    """
    if N % 2 != 0 or N < 4:
        raise ValueError(f"need even N >= 4, got {N}")
    if h < 0:
        raise ValueError(f"need h >= 0, got {h}")
    dot = sum(np.kron(s, s) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))
    center = (N - 1) / 2.0
    mats = {}
    for s in range(N - 1):
        l_min = min(abs(s - center), abs(s + 1 - center))  # inner half-integer distance
        coeff = 1.0 if l_min < 1.0 else float(np.exp(-2.0 * h * (l_min - 0.5)))
        mats[(s, s + 1)] = coeff * dot
    ham = _build(N, mats, "rainbow", 0)
    ham.extra["h"] = float(h)
    return ham


def shift_negative(h: PairHamiltonian) -> PairHamiltonian:
    """Subtract each term's positive part: h_ij -> h_ij - max(lambda_max, 0) I.

    Every term of the result is negative semidefinite; the subtracted
    constants accumulate in ``total_shift`` so unshifted energies remain
    recoverable.  Idempotent.
    """
    new_terms = []
    added = 0.0
    for t in h.terms:
        lam = float(np.linalg.eigvalsh(t.matrix)[-1])
        gamma = max(lam, 0.0)
        new_terms.append(PairTerm(t.i, t.j, t.matrix - gamma * np.eye(4), t.gamma + gamma))
        added += gamma
    return PairHamiltonian(
        h.n_sites, new_terms, h.total_shift + added, h.model_tag, h.seed, dict(h.extra)
    )


def apply_term_to_state(psi: np.ndarray, mat4: np.ndarray, i: int, j: int, n: int) -> np.ndarray:
    """Apply a 4x4 pair operator on sites (i, j), i < j, to a 2^n statevector.

    Basis convention: index = sum_k q_k 2^k with qubit 0 least significant,
    and the operator row/column index is 2*b_i + b_j (site i most significant
    within the pair).
    """
    arr = psi.reshape((2,) * n)
    ax_i, ax_j = n - 1 - i, n - 1 - j
    out = np.tensordot(mat4.reshape(2, 2, 2, 2), arr, axes=([2, 3], [ax_i, ax_j]))
    # tensordot put the pair's output axes first; move them back in place
    out = np.moveaxis(out, [0, 1], [ax_i, ax_j])
    return out.reshape(-1)


def dense_matrix(h: PairHamiltonian) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the (possibly shifted) term sum.

    Oracle path only; refuses N beyond what fits comfortably in memory.
    """
    n = h.n_sites
    if n > _DENSE_MAX_SITES:
        raise ValueError(
            f"dense matrix for N={n} needs 2^{2 * n} entries; use the iterative path"
        )
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim, dtype=complex)
    for t in h.terms:
        block = np.tensordot(
            t.matrix.reshape(2, 2, 2, 2),
            eye.reshape((2,) * n + (dim,)),
            axes=([2, 3], [n - 1 - t.i, n - 1 - t.j]),
        )
        block = np.moveaxis(block, [0, 1], [n - 1 - t.i, n - 1 - t.j])
        out += block.reshape(dim, dim)
    return out


def exact_ground_energy(h: PairHamiltonian) -> float:
    """Smallest eigenvalue of the UNSHIFTED Hamiltonian.

    Dense eigendecomposition up to N = 12; beyond that a Lanczos-style
    extremal eigensolver on a term-wise matvec (never materializing the
    matrix), with a seeded start vector for determinism.
    """
    n = h.n_sites
    if n <= _DENSE_MAX_SITES:
        vals = np.linalg.eigvalsh(dense_matrix(h))
        return float(vals[0] + h.total_shift)
    if n > 24:
        raise ValueError(f"N={n} is beyond the iterative eigensolver's practical range")
    dim = 2**n
    # all built-in models have purely real term matrices; real arithmetic
    # halves the matvec cost, and the complex path stays for custom terms
    real = all(np.max(np.abs(t.matrix.imag)) == 0.0 for t in h.terms)
    dtype = float if real else complex
    mats = [t.matrix.real if real else t.matrix for t in h.terms]

    def matvec(v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=dtype)
        out = np.zeros(dim, dtype=dtype)
        for t, m in zip(h.terms, mats):
            out += apply_term_to_state(v, m, t.i, t.j, n)
        return out

    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=dtype)
    v0 = np.random.default_rng(7).standard_normal(dim)
    # a roomy Krylov space: near-degenerate spectra (rainbow chains at large
    # field) stall the default restart size by orders of magnitude
    vals = spla.eigsh(
        op, k=1, which="SA", v0=v0, ncv=min(dim, 80),
        return_eigenvectors=False, maxiter=50000,
    )
    return float(vals[0] + h.total_shift)


def serialize_hamiltonian(h: PairHamiltonian) -> str:
    """Canonical text serialization (model tag, N, seed, explicit term matrices)."""
    lines = ["tnvqe-hamiltonian v1"]
    lines.append(f"model {h.model_tag}")
    lines.append(f"sites {h.n_sites}")
    lines.append(f"seed {h.seed}")
    lines.append(f"total_shift {float(h.total_shift)!r}")
    for key in sorted(h.extra):
        lines.append(f"extra {key} {float(h.extra[key])!r}")
    lines.append(f"terms {len(h.terms)}")
    for t in h.terms:
        lines.append(f"term {t.i} {t.j} {float(t.gamma)!r}")
        for row in t.matrix:
            lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def save_hamiltonian(h: PairHamiltonian, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_hamiltonian(h))


def load_hamiltonian(path) -> PairHamiltonian:
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "tnvqe-hamiltonian v1":
        raise ValueError(f"{path}: not a v1 Hamiltonian file")
    pos = 1
    meta = {}
    extra = {}
    while not lines[pos].startswith("terms "):
        key, _, val = lines[pos].partition(" ")
        if key == "extra":
            ek, _, ev = val.partition(" ")
            extra[ek] = float(ev)
        else:
            meta[key] = val
        pos += 1
    n_terms = int(lines[pos].split()[1])
    pos += 1
    terms = []
    for _ in range(n_terms):
        _, si, sj, sg = lines[pos].split()
        pos += 1
        mat = np.zeros((4, 4), dtype=complex)
        for r in range(4):
            vals = [float(x) for x in lines[pos].split()]
            mat[r] = [complex(vals[2 * c], vals[2 * c + 1]) for c in range(4)]
            pos += 1
        terms.append(PairTerm(int(si), int(sj), mat, float(sg)))
    return PairHamiltonian(
        int(meta["sites"]),
        terms,
        float(meta["total_shift"]),
        meta["model"],
        int(meta["seed"]),
        extra,
    )


def hamiltonian_hash(h: PairHamiltonian) -> str:
    """Stable content hash, used to audit that paired runs share realizations."""
    return hashlib.sha256(serialize_hamiltonian(h).encode("ascii")).hexdigest()
