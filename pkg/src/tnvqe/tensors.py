"""Dense complex tensor arithmetic and small-matrix factorizations.

Tensors are plain numpy arrays (complex128, one axis per leg).  This module
provides the primitives everything else is built from:

    contract         pairwise contraction with explicit leg pairs
    svd              singular value decomposition over a chosen leg split
    eigh             Hermitian eigendecomposition with residual checking
    mgs_unitarize    complete fixed orthonormal columns to a unitary
    random_isometry  seeded random isometry (QR of a complex Gaussian draw)

All operations are pure functions; seeded randomness uses numpy's PCG64
generator (``np.random.default_rng``) and is reproducible bit-for-bit for a
fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "contract",
    "svd",
    "eigh",
    "mgs_unitarize",
    "random_isometry",
]


@dataclass(frozen=True)
class SvdFactors:
    """Factors of a singular value decomposition, M = V . diag(S) . W*.

    V has orthonormal columns, S is non-negative and descending, and W is
    stored so that its rows are orthonormal and the reconstruction uses the
    elementwise conjugate W*.  This layout keeps the isometric single-tensor
    update a plain matrix product of the factors.
    """

    V: np.ndarray
    S: np.ndarray
    W: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.V * self.S) @ np.conj(self.W)


def contract(a: np.ndarray, b: np.ndarray, pairs: list[tuple[int, int]]) -> np.ndarray:
    """Contract two tensors over the given (leg-of-a, leg-of-b) pairs.

    The result carries the unpaired legs of ``a`` followed by the unpaired
    legs of ``b``, each in their original order.

    Raises:
        ValueError: if a leg index is out of range, repeated, or the paired
            leg dimensions differ.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    ax_a = [p[0] for p in pairs]
    ax_b = [p[1] for p in pairs]
    if len(set(ax_a)) != len(ax_a) or len(set(ax_b)) != len(ax_b):
        raise ValueError(f"repeated leg in contraction pairs {pairs}")
    for la, lb in pairs:
        if not (0 <= la < a.ndim and 0 <= lb < b.ndim):
            raise ValueError(
                f"leg pair ({la}, {lb}) out of range for shapes {a.shape}, {b.shape}"
            )
        if a.shape[la] != b.shape[lb]:
            raise ValueError(
                f"dimension mismatch: leg {la} of a has dim {a.shape[la]}, "
                f"leg {lb} of b has dim {b.shape[lb]}"
            )
    return np.tensordot(a, b, axes=(ax_a, ax_b))


def _matricize(t: np.ndarray, row_legs: list[int]) -> tuple[np.ndarray, list[int]]:
    """Reshape ``t`` into a matrix with ``row_legs`` fused as rows."""
    t = np.asarray(t)
    col_legs = [l for l in range(t.ndim) if l not in row_legs]
    perm = list(row_legs) + col_legs
    rows = int(np.prod([t.shape[l] for l in row_legs], dtype=np.int64))
    mat = np.transpose(t, perm).reshape(rows, -1)
    return mat, col_legs


def svd(t: np.ndarray, row_legs: list[int]) -> SvdFactors:
    """SVD of ``t`` matricized with ``row_legs`` as rows, remaining legs as columns.

    Returns factors with V ^dagger V = I, rows of W orthonormal, S descending, and
    reconstruction V . diag(S) . W* equal to the matricized input.

    Raises:
        ValueError: if ``row_legs`` is empty or covers every leg.
        np.linalg.LinAlgError: convergence failure, annotated with the matrix shape.
    """
    t = np.asarray(t)
    if len(row_legs) == 0 or len(row_legs) >= t.ndim:
        raise ValueError(f"row_legs {row_legs} must be a nonempty proper subset of legs")
    mat, _ = _matricize(t, row_legs)
    try:
        v, s, wh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend dependent
        raise np.linalg.LinAlgError(f"SVD failed on matrix of shape {mat.shape}: {exc}")
    return SvdFactors(V=v, S=s, W=np.conj(wh))


def eigh(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises:
        ValueError: if ``h`` is not square or deviates from Hermiticity by
            more than 1e-10 in max-norm (the measured asymmetry is reported).
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    asym = np.max(np.abs(h - h.conj().T))
    if asym > 1e-10:
        raise ValueError(f"matrix is not Hermitian: max |h - h^dagger| = {asym:.3e}")
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def mgs_unitarize(
    partial: np.ndarray,
    n_fixed: int,
    rng: np.random.Generator | None = None,
    max_redraws: int = 10,
) -> np.ndarray:
    """Complete a partially filled square matrix to a unitary.

    The first ``n_fixed`` columns must already be orthonormal; they are never
    modified.  Every later column is orthogonalized against all previous
    columns by modified Gram-Schmidt (sequential projection, then
    normalization).  A column whose post-projection norm nearly vanishes lies
    in the span of the previous ones and is redrawn from ``rng``; after
    ``max_redraws`` failed redraws an error is raised.

    Args:
        partial: square (D, D) array; columns ``n_fixed:`` may hold anything
            (typically random values) and serve as completion candidates.
        n_fixed: number of leading columns to keep verbatim.
        rng: generator used only for redraws; defaults to a fixed-seed one.

    Returns:
        (D, D) unitary whose first ``n_fixed`` columns equal the input's.
    """
    q = np.array(partial, dtype=complex, copy=True)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    dim = q.shape[0]
    if not (0 <= n_fixed <= dim):
        raise ValueError(f"n_fixed {n_fixed} out of range for dimension {dim}")
    fixed = q[:, :n_fixed]
    gram = fixed.conj().T @ fixed
    if np.max(np.abs(gram - np.eye(n_fixed))) > 1e-10:
        raise ValueError("fixed columns are not orthonormal")
    if rng is None:
        rng = np.random.default_rng(0)
    for j in range(n_fixed, dim):
        for attempt in range(max_redraws + 1):
            v = q[:, j].copy()
            for i in range(j):
                v -= q[:, i] * (np.conj(q[:, i]) @ v)
            norm = np.linalg.norm(v)
            if norm > 1e-7:
                q[:, j] = v / norm
                break
            # candidate was (numerically) in the span of earlier columns
            q[:, j] = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        else:
            raise ValueError(
                f"column {j} could not be completed after {max_redraws} redraws"
            )
    return q


def random_isometry(rows: int, cols: int, seed: int) -> np.ndarray:
    """Seeded random (rows, cols) isometry with M^dagger M = I.

    Drawn as the thin QR factor of a complex standard-Gaussian matrix.

    Raises:
        ValueError: if cols > rows.
    """
    if cols > rows:
        raise ValueError(f"cols {cols} exceeds rows {rows}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    q, r = np.linalg.qr(g)
    # fix the gauge so the factorization is unique (positive real diagonal of r)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * np.conj(phases)
