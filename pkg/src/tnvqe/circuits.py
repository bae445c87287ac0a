"""Two-qubit-gate circuits over a 15-angle Cartan parameterization.

Every gate on a sorted qubit pair (p, q), p < q, is stored as 15 real angles:

    index 0:3   input-side Euler triple (psi, theta, phi) on qubit p
    index 3:6   input-side Euler triple on qubit q
    index 6:9   interaction vector k = (kx, ky, kz)
    index 9:12  output-side Euler triple on qubit p
    index 12:15 output-side Euler triple on qubit q

with the unitary

    U = (R(out_p) (x) R(out_q)) . D(k) . (R(in_p) (x) R(in_q)),
    R(psi, theta, phi) = Rz(psi) Ry(theta) Rz(phi),   Rg(a) = exp(-i a g/2),
    D(k) = exp(-i (kx X(x)X + ky Y(x)Y + kz Z(x)Z)).

All-zero angles give the identity.  ``cartan_decompose`` inverts this map for
an arbitrary 4x4 unitary up to global phase, with k in the canonical Weyl
chamber pi/4 >= kx >= ky >= |kz|.

Gate matrices use the convention that for the sorted pair (p, q) the row /
column index is 2*b_p + b_q: the smaller wire is the more significant bit,
matching the tensor-network leg order (ascending wire ids).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .network import MeraNetwork, BranchPattern, build
from .tensors import mgs_unitarize

__all__ = [
    "Gate",
    "Circuit",
    "su4_from_angles",
    "su4_param_derivatives",
    "cartan_decompose",
    "phase_aligned_distance",
    "encode_mera",
    "augment_to_branching",
    "random_branching_circuit",
    "save_circuit",
    "load_circuit",
]

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_PAULIS = (_SX, _SY, _SZ)
_XX = np.kron(_SX, _SX)
_YY = np.kron(_SY, _SY)
_ZZ = np.kron(_SZ, _SZ)
_INTERACTIONS = (_XX, _YY, _ZZ)

# Magic (Bell) basis: conjugating by it maps SU(2)xSU(2) to SO(4) and
# diagonalizes every D(k).
_MAGIC = np.array(
    [
        [1.0, 0.0, 0.0, 1.0j],
        [0.0, 1.0j, 1.0, 0.0],
        [0.0, 1.0j, -1.0, 0.0],
        [1.0, 0.0, 0.0, -1.0j],
    ],
    dtype=complex,
) / np.sqrt(2.0)

# Spectrum of kx XX + ky YY + kz ZZ in the magic basis, row j giving the
# coefficients of (kx, ky, kz) in eigenvalue j; D(k) has magic-basis phases
# exp(i theta_j) with theta = _THETA_FROM_K @ k.
_THETA_FROM_K = np.array(
    [
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0],
    ]
)


def _rz(a: float) -> np.ndarray:
    e = np.exp(-0.5j * a)
    return np.array([[e, 0.0], [0.0, np.conj(e)]], dtype=complex)


def _ry(a: float) -> np.ndarray:
    c, s = np.cos(0.5 * a), np.sin(0.5 * a)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _euler_matrix(triple: np.ndarray) -> np.ndarray:
    psi, theta, phi = triple
    return _rz(psi) @ _ry(theta) @ _rz(phi)


def _interaction_matrix(k: np.ndarray) -> np.ndarray:
    d = np.eye(4, dtype=complex)
    for ka, gg in zip(k, _INTERACTIONS):
        d = d @ (np.cos(ka) * np.eye(4) - 1.0j * np.sin(ka) * gg)
    return d


def su4_from_angles(angles: np.ndarray) -> np.ndarray:
    """Build the 4x4 unitary from the 15-angle vector (layout above)."""
    a = np.asarray(angles, dtype=float)
    if a.shape != (15,):
        raise ValueError(f"expected 15 angles, got shape {a.shape}")
    pre = np.kron(_euler_matrix(a[0:3]), _euler_matrix(a[3:6]))
    post = np.kron(_euler_matrix(a[9:12]), _euler_matrix(a[12:15]))
    return post @ _interaction_matrix(a[6:9]) @ pre


def su4_param_derivatives(angles: np.ndarray) -> list[np.ndarray]:
    """Exact dU/d(angle_l) for all 15 angles, in layout order."""
    a = np.asarray(angles, dtype=float)
    ra_in, rb_in = _euler_matrix(a[0:3]), _euler_matrix(a[3:6])
    ra_out, rb_out = _euler_matrix(a[9:12]), _euler_matrix(a[12:15])
    dmat = _interaction_matrix(a[6:9])
    pre = np.kron(ra_in, rb_in)
    post = np.kron(ra_out, rb_out)
    mid = post @ dmat

    def euler_derivs(tri: np.ndarray) -> list[np.ndarray]:
        psi, theta, phi = tri
        rz_psi, ry_theta, rz_phi = _rz(psi), _ry(theta), _rz(phi)
        gz = -0.5j * _SZ
        gy = -0.5j * _SY
        return [
            gz @ rz_psi @ ry_theta @ rz_phi,
            rz_psi @ gy @ ry_theta @ rz_phi,
            rz_psi @ ry_theta @ gz @ rz_phi,
        ]

    out: list[np.ndarray] = []
    for da in euler_derivs(a[0:3]):
        out.append(mid @ np.kron(da, rb_in))
    for db in euler_derivs(a[3:6]):
        out.append(mid @ np.kron(ra_in, db))
    for gg in _INTERACTIONS:
        out.append(post @ (-1.0j * gg @ dmat) @ pre)
    for da in euler_derivs(a[9:12]):
        out.append(np.kron(da, rb_out) @ dmat @ pre)
    for db in euler_derivs(a[12:15]):
        out.append(np.kron(ra_out, db) @ dmat @ pre)
    return out


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Operator-norm distance min over global phase of ||a - e^{i t} b||_2."""
    tr = np.trace(np.conj(b).T @ a)
    phase = tr / abs(tr) if abs(tr) > 1e-12 else 1.0
    return float(np.linalg.norm(a - phase * b, ord=2))


# ---------------------------------------------------------------------------
# Cartan (KAK) decomposition
# ---------------------------------------------------------------------------


def _simultaneous_diag(m2: np.ndarray, group_tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize complex symmetric unitary m2 = P exp(2i theta) P^T.

    Real and imaginary parts of m2 are commuting real symmetric matrices;
    eigh the real part, then re-diagonalize the imaginary part inside each
    (near-)degenerate eigenvalue cluster.  Returns (P real orthogonal with
    det +1, theta in (-pi/2, pi/2]^4).
    """
    x = np.ascontiguousarray(m2.real)
    y = np.ascontiguousarray(m2.imag)
    x = 0.5 * (x + x.T)
    y = 0.5 * (y + y.T)
    vals, p = np.linalg.eigh(x)
    start = 0
    for stop in range(1, 5):
        if stop == 4 or vals[stop] - vals[stop - 1] > group_tol:
            if stop - start > 1:
                block = p[:, start:stop]
                sub = block.T @ y @ block
                sub = 0.5 * (sub + sub.T)
                _, rot = np.linalg.eigh(sub)
                p[:, start:stop] = block @ rot
            start = stop
    if np.linalg.det(p) < 0.0:
        p[:, 0] = -p[:, 0]
    diag = p.T @ m2 @ p
    off = float(np.max(np.abs(diag - np.diag(np.diag(diag)))))
    if off > 1e-8:
        raise ArithmeticError(f"simultaneous diagonalization residual {off:.2e}")
    theta = 0.5 * np.angle(np.diag(diag))
    return p, theta


def _kron_factor(mat: np.ndarray) -> tuple[complex, np.ndarray, np.ndarray]:
    """Split a Kronecker-product 4x4 into g * (A (x) B) with det A = det B = 1."""
    f = mat.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)  # [i, j, k, l] = A[i,j] B[k,l]
    flat = np.abs(f).reshape(4, 4)
    i_j = int(np.argmax(np.max(flat, axis=1)))
    k_l = int(np.argmax(flat[i_j]))
    i0, j0 = divmod(i_j, 2)
    k0, l0 = divmod(k_l, 2)
    piv = f[i0, j0, k0, l0]
    if abs(piv) < 1e-12:
        raise ArithmeticError("kron factorization pivot underflow")
    a = f[:, :, k0, l0].copy()
    b = f[i0, j0, :, :] / piv
    for mat2 in (a, b):
        det = mat2[0, 0] * mat2[1, 1] - mat2[0, 1] * mat2[1, 0]
        mat2 /= np.sqrt(det)
    g = mat[2 * i0 + k0, 2 * j0 + l0] / (a[i0, j0] * b[k0, l0])
    return g, a, b


def _so4_to_locals(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map SO(4) q to (A, B) with MAGIC q MAGIC^dag = phase * (A (x) B)."""
    local = _MAGIC @ q @ np.conj(_MAGIC).T
    g, a, b = _kron_factor(local)
    return g * a, b  # fold the leftover (+-1 up to roundoff) phase into A


def _euler_angles(u: np.ndarray) -> tuple[float, float, float]:
    """ZYZ Euler angles of a 2x2 unitary, ignoring its global phase."""
    a00, a01 = u[0, 0], u[0, 1]
    a10, a11 = u[1, 0], u[1, 1]
    theta = 2.0 * np.arctan2(abs(a10), abs(a00))
    tiny = 1e-12 * max(abs(a00), abs(a10), 1e-300)
    if abs(a10) <= tiny:  # theta ~ 0: only psi + phi is defined
        return float(np.angle(a11 / a00)), float(theta), 0.0
    if abs(a00) <= tiny:  # theta ~ pi: only psi - phi is defined
        return float(np.angle(-a10 / a01)), float(theta), 0.0
    psi = float(np.angle(a10 / a00))
    phi = float(np.angle(a11 / a10))
    return psi, float(theta), phi


def _canonicalize_weyl(
    k: np.ndarray, l_out: np.ndarray, l_in: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Move k into pi/4 >= kx >= ky >= |kz| adjusting the flanking locals.

    Uses the operator identities (phases dropped): a pi/2 shift of k_axis
    absorbs sigma(x)sigma into the output local; conjugating by single-qubit
    Cliffords swaps two components or negates a pair of components.
    """
    k = np.array(k, dtype=float)
    l_out = np.array(l_out, dtype=complex)
    l_in = np.array(l_in, dtype=complex)

    # reduce each component into [-pi/4, pi/4]
    for axis in range(3):
        steps = int(np.round(k[axis] / (0.5 * np.pi)))
        if steps != 0:
            k[axis] -= steps * 0.5 * np.pi
            if steps % 2:
                l_out = l_out @ _INTERACTIONS[axis]

    def swap(i: int, j: int) -> None:
        nonlocal l_out, l_in
        other = 3 - i - j
        v = np.cos(np.pi / 4) * np.eye(2) - 1.0j * np.sin(np.pi / 4) * _PAULIS[other]
        w = np.kron(v, v)
        l_out = l_out @ np.conj(w).T
        l_in = w @ l_in
        k[i], k[j] = k[j], k[i]

    def negate(i: int, j: int) -> None:
        nonlocal l_out, l_in
        other = 3 - i - j
        w = np.kron(_PAULIS[other], np.eye(2))
        l_out = l_out @ w
        l_in = w @ l_in
        k[i] = -k[i]
        k[j] = -k[j]

    # sort by magnitude, descending (3-element bubble via pair swaps)
    if abs(k[0]) < abs(k[1]):
        swap(0, 1)
    if abs(k[1]) < abs(k[2]):
        swap(1, 2)
    if abs(k[0]) < abs(k[1]):
        swap(0, 1)
    # push signs into kz
    if k[0] < 0.0 and k[1] < 0.0:
        negate(0, 1)
    elif k[0] < 0.0:
        negate(0, 2)
    elif k[1] < 0.0:
        negate(1, 2)
    return k, l_out, l_in


def cartan_decompose(u: np.ndarray) -> np.ndarray:
    """Angles (15,) reproducing the 4x4 unitary u up to global phase.

    Magic-basis construction: for m = MAGIC^dag (u / det^{1/4}) MAGIC the
    symmetric unitary m^T m factors as P exp(2i theta) P^T with P in SO(4),
    giving u = L_out D(k) L_in with both flanking factors products of
    single-qubit rotations.  The interaction vector is returned inside the
    canonical Weyl chamber.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {u.shape}")
    defect = float(np.max(np.abs(np.conj(u).T @ u - np.eye(4))))
    if defect > 1e-10:
        raise ValueError(f"matrix is not unitary: defect {defect:.2e}")

    det = np.linalg.det(u)
    us = u * det ** (-0.25)
    m = np.conj(_MAGIC).T @ us @ _MAGIC
    m2 = m.T @ m

    last_err: Exception | None = None
    for group_tol in (1e-13, 1e-10, 1e-7, 1e-4, 1e-2):
        try:
            p, theta = _simultaneous_diag(m2, group_tol)
            # fix the exp(2i theta) branch so that sum(theta) = 0, as required
            # for both orthogonal factors to have determinant +1
            shifts = int(np.round(theta.sum() / np.pi))
            sign = 1.0 if shifts >= 0 else -1.0
            for t in range(abs(shifts)):
                theta[t % 4] -= sign * np.pi
            q1 = m @ p @ np.diag(np.exp(-1.0j * theta))
            imag = float(np.max(np.abs(q1.imag)))
            if imag > 1e-8:
                raise ArithmeticError(f"first orthogonal factor residual {imag:.2e}")
            q1 = q1.real  # equals (first orthogonal factor) @ p
            a_out, b_out = _so4_to_locals(q1)
            a_in, b_in = _so4_to_locals(p.T)
            k = np.array(
                [
                    0.5 * (theta[2] + theta[3]),
                    0.5 * (theta[0] + theta[2]),
                    0.5 * (theta[1] + theta[2]),
                ]
            )
            l_out = np.kron(a_out, b_out)
            l_in = np.kron(a_in, b_in)
            k, l_out, l_in = _canonicalize_weyl(k, l_out, l_in)
            _, a_out, b_out = _kron_factor(l_out)
            _, a_in, b_in = _kron_factor(l_in)
            angles = np.empty(15)
            angles[0:3] = _euler_angles(a_in)
            angles[3:6] = _euler_angles(b_in)
            angles[6:9] = k
            angles[9:12] = _euler_angles(a_out)
            angles[12:15] = _euler_angles(b_out)
            if phase_aligned_distance(su4_from_angles(angles), u) > 1e-8:
                raise ArithmeticError("reconstruction check failed")
            return angles
        except ArithmeticError as err:  # retry with coarser degeneracy grouping
            last_err = err
    raise ArithmeticError(f"cartan decomposition failed: {last_err}")


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------


@dataclass
class Gate:
    """One two-qubit gate on the sorted wire pair (p, q)."""

    p: int
    q: int
    angles: np.ndarray  # (15,) float
    role: str = "mera"  # "mera": carries an embedded tensor; "augment": added
    zero_inputs: tuple[int, ...] = ()  # wires consumed as |0> at this gate

    def __post_init__(self) -> None:
        if not 0 <= self.p < self.q:
            raise ValueError(f"gate pair must satisfy 0 <= p < q, got ({self.p}, {self.q})")
        if self.role not in ("mera", "augment"):
            raise ValueError(f"unknown gate role {self.role!r}")
        self.angles = np.array(self.angles, dtype=float)
        if self.angles.shape != (15,):
            raise ValueError(f"gate needs 15 angles, got shape {self.angles.shape}")

    def unitary(self, angles: np.ndarray | None = None) -> np.ndarray:
        return su4_from_angles(self.angles if angles is None else angles)


@dataclass
class Circuit:
    """Ordered two-qubit gate list acting on |0...0>, first gate first."""

    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        for gate in self.gates:
            if gate.q >= self.n_qubits:
                raise ValueError(f"gate pair ({gate.p}, {gate.q}) exceeds {self.n_qubits} qubits")

    @property
    def n_parameters(self) -> int:
        return 15 * len(self.gates)

    def theta(self) -> np.ndarray:
        """Flat parameter vector: gate k owns slots 15k..15k+14."""
        if not self.gates:
            return np.empty(0)
        return np.concatenate([g.angles for g in self.gates])

    def with_theta(self, theta: np.ndarray) -> "Circuit":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_parameters,):
            raise ValueError(f"expected {self.n_parameters} parameters, got {theta.shape}")
        gates = [replace(g, angles=theta[15 * k : 15 * k + 15].copy()) for k, g in enumerate(self.gates)]
        return Circuit(self.n_qubits, gates)


def _node_sort_key(kind: str, layer: int, wires: tuple[int, ...]) -> tuple:
    row = {"dis": 0, "iso": 1, "branch": 1, "top": 0}[kind]
    return (layer, row, wires)


def _embed_gate_matrix(node, rng: np.random.Generator) -> np.ndarray:
    """Lift a chi=2 node tensor to the full 4x4 gate unitary.

    Disentanglers and branch unitaries are already unitary.  Isometries and
    top tensors occupy the columns whose freed inputs are |0>; the remaining
    columns are filled by Gram-Schmidt completion against random vectors.
    The freed wire of an isometry is the larger one, which is the less
    significant input bit, so the embedded columns sit at input indices
    (c, 0) = 2c: gate columns 0 and 2.
    """
    mat = node.matrix()
    if node.kind in ("dis", "branch"):
        return mat.astype(complex)
    if node.kind == "iso":
        partial = np.empty((4, 4), dtype=complex)
        partial[:, 0:2] = mat
        partial[:, 2:4] = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
        full = mgs_unitarize(partial, n_fixed=2, rng=rng)
        return full[:, [0, 2, 1, 3]]
    if node.kind == "top":
        partial = np.empty((4, 4), dtype=complex)
        partial[:, 0] = mat[:, 0]
        partial[:, 1:] = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        return mgs_unitarize(partial, n_fixed=1, rng=rng)
    raise ValueError(f"unknown node kind {node.kind!r}")


def _zero_inputs_for(kind: str, wires: tuple[int, int]) -> tuple[int, ...]:
    if kind == "iso":
        return (wires[1],)
    if kind == "top":
        return wires
    return ()


def encode_mera(net: MeraNetwork) -> Circuit:
    """Exact encoding of a chi=2 network into a two-qubit-gate circuit.

    Gates appear in state-preparation order (reverse of the sweep order), one
    per node, acting on the node's wire pair: unitary nodes become their own
    gate, isometries and tops become unitary completions whose action on the
    |0> inputs reproduces the embedded tensor columns.  The circuit state
    equals the network state up to a global phase (each gate's 15-angle form
    is special-unitary, so a fourth-root-of-unity phase per gate is dropped);
    the overlap magnitude is 1 to machine precision.
    """
    if any(c != 2 for c in net.chi):
        raise ValueError(f"circuit encoding requires chi=2 everywhere, got {net.chi}")
    rng = np.random.default_rng([net.seed, 0x5E])
    gates = []
    for node in reversed(net.nodes):
        full = _embed_gate_matrix(node, rng)
        angles = cartan_decompose(full)
        gates.append(
            Gate(
                p=node.wires[0],
                q=node.wires[1],
                angles=angles,
                role="mera",
                zero_inputs=_zero_inputs_for(node.kind, node.wires),
            )
        )
    return Circuit(net.n_sites, gates)


def augment_to_branching(
    circuit: Circuit,
    pattern: BranchPattern | str,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> Circuit:
    """Embed a binary-network circuit into the branching-network gate layout.

    Each binary gate is carried over to the branching position with the same
    (layer, row, wire pair); positions that exist only in the branching
    layout get identity gates (all angles zero) tagged "augment".  With
    noise_sigma = 0 the added gates act trivially, so the prepared state is
    the binary one up to global phase; noise_sigma > 0 adds Gaussian jitter
    to every angle of every gate to displace the starting point.
    """
    n = circuit.n_qubits
    branch_topo = build(n, 2, pattern, seed=0)
    binary_topo = build(n, 2, BranchPattern.none(branch_topo.n_layers), seed=0)

    binary_nodes = list(reversed(binary_topo.nodes))
    if len(binary_nodes) != len(circuit.gates):
        raise ValueError(
            f"circuit has {len(circuit.gates)} gates but the binary layout has {len(binary_nodes)} nodes"
        )
    carried: dict[tuple, Gate] = {}
    for node, gate in zip(binary_nodes, circuit.gates):
        if (gate.p, gate.q) != node.wires:
            raise ValueError(
                f"gate pair ({gate.p}, {gate.q}) does not match the binary layout pair {node.wires}"
            )
        carried[_node_sort_key(node.kind, node.layer, node.wires)] = gate

    gates = []
    for node in reversed(branch_topo.nodes):
        key = _node_sort_key(node.kind, node.layer, node.wires)
        prior = carried.pop(key, None)
        if prior is not None:
            gates.append(
                Gate(
                    p=node.wires[0],
                    q=node.wires[1],
                    angles=prior.angles.copy(),
                    role="mera",
                    zero_inputs=_zero_inputs_for(node.kind, node.wires),
                )
            )
        else:
            gates.append(
                Gate(
                    p=node.wires[0],
                    q=node.wires[1],
                    angles=np.zeros(15),
                    role="augment",
                    zero_inputs=_zero_inputs_for(node.kind, node.wires),
                )
            )
    if carried:
        missing = sorted(carried)
        raise ValueError(f"binary gates without a branching position: {missing[:4]}")

    out = Circuit(n, gates)
    if noise_sigma > 0.0:
        rng = np.random.default_rng([seed, 0xA7])
        theta = out.theta() + noise_sigma * rng.standard_normal(out.n_parameters)
        out = out.with_theta(theta)
    return out


def random_branching_circuit(n_sites: int, pattern: BranchPattern | str, seed: int) -> Circuit:
    """Branching-layout circuit with all angles uniform on [-pi, pi).

    Same gate list (order, pairs, roles) as an embedded-then-augmented
    circuit for this pattern, so runs are comparable arm-to-arm.
    """
    topo = build(n_sites, 2, pattern, seed=0)
    binary_keys = {
        _node_sort_key(node.kind, node.layer, node.wires)
        for node in build(n_sites, 2, BranchPattern.none(topo.n_layers), seed=0).nodes
    }
    rng = np.random.default_rng([seed, 0xC3])
    gates = []
    for node in reversed(topo.nodes):
        key = _node_sort_key(node.kind, node.layer, node.wires)
        gates.append(
            Gate(
                p=node.wires[0],
                q=node.wires[1],
                angles=rng.uniform(-np.pi, np.pi, size=15),
                role="mera" if key in binary_keys else "augment",
                zero_inputs=_zero_inputs_for(node.kind, node.wires),
            )
        )
    return Circuit(n_sites, gates)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def save_circuit(circuit: Circuit, path) -> None:
    lines = ["tnvqe-circuit v1", f"qubits {circuit.n_qubits}", f"gates {len(circuit.gates)}"]
    for k, g in enumerate(circuit.gates):
        zeros = ",".join(str(w) for w in g.zero_inputs) if g.zero_inputs else "-"
        angles = " ".join(repr(float(a)) for a in g.angles)
        lines.append(f"gate {k} pair {g.p} {g.q} role {g.role} zero {zeros} angles {angles}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_circuit(path) -> Circuit:
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "tnvqe-circuit v1":
        raise ValueError(f"not a circuit file: {path}")
    n_qubits = int(lines[1].split()[1])
    n_gates = int(lines[2].split()[1])
    gates = []
    for k in range(n_gates):
        tok = lines[3 + k].split()
        if tok[0] != "gate" or int(tok[1]) != k:
            raise ValueError(f"malformed gate line {3 + k + 1} in {path}")
        p, q = int(tok[3]), int(tok[4])
        role = tok[6]
        zeros = () if tok[8] == "-" else tuple(int(w) for w in tok[8].split(","))
        angles = np.array([float(v) for v in tok[10:25]])
        gates.append(Gate(p=p, q=q, angles=angles, role=role, zero_inputs=zeros))
    return Circuit(n_qubits, gates)
