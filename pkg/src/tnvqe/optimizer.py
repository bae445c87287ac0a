"""Network optimization: alternating isometric updates and a BFGS arm.

Three optimizers over the same network state:

* ``ev_sweep`` - every node in turn is replaced by the isometry minimizing
  the energy linearized in that node (SVD of its environment).  Monotone for
  Hamiltonians whose terms have been shifted negative semidefinite.
* ``modified_ev_sweep`` - same, except top tensors are set to the ground
  eigenvector of their effective Hamiltonian, which is exact in the top
  rather than first order.
* ``bfgs_optimize`` - encodes a chi=2 network into its gate circuit and
  runs BFGS on all 15 angles per gate, writing the result back into the
  network tensors.

Environments are assembled per Hamiltonian term from causal-cone
contractions with the target node removed; the term -> cone membership index
is precomputed once per call and no state is cached across sweeps.  Because
cone topologies are static, every contraction is compiled once into explicit
transpose/reshape/matmul steps; the per-sweep work is then a flat run of
small BLAS calls.  Full in-order sweeps additionally share work across the
nodes of each cone through the ascend/descend engine in ``_envengine``,
which reproduces the direct per-node contractions exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .bfgs import bfgs
from .hamiltonians import PairHamiltonian, exact_ground_energy
from .history import RunHistory
from .network import MeraNetwork, causal_cone
from .tensors import eigh, svd

__all__ = [
    "SweepSchedule",
    "ConeIndex",
    "environment",
    "ev_update",
    "ev_sweep",
    "effective_hamiltonian",
    "top_diag_update",
    "modified_ev_sweep",
    "bfgs_optimize",
]


def _require_shifted(H: PairHamiltonian) -> None:
    if not H.is_shifted():
        raise ValueError(
            "isometric updates require a Hamiltonian with negative-semidefinite "
            "terms; apply shift_negative first"
        )


@dataclass(frozen=True)
class SweepSchedule:
    """Node visit order (indices into net.nodes) and the sweep count."""

    node_indices: tuple[int, ...]
    n_sweeps: int

    @classmethod
    def full(cls, net: MeraNetwork, n_sweeps: int) -> "SweepSchedule":
        return cls(tuple(range(len(net.nodes))), n_sweeps)


def _compile_contraction(a_shape, a_axes, b_shape, b_axes):
    """tensordot(a, b, (a_axes, b_axes)) as transpose/reshape/matmul data."""
    a_free = [k for k in range(len(a_shape)) if k not in a_axes]
    b_free = [k for k in range(len(b_shape)) if k not in b_axes]
    contracted = math.prod(a_shape[k] for k in a_axes)
    a_perm = tuple(a_free) + tuple(a_axes)
    b_perm = tuple(b_axes) + tuple(b_free)
    a_rows = math.prod(a_shape[k] for k in a_free)
    b_cols = math.prod(b_shape[k] for k in b_free)
    out_shape = tuple(a_shape[k] for k in a_free) + tuple(b_shape[k] for k in b_free)
    return a_perm, (a_rows, contracted), b_perm, (contracted, b_cols), out_shape


@dataclass(frozen=True)
class _ConePlan:
    """Compiled contraction schedule for one (term, optional hole) pair.

    ``steps`` rebuild the cone state (the hole replaced by an identity) as a
    run of matmuls; the remaining fields flatten the closing of the hole,
    the term application, and the bra-ket overlap into single matrix
    products.  Plans depend only on the topology and stay valid while the
    tensor values change.
    """

    steps: tuple
    eye: np.ndarray | None
    # open-hole state as a matrix: rows (site_i, site_j, other open segments),
    # columns the hole legs in node leg order (lower..., upper...)
    close_perm: tuple[int, ...]
    close_shape: tuple[int, int]
    hole_dims: tuple[int, ...]  # equals the hole node's leg shape
    # term application layout: (4, everything else)
    site_perm: tuple[int, ...]
    site_shape: tuple[int, int]


def _exec_prep(net: MeraNetwork, plan: _ConePlan) -> np.ndarray:
    psi = np.ones((), dtype=complex)
    for idx, a_perm, a_shape,  b_perm, b_shape, out_shape in plan.steps:
        if idx is None:
            psi = np.multiply.outer(psi, plan.eye)
        else:
            a = psi.transpose(a_perm).reshape(a_shape)
            b = net.nodes[idx].tensor.transpose(b_perm).reshape(b_shape)
            psi = (a @ b).reshape(out_shape)
    return psi


def _trace_prep(net: MeraNetwork, node_indices: list[int], hole: int | None):
    """Symbolic prep_state pass: compiled steps and final tags, no data."""
    steps = []
    tags: list[tuple] = []
    shape: list[int] = []
    eye = None
    for idx in reversed(node_indices):
        nd = net.nodes[idx]
        if idx == hole:
            for k, s in enumerate(nd.upper_segs):
                tags[tags.index(("seg", s))] = ("hu", k)
            dims = [net.seg_dims[s] for s in nd.lower_segs]
            d = int(np.prod(dims, dtype=np.int64))
            eye = np.eye(d, dtype=complex).reshape(dims + dims)
            steps.append((None, (), (), (), (), ()))
            tags += [("hl", k) for k in range(len(dims))] + [("seg", s) for s in nd.lower_segs]
            shape += dims + dims
            continue
        pos = tuple(tags.index(("seg", s)) for s in nd.upper_segs)
        t_shape = nd.tensor.shape
        t_axes = tuple(range(nd.n_lower, nd.tensor.ndim))
        compiled = _compile_contraction(tuple(shape), pos, t_shape, t_axes)
        steps.append((idx,) + compiled)
        tags = [t for k, t in enumerate(tags) if k not in pos] + [
            ("seg", s) for s in nd.lower_segs
        ]
        shape = list(compiled[-1])
    return tuple(steps), tags, tuple(shape), eye


class ConeIndex:
    """Causal cones of every term, a node -> terms reverse map, and cached
    compiled contraction plans.

    Everything here depends only on the network topology, so one instance
    serves an entire run of sweeps over the same network.
    """

    def __init__(self, net: MeraNetwork, H: PairHamiltonian):
        self.cones = [causal_cone(net, t.i, t.j) for t in H.terms]
        self.terms_of: dict[int, list[int]] = {}
        for t_idx, cone in enumerate(self.cones):
            for n_idx in cone:
                self.terms_of.setdefault(n_idx, []).append(t_idx)
        self._net = net
        self._H = H
        self._env_plans: dict[tuple[int, int], _ConePlan] = {}
        self._energy_plans: dict[int, _ConePlan] = {}

    def env_plan(self, t_idx: int, hole: int) -> _ConePlan:
        plan = self._env_plans.get((t_idx, hole))
        if plan is None:
            net, term = self._net, self._H.terms[t_idx]
            node = net.nodes[hole]
            steps, tags, shape, eye = _trace_prep(net, self.cones[t_idx], hole)
            nl = node.n_lower
            nu = node.tensor.ndim - nl
            hole_pos = [tags.index(("hl", k)) for k in range(nl)]
            hole_pos += [tags.index(("hu", k)) for k in range(nu)]
            free_pos = [k for k in range(len(tags)) if k not in hole_pos]
            ax_i = tags.index(("seg", net.site_segs[term.i]))
            ax_j = tags.index(("seg", net.site_segs[term.j]))
            # phi comes out with axes (site_i, site_j, other free) so the 4x4
            # term matrix applies as one matmul on the flattened (4, rest)
            free_order = [ax_i, ax_j] + [k for k in free_pos if k not in (ax_i, ax_j)]
            n_free = math.prod(shape[k] for k in free_pos)
            n_hole = math.prod(shape[k] for k in hole_pos)
            plan = _ConePlan(
                steps=steps,
                eye=eye,
                close_perm=tuple(free_order) + tuple(hole_pos),
                close_shape=(n_free, n_hole),
                hole_dims=tuple(shape[k] for k in hole_pos),
                site_perm=(),
                site_shape=(4, n_free // 4),
            )
            self._env_plans[(t_idx, hole)] = plan
        return plan

    def energy_plan(self, t_idx: int) -> _ConePlan:
        plan = self._energy_plans.get(t_idx)
        if plan is None:
            net, term = self._net, self._H.terms[t_idx]
            steps, tags, shape, _ = _trace_prep(net, self.cones[t_idx], None)
            ax_i = tags.index(("seg", net.site_segs[term.i]))
            ax_j = tags.index(("seg", net.site_segs[term.j]))
            site_perm = (ax_i, ax_j) + tuple(
                k for k in range(len(tags)) if k not in (ax_i, ax_j)
            )
            total = math.prod(shape)
            plan = _ConePlan(
                steps=steps,
                eye=None,
                close_perm=(),
                close_shape=(0, 0),
                hole_dims=(),
                site_perm=site_perm,
                site_shape=(4, total // 4),
            )
            self._energy_plans[t_idx] = plan
        return plan

    def shifted_energy(self, net: MeraNetwork) -> float:
        """Total shifted-term energy via the cached cone plans."""
        acc = 0.0 + 0.0j
        for t_idx, term in enumerate(self._H.terms):
            plan = self.energy_plan(t_idx)
            psi = _exec_prep(net, plan).transpose(plan.site_perm).reshape(plan.site_shape)
            acc += np.vdot(psi, term.matrix @ psi)
        if abs(acc.imag) > 1e-8 * max(1.0, abs(acc.real)):
            raise ArithmeticError(f"energy has imaginary part {acc.imag:.2e}")
        return float(acc.real)


def _direct_term_env(
    net: MeraNetwork,
    H: PairHamiltonian,
    cones: ConeIndex,
    t_idx: int,
    node_index: int,
) -> np.ndarray:
    """One term's environment contribution by full cone contraction."""
    plan = cones.env_plan(t_idx, node_index)
    tvec = net.nodes[node_index].tensor.reshape(-1)
    psi_hole = _exec_prep(net, plan)
    open_mat = psi_hole.transpose(plan.close_perm).reshape(plan.close_shape)
    phi = (open_mat @ tvec).reshape(plan.site_shape)
    hphi = H.terms[t_idx].matrix @ phi
    return (np.conj(hphi).reshape(-1) @ open_mat).reshape(plan.hole_dims)


def environment(
    net: MeraNetwork,
    H: PairHamiltonian,
    node_index: int,
    cones: ConeIndex | None = None,
) -> np.ndarray:
    """Environment tensor Y of one node: energy = sum(Y * W) linear in W.

    Summed over the terms whose causal cone contains the node (other terms
    do not couple to it); each contribution contracts the cone with the node
    removed against the term applied to the cone closed by the current
    tensor.  A node outside every cone gets a zero environment.
    """
    _require_shifted(H)
    if not 0 <= node_index < len(net.nodes):
        raise ValueError(f"node index {node_index} out of range")
    if cones is None:
        cones = ConeIndex(net, H)
    env = np.zeros(net.nodes[node_index].tensor.shape, dtype=complex)
    for t_idx in cones.terms_of.get(node_index, ()):
        env += _direct_term_env(net, H, cones, t_idx, node_index)
    return env


def _apply_env_update(net: MeraNetwork, node_index: int, env: np.ndarray) -> None:
    """Linearized-minimizer writeback shared by both environment routes."""
    node = net.nodes[node_index]
    nrm = float(np.linalg.norm(env))
    if nrm < 1e-300:
        return
    if node.kind == "top":
        node.tensor = -np.conj(env) / nrm
        return
    fac = svd(env, row_legs=tuple(range(node.n_lower)))
    node.tensor = (-np.conj(fac.V) @ fac.W).reshape(node.tensor.shape)


def ev_update(
    net: MeraNetwork,
    H: PairHamiltonian,
    node_index: int,
    cones: ConeIndex | None = None,
) -> MeraNetwork:
    """Replace one node by the minimizer of its linearized energy.

    With environment Y and the energy linear form sum(Y * W) over isometric
    W, the minimizer is -conj(V) W from the SVD factors of Y; since the
    shifted terms are negative semidefinite, the true energy also never
    increases.  Top tensors reduce to normalizing the conjugated
    environment.  A zero environment leaves the node untouched.
    """
    env = environment(net, H, node_index, cones)
    _apply_env_update(net, node_index, env)
    return net


def _sweep_history(
    net: MeraNetwork,
    H: PairHamiltonian,
    e_exact: float | None,
    optimizer: str,
) -> RunHistory:
    if e_exact is None:
        e_exact = exact_ground_energy(H)
    hist = RunHistory(
        meta={
            "optimizer": optimizer,
            "model": H.model_tag,
            "ham_seed": H.seed,
            "n_sites": net.n_sites,
            "chi": list(net.chi),
            "pattern": net.pattern.name,
            "net_seed": net.seed,
            "e_exact": float(e_exact),
        }
    )
    return hist


def _run_sweeps(
    net: MeraNetwork,
    H: PairHamiltonian,
    schedule: SweepSchedule | int | None,
    e_exact: float | None,
    stage: str,
    modified: bool,
) -> RunHistory:
    _require_shifted(H)
    if schedule is None:
        schedule = SweepSchedule.full(net, 1)
    elif isinstance(schedule, int):
        schedule = SweepSchedule.full(net, schedule)
    hist = _sweep_history(net, H, e_exact, "modified_ev" if modified else "ev")
    cones = ConeIndex(net, H)
    t0 = time.perf_counter()
    hist.append(0, stage, cones.shifted_energy(net), H.total_shift)
    # The shared-work engine visits nodes in network order, so it serves any
    # schedule that is an ascending subsequence; other orders take the
    # per-node direct route, which produces identical updates.
    in_order = list(schedule.node_indices) == sorted(set(schedule.node_indices))
    if in_order:
        from ._envengine import SweepEngine

        engine = SweepEngine(net, H, cones)
        update_set = frozenset(schedule.node_indices)
        update_node = lambda idx, env: _apply_env_update(net, idx, env)
        update_top = (
            (lambda idx, heff: _apply_top_update(net, idx, heff)) if modified else None
        )
    for sweep in range(1, schedule.n_sweeps + 1):
        if in_order:
            engine.run_sweep(update_set, update_node, update_top)
        else:
            for idx in schedule.node_indices:
                if modified and net.nodes[idx].kind == "top":
                    top_diag_update(net, H, idx, cones)
                else:
                    ev_update(net, H, idx, cones)
        hist.append(sweep, stage, cones.shifted_energy(net), H.total_shift)
    hist.meta["wall_time_s"] = round(time.perf_counter() - t0, 3)
    return hist


def ev_sweep(
    net: MeraNetwork,
    H: PairHamiltonian,
    schedule: SweepSchedule | int | None = None,
    e_exact: float | None = None,
    stage: str = "ev",
) -> RunHistory:
    """Alternating linearized updates over all nodes; mutates net in place.

    The history carries the energy after every full sweep (row 0 is the
    starting energy); the trace is monotone non-increasing up to round-off.
    An integer schedule means that many sweeps over all nodes in order.
    """
    return _run_sweeps(net, H, schedule, e_exact, stage, modified=False)


def _direct_term_heff(
    net: MeraNetwork,
    H: PairHamiltonian,
    cones: ConeIndex,
    t_idx: int,
    top_index: int,
) -> np.ndarray:
    """One term's effective-Hamiltonian block by full cone contraction."""
    plan = cones.env_plan(t_idx, top_index)
    psi_hole = _exec_prep(net, plan)
    open_mat = psi_hole.transpose(plan.close_perm).reshape(plan.close_shape)
    # rows: (site pair, other open segments), columns: the top's legs;
    # apply the term on the leading site-pair factor of the rows
    blk = open_mat.reshape(4, -1)
    hblk = (H.terms[t_idx].matrix @ blk).reshape(plan.close_shape)
    return np.conj(hblk).T @ open_mat


def _symmetrized(heff: np.ndarray) -> np.ndarray:
    asym = float(np.max(np.abs(heff - np.conj(heff).T)))
    if asym > 1e-8:
        raise ArithmeticError(f"effective Hamiltonian asymmetry {asym:.2e}")
    return 0.5 * (heff + np.conj(heff).T)


def effective_hamiltonian(
    net: MeraNetwork,
    H: PairHamiltonian,
    top_index: int,
    cones: ConeIndex | None = None,
) -> np.ndarray:
    """Hamiltonian felt by one top tensor with everything else frozen.

    Returns the Hermitian matrix h' over the flattened top legs such that
    E(t) = <t| h' |t> for any unit top t (the other tensors fixed); every
    term contributes because every causal cone reaches every top.
    """
    node = net.nodes[top_index]
    if node.kind != "top":
        raise ValueError(f"node {top_index} is a {node.kind!r}, not a top tensor")
    if cones is None:
        cones = ConeIndex(net, H)
    size = node.tensor.size
    heff = np.zeros((size, size), dtype=complex)
    for t_idx in range(len(H.terms)):
        if top_index in cones.cones[t_idx]:  # always true for tops
            heff += _direct_term_heff(net, H, cones, t_idx, top_index)
    return _symmetrized(heff)


def _apply_top_update(net: MeraNetwork, top_index: int, heff: np.ndarray) -> float:
    """Ground-eigenvector writeback shared by both assembly routes."""
    vals, vecs = eigh(_symmetrized(heff))
    node = net.nodes[top_index]
    node.tensor = vecs[:, 0].reshape(node.tensor.shape).astype(complex)
    return float(vals[0])


def top_diag_update(
    net: MeraNetwork,
    H: PairHamiltonian,
    top_index: int,
    cones: ConeIndex | None = None,
) -> float:
    """Set one top tensor to its effective ground state; returns the new energy.

    The returned value is the ground eigenvalue, which equals the network
    energy after the update exactly (not to first order), holding all other
    tensors fixed.
    """
    return _apply_top_update(net, top_index, effective_hamiltonian(net, H, top_index, cones))


def modified_ev_sweep(
    net: MeraNetwork,
    H: PairHamiltonian,
    schedule: SweepSchedule | int | None = None,
    e_exact: float | None = None,
    stage: str = "modified_ev",
) -> RunHistory:
    """Alternating sweep with exact top-tensor diagonalization; mutates net."""
    return _run_sweeps(net, H, schedule, e_exact, stage, modified=True)


def bfgs_optimize(
    net: MeraNetwork,
    H: PairHamiltonian,
    max_iter: int,
    e_exact: float | None = None,
    grad_tol: float = 1e-10,
) -> RunHistory:
    """Optimize the chi=2 network through its circuit parameterization.

    Encodes the network into two-qubit gates, runs BFGS over all angles with
    adjoint gradients, and writes the optimized gates back as tensors (gate
    column slices, so the isometric conditions hold exactly).  Mutates net;
    the history rows are the BFGS iterates.
    """
    from . import sim
    from .circuits import encode_mera, su4_from_angles

    _require_shifted(H)
    circuit = encode_mera(net)
    t0 = time.perf_counter()
    result = bfgs(
        lambda th: sim.energy(circuit, th, H),
        lambda th: sim.grad_adjoint(circuit, th, H),
        circuit.theta(),
        max_iter,
        grad_tol,
    )
    for k in range(len(circuit.gates)):
        node = net.nodes[len(net.nodes) - 1 - k]
        full = su4_from_angles(result.x[15 * k : 15 * k + 15])
        if node.kind in ("dis", "branch"):
            node.tensor = full.reshape(2, 2, 2, 2)
        elif node.kind == "iso":
            node.tensor = full[:, [0, 2]].reshape(2, 2, 2)
        else:
            node.tensor = full[:, 0].reshape(2, 2)
    hist = _sweep_history(net, H, e_exact, "bfgs")
    for it, val in enumerate(result.trace):
        hist.append(it, "bfgs", val, H.total_shift)
    hist.final_theta = result.x
    hist.meta["reason"] = result.reason
    hist.meta["grad_norm"] = result.grad_norm
    hist.meta["wall_time_s"] = round(time.perf_counter() - t0, 3)
    return hist
