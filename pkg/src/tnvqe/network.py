"""Binary and branching MERA on N = 2^n sites: topology, cones, contraction.

The network is a layered DAG.  Counting upward from the physical level,
layer l (l = 1 .. n-1) first applies a row of disentanglers across block
boundaries (wrapping around the ends), then a row of isometries that merge
wire pairs, halving the wire count.  A branching layer replaces each
isometry by a branch unitary whose two outputs seed independent
sub-networks; every remaining 2-wire sub-network is capped by a top tensor.

Conventions used throughout:

  * Wires carry the id of the physical site they descend from; an isometry's
    output inherits the smaller id of its inputs, a branch unitary sends the
    smaller id to branch A and the larger to branch B.
  * Node tensors store legs as (lower ..., upper ...) where "lower" points
    toward the physical level, each group in ascending wire order.  Viewed
    as a matrix M[combined lower, combined upper], every node satisfies
    M^dagger M = I (tops are unit vectors).
  * ``nodes`` is ordered bottom layer to top, disentangler row then isometry
    row, left to right by wire id; top tensors come last.  This is also the
    sweep order of the optimizers, and its reverse is the state-preparation
    order.

Energies are evaluated by contracting only each term's causal cone; the
full statevector path exists as an oracle for small N.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .hamiltonians import PairHamiltonian, PairTerm
from .tensors import random_isometry

__all__ = [
    "BranchPattern",
    "Node",
    "MeraNetwork",
    "build",
    "causal_cone",
    "term_energy",
    "total_energy",
    "to_statevector",
    "prep_state",
    "isometry_defect",
    "max_isometry_defect",
    "save_network",
    "load_network",
]


@dataclass(frozen=True)
class BranchPattern:
    """Which isometry layers branch; ``flags[k]`` is layer k+1, bottom first.

    The named patterns enumerate branches from the top: ``branchK`` turns the
    K top-most isometry layers into branching layers, so ``branch0`` is the
    plain binary MERA and ``branch(n-1)`` is the full branching MERA.
    """

    flags: tuple[bool, ...]

    @classmethod
    def named(cls, name: str, n_layers: int) -> "BranchPattern":
        if not name.startswith("branch"):
            raise ValueError(f"unknown pattern name {name!r}")
        k = int(name[len("branch"):])
        if not (0 <= k <= n_layers):
            raise ValueError(f"{name!r} needs 0 <= K <= {n_layers}")
        return cls(tuple([False] * (n_layers - k) + [True] * k))

    @classmethod
    def none(cls, n_layers: int) -> "BranchPattern":
        return cls((False,) * n_layers)

    @classmethod
    def full(cls, n_layers: int) -> "BranchPattern":
        return cls((True,) * n_layers)

    @property
    def n_branching(self) -> int:
        return sum(self.flags)

    @property
    def name(self) -> str:
        k = self.n_branching
        if self.flags == tuple([False] * (len(self.flags) - k) + [True] * k):
            return f"branch{k}"
        return "custom-" + "".join("1" if f else "0" for f in self.flags)


@dataclass
class Node:
    """One tensor of the network plus its wiring bookkeeping."""

    kind: str  # "dis" | "iso" | "branch" | "top"
    layer: int  # 1-based; tops sit at n_layers + 1
    index: int  # position within the (layer, kind) row, left to right
    wires: tuple[int, int]  # ascending wire ids of the lower legs
    lower_segs: tuple[int, ...]
    upper_segs: tuple[int, ...]
    tensor: np.ndarray

    @property
    def n_lower(self) -> int:
        return len(self.lower_segs)

    def matrix(self) -> np.ndarray:
        """Tensor as a map M[combined lower, combined upper]."""
        low = int(np.prod(self.tensor.shape[: self.n_lower], dtype=np.int64))
        return self.tensor.reshape(low, -1)


@dataclass
class MeraNetwork:
    n_sites: int
    chi: tuple[int, ...]  # chi[0] physical, chi[l] above isometry layer l
    pattern: BranchPattern
    nodes: list[Node]
    seg_dims: list[int]  # dimension of every wire segment, indexed by segment id
    site_segs: tuple[int, ...]  # physical segment of each site (= 0..N-1)
    seed: int = 0

    @property
    def n_layers(self) -> int:
        return len(self.chi) - 1

    def copy(self) -> "MeraNetwork":
        return MeraNetwork(
            self.n_sites,
            self.chi,
            self.pattern,
            [replace(nd, tensor=nd.tensor.copy()) for nd in self.nodes],
            list(self.seg_dims),
            self.site_segs,
            self.seed,
        )

    def tops(self) -> list[int]:
        return [k for k, nd in enumerate(self.nodes) if nd.kind == "top"]


def _normalize_chi(N: int, chi) -> tuple[int, ...]:
    n = N.bit_length() - 1
    if np.isscalar(chi):
        chi_list = [int(chi)] * n
    else:
        chi_list = [int(c) for c in chi]
    if len(chi_list) != n:
        raise ValueError(f"chi list must have length {n} for N={N}, got {len(chi_list)}")
    if chi_list[0] != 2:
        raise ValueError(f"physical bond dimension must be 2, got {chi_list[0]}")
    for l in range(1, n):
        if chi_list[l] > chi_list[l - 1] ** 2:
            raise ValueError(
                f"chi[{l}]={chi_list[l]} exceeds chi[{l-1}]^2={chi_list[l-1]**2}"
            )
    return tuple(chi_list)


def build(N: int, chi, pattern: BranchPattern | str | None, seed: int) -> MeraNetwork:
    """Construct a randomly isometrized (branching) MERA.

    Args:
        N: number of sites, a power of two, at least 4.
        chi: uniform bond dimension or per-level list [chi_0, ..., chi_{n-1}]
            with chi_0 = 2.
        pattern: BranchPattern, a name like "branch0", or None for binary.
        seed: drives every tensor draw; fixed seed gives identical networks.
    """
    if N < 4 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 4, got {N}")
    n = N.bit_length() - 1
    n_layers = n - 1
    chi_t = _normalize_chi(N, chi)
    if pattern is None:
        pattern = BranchPattern.none(n_layers)
    elif isinstance(pattern, str):
        pattern = BranchPattern.named(pattern, n_layers)
    if len(pattern.flags) != n_layers:
        raise ValueError(
            f"pattern has {len(pattern.flags)} flags, expected {n_layers} for N={N}"
        )
    if pattern.n_branching and len(set(chi_t)) != 1:
        raise ValueError("branching layers require a uniform bond dimension")

    seg_dims: list[int] = [chi_t[0]] * N
    site_segs = tuple(range(N))

    def new_seg(dim: int) -> int:
        seg_dims.append(dim)
        return len(seg_dims) - 1

    # groups: independent sub-networks, each a list of (wire, seg) sorted by wire
    groups: list[list[tuple[int, int]]] = [[(w, w) for w in range(N)]]
    shapes: list[tuple] = []  # (kind, layer, index, wires, lower, upper, shape)

    for layer in range(1, n_layers + 1):
        d_in, d_out = chi_t[layer - 1], chi_t[layer]
        branching = pattern.flags[layer - 1]
        dis_row: list[tuple] = []
        iso_row: list[tuple] = []
        next_groups: list[list[tuple[int, int]]] = []
        for g in groups:
            m = len(g)
            post = dict(g)  # wire -> seg, updated by the disentangler row
            for k in range(m // 2):
                pair = sorted((g[2 * k + 1], g[(2 * k + 2) % m]))  # (wire, seg) tuples
                wires = (pair[0][0], pair[1][0])
                lower = (pair[0][1], pair[1][1])
                upper = (new_seg(d_in), new_seg(d_in))
                post[wires[0]], post[wires[1]] = upper
                dis_row.append(("dis", layer, wires, lower, upper, (d_in,) * 4))
            kind = "branch" if branching else "iso"
            out_a: list[tuple[int, int]] = []
            out_b: list[tuple[int, int]] = []
            for k in range(m // 2):
                wires = (g[2 * k][0], g[2 * k + 1][0])
                lower = (post[wires[0]], post[wires[1]])
                if branching:
                    upper = (new_seg(d_out), new_seg(d_out))
                    out_a.append((wires[0], upper[0]))
                    out_b.append((wires[1], upper[1]))
                    shape = (d_in, d_in, d_out, d_out)
                else:
                    upper = (new_seg(d_out),)
                    out_a.append((wires[0], upper[0]))
                    shape = (d_in, d_in, d_out)
                iso_row.append((kind, layer, wires, lower, upper, shape))
            next_groups.append(out_a)
            if branching:
                next_groups.append(out_b)
        groups = sorted(next_groups, key=lambda g: g[0][0])
        for row in (dis_row, iso_row):
            row.sort(key=lambda r: r[2][0])
            for idx, (kind, lay, wires, lower, upper, shape) in enumerate(row):
                shapes.append((kind, lay, idx, wires, lower, upper, shape))

    d_top = chi_t[-1]
    for idx, g in enumerate(sorted(groups, key=lambda g: g[0][0])):
        assert len(g) == 2
        wires = (g[0][0], g[1][0])
        lower = (g[0][1], g[1][1])
        shapes.append(("top", n_layers + 1, idx, wires, lower, (), (d_top, d_top)))

    master = np.random.default_rng(seed)
    node_seeds = master.integers(0, 2**63 - 1, size=len(shapes))
    nodes = []
    for (kind, lay, idx, wires, lower, upper, shape), s in zip(shapes, node_seeds):
        n_low = 2
        rows = int(np.prod(shape[:n_low], dtype=np.int64))
        cols = int(np.prod(shape[n_low:], dtype=np.int64)) if len(shape) > n_low else 1
        mat = random_isometry(rows, cols, int(s))
        nodes.append(Node(kind, lay, idx, wires, lower, upper, mat.reshape(shape)))
    return MeraNetwork(N, chi_t, pattern, nodes, seg_dims, site_segs, seed)


def causal_cone(net: MeraNetwork, i: int, j: int) -> list[int]:
    """Indices (in sweep order) of the nodes inside the causal cone of (i, j).

    A node is in the cone when any of its lower segments is reachable from
    the two physical sites; its upper segments then become reachable.  The
    complement contracts to the identity by the isometric conditions, which
    the statevector oracle pins down in tests.
    """
    if not (0 <= i < j < net.n_sites):
        raise ValueError(f"need 0 <= i < j < {net.n_sites}, got ({i}, {j})")
    active = {net.site_segs[i], net.site_segs[j]}
    out = []
    for idx, nd in enumerate(net.nodes):
        if any(s in active for s in nd.lower_segs):
            out.append(idx)
            active.update(nd.upper_segs)
    return out


def prep_state(
    net: MeraNetwork,
    node_indices: list[int],
    hole: int | None = None,
) -> tuple[np.ndarray, list[tuple]]:
    """Contract the given nodes in preparation (reverse sweep) order.

    Every node's upper segments must be produced inside ``node_indices`` (true
    for causal cones and for the full network).  Returns the resulting tensor
    and a tag list parallel to its axes: ``("seg", s)`` for an open wire
    segment, ``("hl", k)`` / ``("hu", k)`` for the k-th lower/upper leg of the
    ``hole`` node, which is skipped and replaced by an identity.
    """
    psi = np.ones((), dtype=complex)
    tags: list[tuple] = []
    for idx in reversed(node_indices):
        nd = net.nodes[idx]
        if idx == hole:
            for k, s in enumerate(nd.upper_segs):
                tags[tags.index(("seg", s))] = ("hu", k)
            dims = [net.seg_dims[s] for s in nd.lower_segs]
            d = int(np.prod(dims, dtype=np.int64))
            eye = np.eye(d, dtype=complex).reshape(dims + dims)
            psi = np.tensordot(psi, eye, axes=0)
            tags = tags + [("hl", k) for k in range(len(dims))] + [
                ("seg", s) for s in nd.lower_segs
            ]
            continue
        pos = [tags.index(("seg", s)) for s in nd.upper_segs]
        t_axes = list(range(len(nd.lower_segs), nd.tensor.ndim))
        psi = np.tensordot(psi, nd.tensor, axes=(pos, t_axes))
        tags = [t for k, t in enumerate(tags) if k not in pos] + [
            ("seg", s) for s in nd.lower_segs
        ]
    return psi, tags


def _apply_term(
    psi: np.ndarray, tags: list[tuple], term: PairTerm, net: MeraNetwork
) -> np.ndarray:
    """Apply a pair term to the physical-site axes of a prep-state tensor."""
    ax_i = tags.index(("seg", net.site_segs[term.i]))
    ax_j = tags.index(("seg", net.site_segs[term.j]))
    out = np.tensordot(term.matrix.reshape(2, 2, 2, 2), psi, axes=([2, 3], [ax_i, ax_j]))
    return np.moveaxis(out, [0, 1], [ax_i, ax_j])


def term_energy(net: MeraNetwork, term: PairTerm) -> float:
    """<Psi| h_ij |Psi> evaluated by contracting only the causal cone."""
    cone = causal_cone(net, term.i, term.j)
    psi, tags = prep_state(net, cone)
    val = np.vdot(psi, _apply_term(psi, tags, term, net))
    if abs(val.imag) > 1e-8:
        raise ValueError(
            f"term ({term.i},{term.j}) energy has imaginary part {val.imag:.3e}"
        )
    return float(val.real)


def total_energy(net: MeraNetwork, H: PairHamiltonian, unshifted: bool = False) -> float:
    """Sum of causal-cone term energies; add the recorded shift if requested."""
    e = sum(term_energy(net, t) for t in H.terms)
    return e + H.total_shift if unshifted else e


def to_statevector(net: MeraNetwork) -> np.ndarray:
    """Full contraction into a 2^N statevector (oracle path, N <= 16).

    Amplitude ordering: index = sum_k q_k 2^k with site 0 least significant.
    """
    if net.n_sites > 16:
        raise ValueError(f"statevector path limited to N <= 16, got {net.n_sites}")
    psi, tags = prep_state(net, list(range(len(net.nodes))))
    order = [tags.index(("seg", net.site_segs[s])) for s in reversed(range(net.n_sites))]
    return np.transpose(psi, order).reshape(-1)


def isometry_defect(node: Node) -> float:
    """Max-norm deviation from the node's isometric condition."""
    m = node.matrix()
    gram = m.conj().T @ m
    err = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
    if node.kind in ("dis", "branch"):
        gram2 = m @ m.conj().T
        err = max(err, float(np.max(np.abs(gram2 - np.eye(gram2.shape[0])))))
    return err


def max_isometry_defect(net: MeraNetwork) -> float:
    return max(isometry_defect(nd) for nd in net.nodes)


def save_network(net: MeraNetwork, path) -> None:
    """Versioned text serialization for checkpointing between pipeline stages."""
    lines = ["tnvqe-mera v1"]
    lines.append(f"sites {net.n_sites}")
    lines.append("chi " + " ".join(str(c) for c in net.chi))
    lines.append("pattern " + "".join("1" if f else "0" for f in net.pattern.flags))
    lines.append(f"seed {net.seed}")
    lines.append("segdims " + " ".join(str(d) for d in net.seg_dims))
    lines.append(f"nodes {len(net.nodes)}")
    for nd in net.nodes:
        lines.append(
            f"node {nd.kind} {nd.layer} {nd.index} "
            f"wires {nd.wires[0]} {nd.wires[1]} "
            f"lower {' '.join(str(s) for s in nd.lower_segs)} "
            f"upper {' '.join(str(s) for s in nd.upper_segs)}"
        )
        lines.append("shape " + " ".join(str(d) for d in nd.tensor.shape))
        flat = nd.tensor.reshape(-1)
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in flat))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> MeraNetwork:
    with open(path, encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "tnvqe-mera v1":
        raise ValueError(f"{path}: not a v1 network file")
    n_sites = int(lines[1].split()[1])
    chi = tuple(int(c) for c in lines[2].split()[1:])
    pattern = BranchPattern(tuple(c == "1" for c in lines[3].split()[1]))
    seed = int(lines[4].split()[1])
    seg_dims = [int(d) for d in lines[5].split()[1:]]
    n_nodes = int(lines[6].split()[1])
    nodes = []
    pos = 7
    for _ in range(n_nodes):
        parts = lines[pos].split()
        kind, layer, index = parts[1], int(parts[2]), int(parts[3])
        wires = (int(parts[5]), int(parts[6]))
        li = parts.index("lower")
        ui = parts.index("upper")
        lower = tuple(int(s) for s in parts[li + 1 : ui])
        upper = tuple(int(s) for s in parts[ui + 1 :])
        shape = tuple(int(d) for d in lines[pos + 1].split()[1:])
        vals = [float(x) for x in lines[pos + 2].split()]
        data = np.array(
            [complex(vals[2 * k], vals[2 * k + 1]) for k in range(len(vals) // 2)]
        ).reshape(shape)
        nodes.append(Node(kind, layer, index, wires, lower, upper, data))
        pos += 3
    return MeraNetwork(n_sites, chi, pattern, nodes, seg_dims, tuple(range(n_sites)), seed)
