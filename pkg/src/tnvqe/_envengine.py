"""Shared-work environment engine for alternating network sweeps.

The direct route to one node's environment re-contracts the causal cone of
every term containing it, which costs (cone size)^2 small contractions per
term per sweep.  This engine splits the work per term into

* prefix states: the cone folded top-down, stored after every step.  A
  bottom-up sweep updates a node only after everything below it, so the
  tensors above are still the pre-sweep ones and one top-down pass per
  sweep stays valid throughout.
* an ascended operator M: the term conjugated upward through the already
  updated cone nodes.  M lives on its support (the wires where it acts
  non-trivially); wires outside the support carry the identity, so there
  the two copies of a node contract against each other directly.  M is
  pushed through each node right after that node's update, which is
  exactly the sequential-update rule: everything below a node enters its
  environment at the current value, everything above at the pre-sweep one.
* a three-contraction merge producing the environment of the visited node
  from (prefix, conj(prefix), conj(node), M); at a top the two copies stay
  open instead, giving that term's block of the effective Hamiltonian.

Per-(term, node) cost drops from O(cone) to O(1) contractions.  Every axis
permutation is resolved once per topology and compiled into plain
transpose/reshape/matmul steps.  Terms whose ascended support would exceed
a size cap (heavily branching layouts widen upward) fall back to the
direct per-pair contraction, so results agree to rounding either way - the
engine is an evaluation strategy, not a different update rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .network import MeraNetwork

# Per-side dimension cap for the ascended operator: beyond this the term
# falls back to direct cone contraction (keeps memory per term <= ~1 MB).
_SUPPORT_CAP = 256


def _compile_pair(a_labels, a_dims, b_labels, b_dims):
    """Compile contract-over-shared-labels into transpose/reshape/matmul data.

    Returns ((a_perm, a_mshape, b_perm, b_mshape, out_shape), out_labels);
    the output carries a's free labels then b's free labels, in tensordot
    order.  Empty operands (scalars) are handled by 1x1 matrix shapes.
    """
    shared = [lab for lab in a_labels if lab in b_labels]
    a_axes = [a_labels.index(lab) for lab in shared]
    b_axes = [b_labels.index(lab) for lab in shared]
    a_free = [k for k in range(len(a_labels)) if k not in a_axes]
    b_free = [k for k in range(len(b_labels)) if k not in b_axes]
    a_perm = tuple(a_free) + tuple(a_axes)
    b_perm = tuple(b_axes) + tuple(b_free)
    contracted = math.prod(a_dims[k] for k in a_axes)
    a_rows = math.prod(a_dims[k] for k in a_free)
    b_cols = math.prod(b_dims[k] for k in b_free)
    out_shape = tuple(a_dims[k] for k in a_free) + tuple(b_dims[k] for k in b_free)
    out_labels = [a_labels[k] for k in a_free] + [b_labels[k] for k in b_free]
    step = (a_perm, (a_rows, contracted), b_perm, (contracted, b_cols), out_shape)
    return step, out_labels


def _run_pair(step, a, b):
    a_perm, a_mshape, b_perm, b_mshape, out_shape = step
    return (
        a.transpose(a_perm).reshape(a_mshape) @ b.transpose(b_perm).reshape(b_mshape)
    ).reshape(out_shape)


def _perm_to(labels, wanted):
    if sorted(map(repr, labels)) != sorted(map(repr, wanted)):
        raise ArithmeticError("label bookkeeping mismatch")
    return tuple(labels.index(lab) for lab in wanted)


@dataclass
class _NodeMerge:
    """Compiled environment merge for one (term, cone node) visit."""

    prep_r: int  # prefix index (number of nodes folded above this one)
    step_px: tuple  # conj(prefix) x conj(node tensor)
    step_m: tuple  # result x M
    step_p: tuple  # prefix x result
    out_perm: tuple[int, ...]


@dataclass
class _NodeAscent:
    """Compiled push of M through one cone node after its update."""

    step_k: tuple  # M x node tensor (ket copy)
    step_b: tuple  # conj(node tensor) x result (bra copy)
    out_perm: tuple[int, ...]


@dataclass
class _TopClose:
    """Compiled effective-Hamiltonian block at a top; both copies open."""

    prep_r: int
    step_pp: tuple | None  # conj(prefix) x prefix (absent for a lone top)
    step_m: tuple  # result x M
    eye_dims: tuple[int, ...]  # identity legs appended as (bra, ket) pairs
    out_perm: tuple[int, ...]
    final_shape: tuple[int, int]


@dataclass
class _TermProgram:
    """Everything one term needs for a full engine sweep."""

    t_idx: int
    cone: tuple[int, ...]
    prefix_steps: list
    merges: dict[int, _NodeMerge]
    ascents: dict[int, _NodeAscent]
    closes: dict[int, _TopClose]
    m_init_perm: tuple[int, ...]


class SweepEngine:
    """Drives alternating sweeps with shared per-term contractions.

    Built once per (network topology, Hamiltonian).  ``run_sweep`` walks
    every node in sweep order; nodes listed in ``update_set`` receive their
    freshly assembled environment (or effective-Hamiltonian block for tops
    when ``update_top`` is given) through the callbacks, which perform the
    actual tensor replacement.
    """

    def __init__(self, net: MeraNetwork, H, cones) -> None:
        self.net = net
        self.H = H
        self.cones = cones
        self.programs: list[_TermProgram | None] = [
            self._compile_term(t) for t in range(len(H.terms))
        ]
        self._fast = [p for p in self.programs if p is not None]
        self._by_node_fast: dict[int, list[_TermProgram]] = {}
        for prog in self._fast:
            for idx in prog.cone:
                self._by_node_fast.setdefault(idx, []).append(prog)
        self._by_node_slow: dict[int, list[int]] = {}
        for t_idx, prog in enumerate(self.programs):
            if prog is None:
                for idx in cones.cones[t_idx]:
                    self._by_node_slow.setdefault(idx, []).append(t_idx)

    # -- compilation ----------------------------------------------------

    def _compile_term(self, t_idx: int) -> _TermProgram | None:
        net, H = self.net, self.H
        term = H.terms[t_idx]
        cone = tuple(self.cones.cones[t_idx])
        prep = tuple(reversed(cone))
        seg_dim = net.seg_dims

        # prefix chain, recording the open cut before/after every step
        cuts: list[list[int]] = [[]]
        prefix_steps = []
        tags: list[int] = []
        shape: list[int] = []
        for idx in prep:
            nd = net.nodes[idx]
            pos = tuple(tags.index(s) for s in nd.upper_segs)
            a_free = [k for k in range(len(shape)) if k not in pos]
            a_perm = tuple(a_free) + pos
            t_shape = nd.tensor.shape
            b_perm = tuple(range(nd.n_lower, nd.tensor.ndim)) + tuple(range(nd.n_lower))
            b_rows = math.prod(t_shape[nd.n_lower :])
            b_cols = math.prod(t_shape[: nd.n_lower])
            out_shape = tuple(shape[k] for k in a_free) + t_shape[: nd.n_lower]
            prefix_steps.append(
                (
                    idx,
                    a_perm,
                    (math.prod(shape[k] for k in a_free), b_rows),
                    b_perm,
                    (b_rows, b_cols),
                    out_shape,
                )
            )
            tags = [tags[k] for k in a_free] + list(nd.lower_segs)
            shape = list(out_shape)
            cuts.append(list(tags))

        seg_i, seg_j = net.site_segs[term.i], net.site_segs[term.j]
        support: list[int] = sorted((seg_i, seg_j))
        # term matrix axes are (out_i, out_j, in_i, in_j); align with the
        # seg-sorted (bra..., ket...) layout used for the ascended operator
        m_init_perm = (0, 1, 2, 3) if seg_i < seg_j else (1, 0, 3, 2)

        merges: dict[int, _NodeMerge] = {}
        ascents: dict[int, _NodeAscent] = {}
        closes: dict[int, _TopClose] = {}

        for s_pos, idx in enumerate(cone):  # bottom-up sweep order
            nd = net.nodes[idx]
            r = len(cone) - 1 - s_pos
            cut_above = cuts[r]
            cut_below = cuts[r + 1]
            lower = list(nd.lower_segs)
            upper = list(nd.upper_segs)
            sides = [w for w in cut_above if w not in upper]
            if set(sides) - set(cut_below) or set(support) - set(cut_below):
                return None  # cut bookkeeping does not line up; use direct path
            if math.prod(seg_dim[w] for w in support) > _SUPPORT_CAP:
                return None

            side_k = {w: ("sk", w) if w in support else ("id", w) for w in sides}
            side_b = {w: ("sb", w) if w in support else ("id", w) for w in sides}
            low_out = {w: ("outl", k) for k, w in enumerate(lower)}
            low_bra = {w: ("lb", w) if w in support else low_out[w] for w in lower}
            up_out = {w: ("outu", k) for k, w in enumerate(upper)}
            up_bra = {w: ("ub", w) for w in upper}

            p_labels = [up_out[w] if w in upper else side_k[w] for w in cut_above]
            pb_labels = [up_bra[w] if w in upper else side_b[w] for w in cut_above]
            p_dims = tuple(seg_dim[w] for w in cut_above)
            nd_labels = [low_bra[w] for w in lower] + [up_bra[w] for w in upper]
            nd_dims = nd.tensor.shape
            m_labels = [low_bra[w] if w in lower else side_b[w] for w in support] + [
                low_out[w] if w in lower else side_k[w] for w in support
            ]
            m_dims = tuple(seg_dim[w] for w in support) * 2

            try:
                s1, l1 = _compile_pair(pb_labels, p_dims, nd_labels, nd_dims)
                s2, l2 = _compile_pair(l1, s1[4], m_labels, m_dims)
                s3, l3 = _compile_pair(p_labels, p_dims, l2, s2[4])
                wanted = [("outl", k) for k in range(len(lower))] + [
                    ("outu", k) for k in range(len(upper))
                ]
                merges[idx] = _NodeMerge(r, s1, s2, s3, _perm_to(l3, wanted))
                if nd.kind == "top":
                    closes[idx] = self._compile_close(
                        r, nd, cut_above, lower, support, seg_dim, side_k, side_b
                    )
            except ArithmeticError:
                return None

            # ascent through this node (both copies of it)
            vk_labels = [
                ("mk", w) if w in support else ("idv", w) for w in lower
            ] + [("nk", w) for w in upper]
            vb_labels = [
                ("mb", w) if w in support else ("idv", w) for w in lower
            ] + [("nb", w) for w in upper]
            ma_labels = [("mb", w) if w in lower else ("pb", w) for w in support] + [
                ("mk", w) if w in lower else ("pk", w) for w in support
            ]
            new_support = sorted(
                set(w for w in support if w not in lower) | set(upper)
            )
            if math.prod(seg_dim[w] for w in new_support) > _SUPPORT_CAP:
                return None
            try:
                a1, al1 = _compile_pair(ma_labels, m_dims, vk_labels, nd_dims)
                a2, al2 = _compile_pair(vb_labels, nd_dims, al1, a1[4])
                wanted = [
                    ("nb", w) if w in upper else ("pb", w) for w in new_support
                ] + [("nk", w) if w in upper else ("pk", w) for w in new_support]
                ascents[idx] = _NodeAscent(a1, a2, _perm_to(al2, wanted))
            except ArithmeticError:
                return None
            support = new_support

        if support:  # every wire must terminate at a top inside the cone
            return None
        return _TermProgram(
            t_idx=t_idx,
            cone=cone,
            prefix_steps=prefix_steps,
            merges=merges,
            ascents=ascents,
            closes=closes,
            m_init_perm=m_init_perm,
        )

    def _compile_close(self, r, nd, cut_above, lower, support, seg_dim, side_k, side_b):
        low_ket = {w: ("clk", k) for k, w in enumerate(lower)}
        low_bra = {w: ("clb", k) for k, w in enumerate(lower)}
        p_labels = [side_k[w] for w in cut_above]
        pb_labels = [side_b[w] for w in cut_above]
        p_dims = tuple(seg_dim[w] for w in cut_above)
        m_labels = [low_bra[w] if w in lower else side_b[w] for w in support] + [
            low_ket[w] if w in lower else side_k[w] for w in support
        ]
        m_dims = tuple(seg_dim[w] for w in support) * 2
        if cut_above:
            s_pp, l_pp = _compile_pair(pb_labels, p_dims, p_labels, p_dims)
            s_m, l_m = _compile_pair(l_pp, s_pp[4], m_labels, m_dims)
        else:
            s_pp = None
            s_m, l_m = _compile_pair([], (), m_labels, m_dims)
        # identity legs of the top are appended afterwards as (bra, ket) pairs
        labels_full = list(l_m)
        eye_dims = []
        for k, w in enumerate(lower):
            if w not in support:
                labels_full += [("clb", k), ("clk", k)]
                eye_dims.append(seg_dim[w])
        wanted = [("clb", k) for k in range(len(lower))] + [
            ("clk", k) for k in range(len(lower))
        ]
        d = math.prod(nd.tensor.shape)
        return _TopClose(
            prep_r=r,
            step_pp=s_pp,
            step_m=s_m,
            eye_dims=tuple(eye_dims),
            out_perm=_perm_to(labels_full, wanted),
            final_shape=(d, d),
        )

    # -- execution ------------------------------------------------------

    def run_sweep(self, update_set, update_node, update_top=None) -> None:
        """One full bottom-up pass over the network.

        ``update_node(idx, env)`` and ``update_top(idx, heff)`` replace the
        tensor of a node in ``update_set``; with ``update_top=None`` tops
        get environment updates like everything else.  Environments always
        reflect the tensors current at visit time.
        """
        net, H = self.net, self.H
        prefixes: dict[int, list[np.ndarray]] = {}
        m_ops: dict[int, np.ndarray] = {}
        scalar = np.ones((), dtype=complex)
        for prog in self._fast:
            states = [scalar]
            psi = scalar
            for idx, a_perm, a_mshape, b_perm, b_mshape, out_shape in prog.prefix_steps:
                b = net.nodes[idx].tensor.transpose(b_perm).reshape(b_mshape)
                psi = (psi.transpose(a_perm).reshape(a_mshape) @ b).reshape(out_shape)
                states.append(psi)
            prefixes[prog.t_idx] = states
            m_ops[prog.t_idx] = (
                H.terms[prog.t_idx].matrix.reshape(2, 2, 2, 2).transpose(prog.m_init_perm)
            )

        for idx, nd in enumerate(net.nodes):
            progs = self._by_node_fast.get(idx, ())
            slow = self._by_node_slow.get(idx, ())
            if idx in update_set:
                if nd.kind == "top" and update_top is not None:
                    heff = np.zeros((nd.tensor.size,) * 2, dtype=complex)
                    for prog in progs:
                        heff += self._close_top(prog, idx, prefixes, m_ops)
                    for t_idx in slow:
                        heff += self._direct("heff", t_idx, idx)
                    update_top(idx, heff)
                else:
                    env = np.zeros(nd.tensor.shape, dtype=complex)
                    for prog in progs:
                        env += self._merge_env(prog, idx, prefixes, m_ops)
                    for t_idx in slow:
                        env += self._direct("env", t_idx, idx)
                    update_node(idx, env)
            for prog in progs:  # keep M aligned even for skipped nodes
                asc = prog.ascents[idx]
                t = net.nodes[idx].tensor
                m_ops[prog.t_idx] = _run_pair(
                    asc.step_b, np.conj(t), _run_pair(asc.step_k, m_ops[prog.t_idx], t)
                ).transpose(asc.out_perm)

    def _merge_env(self, prog, idx, prefixes, m_ops):
        mg = prog.merges[idx]
        prefix = prefixes[prog.t_idx][mg.prep_r]
        g1 = _run_pair(mg.step_px, np.conj(prefix), np.conj(self.net.nodes[idx].tensor))
        g2 = _run_pair(mg.step_m, g1, m_ops[prog.t_idx])
        return _run_pair(mg.step_p, prefix, g2).transpose(mg.out_perm)

    def _close_top(self, prog, idx, prefixes, m_ops):
        cl = prog.closes[idx]
        m = m_ops[prog.t_idx]
        if cl.step_pp is not None:
            prefix = prefixes[prog.t_idx][cl.prep_r]
            core = _run_pair(cl.step_m, _run_pair(cl.step_pp, np.conj(prefix), prefix), m)
        else:
            core = _run_pair(cl.step_m, np.ones((), dtype=complex), m)
        for d in cl.eye_dims:
            core = np.multiply.outer(core, np.eye(d, dtype=complex))
        return core.transpose(cl.out_perm).reshape(cl.final_shape)

    def _direct(self, what, t_idx, idx):
        from . import optimizer

        if what == "env":
            return optimizer._direct_term_env(self.net, self.H, self.cones, t_idx, idx)
        return optimizer._direct_term_heff(self.net, self.H, self.cones, t_idx, idx)
