"""The package's verification gate: ten end-to-end checks, one line each.

Every test prints a single ``[ACCEPTANCE] <nn> <name>: PASS/FAIL`` line with
the measured margins, then asserts.  The checks pair independently written
oracle code (statevector contraction, matrix exponentials, finite
differences) against the production paths, and run the pipeline at reduced
but meaningful budgets.

Set ``TNVQE_FULL_ACCEPTANCE=1`` to switch the two heaviest checks (07, 10)
to their full experimental budgets (hours, not minutes).
"""

import math
import os
import time

import numpy as np

import oracles
from tnvqe import sim
from tnvqe.circuits import (
    cartan_decompose,
    encode_mera,
    random_branching_circuit,
    su4_from_angles,
)
from tnvqe.hamiltonians import (
    exact_ground_energy,
    gen_heisenberg,
    gen_ising,
    gen_rainbow,
    gen_xyz,
    shift_negative,
)
from tnvqe.network import build, max_isometry_defect, term_energy, total_energy
from tnvqe.optimizer import (
    ConeIndex,
    bfgs_optimize,
    ev_sweep,
    ev_update,
    modified_ev_sweep,
    top_diag_update,
)
from tnvqe.vqe import eevqe_pipeline, random_baseline

FULL = os.environ.get("TNVQE_FULL_ACCEPTANCE") == "1"

_GEN = {"ising": gen_ising, "xyz": gen_xyz, "heisenberg": gen_heisenberg}


def _report(tag: str, ok: bool, detail: str) -> None:
    line = f"[ACCEPTANCE] {tag}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    assert ok, line


def _lg(delta: float) -> float:
    return math.log10(max(delta, 1e-16))


def _haar_u4(rng) -> np.ndarray:
    z = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _phase_aligned_opnorm(target: np.ndarray, rebuilt: np.ndarray) -> float:
    tr = np.trace(np.conj(rebuilt).T @ target)
    phase = tr / abs(tr) if abs(tr) > 1e-12 else 1.0
    return float(np.linalg.norm(target - phase * rebuilt, 2))


def test_01_network_energies_and_encoding_match_statevector_oracle():
    t0 = time.perf_counter()
    worst_term, worst_total, worst_fid = 0.0, 0.0, 1.0
    models = list(_GEN)
    for seed in range(20):
        for n, pattern in ((8, [None, "branch1", "branch2"][seed % 3]), (16, None)):
            H = shift_negative(_GEN[models[seed % 3]](n, seed))
            net = build(n, 2, pattern, seed=seed)
            psi = oracles.mera_statevector(net)
            for t in H.terms:
                got = term_energy(net, t)
                want = oracles.term_expectation(psi, t.matrix, t.i, t.j)
                worst_term = max(worst_term, abs(got - want))
            for unshifted in (False, True):
                got = total_energy(net, H, unshifted=unshifted)
                want = oracles.hamiltonian_expectation(psi, H, unshifted=unshifted)
                worst_total = max(worst_total, abs(got - want))
            phi = sim.run_circuit(encode_mera(net))
            worst_fid = min(worst_fid, abs(np.vdot(phi, psi)) ** 2)
    dt = time.perf_counter() - t0
    ok = worst_term <= 1e-10 and worst_total <= 1e-10 and worst_fid >= 1 - 1e-10
    _report(
        "01 network-vs-statevector oracle equivalence",
        ok and dt < 120,
        f"max term-energy diff {worst_term:.1e}, max total diff {worst_total:.1e}, "
        f"min encode fidelity 1-{1 - worst_fid:.1e}, {dt:.1f} s (< 120 s)",
    )


def test_02_single_tensor_updates_monotone_and_isometric():
    t0 = time.perf_counter()
    worst_rise, worst_defect = -np.inf, 0.0
    n_updates = 0
    for model in _GEN:
        for k in range(10):
            H = shift_negative(_GEN[model](16, 100 + k))
            net = build(16, 2, None, seed=k)
            cones = ConeIndex(net, H)
            e_prev = cones.shifted_energy(net)
            for idx in range(len(net.nodes)):
                ev_update(net, H, idx, cones)
                e_new = cones.shifted_energy(net)
                worst_rise = max(worst_rise, e_new - e_prev)
                worst_defect = max(worst_defect, max_isometry_defect(net))
                e_prev = e_new
                n_updates += 1
            for idx in net.tops():
                top_diag_update(net, H, idx, cones)
                e_new = cones.shifted_energy(net)
                worst_rise = max(worst_rise, e_new - e_prev)
                worst_defect = max(worst_defect, max_isometry_defect(net))
                e_prev = e_new
                n_updates += 1
    dt = time.perf_counter() - t0
    ok = worst_rise <= 1e-10 and worst_defect <= 1e-10
    _report(
        "02 per-update energy monotonicity and isometry",
        ok and dt < 600,
        f"{n_updates} updates over 30 instances, worst energy rise {worst_rise:.1e}, "
        f"worst isometry defect {worst_defect:.1e}, {dt:.1f} s (< 600 s)",
    )


def test_03_full_rank_ladder_reaches_exact_in_one_sweep():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(5):
        H = shift_negative(gen_heisenberg(8, seed))
        e = exact_ground_energy(H)
        net = build(8, [2, 4, 16], None, seed=seed)
        hist = modified_ev_sweep(net, H, 1, e_exact=e)
        worst = max(worst, abs(hist.final_delta()))
    dt = time.perf_counter() - t0
    _report(
        "03 chi=[2,4,16] one-sweep exactness",
        worst < 1e-9 and dt < 300,
        f"worst |relative error| {worst:.1e} over 5 seeds, {dt:.1f} s (< 300 s)",
    )


def test_04_cartan_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    eye = np.eye(4)
    specials = [eye, eye[[0, 2, 1, 3]], eye[[0, 1, 3, 2]]]  # identity, SWAP, CNOT
    worst = 0.0
    for u in specials + [_haar_u4(rng) for _ in range(1000)]:
        worst = max(worst, _phase_aligned_opnorm(u, su4_from_angles(cartan_decompose(u))))
    dt = time.perf_counter() - t0
    _report(
        "04 two-qubit gate decomposition round trip",
        worst < 1e-8 and dt < 10,
        f"worst op-norm error {worst:.1e} over 1003 matrices, {dt:.1f} s (< 10 s)",
    )


def test_05_gradient_three_way_agreement():
    t0 = time.perf_counter()
    cases = []
    for i in range(8):
        cases.append((4, [None, "branch1"][i % 2], shift_negative(gen_xyz(4, i)), None))
    for i in range(8):
        cases.append(
            (8, [None, "branch1", "branch2"][i % 3], shift_negative(gen_heisenberg(8, i)), None)
        )
    # 16 qubits: restrict the costly shifted/finite-difference evaluations to
    # a random component subset that always covers the interaction slots
    big = [
        (None, shift_negative(gen_ising(16, 16)), 25),
        ("branch1", shift_negative(gen_rainbow(16, 1.0)), 45),
        ("branch2", shift_negative(gen_rainbow(16, 2.0)), 45),
        ("branch3", shift_negative(gen_rainbow(16, 0.5)), 45),
    ]
    for pattern, H, n_sub in big:
        cases.append((16, pattern, H, n_sub))
    worst, n_comps, max_k = 0.0, 0, 0
    for i, (n, pattern, H, n_sub) in enumerate(cases):
        c = random_branching_circuit(n, pattern, 700 + i)
        max_k = max(max_k, len(c.gates))
        th = c.theta()
        if n_sub is None:
            comps = list(range(th.size))
        else:
            rng = np.random.default_rng(1000 + i)
            comps = sorted(set(rng.choice(th.size, size=n_sub, replace=False)) | {6, 7, 8})
        ga = sim.grad_adjoint(c, th, H)
        gs = sim.grad_parameter_shift(c, th, H, components=comps)
        gf = oracles.fd_gradient(lambda x: sim.energy(c, x, H), th, components=comps)
        for l in comps:
            for a, b in ((gs[l], ga[l]), (gs[l], gf[l]), (ga[l], gf[l])):
                worst = max(worst, abs(a - b) / max(1.0, abs(a), abs(b)))
            n_comps += 1
    dt = time.perf_counter() - t0
    _report(
        "05 parameter-shift / adjoint / finite-difference agreement",
        worst < 1e-6 and dt < 300,
        f"20 circuits (up to {max_k} gates), {n_comps} components, "
        f"worst relative spread {worst:.1e}, {dt:.1f} s (< 300 s)",
    )


def test_06_noiseless_embedding_is_exact():
    t0 = time.perf_counter()
    runs = [
        (shift_negative(gen_ising(8, 21)), None, 3),
        (shift_negative(gen_xyz(8, 22)), "branch1", 4),
        (shift_negative(gen_heisenberg(8, 23)), "branch2", 5),
    ]
    worst_overlap, worst_jump = 0.0, 0.0
    for H, pattern, net_seed in runs:
        mera, vqe = eevqe_pipeline(
            H, pattern=pattern, mera_budget=40, vqe_budget=5, net_seed=net_seed
        )
        worst_overlap = max(worst_overlap, abs(vqe.meta["embedding_overlap"] - 1.0))
        worst_jump = max(worst_jump, abs(vqe.rows[0].energy - mera.rows[-1].energy))
    dt = time.perf_counter() - t0
    ok = worst_overlap <= 1e-10 and worst_jump <= 1e-9
    _report(
        "06 noiseless embedding continuity",
        ok,
        f"worst | |overlap|-1 | {worst_overlap:.1e}, worst stage-boundary energy "
        f"jump {worst_jump:.1e}, {dt:.1f} s",
    )


def test_07_pipeline_improves_and_beats_random_baseline_early():
    t0 = time.perf_counter()
    if FULL:
        n, n_real, mera_b, vqe_b, pattern = 16, 10, 1000, 2000, "branch1"
        thresholds = {"ising": 0.10, "xyz": 0.15, "heisenberg": 0.15}
        budget_s = 8 * 3600
    else:
        n, n_real, mera_b, vqe_b, pattern = 8, 3, 200, 200, "branch2"
        thresholds = {m: 0.0 for m in _GEN}  # smoke asserts direction only
        budget_s = 15 * 60
    # the early-advantage checkpoint sits at 5% of the VQE budget: iteration
    # 100 of 2000 in full mode, iteration 10 of 200 in smoke (at N=8 a random
    # start has already caught up by iteration 100, so a fixed count would
    # test a different claim than the full run does)
    check_iter = vqe_b // 20
    details, ok = [], True
    for model in _GEN:
        imps, eev_early, base_early = [], [], []
        for r in range(n_real):
            H = shift_negative(_GEN[model](n, 500 + r))
            e = exact_ground_energy(H)
            mera, vqe = eevqe_pipeline(
                H, pattern=pattern, mera_budget=mera_b, vqe_budget=vqe_b,
                net_seed=0, e_exact=e,
            )
            base = random_baseline(H, pattern=pattern, vqe_budget=vqe_b, seed=r, e_exact=e)
            imps.append(_lg(mera.final_delta()) - _lg(vqe.final_delta()))
            eev_early.append(_lg(vqe.rows[min(check_iter, len(vqe.rows) - 1)].delta))
            base_early.append(_lg(base.rows[min(check_iter, len(base.rows) - 1)].delta))
        imp = float(np.mean(imps))
        gap = float(np.mean(base_early) - np.mean(eev_early))
        ok = ok and imp > thresholds[model] and gap >= 0.0
        details.append(f"{model}: stage gain {imp:+.3f} (> {thresholds[model]}), "
                       f"lead over random init at iter {check_iter} {gap:+.3f}")
    dt = time.perf_counter() - t0
    mode = "full" if FULL else "smoke"
    _report(
        "07 embedded-init pipeline gains",
        ok and dt < budget_s,
        f"[{mode}, N={n}, {n_real} realizations] " + "; ".join(details) +
        f"; {dt:.0f} s (< {budget_s} s)",
    )


def test_08_embedded_init_beats_random_init_on_final_median():
    t0 = time.perf_counter()
    finals_emb, finals_rand = [], []
    for k in range(10):
        H = shift_negative(gen_ising(16, 200 + k))
        e = exact_ground_energy(H)
        mera, vqe = eevqe_pipeline(
            H, pattern="branch1", mera_budget=100, vqe_budget=100, net_seed=0, e_exact=e
        )
        base = random_baseline(H, pattern="branch1", vqe_budget=100, seed=k, e_exact=e)
        finals_emb.append(vqe.final_delta())
        finals_rand.append(base.final_delta())
    med_e, med_r = float(np.median(finals_emb)), float(np.median(finals_rand))
    dt = time.perf_counter() - t0
    _report(
        "08 final-error medians, embedded vs random init",
        med_e < med_r,
        f"10 paired seeds at N=16: embedded median {med_e:.2e} < random median "
        f"{med_r:.2e}, {dt:.0f} s",
    )


def test_09_rainbow_gain_grows_with_field():
    t0 = time.perf_counter()
    h_values = (0.0, 2.0, 3.5)
    gains = []
    for h in h_values:
        H = shift_negative(gen_rainbow(16, h))
        e = exact_ground_energy(H)
        vals = []
        for s in range(3):
            mera, vqe = eevqe_pipeline(
                H, pattern="branch3", mera_budget=100, vqe_budget=100,
                net_seed=s, e_exact=e,
            )
            vals.append(_lg(mera.final_delta()) - _lg(vqe.final_delta()))
        gains.append(float(np.mean(vals)))
    dt = time.perf_counter() - t0
    ok = gains[0] <= gains[1] <= gains[2] and dt < 4 * 3600
    _report(
        "09 branching gain monotone in rainbow field",
        ok,
        "gains " + ", ".join(f"h={h}: {g:+.3f}" for h, g in zip(h_values, gains)) +
        f", {dt:.0f} s (< 4 h)",
    )


def test_10_optimizer_energy_ordering_at_iteration_50():
    t0 = time.perf_counter()
    # the assertion reads iteration 50; past that point the run length only
    # adds wall time, so the default stops at 60 and the full mode runs 200
    iters = 200 if FULL else 60
    details, ok = [], True
    for model in ("ising", "xyz"):
        at50 = {"ev": [], "modified_ev": [], "bfgs": []}
        for k in range(10):
            H = shift_negative(_GEN[model](16, 300 + k))
            e = exact_ground_energy(H)
            hist = ev_sweep(build(16, 2, None, seed=k), H, iters, e_exact=e)
            at50["ev"].append(hist.rows[50].energy)
            hist = modified_ev_sweep(build(16, 2, None, seed=k), H, iters, e_exact=e)
            at50["modified_ev"].append(hist.rows[50].energy)
            hist = bfgs_optimize(build(16, 2, None, seed=k), H, iters, e_exact=e)
            at50["bfgs"].append(hist.rows[min(50, len(hist.rows) - 1)].energy)
        m = {arm: float(np.mean(v)) for arm, v in at50.items()}
        ok = ok and m["bfgs"] <= m["modified_ev"] + 1e-9 <= m["ev"] + 2e-9
        details.append(
            f"{model}: bfgs {m['bfgs']:.4f} <= modified {m['modified_ev']:.4f} "
            f"<= ev {m['ev']:.4f}"
        )
    dt = time.perf_counter() - t0
    _report(
        "10 mean-energy ordering of the three optimizers at iteration 50",
        ok,
        "; ".join(details) + f", {dt:.0f} s",
    )
