import numpy as np
import pytest

import oracles
from tnvqe import sim
from tnvqe.hamiltonians import exact_ground_energy, gen_heisenberg, gen_xyz, shift_negative
from tnvqe.network import build, max_isometry_defect, term_energy, to_statevector, total_energy
from tnvqe.optimizer import (
    ConeIndex,
    SweepSchedule,
    bfgs_optimize,
    effective_hamiltonian,
    environment,
    ev_sweep,
    ev_update,
    modified_ev_sweep,
    top_diag_update,
)


class TestEnvironment:
    def test_linear_form_reproduces_energy(self, xyz8):
        # <Psi|h|Psi> restricted to the terms seeing a node equals the full
        # elementwise pairing of that node with its environment tensor
        net = build(8, 2, None, seed=3)
        cones = ConeIndex(net, xyz8)
        for node_index in (0, 5, 9, 12):
            env = environment(net, xyz8, node_index, cones)
            want = sum(
                term_energy(net, xyz8.terms[t]) for t in cones.terms_of[node_index]
            )
            got = complex(np.sum(env * net.nodes[node_index].tensor))
            assert got.imag == pytest.approx(0.0, abs=1e-9)
            assert got.real == pytest.approx(want, abs=1e-9)

    def test_environment_shape_and_zero_for_untouched_node(self, xyz8):
        net = build(8, 2, None, seed=3)
        env = environment(net, xyz8, 4)
        assert env.shape == net.nodes[4].tensor.shape

    def test_requires_shifted(self):
        net = build(8, 2, None, seed=0)
        raw = gen_xyz(8, 1)
        with pytest.raises(ValueError, match="shift"):
            environment(net, raw, 0)
        with pytest.raises(ValueError, match="out of range"):
            environment(net, shift_negative(raw), 99)


class TestSingleUpdates:
    @pytest.mark.parametrize("pattern", [None, "branch2"])
    def test_every_update_monotone_and_isometric(self, pattern, xyz8):
        net = build(8, 2, pattern, seed=6)
        cones = ConeIndex(net, xyz8)
        e_before = cones.shifted_energy(net)
        for idx in range(len(net.nodes)):
            ev_update(net, xyz8, idx, cones)
            e_after = cones.shifted_energy(net)
            assert e_after <= e_before + 1e-10
            assert max_isometry_defect(net) < 1e-10
            e_before = e_after

    def test_top_diag_return_value_is_new_energy(self, heis8):
        # for a single-top network every term reaches the top, so the ground
        # eigenvalue of the effective Hamiltonian is the full new energy
        net = build(8, 2, None, seed=2)
        cones = ConeIndex(net, heis8)
        top = net.tops()[0]
        val = top_diag_update(net, heis8, top, cones)
        assert val == pytest.approx(cones.shifted_energy(net), abs=1e-10)

    def test_top_diag_at_least_as_good_as_ev(self, heis8):
        net_a = build(8, 2, None, seed=2)
        net_b = net_a.copy()
        top = net_a.tops()[0]
        ev_update(net_a, heis8, top)
        top_diag_update(net_b, heis8, top)
        assert total_energy(net_b, heis8) <= total_energy(net_a, heis8) + 1e-10

    def test_effective_hamiltonian_quadratic_form(self, heis8, rng):
        net = build(8, 2, None, seed=5)
        top = net.tops()[0]
        heff = effective_hamiltonian(net, heis8, top)
        assert np.max(np.abs(heff - heff.conj().T)) < 1e-10
        # E(t) = <t|heff|t> for any unit top state with the rest frozen
        t = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        t /= np.linalg.norm(t)
        net.nodes[top].tensor = t.reshape(2, 2)
        assert total_energy(net, heis8) == pytest.approx(
            float(np.real(np.conj(t) @ heff @ t)), abs=1e-9
        )

    def test_effective_hamiltonian_rejects_non_top(self, heis8):
        net = build(8, 2, None, seed=5)
        with pytest.raises(ValueError, match="top"):
            effective_hamiltonian(net, heis8, 0)


class TestSweeps:
    def test_engine_matches_direct_updates(self, xyz8):
        # the shared-work sweep must be numerically identical to looping
        # ev_update node by node
        net_fast = build(8, 2, "branch1", seed=9)
        net_slow = net_fast.copy()
        hist = ev_sweep(net_fast, xyz8, 3, e_exact=-1.0)
        cones = ConeIndex(net_slow, xyz8)
        energies = [cones.shifted_energy(net_slow)]
        for _ in range(3):
            for idx in range(len(net_slow.nodes)):
                ev_update(net_slow, xyz8, idx, cones)
            energies.append(cones.shifted_energy(net_slow))
        np.testing.assert_allclose(hist.shifted_energies(), energies, atol=1e-11)
        for a, b in zip(net_fast.nodes, net_slow.nodes):
            np.testing.assert_allclose(a.tensor, b.tensor, atol=1e-11)

    def test_engine_matches_direct_updates_modified(self, heis8):
        net_fast = build(8, 2, None, seed=4)
        net_slow = net_fast.copy()
        hist = modified_ev_sweep(net_fast, heis8, 2, e_exact=-1.0)
        cones = ConeIndex(net_slow, heis8)
        energies = [cones.shifted_energy(net_slow)]
        for _ in range(2):
            for idx in range(len(net_slow.nodes)):
                if net_slow.nodes[idx].kind == "top":
                    top_diag_update(net_slow, heis8, idx, cones)
                else:
                    ev_update(net_slow, heis8, idx, cones)
            energies.append(cones.shifted_energy(net_slow))
        np.testing.assert_allclose(hist.shifted_energies(), energies, atol=1e-11)
        for a, b in zip(net_fast.nodes, net_slow.nodes):
            np.testing.assert_allclose(a.tensor, b.tensor, atol=1e-11)

    def test_history_layout_and_meta(self, xyz8):
        net = build(8, 2, None, seed=1)
        e0 = total_energy(net, xyz8, unshifted=True)
        hist = ev_sweep(net, xyz8, 4)
        assert [r.iteration for r in hist.rows] == list(range(5))
        assert all(r.stage == "ev" for r in hist.rows)
        assert hist.rows[0].energy == pytest.approx(e0, abs=1e-10)
        assert hist.rows[-1].energy == pytest.approx(
            total_energy(net, xyz8, unshifted=True), abs=1e-10
        )
        assert hist.meta["optimizer"] == "ev"
        assert hist.meta["model"] == "xyz" and hist.meta["n_sites"] == 8
        assert hist.meta["e_exact"] == pytest.approx(exact_ground_energy(xyz8))
        deltas = hist.deltas()
        assert np.all(np.diff(deltas) <= 1e-10) and np.all(deltas >= -1e-9)

    def test_unshifted_rejected(self):
        net = build(8, 2, None, seed=0)
        raw = gen_xyz(8, 5)
        for runner in (ev_sweep, modified_ev_sweep):
            with pytest.raises(ValueError, match="shift"):
                runner(net, raw, 1)
        with pytest.raises(ValueError, match="shift"):
            bfgs_optimize(net, raw, 1)

    def test_out_of_order_schedule_uses_direct_path(self, xyz8):
        # a descending visit order cannot ride the ascending engine but must
        # still perform the same per-node updates
        net = build(8, 2, None, seed=8)
        order = tuple(reversed(range(len(net.nodes))))
        hist = modified_ev_sweep(net, xyz8, SweepSchedule(order, 2), e_exact=-1.0)
        assert np.all(np.diff(hist.shifted_energies()) <= 1e-10)
        assert max_isometry_defect(net) < 1e-10

    def test_subset_schedule_leaves_rest_untouched(self, xyz8):
        net = build(8, 2, None, seed=7)
        frozen = [nd.tensor.copy() for nd in net.nodes]
        ev_sweep(net, xyz8, SweepSchedule((0, 3, 11), 2), e_exact=-1.0)
        for idx, before in enumerate(frozen):
            if idx in (0, 3, 11):
                continue
            np.testing.assert_array_equal(net.nodes[idx].tensor, before)

    def test_modified_exact_on_full_rank_ladder(self):
        # chi = [2, 4] on 4 sites spans the whole Hilbert space, so one
        # modified sweep must land on the exact ground state
        H = shift_negative(gen_heisenberg(4, 3))
        net = build(4, [2, 4], None, seed=0)
        hist = modified_ev_sweep(net, H, 1)
        assert abs(hist.final_delta()) < 1e-9

    def test_sweeps_lower_energy_vs_oracle_state(self, heis8):
        net = build(8, 2, None, seed=12)
        hist = modified_ev_sweep(net, heis8, 10)
        psi = oracles.mera_statevector(net)
        assert oracles.hamiltonian_expectation(psi, heis8) == pytest.approx(
            hist.rows[-1].energy_shifted, abs=1e-8
        )
        assert hist.rows[-1].energy_shifted < hist.rows[0].energy_shifted


class TestBfgsArm:
    def test_optimizes_and_writes_back(self, xyz8):
        net = build(8, 2, None, seed=10)
        e0 = total_energy(net, xyz8)
        hist = bfgs_optimize(net, xyz8, max_iter=40)
        assert hist.meta["optimizer"] == "bfgs"
        assert hist.rows[0].energy_shifted == pytest.approx(e0, abs=1e-9)
        e_final = hist.rows[-1].energy_shifted
        assert e_final < e0
        # the optimized angles really were written back into the tensors
        assert total_energy(net, xyz8) == pytest.approx(e_final, abs=1e-9)
        assert max_isometry_defect(net) < 1e-12
        assert hist.final_theta is not None

    def test_final_theta_reproduces_energy(self, xyz8):
        net = build(8, 2, None, seed=10)
        hist = bfgs_optimize(net, xyz8, max_iter=15)
        from tnvqe.circuits import encode_mera

        circ = encode_mera(build(8, 2, None, seed=10))
        assert sim.energy(circ, hist.final_theta, xyz8) == pytest.approx(
            hist.rows[-1].energy_shifted, abs=1e-9
        )

    def test_requires_chi_two(self, heis8):
        net = build(8, [2, 4, 4], None, seed=0)
        with pytest.raises(ValueError, match="chi"):
            bfgs_optimize(net, heis8, 5)
