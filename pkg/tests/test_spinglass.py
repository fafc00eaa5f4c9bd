import numpy as np
import pytest

from pbitsim.errors import CapacityError
from pbitsim.model import all_state_energies, eval_energy, update_drive
from pbitsim.spinglass import (
    ErSpec,
    IsingInstance,
    bits_to_spins,
    brute_force_ground,
    gen_er,
    ising_energy,
    ising_to_qubo,
    load_instance,
    pt_baseline,
    save_instance,
    sg_update_drive,
)


def random_instance(rng, n, p=0.6):
    return gen_er(ErSpec(n, p), rng=rng)


class TestGenEr:
    def test_p_zero_no_edges(self):
        assert gen_er(ErSpec(10, 0.0), seed=0).num_edges == 0

    def test_p_one_complete(self):
        inst = gen_er(ErSpec(4, 1.0), seed=0)
        assert inst.num_edges == 6
        assert all(abs(J) == 1.0 for J in inst.couplings.values())
        assert np.all(inst.fields == 0)

    def test_edge_count_and_sign_balance(self):
        # binomial statistics across 100 seeds, 4 sigma bands
        n, p = 200, 0.5
        n_pairs = n * (n - 1) // 2
        counts, plus = [], []
        for seed in range(100):
            inst = gen_er(ErSpec(n, p), seed=seed)
            counts.append(inst.num_edges)
            plus.append(sum(1 for J in inst.couplings.values() if J > 0))
        mean_edges = np.mean(counts)
        sigma_edges = np.sqrt(n_pairs * p * (1 - p) / 100)
        assert abs(mean_edges - n_pairs * p) < 4 * sigma_edges
        frac_plus = np.sum(plus) / np.sum(counts)
        sigma_sign = np.sqrt(0.25 / np.sum(counts))
        assert abs(frac_plus - 0.5) < 4 * sigma_sign

    def test_density_matches_p(self):
        # measured density over 100 seeds within 4 sigma
        n, p = 60, 0.3
        n_pairs = n * (n - 1) // 2
        total = sum(gen_er(ErSpec(n, p), seed=s).num_edges for s in range(100))
        sigma = np.sqrt(100 * n_pairs * p * (1 - p))
        assert abs(total - 100 * n_pairs * p) < 4 * sigma


class TestIsingToQubo:
    def test_single_coupling_mapping(self):
        inst = IsingInstance(2, {(0, 1): 1.0})
        model = ising_to_qubo(inst)
        terms = dict(model.terms)
        assert terms[(0, 1)] == -4.0
        assert terms[(0,)] == 2.0 and terms[(1,)] == 2.0
        assert terms[()] == -1.0
        for bits, expected in [((0, 0), -1.0), ((1, 1), -1.0), ((0, 1), 1.0), ((1, 0), 1.0)]:
            assert eval_energy(model, bits) == expected

    def test_field_only(self):
        inst = IsingInstance(1, {}, np.array([1.0]))
        model = ising_to_qubo(inst)
        assert eval_energy(model, [0]) == 1.0  # sigma = -1
        assert eval_energy(model, [1]) == -1.0

    def test_zero_instance(self):
        model = ising_to_qubo(IsingInstance(3, {}))
        assert model.terms == ()

    def test_state_by_state_equivalence(self, rng):
        # 200 random instances, N <= 12: exact integer match for all states
        for _ in range(200):
            n = int(rng.integers(2, 13))
            inst = random_instance(rng, n)
            model = ising_to_qubo(inst)
            energies = all_state_energies(model)
            for idx in range(min(1 << n, 64)):  # spot-check a prefix of states
                bits = [(idx >> v) & 1 for v in range(n)]
                assert energies[idx] == ising_energy(inst, bits_to_spins(bits))

    def test_argmin_bijection(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            inst = random_instance(rng, n)
            model = ising_to_qubo(inst)
            energies = all_state_energies(model)
            ground_binary = {i for i in range(1 << n) if energies[i] == energies.min()}
            e0, _ = brute_force_ground(inst)
            sigma_grounds = set()
            for i in range(1 << n):
                bits = [(i >> v) & 1 for v in range(n)]
                if ising_energy(inst, bits_to_spins(bits)) == e0:
                    sigma_grounds.add(i)
            assert ground_binary == sigma_grounds


class TestSgUpdateDrive:
    def test_two_spin_example(self):
        model = ising_to_qubo(IsingInstance(2, {(0, 1): 1.0}))
        assert sg_update_drive(model, [0, 1], 0) == pytest.approx(2.0)

    def test_isolated_bias(self):
        from pbitsim.model import EnergyModel

        model = EnergyModel(2, [(3.0, (0,))])
        assert sg_update_drive(model, [0, 0], 0) == -3.0

    def test_matches_generic(self, rng):
        for _ in range(500):
            n = int(rng.integers(3, 13))
            model = ising_to_qubo(random_instance(rng, n))
            s = rng.integers(0, 2, size=n).astype(np.uint8)
            k = int(rng.integers(n))
            assert sg_update_drive(model, s, k) == pytest.approx(
                update_drive(model, s, k), abs=1e-9
            )


class TestBruteForce:
    def test_ferromagnetic_triangle(self):
        inst = IsingInstance(3, {(0, 1): 1.0, (0, 2): 1.0, (1, 2): 1.0})
        e, sigma = brute_force_ground(inst)
        assert e == -3.0
        assert abs(sigma.sum()) == 3  # aligned

    def test_frustrated_triangle(self):
        inst = IsingInstance(3, {(0, 1): -1.0, (0, 2): -1.0, (1, 2): -1.0})
        e, _ = brute_force_ground(inst)
        assert e == -1.0

    def test_single_spin_field(self):
        inst = IsingInstance(1, {}, np.array([2.0]))
        e, sigma = brute_force_ground(inst)
        assert e == -2.0 and sigma[0] == 1

    def test_capacity_guard(self):
        with pytest.raises(CapacityError):
            brute_force_ground(IsingInstance(30, {}))


class TestPtBaseline:
    def test_small_instances_use_brute_force(self, rng):
        inst = random_instance(rng, 10)
        ref = pt_baseline(inst)
        assert ref.provenance == "brute-force"
        assert ref.energy == brute_force_ground(inst)[0]

    def test_long_pt_close_to_exact(self, rng):
        # force the PT path on enumerable sizes: >= 95/100 exact matches
        hits = 0
        for trial in range(100):
            inst = random_instance(rng, 12, p=0.5)
            exact = brute_force_ground(inst)[0]
            ref = pt_baseline(inst, seed=trial, brute_force_limit=0)
            assert ref.provenance == "long-pt"
            hits += ref.energy == exact
        assert hits >= 95

    def test_deterministic(self, rng):
        inst = random_instance(rng, 14)
        a = pt_baseline(inst, seed=3, brute_force_limit=0)
        b = pt_baseline(inst, seed=3, brute_force_limit=0)
        assert a == b


class TestInstanceIO:
    def test_round_trip(self, rng, tmp_path):
        inst = random_instance(rng, 15)
        inst = IsingInstance(15, inst.couplings, np.arange(15, dtype=float))
        path = tmp_path / "x.ising"
        save_instance(inst, path)
        again = load_instance(path)
        assert again.couplings == inst.couplings
        assert np.array_equal(again.fields, inst.fields)

    def test_bad_header(self, tmp_path):
        from pbitsim.errors import FileFormatError

        path = tmp_path / "bad.ising"
        path.write_text("5 7\n")
        with pytest.raises(FileFormatError):
            load_instance(path)
