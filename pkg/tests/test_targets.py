import numpy as np
import pytest

from qbmlab.gibbs import Target, expectation, gibbs_state, relative_entropy
from qbmlab.operators import PauliTerm, build_ansatz
from qbmlab.targets import (
    CorrelationMatrix,
    Dataset,
    encode_dataset,
    fermionic_correlations,
    fermionic_correlations_from_counts,
    pairwise_ising_probabilities,
    synth_dataset,
    xxz_coupling,
    xxz_target,
)

from helpers import jw_lowering_dense, random_statevector


class TestXXZTarget:
    def test_zero_couplings_maximally_mixed(self):
        t = xxz_target(3, J=0.0, Delta=0.0, h_z=0.0)
        assert np.allclose(t.eta, np.eye(8) / 8, atol=1e-12)
        for term in build_ansatz("fully_connected", 3).terms:
            assert t.expectation_of(term) == pytest.approx(0.0, abs=1e-12)

    def test_two_qubit_delta_only_closed_form(self):
        # H = D Z0Z1: <Z0Z1> = tanh(D), single-qubit expectations vanish
        D = 0.9
        t = xxz_target(2, J=0.0, Delta=D, h_z=0.0)
        assert t.expectation_of(PauliTerm("ZZ")) == pytest.approx(np.tanh(D), abs=1e-10)
        assert t.expectation_of(PauliTerm("ZI")) == pytest.approx(0.0, abs=1e-12)
        assert t.expectation_of(PauliTerm("XI")) == pytest.approx(0.0, abs=1e-12)
        assert t.expectation_of(PauliTerm("XX")) == pytest.approx(0.0, abs=1e-12)

    def test_default_n8_entropy_regression(self):
        # pinned against an independent expm/logm oracle run
        t = xxz_target(8)
        baseline = 8 * np.log(2) + t.eta_entropy
        assert baseline == pytest.approx(2.5188097504855587, abs=1e-9)
        assert baseline > 0

    def test_open_vs_periodic_differ(self):
        a_open, th_open = xxz_coupling(4, -0.5, -0.7, -0.8, periodic=False)
        a_per, th_per = xxz_coupling(4, -0.5, -0.7, -0.8, periodic=True)
        assert a_per.m == a_open.m + 3

    def test_too_small(self):
        with pytest.raises(ValueError, match="n >= 2"):
            xxz_target(1)


class TestDataset:
    def test_counts_and_probabilities(self):
        ds = Dataset(samples=("00", "11", "00"))
        assert ds.n == 2 and ds.M == 3
        assert ds.counts == {"00": 2, "11": 1}
        assert sum(ds.probabilities().values()) == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ValueError, match="empty"):
            Dataset(samples=())
        with pytest.raises(ValueError, match="length"):
            Dataset(samples=("00", "111"))
        with pytest.raises(ValueError, match="0/1"):
            Dataset(samples=("0x",))

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "data.txt"
        path.write_text("# comment line\n0101\n\n1111\n0101\n")
        ds = Dataset.from_file(path)
        assert ds.samples == ("0101", "1111", "0101")
        out = tmp_path / "copy.txt"
        ds.to_file(out)
        assert Dataset.from_file(out) == ds

    def test_file_invalid_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0101\n01a1\n")
        with pytest.raises(ValueError, match="bad.txt:2"):
            Dataset.from_file(path)


class TestEncodeDataset:
    def test_single_repeated_string(self):
        t = encode_dataset(Dataset(samples=("000",) * 5))
        for i, term in enumerate(["ZII", "IZI", "IIZ"]):
            assert t.expectation_of(PauliTerm(term)) == pytest.approx(1.0)

    def test_uniform_superposition(self):
        all_strings = tuple(format(k, "03b") for k in range(8))
        t = encode_dataset(Dataset(samples=all_strings))
        assert t.expectation_of(PauliTerm("XII")) == pytest.approx(1.0)
        assert t.expectation_of(PauliTerm("ZII")) == pytest.approx(0.0, abs=1e-12)

    def test_bell_pair_statistics(self):
        t = encode_dataset(Dataset(samples=("00", "11")))
        assert t.expectation_of(PauliTerm("ZZ")) == pytest.approx(1.0)
        assert t.expectation_of(PauliTerm("ZI")) == pytest.approx(0.0, abs=1e-12)
        assert t.expectation_of(PauliTerm("XX")) == pytest.approx(1.0)

    def test_purity(self):
        ds = synth_dataset(4, 30, seed=2, model="independent_bernoulli", p=0.4)
        t = encode_dataset(ds)
        assert np.trace(t.eta @ t.eta).real == pytest.approx(1.0, abs=1e-12)
        assert t.eta_entropy == 0.0

    def test_minibatch_consistency(self):
        # equal-size batches: averaged empirical distributions reproduce the
        # full-data distribution exactly, hence so does any probability-linear
        # expectation (diagonal observables)
        ds = synth_dataset(3, 60, seed=5, model="pairwise_ising")
        B = 6
        size = ds.M // B
        batches = [Dataset(samples=ds.samples[k * size:(k + 1) * size]) for k in range(B)]
        avg = {}
        for b in batches:
            for s, q in b.probabilities().items():
                avg[s] = avg.get(s, 0.0) + q / B
        for s, q in ds.probabilities().items():
            assert avg.get(s, 0.0) == pytest.approx(q, abs=1e-15)
        for term in ("ZII", "IZI", "ZZI", "ZZZ"):
            full = encode_dataset(ds).expectation_of(PauliTerm(term))
            batch_avg = np.mean([encode_dataset(b).expectation_of(PauliTerm(term))
                                 for b in batches])
            assert batch_avg == pytest.approx(full, abs=1e-12)


class TestFermionicCorrelations:
    def test_vacuum_blocks(self):
        psi = np.zeros(8, dtype=complex)
        psi[0] = 1.0
        g = fermionic_correlations(Target.from_statevector(psi)).gamma
        assert np.allclose(g[:3, :3], 0.0, atol=1e-12)          # occupation block
        assert np.allclose(g[3:, 3:], np.eye(3), atol=1e-12)     # hole block

    def test_single_occupied_mode(self):
        # |10>: first mode occupied, second empty
        psi = np.zeros(4, dtype=complex)
        psi[int("10", 2)] = 1.0
        g = fermionic_correlations(Target.from_statevector(psi)).gamma
        assert g[0, 0].real == pytest.approx(1.0)
        assert g[1, 1].real == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_dense_oracle(self, seed):
        rng = np.random.default_rng(seed)
        psi = random_statevector(rng, 8)
        g = fermionic_correlations(Target.from_statevector(psi)).gamma
        c = jw_lowering_dense(3)
        C = [*c, *(ci.conj().T for ci in c)]
        oracle = np.array([[np.vdot(C[i] @ psi, C[j] @ psi) for j in range(6)]
                           for i in range(6)])
        assert np.max(np.abs(g - oracle)) < 1e-10

    def test_spectrum_in_unit_interval(self):
        rng = np.random.default_rng(77)
        for _ in range(5):
            psi = random_statevector(rng, 16)
            occ = fermionic_correlations(Target.from_statevector(psi)).occupations()
            assert occ[0] >= -1e-9 and occ[-1] <= 1 + 1e-9

    def test_density_and_statevector_paths_agree(self):
        rng = np.random.default_rng(13)
        psi = random_statevector(rng, 8)
        t = Target.from_statevector(psi)
        g1 = fermionic_correlations(t).gamma
        g2 = fermionic_correlations(Target.from_density(t.eta)).gamma
        assert np.max(np.abs(g1 - g2)) < 1e-10

    def test_bitstring_path_diagonal_always_agrees(self):
        ds = synth_dataset(4, 50, seed=3, model="pairwise_ising")
        t = encode_dataset(ds)
        signed = fermionic_correlations(t).gamma
        unsigned = fermionic_correlations_from_counts(ds)
        assert np.allclose(np.diag(signed), np.diag(unsigned), atol=1e-10)

    def test_bitstring_path_single_hop_dataset(self):
        # adjacent-mode hop with no occupied modes in between: parity is +1,
        # so the signed and unsigned paths coincide entirely
        ds = Dataset(samples=("100", "010"))
        t = encode_dataset(ds)
        signed = fermionic_correlations(t).gamma
        unsigned = fermionic_correlations_from_counts(ds)
        assert np.max(np.abs(signed - unsigned)) < 1e-10

    def test_bitstring_path_reports_sign_discrepancy(self):
        # hopping across an occupied middle mode flips the sign under the
        # Jordan-Wigner string; the unsigned path misses it
        ds = Dataset(samples=("110", "011"))
        t = encode_dataset(ds)
        signed = fermionic_correlations(t).gamma
        unsigned = fermionic_correlations_from_counts(ds)
        assert np.allclose(np.abs(signed), np.abs(unsigned), atol=1e-10)
        assert np.max(np.abs(signed - unsigned)) > 0.5

    def test_missing_state(self):
        t = Target(n=2, expectations={})
        with pytest.raises(ValueError, match="eta"):
            fermionic_correlations(t)

    def test_correlation_matrix_validation(self):
        with pytest.raises(ValueError, match="Hermitian"):
            CorrelationMatrix(gamma=np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError, match="spectrum"):
            CorrelationMatrix(gamma=np.diag([2.0, -1.0]).astype(complex))


class TestSynthDataset:
    def test_deterministic(self):
        a = synth_dataset(8, 10, seed=42)
        b = synth_dataset(8, 10, seed=42)
        assert a == b
        c = synth_dataset(8, 10, seed=43)
        assert a != c

    def test_bernoulli_extremes(self):
        ones = synth_dataset(5, 20, seed=0, model="independent_bernoulli", p=1.0)
        assert set(ones.samples) == {"11111"}
        zeros = synth_dataset(5, 20, seed=0, model="independent_bernoulli", p=0.0)
        assert set(zeros.samples) == {"00000"}

    def test_pairwise_ising_marginals_match_enumeration(self):
        n, M, seed = 3, 100_000, 9
        ds = synth_dataset(n, M, seed=seed, model="pairwise_ising")
        rng = np.random.default_rng(seed)
        J = rng.uniform(-0.5, 0.5, size=(n, n))
        h = rng.uniform(-0.5, 0.5, size=n)
        probs = pairwise_ising_probabilities(n, J, h)
        marg = np.zeros(n)
        for k, p in enumerate(probs):
            bits = format(k, f"0{n}b")
            for i in range(n):
                marg[i] += p * (bits[i] == "1")
        emp = np.zeros(n)
        for s in ds.samples:
            for i in range(n):
                emp[i] += (s[i] == "1") / M
        sigma = np.sqrt(marg * (1 - marg) / M)
        assert np.all(np.abs(emp - marg) <= 3 * sigma)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError, match="M"):
            synth_dataset(3, 0, seed=0)
        with pytest.raises(ValueError, match="model"):
            synth_dataset(3, 5, seed=0, model="nope")
        with pytest.raises(ValueError, match="capped"):
            synth_dataset(13, 5, seed=0, model="pairwise_ising")
