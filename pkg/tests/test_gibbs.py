import numpy as np
import pytest

from qbmlab.gibbs import (
    Target,
    expectation,
    expectations,
    gibbs_from_hamiltonian,
    gibbs_state,
    hamiltonian_matrix,
    negative_entropy,
    relative_entropy,
    trace_distance,
)
from qbmlab.operators import Ansatz, PauliTerm, build_ansatz, full_pauli_basis
from qbmlab.calculus import gradient
from qbmlab.trainer import NoiseModel, TrainingConfig, sgd_train

from helpers import (
    dense_hamiltonian,
    gibbs_density,
    matrix_log_relative_entropy,
    random_density,
)

Z1 = Ansatz(n=1, terms=(PauliTerm("Z"),), labels=("Z0",))


class TestGibbsState:
    def test_zero_theta_is_maximally_mixed(self):
        a = build_ansatz("fully_connected", 3)
        model = gibbs_state(a, np.zeros(a.m))
        assert model.log_Z == pytest.approx(3 * np.log(2), abs=1e-12)
        assert np.allclose(model.rho, np.eye(8) / 8, atol=1e-12)

    def test_single_qubit_z_published_pairs(self):
        # theta 2.64 <-> <Z> 0.99 and theta 3.8 <-> <Z> 0.999
        m1 = gibbs_state(Z1, np.array([2.64]))
        assert expectation(m1, PauliTerm("Z")) == pytest.approx(0.99, abs=0.005)
        m2 = gibbs_state(Z1, np.array([3.8]))
        assert expectation(m2, PauliTerm("Z")) == pytest.approx(0.999, abs=0.0005)

    def test_matches_dense_expm(self):
        rng = np.random.default_rng(4)
        a = build_ansatz("gl_1d", 3)
        theta = rng.uniform(-1, 1, a.m)
        model = gibbs_state(a, theta)
        rho_oracle = gibbs_density(dense_hamiltonian(a.terms, theta))
        assert np.max(np.abs(model.rho - rho_oracle)) < 1e-10

    def test_trace_and_psd(self):
        rng = np.random.default_rng(0)
        a = build_ansatz("fully_connected", 3)
        model = gibbs_state(a, rng.uniform(-2, 2, a.m))
        assert np.trace(model.rho).real == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.eigvalsh(model.rho)[0] > -1e-12

    def test_non_finite_theta_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            gibbs_state(Z1, np.array([np.inf]))

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError, match="length"):
            hamiltonian_matrix(Z1, np.array([1.0, 2.0]))

    def test_identity_shift_invariance(self):
        rng = np.random.default_rng(7)
        a = build_ansatz("gl_1d", 3)
        theta = rng.uniform(-1, 1, a.m)
        H = hamiltonian_matrix(a, theta)
        c = 1.7
        ev1, _, logZ1, rho1 = gibbs_from_hamiltonian(H)
        ev2, _, logZ2, rho2 = gibbs_from_hamiltonian(H + c * np.eye(8))
        assert logZ2 - logZ1 == pytest.approx(c, abs=1e-10)
        assert np.max(np.abs(rho1 - rho2)) < 1e-10


class TestExpectation:
    def test_maximally_mixed_traceless(self):
        a = build_ansatz("mean_field", 2)
        model = gibbs_state(a, np.zeros(a.m))
        for t in a.terms:
            assert expectation(model, t) == pytest.approx(0.0, abs=1e-12)

    def test_computational_basis_state(self):
        rho = np.zeros((2, 2), dtype=complex)
        rho[0, 0] = 1.0
        assert expectation(rho, PauliTerm("Z")) == pytest.approx(1.0)
        psi = np.array([0.0, 1.0], dtype=complex)
        assert expectation(psi, PauliTerm("Z")) == pytest.approx(-1.0)

    def test_xxz_term_against_dense_oracle(self):
        from qbmlab.targets import xxz_coupling
        a, theta = xxz_coupling(4, -0.5, -0.7, -0.8)
        model = gibbs_state(a, theta)
        rho_oracle = gibbs_density(dense_hamiltonian(a.terms, theta))
        z0 = PauliTerm("ZIII")
        from helpers import dense_pauli
        want = np.trace(rho_oracle @ dense_pauli("ZIII")).real
        assert expectation(model, z0) == pytest.approx(want, abs=1e-10)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(3)
        a = build_ansatz("fully_connected", 3)
        model = gibbs_state(a, rng.uniform(-1, 1, a.m))
        vec = expectations(model)
        for i, t in enumerate(a.terms):
            assert vec[i] == pytest.approx(expectation(model, t), abs=1e-12)

    def test_dimension_mismatch(self):
        model = gibbs_state(Z1, np.array([0.3]))
        with pytest.raises(ValueError, match="qubits"):
            expectation(model, PauliTerm("ZZ"))


class TestRelativeEntropy:
    def test_self_entropy_is_zero(self):
        rng = np.random.default_rng(1)
        a = build_ansatz("gl_1d", 3)
        model = gibbs_state(a, rng.uniform(-1, 1, a.m))
        target = Target.from_gibbs(model)
        assert relative_entropy(target, model) == pytest.approx(0.0, abs=1e-10)

    def test_pure_target_against_maximally_mixed(self):
        psi = np.zeros(8, dtype=complex)
        psi[3] = 1.0
        target = Target.from_statevector(psi)
        a = build_ansatz("mean_field", 3)
        model = gibbs_state(a, np.zeros(a.m))
        assert relative_entropy(target, model) == pytest.approx(3 * np.log(2), abs=1e-10)

    def test_against_matrix_log_oracle(self):
        from qbmlab.targets import xxz_target
        from qbmlab.pretrain import mf_fit
        target = xxz_target(4)
        res = mf_fit(target)
        model = gibbs_state(res.sub_ansatz, res.chi)
        oracle = matrix_log_relative_entropy(target.eta, model.rho)
        assert relative_entropy(target, model) == pytest.approx(oracle, abs=1e-8)

    def test_missing_target_information(self):
        target = Target(n=1, expectations={PauliTerm("Z"): 0.4})
        model = gibbs_state(Z1, np.array([0.1]))
        with pytest.raises(ValueError, match="eta_entropy"):
            relative_entropy(target, model)

    def test_nonnegative_on_random_pairs(self):
        rng = np.random.default_rng(12)
        a = build_ansatz("fully_connected", 2)
        for _ in range(20):
            target = Target.from_density(random_density(rng, 4))
            model = gibbs_state(a, rng.uniform(-1.5, 1.5, a.m))
            assert relative_entropy(target, model) >= -1e-10


class TestTraceDistance:
    def test_identical_states(self):
        rng = np.random.default_rng(2)
        rho = random_density(rng, 4)
        assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        a = np.diag([1.0, 0.0]).astype(complex)
        b = np.diag([0.0, 1.0]).astype(complex)
        assert trace_distance(a, b) == pytest.approx(1.0)

    def test_matches_eigenvalue_sum(self):
        rng = np.random.default_rng(9)
        rho, sigma = random_density(rng, 4), random_density(rng, 4)
        w = np.linalg.eigvalsh(rho - sigma)
        assert trace_distance(rho, sigma) == pytest.approx(0.5 * np.sum(np.abs(w)))
        assert 0.0 <= trace_distance(rho, sigma) <= 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            trace_distance(np.eye(2), np.eye(4))


class TestEntropyInequalities:
    def test_pinsker_bound(self):
        rng = np.random.default_rng(21)
        a = build_ansatz("gl_1d", 3)
        for _ in range(20):
            target = Target.from_density(random_density(rng, 8))
            model = gibbs_state(a, rng.uniform(-1, 1, a.m))
            S = relative_entropy(target, model)
            l1 = 2.0 * trace_distance(target.eta, model.rho)
            assert S >= 0.5 * l1 ** 2 - 1e-12

    def test_collinearity_identity(self):
        # S(eta||rho_theta) - S(eta||rho_opt) = S(rho_opt||rho_theta)
        rng = np.random.default_rng(5)
        a = build_ansatz("gl_1d", 2)
        eta = Target.from_density(random_density(rng, 4))
        cfg = TrainingConfig(ansatz=a, theta0=np.zeros(a.m), target=eta,
                             noise=NoiseModel.exact(),
                             schedule={"kind": "constant", "gamma": 1.0 / (2 * a.m)},
                             epsilon=1e-9, max_iters=200_000, seed=0, record_every=10_000)
        tr = sgd_train(cfg)
        assert tr.converged
        opt_model = gibbs_state(a, tr.final_theta)
        S_opt = relative_entropy(eta, opt_model)
        opt_target = Target.from_gibbs(opt_model)
        for _ in range(10):
            theta = rng.uniform(-1, 1, a.m)
            model = gibbs_state(a, theta)
            lhs = relative_entropy(eta, model) - S_opt
            rhs = relative_entropy(opt_target, model)
            assert lhs == pytest.approx(rhs, abs=1e-6)

    def test_entropy_gap_parameter_bound(self):
        # S(eta||rho_theta) - S(eta||rho_opt) <= 2 eps ||theta - theta_opt||_1
        # whenever both models match the target to within eps per term
        rng = np.random.default_rng(6)
        a = build_ansatz("mean_field", 2)
        eta = Target.from_density(random_density(rng, 4))
        cfg = TrainingConfig(ansatz=a, theta0=np.zeros(a.m), target=eta,
                             noise=NoiseModel.exact(),
                             schedule={"kind": "constant", "gamma": 1.0 / (2 * a.m)},
                             epsilon=1e-10, max_iters=300_000, seed=0, record_every=10_000)
        tr = sgd_train(cfg)
        theta_opt = tr.final_theta
        opt_model = gibbs_state(a, theta_opt)
        S_opt = relative_entropy(eta, opt_model)
        for scale in (1e-3, 1e-2):
            theta = theta_opt + rng.uniform(-scale, scale, a.m)
            model = gibbs_state(a, theta)
            eps = max(np.max(np.abs(gradient(model, eta))),
                      np.max(np.abs(gradient(opt_model, eta))))
            gap = relative_entropy(eta, model) - S_opt
            assert gap <= 2 * eps * np.sum(np.abs(theta - theta_opt)) + 1e-12

    def test_negative_entropy_pure_and_mixed(self):
        pure = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
        assert negative_entropy(pure) == pytest.approx(0.0, abs=1e-12)
        mixed = np.eye(4, dtype=complex) / 4
        assert negative_entropy(mixed) == pytest.approx(-2 * np.log(2), abs=1e-12)
