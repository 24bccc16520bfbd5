import itertools

import numpy as np
import pytest

from liegrad.errors import ContractError, NumericalError, ResourceError
from liegrad.pauli import PauliLabel, PauliSum, encode
from liegrad.sim import (StateSpec, basis_state, evolve, exact_D, finite_difference_gradient,
                         hadamard_values, is_hermitian, is_unitary, loss, observable_Hs,
                         pauli_decompose, pauli_matrix, random_density, random_observable,
                         sample_observable, unitary)

from conftest import ket, random_label


class TestPauliMatrix:
    def test_identity(self):
        assert np.array_equal(pauli_matrix(encode("III")), np.eye(8))

    def test_z(self):
        assert np.array_equal(pauli_matrix(encode("Z")), np.diag([1, -1]))

    def test_xz(self):
        m = pauli_matrix(encode("XZ"))
        x, z = np.array([[0, 1], [1, 0]]), np.diag([1, -1])
        assert np.array_equal(m, np.kron(x, z))
        assert is_hermitian(m) and is_unitary(m)
        assert np.trace(m) == 0

    def test_size_guard(self):
        with pytest.raises(ResourceError):
            pauli_matrix(PauliLabel((1,) * 9))
        assert pauli_matrix(PauliLabel((1,) * 9), max_qubits=9).shape == (512, 512)


class TestEvolution:
    def test_zero_generator(self, rng):
        rho = random_density(2, rng)
        np.testing.assert_allclose(evolve(PauliSum.zero(2), rho), rho, atol=1e-14)

    def test_single_qubit_rotation(self):
        out = evolve(PauliSum.from_label("X", np.pi / 4), basis_state("0"))
        assert loss(pauli_matrix(encode("Z")), out) == pytest.approx(0.0, abs=1e-15)

    def test_spectrum_and_trace(self, rng):
        a = PauliSum({random_label(rng, 3): rng.normal() for _ in range(6)}, 3)
        rho = random_density(3, rng)
        out = evolve(a, rho)
        assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-12)

    def test_unitary_matches_expm(self, rng):
        from scipy.linalg import expm
        a = PauliSum({random_label(rng, 2): rng.normal() for _ in range(4)}, 2)
        np.testing.assert_allclose(unitary(a), expm(1j * a.to_matrix()), atol=1e-12)

    def test_non_density_rejected(self):
        with pytest.raises(ContractError):
            evolve(PauliSum.zero(1), np.diag([2.0, -1.0]))


class TestLoss:
    def test_examples(self):
        z = pauli_matrix(encode("Z"))
        assert loss(np.eye(2), StateSpec("mixed", 1).density()) == pytest.approx(1.0)
        assert loss(z, basis_state("0")) == 1.0
        assert loss(z, StateSpec("mixed", 1).density()) == 0.0

    def test_non_hermitian(self):
        with pytest.raises(ContractError):
            loss(np.array([[0, 1], [0, 0]]), basis_state("0"))


class TestHadamardValues:
    def test_identity_label(self, rng):
        o, rho = random_observable(2, rng), random_density(2, rng)
        assert exact_D(o, encode("II"), rho) == 0.0

    def test_single_qubit_value(self):
        assert exact_D(pauli_matrix(encode("X")), encode("Y"), basis_state("0")) == pytest.approx(-2.0)

    def test_commuting_label(self, rng):
        rho = np.diag(rng.dirichlet(np.ones(4))).astype(complex)
        o = random_observable(2, rng)
        assert exact_D(o, encode("ZZ"), rho) == pytest.approx(0.0, abs=1e-15)

    def test_bound(self, rng):
        o, rho = random_observable(3, rng), random_density(3, rng)
        bound = 2 * np.linalg.norm(o, 2)
        for s, v in hadamard_values(o, rho, [random_label(rng, 3) for _ in range(20)]).items():
            assert abs(v) <= bound + 1e-12
            assert v == pytest.approx(exact_D(o, s, rho), abs=1e-14)


class TestObservableHs:
    def test_identity_gives_zero(self, rng):
        o = random_observable(2, rng)
        np.testing.assert_allclose(observable_Hs(o, encode("II")), 0, atol=1e-15)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_expectation_identity(self, rng, d):
        for _ in range(50):
            o, rho = random_observable(d, rng), random_density(d, rng)
            s = random_label(rng, d)
            h = observable_Hs(o, s)
            assert abs(np.trace(h @ rho).real - exact_D(o, s, rho)) <= 1e-10

    def test_traceless_and_norm_bound(self, rng):
        for d in (1, 2, 3):
            o = random_observable(d, rng)
            b = np.trace(o @ o).real
            for w in itertools.product(range(4), repeat=d):
                h = observable_Hs(o, PauliLabel(w))
                assert abs(np.trace(h)) < 1e-12
                assert is_hermitian(h)
                assert np.trace(h @ h).real <= 4 * b + 1e-12


class TestSampling:
    def test_deterministic_outcomes(self, rng):
        assert np.all(sample_observable(pauli_matrix(encode("Z")), basis_state("0"), 100, rng) == 1)
        assert np.all(sample_observable(np.eye(2), basis_state("1"), 100, rng) == 1)

    def test_x_on_zero(self, rng):
        out = sample_observable(pauli_matrix(encode("X")), basis_state("0"), 10_000, rng)
        assert abs(out.mean()) <= 4 / np.sqrt(10_000)

    def test_vector_state(self, rng):
        out = sample_observable(pauli_matrix(encode("Z")), ket("1"), 50, rng)
        assert np.all(out == -1)

    def test_convergence_rate(self, rng):
        o, rho = random_observable(2, rng), random_density(2, rng)
        exact = loss(o, rho)
        for shots in (1_000, 16_000):
            out = sample_observable(o, rho, shots, rng)
            assert abs(out.mean() - exact) <= 4 * out.std() / np.sqrt(shots)

    def test_bad_normalisation(self, rng):
        with pytest.raises(NumericalError):
            sample_observable(np.eye(2), np.diag([0.7, 0.7]).astype(complex), 10, rng)


class TestDecompose:
    def test_z(self):
        assert pauli_decompose(pauli_matrix(encode("Z"))) == PauliSum.from_label("Z")

    def test_projector(self):
        ps = pauli_decompose(basis_state("0"))
        assert ps.coefficient("I") == pytest.approx(0.5)
        assert ps.coefficient("Z") == pytest.approx(0.5)
        assert len(ps) == 2

    def test_round_trip_and_parseval(self, rng):
        for d in (1, 2, 3):
            m = random_observable(d, rng)
            ps = pauli_decompose(m)
            assert ps.is_real or all(abs(c.imag) < 1e-14 for _, c in ps)
            np.testing.assert_allclose(ps.to_matrix(), m, atol=1e-10)
            parseval = 2 ** d * sum(abs(c) ** 2 for _, c in ps)
            assert np.trace(m @ m).real == pytest.approx(parseval, rel=1e-12)

    def test_complex_matrix(self, rng):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        np.testing.assert_allclose(pauli_decompose(m).to_matrix(), m, atol=1e-10)


class TestFiniteDifference:
    def test_rotation_at_zero(self):
        g = finite_difference_gradient(pauli_matrix(encode("Z")), basis_state("0"),
                                       [encode("X")], [0.0])
        assert abs(g[0]) < 1e-8

    def test_zero_coefficients_give_D(self, rng):
        o, rho = random_observable(2, rng), random_density(2, rng)
        labels = [encode("XY"), encode("ZI"), encode("YY")]
        g = finite_difference_gradient(o, rho, labels, [0.0, 0.0, 0.0])
        for s, v in zip(labels, g):
            assert v == pytest.approx(exact_D(o, s, rho), abs=1e-8)

    def test_single_qubit_closed_form(self, rng):
        for _ in range(10):
            b = rng.uniform(-2, 2)
            o, rho = random_observable(1, rng), random_density(1, rng)
            out = evolve(PauliSum.from_label("Y", b), rho)
            d1, d3 = exact_D(o, encode("X"), out), exact_D(o, encode("Z"), out)
            closed = (np.sin(2 * b) * d1 + (1 - np.cos(2 * b)) * d3) / (2 * b)
            g = finite_difference_gradient(o, rho, [encode("X"), encode("Y"), encode("Z")],
                                           [0.0, b, 0.0])
            assert g[0] == pytest.approx(closed, abs=1e-8)

    def test_step_range(self, rng):
        with pytest.raises(ValueError):
            finite_difference_gradient(np.eye(2), basis_state("0"), [encode("X")], [0.0], h=1e-2)
