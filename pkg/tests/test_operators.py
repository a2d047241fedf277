import numpy as np
import pytest

from decoshield.errors import ArgumentError
from decoshield.operators import (SuperOperator, build_superop, hs_inner,
                                  matrix_exp, operator_norm,
                                  ordered_propagator, partial_trace,
                                  spectral_decomposition)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)

rng = np.random.default_rng(7)


def random_matrix(d, scale=1.0):
    return scale * (rng.standard_normal((d, d))
                    + 1j * rng.standard_normal((d, d)))


def random_hermitian(d, scale=1.0):
    a = random_matrix(d, scale)
    return 0.5 * (a + a.conj().T)


class TestHSInner:
    def test_pauli_normalization(self):
        assert hs_inner(SX, SX) == pytest.approx(2.0)

    def test_pauli_orthogonality(self):
        assert hs_inner(SX, SY) == pytest.approx(0.0)

    def test_positivity(self):
        for _ in range(20):
            a = random_matrix(3)
            v = hs_inner(a, a)
            assert v.imag == pytest.approx(0.0, abs=1e-12)
            assert v.real >= 0

    def test_conjugate_symmetry(self):
        a, b = random_matrix(4), random_matrix(4)
        assert hs_inner(a, b) == pytest.approx(np.conj(hs_inner(b, a)))

    def test_dimension_mismatch(self):
        with pytest.raises(ArgumentError):
            hs_inner(SX, np.eye(3))


class TestSuperOperators:
    def test_commutator_pauli(self):
        lz = build_superop("commutator", SZ)
        np.testing.assert_allclose(lz(SX), 2j * SY, atol=1e-14)

    def test_left_identity(self):
        lid = build_superop("left", np.eye(2))
        np.testing.assert_allclose(lid.matrix, np.eye(4), atol=1e-14)

    def test_left_right_commute(self):
        a, b, c = (random_matrix(3) for _ in range(3))
        la, rb = build_superop("left", a), build_superop("right", b)
        np.testing.assert_allclose((la @ rb)(c), a @ c @ b, atol=1e-12)
        np.testing.assert_allclose((rb @ la)(c), (la @ rb)(c), atol=1e-12)

    def test_matrix_form_matches_direct_action(self):
        # the representation invariant, over 100 random pairs
        for _ in range(100):
            d = int(rng.integers(2, 5))
            a, x = random_matrix(d), random_matrix(d)
            for kind, expect in [("left", a @ x), ("right", x @ a),
                                 ("commutator", a @ x - x @ a)]:
                got = build_superop(kind, a)(x)
                assert operator_norm(got - expect) < 1e-12 * max(
                    1.0, operator_norm(expect))

    def test_unknown_kind(self):
        with pytest.raises(ArgumentError):
            build_superop("sandwich", SX)

    def test_zero_identity_algebra(self):
        z, i = SuperOperator.zero(2), SuperOperator.identity(2)
        x = random_matrix(2)
        np.testing.assert_allclose(z(x), 0 * x, atol=1e-15)
        np.testing.assert_allclose((i + z)(x), x, atol=1e-15)
        np.testing.assert_allclose((2.0 * i - i)(x), x, atol=1e-15)


class TestMatrixExp:
    def test_zero(self):
        np.testing.assert_allclose(matrix_exp(np.zeros((3, 3))), np.eye(3),
                                   atol=1e-14)

    def test_pauli_rotation(self):
        np.testing.assert_allclose(matrix_exp(0.5j * np.pi * SZ), 1j * SZ,
                                   atol=1e-14)

    def test_inverse(self):
        for _ in range(10):
            a = random_matrix(4)
            a *= 5.0 / max(operator_norm(a), 1e-12)
            prod = matrix_exp(a) @ matrix_exp(-a)
            assert operator_norm(prod - np.eye(4)) < 1e-11

    def test_rejects_nan(self):
        bad = np.array([[np.nan, 0], [0, 0]])
        with pytest.raises(ArgumentError):
            matrix_exp(bad)


class TestOrderedPropagator:
    def test_constant_hamiltonian(self):
        h = random_hermitian(3)
        u = ordered_propagator(lambda t: h, 0.0, 0.7, step=0.01)
        np.testing.assert_allclose(u, matrix_exp(-0.7j * h), atol=1e-10)

    def test_commuting_family(self):
        h0 = random_hermitian(2)
        g = lambda t: np.sin(t)
        u = ordered_propagator(lambda t: g(t) * h0, 0.0, 2.0, step=0.005)
        integral = 1.0 - np.cos(2.0)
        np.testing.assert_allclose(u, matrix_exp(-1j * integral * h0),
                                   atol=1e-9)

    def test_step_halving_convergence(self):
        # two-piece non-commuting H: the coarse and halved runs must agree
        h1, h2 = random_hermitian(3), random_hermitian(3)

        def h(t):
            return h1 if t < 0.5 else h2

        coarse = ordered_propagator(h, 0.0, 1.0, step=0.01)
        fine = ordered_propagator(h, 0.0, 1.0, step=0.005)
        assert operator_norm(coarse - fine) < 1e-9
        exact = matrix_exp(-0.5j * h2) @ matrix_exp(-0.5j * h1)
        assert operator_norm(fine - exact) < 1e-8

    def test_cocycle(self):
        h1 = random_hermitian(2)
        h2 = random_hermitian(2)
        h = lambda t: np.cos(t) * h1 + np.sin(t) * h2
        u20 = ordered_propagator(h, 0.0, 1.0, step=0.0125)
        u21 = ordered_propagator(h, 0.5, 1.0, step=0.0125)
        u10 = ordered_propagator(h, 0.0, 0.5, step=0.0125)
        assert operator_norm(u20 - u21 @ u10) < 1e-9

    def test_unitary(self):
        h = lambda t: np.cos(3 * t) * random_hermitian(4, 2.0)
        hfix = random_hermitian(4, 2.0)
        u = ordered_propagator(lambda t: np.cos(3 * t) * hfix, 0.0, 5.0,
                               step=0.02)
        assert operator_norm(u.conj().T @ u - np.eye(4)) < 1e-10

    def test_rejects_non_hermitian(self):
        with pytest.raises(ArgumentError):
            ordered_propagator(lambda t: np.array([[0, 1], [0, 0]]),
                               0.0, 1.0, 0.1)


class TestPartialTrace:
    def test_product_state(self):
        rho_s = random_hermitian(2)
        rho_s = rho_s @ rho_s.conj().T
        rho_s /= np.trace(rho_s)
        rho_r = np.diag([0.3, 0.7]).astype(complex)
        out = partial_trace(np.kron(rho_s, rho_r), [2, 2], [0])
        np.testing.assert_allclose(out, rho_s, atol=1e-12)

    def test_maximally_entangled(self):
        bell = np.zeros(4, dtype=complex)
        bell[0] = bell[3] = 1 / np.sqrt(2)
        rho = np.outer(bell, bell.conj())
        out = partial_trace(rho, [2, 2], [0])
        np.testing.assert_allclose(out, 0.5 * np.eye(2), atol=1e-12)

    def test_trace_preserved(self):
        a = random_matrix(8)
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        out = partial_trace(rho, [2, 2, 2], [1])
        assert np.trace(out) == pytest.approx(1.0, abs=1e-12)

    def test_keep_second_factor(self):
        rho_a = np.diag([0.2, 0.8]).astype(complex)
        rho_b = np.diag([0.5, 0.25, 0.25]).astype(complex)
        out = partial_trace(np.kron(rho_a, rho_b), [2, 3], [1])
        np.testing.assert_allclose(out, rho_b, atol=1e-12)

    def test_bad_dims(self):
        with pytest.raises(ArgumentError):
            partial_trace(np.eye(6), [2, 2], [0])


class TestSpectralDecomposition:
    def test_reconstruction_and_projectors(self):
        h = random_hermitian(5)
        dec = spectral_decomposition(h)
        total = np.zeros((5, 5), dtype=complex)
        recon = np.zeros((5, 5), dtype=complex)
        for e, p in zip(dec.eigenvalues, dec.projectors):
            assert operator_norm(p @ p - p) < 1e-12
            total += p
            recon += e * p
        np.testing.assert_allclose(total, np.eye(5), atol=1e-12)
        assert operator_norm(recon - h) < 1e-11

    def test_degeneracy_flags(self):
        dec = spectral_decomposition(np.diag([1.0, 1.0, 2.0]))
        assert not dec.simple
        assert spectral_decomposition(np.diag([1.0, 2.0, 3.0])).simple
