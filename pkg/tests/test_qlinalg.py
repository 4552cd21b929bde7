"""Tests for the complex linear algebra / entanglement oracle layer.

Expected values come from independent routes: hand-built matrices for the
Bell partial transpose, the quadratic formula for 2x2 Hermitian spectra,
and Faddeev-LeVerrier characteristic polynomials for 4x4 trace norms.
"""

import numpy as np
import pytest

from entdetect.qlinalg import (
    DensityMatrix,
    DimensionMismatch,
    NotHermitian,
    PureState,
    adjoint,
    hermitian_eigenvalues,
    jacobi_eigenvalues,
    kron,
    kron_all,
    negativity,
    negativity_per_qubit,
    numerical_rank,
    partial_transpose,
    purity,
    trace_norm,
)

I2 = np.eye(2, dtype=complex)
SWAPX = np.array([[0, 1], [1, 0]], dtype=complex)
KET0 = np.array([1, 0], dtype=complex)

BELL_PSI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)

# Partial transpose of |psi+><psi+| on the first qubit, written out by hand:
# rho has 1/2 at (00,00),(00,11),(11,00),(11,11); transposing the first
# index pair sends (00,11)->(10,01) and (11,00)->(01,10).
BELL_PT_BY_HAND = 0.5 * np.array(
    [
        [1, 0, 0, 0],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)


def random_hermitian(rng, n):
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return h + h.conj().T


def random_density(rng, nq):
    d = 2**nq
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real, nq)


def haar_unitary(rng, d):
    # QR-based Haar sampling; independent of the package's own unitary recipe.
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def eig2x2_closed_form(h):
    # Quadratic-formula spectrum of a 2x2 Hermitian matrix.
    a, d = h[0, 0].real, h[1, 1].real
    mid = 0.5 * (a + d)
    rad = np.sqrt(0.25 * (a - d) ** 2 + abs(h[0, 1]) ** 2)
    return np.array([mid + rad, mid - rad])


def charpoly_coeffs(h):
    # Faddeev-LeVerrier: characteristic polynomial coefficients from traces
    # and matrix products only (no eigensolver involved).
    n = h.shape[0]
    coeffs = [1.0]
    m = np.zeros_like(h)
    for k in range(1, n + 1):
        m = h @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(h @ m).real / k)
    return np.array(coeffs)


class TestKronAdjoint:
    def test_kron_identities(self):
        np.testing.assert_array_equal(kron(I2, I2), np.eye(4))

    def test_kron_swap_blocks(self):
        out = kron(SWAPX, I2)
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 2] = expected[1, 3] = expected[2, 0] = expected[3, 1] = 1
        np.testing.assert_array_equal(out, expected)

    def test_kron_basis_kets(self):
        v = kron(KET0.reshape(2, 1), KET0.reshape(2, 1))
        np.testing.assert_array_equal(v.ravel(), [1, 0, 0, 0])

    def test_kron_all_three_factors(self):
        out = kron_all(I2, SWAPX, I2)
        np.testing.assert_array_equal(out, np.kron(I2, np.kron(SWAPX, I2)))

    def test_adjoint_basics(self):
        np.testing.assert_array_equal(adjoint(I2), I2)
        np.testing.assert_array_equal(adjoint(np.array([[1j]])), np.array([[-1j]]))

    def test_adjoint_involution(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
            np.testing.assert_array_equal(adjoint(adjoint(a)), a)


class TestHermitianEigenvalues:
    def test_diagonal_input_sorted_descending(self):
        out = hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(out, [3, 2, 1])

    def test_bell_pt_spectrum(self):
        out = hermitian_eigenvalues(BELL_PT_BY_HAND)
        np.testing.assert_allclose(out, [0.5, 0.5, 0.5, -0.5], atol=1e-12)

    @pytest.mark.parametrize("method", ["lapack", "jacobi"])
    def test_2x2_closed_form(self, method):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            h = random_hermitian(rng, 2)
            expected = eig2x2_closed_form(h)
            got = hermitian_eigenvalues(h, method=method)
            scale = max(1.0, np.max(np.abs(expected)))
            assert np.max(np.abs(got - expected)) / scale <= 1e-9

    def test_jacobi_matches_lapack_to_4q(self):
        rng = np.random.default_rng(13)
        for n in (2, 3, 4, 8, 16):
            h = random_hermitian(rng, n)
            np.testing.assert_allclose(
                jacobi_eigenvalues(h),
                hermitian_eigenvalues(h),
                atol=1e-11 * max(1.0, np.max(np.abs(h))),
            )

    def test_eigenvalue_sum_equals_trace(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            h = random_hermitian(rng, 8)
            assert abs(np.sum(hermitian_eigenvalues(h)) - np.trace(h).real) < 1e-8

    def test_rejects_non_hermitian(self):
        with pytest.raises(NotHermitian):
            hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(NotHermitian):
            jacobi_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            hermitian_eigenvalues(np.zeros((2, 3)))


class TestPartialTranspose:
    def test_block_permutation_subsystem0(self):
        m = np.arange(16, dtype=complex).reshape(4, 4)
        expected = np.array(
            [[0, 1, 8, 9], [4, 5, 12, 13], [2, 3, 10, 11], [6, 7, 14, 15]]
        )
        np.testing.assert_array_equal(partial_transpose(m, 0, [2, 2]), expected)

    def test_block_permutation_subsystem1(self):
        m = np.arange(16, dtype=complex).reshape(4, 4)
        expected = np.array(
            [[0, 4, 2, 6], [1, 5, 3, 7], [8, 12, 10, 14], [9, 13, 11, 15]]
        )
        np.testing.assert_array_equal(partial_transpose(m, 1, [2, 2]), expected)

    def test_product_state_factorizes(self):
        rng = np.random.default_rng(23)
        r1 = random_density(rng, 1).mat
        r2 = random_density(rng, 1).mat
        got = partial_transpose(np.kron(r1, r2), 0, [2, 2])
        np.testing.assert_allclose(got, np.kron(r1.T, r2), atol=1e-14)

    def test_involution_and_trace(self):
        rng = np.random.default_rng(29)
        for nq, sub in [(2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]:
            rho = random_density(rng, nq).mat
            pt = partial_transpose(rho, sub, [2] * nq)
            assert abs(np.trace(pt) - np.trace(rho)) < 1e-14
            np.testing.assert_allclose(
                partial_transpose(pt, sub, [2] * nq), rho, atol=1e-15
            )

    def test_bell_pt_matches_hand_matrix(self):
        rho = PureState(BELL_PSI_PLUS, 2).to_density()
        np.testing.assert_allclose(
            partial_transpose(rho, 0), BELL_PT_BY_HAND, atol=1e-15
        )
        assert hermitian_eigenvalues(partial_transpose(rho, 0))[-1] == pytest.approx(
            -0.5, abs=1e-12
        )

    def test_dimension_errors(self):
        with pytest.raises(DimensionMismatch):
            partial_transpose(np.eye(4), 0, [2, 3])
        with pytest.raises(DimensionMismatch):
            partial_transpose(np.eye(4), 2, [2, 2])
        with pytest.raises(DimensionMismatch):
            partial_transpose(np.eye(6), 0)


class TestTraceNorm:
    def test_density_matrix_gives_one(self):
        rng = np.random.default_rng(31)
        for nq in (1, 2, 3):
            assert trace_norm(random_density(rng, nq).mat) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_diag_plus_minus(self):
        assert trace_norm(np.diag([1.0, -1.0])) == pytest.approx(2.0)

    def test_bell_pt_value(self):
        assert trace_norm(BELL_PT_BY_HAND) == pytest.approx(2.0, abs=1e-12)

    def test_lower_bound_by_trace(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            h = random_hermitian(rng, 4)
            assert trace_norm(h) >= abs(np.trace(h).real) - 1e-12

    def test_charpoly_oracle_2x2_and_4x4(self):
        rng = np.random.default_rng(41)
        for _ in range(1000):
            n = 2 if rng.random() < 0.5 else 4
            h = random_hermitian(rng, n)
            if n == 2:
                expected = np.sum(np.abs(eig2x2_closed_form(h)))
            else:
                roots = np.roots(charpoly_coeffs(h))
                expected = np.sum(np.abs(roots.real))
            got = trace_norm(h)
            assert abs(got - expected) / expected <= 1e-8


class TestNegativityPurityRank:
    def test_product_state_zero(self):
        rho = PureState(np.array([1, 0, 0, 0], dtype=complex), 2).to_density()
        assert negativity(rho) == 0.0

    def test_bell_half(self):
        rho = PureState(BELL_PSI_PLUS, 2).to_density()
        assert negativity(rho) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("p,expected", [(0.5, 0.0), (0.3, 0.2), (0.0, 0.5)])
    def test_werner_values(self, p, expected):
        psi_minus = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
        rho = (p / 3) * np.eye(4) + (1 - 4 * p / 3) * np.outer(
            psi_minus, psi_minus.conj()
        )
        assert negativity(DensityMatrix(rho, 2)) == pytest.approx(expected, abs=1e-12)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            rho = random_density(rng, 2)
            u = np.kron(haar_unitary(rng, 2), haar_unitary(rng, 2))
            rotated = DensityMatrix(u @ rho.mat @ u.conj().T, 2)
            assert abs(negativity(rho) - negativity(rotated)) <= 1e-9

    def test_three_qubit_bipartitions(self):
        # |0> (x) |psi+> : qubit 0 separable, the 1|2 pair maximally entangled.
        vec = np.zeros(8, dtype=complex)
        vec[0] = vec[3] = 1 / np.sqrt(2)  # |000> + |011>
        triple = negativity_per_qubit(PureState(vec, 3).to_density(), 3)
        np.testing.assert_allclose(triple, [0.0, 0.5, 0.5], atol=1e-12)

    def test_purity_values(self):
        rho = PureState(BELL_PSI_PLUS, 2).to_density()
        assert purity(rho) == pytest.approx(1.0, abs=1e-12)
        assert purity(DensityMatrix(np.eye(4) / 4, 2)) == pytest.approx(0.25)

    def test_purity_werner_formula(self):
        rng = np.random.default_rng(47)
        psi_minus = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
        for p in rng.random(20):
            rho = (p / 3) * np.eye(4) + (1 - 4 * p / 3) * np.outer(
                psi_minus, psi_minus.conj()
            )
            assert purity(DensityMatrix(rho, 2)) == pytest.approx(
                3 * (p / 3) ** 2 + (1 - p) ** 2, abs=1e-12
            )

    def test_numerical_rank(self):
        proj = PureState(BELL_PSI_PLUS, 2).to_density()
        assert numerical_rank(proj, 1e-10) == 1
        half = 0.5 * np.outer([1, 0, 0, 0], [1, 0, 0, 0]) + 0.5 * np.outer(
            [0, 1, 0, 0], [0, 1, 0, 0]
        )
        assert numerical_rank(DensityMatrix(half.astype(complex), 2), 1e-10) == 2
        assert numerical_rank(DensityMatrix(np.eye(4) / 4, 2), 1e-10) == 4
        with pytest.raises(ValueError):
            numerical_rank(proj, 0.0)


class TestStateTypes:
    def test_pure_state_validates_norm(self):
        PureState(BELL_PSI_PLUS, 2).validate()
        with pytest.raises(ValueError):
            PureState(BELL_PSI_PLUS * 1.001, 2).validate()

    def test_density_validate_catches_violations(self):
        good = PureState(BELL_PSI_PLUS, 2).to_density()
        good.validate()
        bad_herm = good.mat.copy()
        bad_herm[0, 1] += 1e-6
        with pytest.raises(ValueError):
            DensityMatrix(bad_herm, 2).validate()
        with pytest.raises(ValueError):
            DensityMatrix(good.mat * 1.001, 2).validate()
        neg = good.mat.copy()
        neg[1, 1] -= 1e-6
        neg[0, 0] += 1e-6  # keep trace 1, break positivity
        # a pure projector minus mass on an orthogonal axis is indefinite
        neg2 = 1.001 * good.mat - 0.001 * np.diag([0, 1, 0, 0.0])
        with pytest.raises(ValueError):
            DensityMatrix(neg2, 2).validate()

    def test_shape_checks(self):
        with pytest.raises(DimensionMismatch):
            PureState(np.zeros(3), 2)
        with pytest.raises(DimensionMismatch):
            DensityMatrix(np.eye(3), 2)
