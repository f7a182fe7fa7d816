"""Takagi factorization and the analytical SOS decompositions."""

import numpy as np
import pytest

from sos_compress.errors import DecompositionError, SymmetryError
from sos_compress.decompositions import (
    eig_normal,
    factor_to_normal_operator,
    svd_sos,
    takagi,
    takagi_sos,
)
from sos_compress.random_ops import (
    random_antihermitian_cc_tensor,
    random_unitary,
)
from sos_compress.tensors import (
    CHARGE_CHARGE,
    CoeffTensor4,
    SOSFactor,
    SuperMatrix,
    factor_tensor,
    reconstruct_tensor,
    reshape_to_supermatrix,
)
from sos_compress import fock


def reconstruction_defect(mat, result):
    return np.linalg.norm((result.u * result.sigma) @ result.u.T - mat)


class TestTakagi:
    def test_identity(self):
        result = takagi(np.eye(3))
        np.testing.assert_allclose(result.sigma, np.ones(3), atol=1e-12)
        assert reconstruction_defect(np.eye(3), result) < 1e-10

    def test_real_diagonal(self):
        result = takagi(np.diag([2.0, 1.0]))
        np.testing.assert_allclose(result.sigma, [2.0, 1.0], atol=1e-12)
        # U is the identity up to column phases with e^{2iθ} = 1
        phases = np.diagonal(result.u)
        np.testing.assert_allclose(np.abs(phases), 1.0, atol=1e-12)
        np.testing.assert_allclose(phases**2, 1.0, atol=1e-12)

    def test_random_symmetric_against_svd(self):
        rng = np.random.default_rng(1)
        mat = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        mat = mat + mat.T
        result = takagi(mat)
        svals = np.linalg.svd(mat, compute_uv=False)
        np.testing.assert_allclose(result.sigma, svals, atol=1e-10)
        assert reconstruction_defect(mat, result) < 1e-10 * np.linalg.norm(mat)
        eye = np.eye(6)
        assert np.linalg.norm(result.u.conj().T @ result.u - eye) < 1e-10

    def test_rank_deficient(self):
        rng = np.random.default_rng(2)
        vecs = rng.standard_normal((6, 2)) + 1j * rng.standard_normal((6, 2))
        mat = vecs @ vecs.T
        result = takagi(mat)
        assert reconstruction_defect(mat, result) < 1e-10 * np.linalg.norm(mat)
        assert np.all(result.sigma[2:] == 0)
        eye = np.eye(6)
        assert np.linalg.norm(result.u.conj().T @ result.u - eye) < 1e-10

    def test_zero_matrix(self):
        result = takagi(np.zeros((4, 4)))
        assert np.all(result.sigma == 0)
        assert np.linalg.norm(result.u.conj().T @ result.u - np.eye(4)) < 1e-12

    def test_rejects_nonsymmetric(self):
        rng = np.random.default_rng(3)
        mat = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        with pytest.raises(SymmetryError):
            takagi(mat)

    def test_sigma_invariant_under_permutation_congruence(self):
        rng = np.random.default_rng(4)
        mat = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        mat = mat + mat.T
        perm = np.eye(5)[rng.permutation(5)]
        congruent = perm @ mat @ perm.T
        np.testing.assert_allclose(
            takagi(mat).sigma, takagi(congruent).sigma, atol=1e-12
        )


class TestTakagiSos:
    def test_zero_tensor_empty(self):
        assert takagi_sos(CoeffTensor4(np.zeros((3,) * 4), CHARGE_CHARGE)) == []

    def test_rank_one_couplings(self):
        t = random_antihermitian_cc_tensor(4, seed=5)
        factors = takagi_sos(t)
        for factor in factors:
            assert factor.j_second_singular_value() < 1e-10 * np.linalg.norm(
                factor.j, 2
            )
            assert factor.unitarity_defect() < 1e-10

    def test_tensor_reconstruction(self):
        t = random_antihermitian_cc_tensor(4, seed=6)
        rec = reconstruct_tensor(takagi_sos(t), 4)
        assert np.linalg.norm(rec.data - t.data) < 1e-10 * np.linalg.norm(t.data)

    def test_fock_reconstruction_with_correction(self):
        """Σ Z_l² − S reproduces the ladder operator exactly."""
        from sos_compress.random_ops import random_antihermitian_ladder_tensor
        from sos_compress.tensors import normal_order_to_charge_charge

        a = random_antihermitian_ladder_tensor(4, seed=7)
        cc, s = normal_order_to_charge_charge(a)
        factors = takagi_sos(cc)
        ladder_mat = fock.build_two_body(a).mat
        rec = sum(fock.build_factor(f).mat for f in factors)
        rec -= fock.build_one_body(s.s).mat
        assert np.linalg.norm(ladder_mat - rec, 2) < 1e-10

    def test_truncation_monotone(self):
        t = random_antihermitian_cc_tensor(4, seed=8)
        previous = np.inf
        for columns in range(1, 9):
            rec = reconstruct_tensor(takagi_sos(t, max_columns=columns), 4)
            residual = np.linalg.norm(rec.data - t.data)
            assert residual <= previous + 1e-12
            previous = residual


class TestSvdSos:
    def test_zero_tensor_empty(self):
        assert svd_sos(CoeffTensor4(np.zeros((3,) * 4), CHARGE_CHARGE)) == []

    def test_reconstruction_and_count(self):
        t = random_antihermitian_cc_tensor(4, seed=9)
        factors = svd_sos(t)
        rec = reconstruct_tensor(factors, 4)
        assert np.linalg.norm(rec.data - t.data) < 1e-10 * np.linalg.norm(t.data)
        svals = np.linalg.svd(reshape_to_supermatrix(t).mat, compute_uv=False)
        nonzero = int(np.sum(svals > 1e-10 * svals[0]))
        # identically vanishing S/D combinations are skipped, so "up to"
        assert 0 < len(factors) <= 4 * nonzero

    def test_rank_one_couplings(self):
        t = random_antihermitian_cc_tensor(3, seed=10)
        for factor in svd_sos(t):
            assert factor.j_second_singular_value() < 1e-10 * np.linalg.norm(
                factor.j, 2
            )

    def test_fock_equality(self):
        t = random_antihermitian_cc_tensor(4, seed=11)
        result = fock.verify_factorization(t, None, svd_sos(t), mode="exact-sum")
        assert result.op_error < 1e-10

    def test_planted_real_rank_one_gives_two_factors(self):
        """U = V makes D vanish identically, leaving the two S factors."""
        rng = np.random.default_rng(12)
        vec = rng.standard_normal(16)
        vec /= np.linalg.norm(vec)
        factors = svd_sos(SuperMatrix(4, 2.5 * np.outer(vec, vec)))
        assert len(factors) == 2

    def test_planted_complex_rank_one_gives_four_factors(self):
        rng = np.random.default_rng(13)
        vec = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        vec /= np.linalg.norm(vec)
        factors = svd_sos(SuperMatrix(4, 2.5 * np.outer(vec, vec)))
        assert len(factors) == 4


class TestNormalOperators:
    def test_number_operator_case(self):
        """μ = I, λ = e_0: Z is the idempotent number operator n_0."""
        j = np.zeros((3, 3), dtype=complex)
        j[0, 0] = 1.0
        z = factor_to_normal_operator(SOSFactor(np.eye(3), j, "takagi"))
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(z.z, expected, atol=1e-14)

    def test_normality_of_takagi_factors(self):
        t = random_antihermitian_cc_tensor(4, seed=14)
        for factor in takagi_sos(t):
            z = factor_to_normal_operator(factor)
            assert z.normality_defect() < 1e-10

    def test_eq5_identity_in_fock_space(self):
        """exp(Z²) equals the rotated charge-charge exponential."""
        t = random_antihermitian_cc_tensor(4, seed=15)
        factor = takagi_sos(t)[0]
        n = factor.n
        z = factor_to_normal_operator(factor)
        z_mat = fock.build_one_body(z.z).mat
        lhs = fock.exp_operator(fock.DenseOperator(n, z_mat @ z_mat)).mat
        gaussian = fock.gaussian_unitary(factor.mu).mat
        occ = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
        exponent = np.einsum("xp,pq,xq->x", occ, factor.j, occ)
        charge = np.diag(np.exp(exponent))
        rhs = gaussian @ charge @ gaussian.conj().T
        assert np.linalg.norm(lhs - rhs, 2) < 1e-10

    def test_rank_two_rejected(self):
        j = np.diag([1.0, 0.5, 0.0]).astype(complex)
        with pytest.raises(DecompositionError, match="uc-factor"):
            factor_to_normal_operator(SOSFactor(np.eye(3), j, "uc"))

    def test_eig_normal_blocks(self):
        rng = np.random.default_rng(16)
        z = np.zeros((4, 4), dtype=complex)
        for block in ([0, 2], [1, 3]):
            idx = np.ix_(block, block)
            sub = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            herm = sub + sub.conj().T
            z[idx] = herm
        lam, mu = eig_normal(z, mode_blocks=[[0, 2], [1, 3]])
        assert np.linalg.norm((mu * lam) @ mu.conj().T - z) < 1e-10
        assert mu[0, 1] == 0 and mu[2, 1] == 0 and mu[1, 0] == 0
