"""Rotation parameterization, gradients, and the greedy compression loop."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sos_compress.compression import (
    CompressionConfig,
    KappaParams,
    _transform_data,
    greedy_compress,
    gradient,
    objective,
    reference_gradient,
    transform_tensor,
    wilcox_derivative,
)
from sos_compress.random_ops import random_antihermitian_cc_tensor, random_unitary
from sos_compress.tensors import CHARGE_CHARGE, CoeffTensor4, SOSFactor, factor_tensor


def finite_difference_gradient(t, kappa, h=1e-6):
    grad = np.empty(kappa.n_params)
    for k in range(kappa.n_params):
        plus = kappa.params.copy()
        minus = kappa.params.copy()
        plus[k] += h
        minus[k] -= h
        grad[k] = (
            objective(t, KappaParams(kappa.n, plus, kappa.real, kappa.blocks))
            - objective(t, KappaParams(kappa.n, minus, kappa.real, kappa.blocks))
        ) / (2 * h)
    return grad


class TestKappaParams:
    def test_antihermitian_by_construction(self):
        rng = np.random.default_rng(0)
        kp = KappaParams(4, rng.standard_normal(16))
        mat = kp.to_matrix()
        np.testing.assert_array_equal(mat, -mat.conj().T)

    def test_unitary_exponential(self):
        rng = np.random.default_rng(1)
        kp = KappaParams(5, rng.standard_normal(25))
        u = kp.to_unitary()
        assert np.linalg.norm(u.conj().T @ u - np.eye(5)) < 1e-12

    def test_matrix_roundtrip(self):
        rng = np.random.default_rng(2)
        kp = KappaParams(4, rng.standard_normal(16))
        back = KappaParams.from_matrix(kp.to_matrix())
        np.testing.assert_allclose(back.params, kp.params, atol=1e-14)

    def test_real_mode_param_count(self):
        kp = KappaParams.zeros(5, real=True)
        assert kp.n_params == 10
        assert np.linalg.norm(kp.to_matrix().imag) == 0


class TestTransform:
    def test_identity_rotation(self):
        t = random_antihermitian_cc_tensor(4, seed=3)
        out = transform_tensor(t, KappaParams.zeros(4))
        np.testing.assert_allclose(out.data, t.data, atol=1e-14)

    def test_matches_naive_contraction(self):
        """Single-shot eight-index einsum as the independent oracle."""
        rng = np.random.default_rng(4)
        t = random_antihermitian_cc_tensor(4, seed=4)
        kp = KappaParams(4, 0.3 * rng.standard_normal(16))
        u = kp.to_unitary()
        naive = np.einsum(
            "ip,jq,kr,ls,ijkl->pqrs",
            u.conj(), u, u.conj(), u, t.data,
            optimize=False,
        )
        np.testing.assert_allclose(
            transform_tensor(t, kp).data, naive, atol=1e-12
        )

    def test_givens_permutation_relabels_indices(self):
        """θ = π/2 on a mode pair permutes tensor indices up to phases."""
        rng = np.random.default_rng(5)
        n = 4
        t = random_antihermitian_cc_tensor(n, seed=5)
        params = np.zeros(n * n)
        params[0] = np.pi / 2  # real-part direction for modes (0, 1)
        kp = KappaParams(n, params)
        u = kp.to_unitary()
        # u realizes the signed transposition 0 ↔ 1
        perm, signs = [1, 0, 2, 3], np.array([-1.0, 1.0, 1.0, 1.0])
        expected_u = np.zeros((n, n))
        for col, (row, sign) in enumerate(zip(perm, signs)):
            expected_u[row, col] = sign
        np.testing.assert_allclose(u, expected_u, atol=1e-14)
        relabeled = np.empty_like(t.data)
        for idx in np.ndindex(*t.data.shape):
            source = tuple(perm[i] for i in idx)
            weight = np.prod([signs[i] for i in idx])
            relabeled[idx] = weight * t.data[source]
        np.testing.assert_allclose(
            transform_tensor(t, kp).data, relabeled, atol=1e-12
        )

    def test_roundtrip_inverse(self):
        rng = np.random.default_rng(6)
        t = random_antihermitian_cc_tensor(3, seed=6)
        kp = KappaParams(3, rng.standard_normal(9))
        back = transform_tensor(
            transform_tensor(t, kp), KappaParams.from_matrix(-kp.to_matrix())
        )
        np.testing.assert_allclose(back.data, t.data, atol=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**31))
    def test_flattened_transform_is_unitary(self, seed):
        rng = np.random.default_rng(seed)
        t = random_antihermitian_cc_tensor(3, seed=seed)
        kp = KappaParams(3, rng.standard_normal(9))
        out = _transform_data(t.data, kp.to_unitary())
        assert abs(np.linalg.norm(out) - np.linalg.norm(t.data)) < 1e-10


class TestObjective:
    def test_diagonal_tensor_at_zero(self):
        rng = np.random.default_rng(7)
        n = 4
        j = rng.standard_normal((n, n))
        data = np.zeros((n,) * 4, dtype=complex)
        for x in range(n):
            for y in range(n):
                data[x, x, y, y] = j[x, y]
        t = CoeffTensor4(data, CHARGE_CHARGE)
        assert abs(objective(t, KappaParams.zeros(n)) - np.linalg.norm(j) ** 2) < 1e-12

    def test_zero_tensor(self):
        rng = np.random.default_rng(8)
        t = CoeffTensor4(np.zeros((3,) * 4), CHARGE_CHARGE)
        kp = KappaParams(3, rng.standard_normal(9))
        assert objective(t, kp) == 0.0

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(9)
        t = random_antihermitian_cc_tensor(4, seed=9)
        kp = KappaParams(4, 0.4 * rng.standard_normal(16))
        u = kp.to_unitary()
        naive = np.einsum(
            "ip,jq,kr,ls,ijkl->pqrs",
            u.conj(), u, u.conj(), u, t.data,
            optimize=False,
        )
        expected = sum(
            abs(naive[x, x, y, y]) ** 2 for x in range(4) for y in range(4)
        )
        assert abs(objective(t, kp) - expected) < 1e-12


class TestWilcox:
    def test_kappa_zero_gives_direction(self):
        kp = KappaParams.zeros(4)
        for index in (0, 7, 15):
            w = wilcox_derivative(kp, index).w
            np.testing.assert_allclose(w, kp.direction_matrix(index), atol=1e-12)

    def test_near_degenerate_spectrum_finite(self):
        """A 1e-13 eigenvalue gap must not produce NaN or Inf."""
        rng = np.random.default_rng(10)
        n = 4
        vecs = random_unitary(n, seed=10)
        lam = 1j * np.array([0.3, 0.3 + 1e-13, -0.2, 0.7])
        kappa_mat = (vecs * lam) @ vecs.conj().T
        kappa_mat = 0.5 * (kappa_mat - kappa_mat.conj().T)
        kp = KappaParams.from_matrix(kappa_mat)
        for index in range(kp.n_params):
            w = wilcox_derivative(kp, index).w
            assert np.all(np.isfinite(w))

    @pytest.mark.parametrize("index", [0, 9, 24])
    def test_finite_difference_match(self, index):
        rng = np.random.default_rng(11)
        n = 5
        kp = KappaParams(n, 0.4 * rng.standard_normal(n * n))
        u = kp.to_unitary()
        w = wilcox_derivative(kp, index).w
        for h in (1e-4, 1e-5):
            plus = kp.params.copy()
            minus = kp.params.copy()
            plus[index] += h
            minus[index] -= h
            fd = (
                KappaParams(n, plus).to_unitary()
                - KappaParams(n, minus).to_unitary()
            ) / (2 * h)
            assert np.linalg.norm(fd - w @ u) < 20 * h**2

    def test_second_order_decay(self):
        rng = np.random.default_rng(12)
        n = 4
        kp = KappaParams(n, 0.5 * rng.standard_normal(n * n))
        u = kp.to_unitary()
        w = wilcox_derivative(kp, 3).w
        errors = []
        for h in (1e-3, 1e-4):
            plus = kp.params.copy()
            minus = kp.params.copy()
            plus[3] += h
            minus[3] -= h
            fd = (
                KappaParams(n, plus).to_unitary()
                - KappaParams(n, minus).to_unitary()
            ) / (2 * h)
            errors.append(np.linalg.norm(fd - w @ u))
        assert 30 < errors[0] / errors[1] < 300

    def test_conjugate_relation(self):
        """W antihermitian implies (∂u*/∂θ)_{cd} = −Σ_r W_{rc} u*_{rd}."""
        rng = np.random.default_rng(13)
        n = 4
        kp = KappaParams(n, 0.3 * rng.standard_normal(n * n))
        u = kp.to_unitary()
        index = 5
        w = wilcox_derivative(kp, index).w
        assert np.linalg.norm(w + w.conj().T) < 1e-12
        h = 1e-6
        plus = kp.params.copy()
        minus = kp.params.copy()
        plus[index] += h
        minus[index] -= h
        fd_conj = (
            KappaParams(n, plus).to_unitary().conj()
            - KappaParams(n, minus).to_unitary().conj()
        ) / (2 * h)
        np.testing.assert_allclose(fd_conj, -w.T @ u.conj(), atol=1e-8)


class TestGradient:
    def test_stationary_at_diagonal_tensor(self):
        rng = np.random.default_rng(14)
        n = 4
        data = np.zeros((n,) * 4, dtype=complex)
        for x in range(n):
            for y in range(n):
                data[x, x, y, y] = rng.standard_normal()
        t = CoeffTensor4(data, CHARGE_CHARGE)
        grad = gradient(t, KappaParams.zeros(n))
        assert np.linalg.norm(grad) < 1e-12

    @pytest.mark.parametrize("n,seed", [(3, 20), (4, 21), (5, 22)])
    def test_triple_agreement(self, n, seed):
        rng = np.random.default_rng(seed)
        t = random_antihermitian_cc_tensor(n, seed=seed)
        kp = KappaParams(n, 0.3 * rng.standard_normal(n * n))
        chain = gradient(t, kp)
        reference = reference_gradient(t, kp)
        fd = finite_difference_gradient(t, kp)
        assert np.linalg.norm(chain - reference) < 1e-12 * np.linalg.norm(reference)
        assert np.linalg.norm(chain - fd) < 1e-6 * np.linalg.norm(fd)

    def test_real_mode_gradient(self):
        rng = np.random.default_rng(23)
        n = 4
        data = rng.standard_normal((n,) * 4)
        data = data + data.transpose(1, 0, 3, 2)
        data = data + data.transpose(2, 3, 0, 1)
        t = CoeffTensor4(data.astype(complex), CHARGE_CHARGE)
        kp = KappaParams(n, 0.2 * rng.standard_normal(n * (n - 1) // 2), real=True)
        fd = finite_difference_gradient(t, kp)
        assert np.linalg.norm(gradient(t, kp) - fd) < 1e-6 * max(np.linalg.norm(fd), 1)


class TestGreedy:
    def test_zero_tensor_empty(self):
        factors, report = greedy_compress(
            CoeffTensor4(np.zeros((3,) * 4), CHARGE_CHARGE),
            CompressionConfig(threshold=1e-8),
        )
        assert factors == []
        assert report.rows == ()
        assert report.status == "threshold"

    def test_planted_factor_recovered(self):
        rng = np.random.default_rng(30)
        n = 5
        mu = random_unitary(n, seed=30)
        j = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        j = j + j.T
        t = CoeffTensor4(factor_tensor(SOSFactor(mu, j, "uc")), CHARGE_CHARGE)
        factors, report = greedy_compress(
            t, CompressionConfig(threshold=1e-8, max_factors=3, seed=0)
        )
        assert len(factors) == 1
        assert report.rows[0].residual_l2 < 1e-8
        assert abs(report.rows[0].objective_value - np.linalg.norm(j) ** 2) < 1e-6

    def test_monotone_and_pythagorean(self):
        t = random_antihermitian_cc_tensor(4, seed=31)
        factors, report = greedy_compress(
            t, CompressionConfig(threshold=1e-3, max_factors=6, seed=1)
        )
        l2 = [report.initial_l2] + [row.residual_l2 for row in report.rows]
        for i, row in enumerate(report.rows):
            assert l2[i + 1] < l2[i]
            drop = l2[i] ** 2 - l2[i + 1] ** 2
            assert abs(drop - row.objective_value) < 1e-8 * row.objective_value

    def test_factor_reconstructs_subtracted_piece(self):
        """Each emitted factor back-rotates exactly to what was removed."""
        t = random_antihermitian_cc_tensor(3, seed=32)
        factors, report = greedy_compress(
            t, CompressionConfig(threshold=1e-4, max_factors=3, seed=2)
        )
        remainder = t.data.copy()
        for factor, row in zip(factors, report.rows):
            remainder = remainder - factor_tensor(factor)
            assert abs(np.linalg.norm(remainder) - row.residual_l2) < 1e-12

    def test_report_is_deterministic(self):
        t = random_antihermitian_cc_tensor(3, seed=33)
        config = CompressionConfig(threshold=1e-4, max_factors=3, seed=9)
        first, _ = greedy_compress(t, config)
        second, _ = greedy_compress(t, config)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.mu, b.mu)
            np.testing.assert_array_equal(a.j, b.j)
