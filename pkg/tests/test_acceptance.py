"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion. Criterion 5 (complexity growth) is soft: it logs its
measurements and warns instead of failing, per its statement.
"""

import time
import warnings

import numpy as np
import pytest

from sos_compress.circuits import (
    ChargeLayer,
    GivensLayer,
    givens_decompose,
    layer_unitary,
    merge_and_schedule,
    realize_circuit,
)
from sos_compress.compression import (
    CompressionConfig,
    KappaParams,
    greedy_compress,
    gradient,
    objective,
    reference_gradient,
    wilcox_derivative,
)
from sos_compress.decompositions import svd_sos, takagi_sos
from sos_compress.eri import HermitianERITensor, cholesky_baseline, compress_eri
from sos_compress.ften import read_coeff_tensor
from sos_compress.random_ops import (
    random_antihermitian_ladder_tensor,
    random_sz_conserving_cc_tensor,
    random_unitary,
)
from sos_compress.reporting import truncation_rows
from sos_compress.spin_blocks import decompose_blocked, partition_by_sz
from sos_compress.tensors import (
    CHARGE_CHARGE,
    CoeffTensor4,
    SOSFactor,
    cc_doubles_energy,
    factor_tensor,
    normal_order_to_charge_charge,
    reconstruct_tensor,
    residual_metrics,
)
from sos_compress import fock


def report(criterion: int, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion:2d}: {'PASS' if passed else 'FAIL'} — {detail}")
    assert passed, f"criterion {criterion}: {detail}"


def _collect_analytical_factors():
    """Shared by criteria 1 and 2: 20 random antihermitian generators."""
    runs = []
    instance = 0
    for n, count in ((4, 10), (6, 10)):
        for k in range(count):
            ladder = random_antihermitian_ladder_tensor(n, seed=1000 + instance)
            cc, correction = normal_order_to_charge_charge(ladder)
            runs.append(
                (n, ladder, cc, correction, takagi_sos(cc), svd_sos(cc))
            )
            instance += 1
    return runs


@pytest.fixture(scope="module")
def analytical_runs():
    return _collect_analytical_factors()


def test_criterion_1_exact_reconstruction(analytical_runs):
    """Untruncated Takagi-SOS and SVD-SOS reproduce tensor and operator."""
    worst_tensor = 0.0
    worst_op = 0.0
    for n, ladder, cc, correction, takagi_factors, svd_factors in analytical_runs:
        scale = np.linalg.norm(cc.data)
        ladder_mat = fock.build_two_body(ladder).mat
        s_mat = fock.build_one_body(correction.s).mat
        for factors in (takagi_factors, svd_factors):
            rec = reconstruct_tensor(factors, n)
            worst_tensor = max(
                worst_tensor, np.linalg.norm(rec.data - cc.data) / scale
            )
            rec_mat = fock.build_two_body(rec).mat - s_mat
            worst_op = max(
                worst_op, np.linalg.norm(ladder_mat - rec_mat, 2)
            )
    passed = worst_tensor < 1e-10 and worst_op < 1e-10
    report(
        1, passed,
        f"20 generators at n ∈ {{4, 6}}: worst relative tensor error "
        f"{worst_tensor:.2e}, worst dense-operator error {worst_op:.2e} "
        f"(tolerance 1e-10)",
    )


def test_criterion_2_rank_one_couplings(analytical_runs):
    worst = 0.0
    count = 0
    for _, _, _, _, takagi_factors, svd_factors in analytical_runs:
        for factor in takagi_factors + svd_factors:
            svals = np.linalg.svd(factor.j, compute_uv=False)
            worst = max(worst, svals[1] / svals[0])
            count += 1
    passed = worst < 1e-10
    report(
        2, passed,
        f"{count} analytical factors: worst second-singular-value ratio "
        f"{worst:.2e} (tolerance 1e-10)",
    )


def test_criterion_3_gradient_triple_agreement():
    worst_ref = 0.0
    worst_fd = 0.0
    instance = 0
    for n in (3, 4, 5):
        for k in (0, 1, 2, 3, 4, 5, 6) if n != 5 else (0, 1, 2, 3, 4, 5):
            rng = np.random.default_rng(2000 + instance)
            t = CoeffTensor4(
                random_antihermitian_ladder_tensor(n, seed=3000 + instance).data,
                "pqrs-ladder",
            )
            cc, _ = normal_order_to_charge_charge(t)
            kp = KappaParams(n, 0.3 * rng.standard_normal(n * n))
            chain = gradient(cc, kp)
            reference = reference_gradient(cc, kp)
            fd = np.empty_like(chain)
            h = 1e-6
            for i in range(len(fd)):
                plus, minus = kp.params.copy(), kp.params.copy()
                plus[i] += h
                minus[i] -= h
                fd[i] = (
                    objective(cc, KappaParams(n, plus))
                    - objective(cc, KappaParams(n, minus))
                ) / (2 * h)
            worst_ref = max(
                worst_ref,
                np.linalg.norm(chain - reference) / np.linalg.norm(reference),
            )
            worst_fd = max(
                worst_fd, np.linalg.norm(chain - fd) / np.linalg.norm(fd)
            )
            instance += 1
    passed = worst_ref < 1e-12 and worst_fd < 1e-6
    report(
        3, passed,
        f"20 instances, n ∈ {{3,4,5}}: chain vs reference {worst_ref:.2e} "
        f"(tol 1e-12), chain vs finite differences {worst_fd:.2e} (tol 1e-6)",
    )


def test_criterion_4_wilcox_derivative():
    n = 4
    rng = np.random.default_rng(42)
    worst = 0.0
    cases = []
    # generic spectrum
    cases.append(KappaParams(n, 0.4 * rng.standard_normal(n * n)))
    # planted 1e-13 eigenvalue gap
    vecs = random_unitary(n, seed=5)
    lam = 1j * np.array([0.4, 0.4 + 1e-13, -0.3, 0.1])
    mat = (vecs * lam) @ vecs.conj().T
    cases.append(KappaParams.from_matrix(0.5 * (mat - mat.conj().T)))
    h = 1e-5
    for kp in cases:
        u = kp.to_unitary()
        for index in range(kp.n_params):
            w = wilcox_derivative(kp, index).w
            assert np.all(np.isfinite(w))
            plus, minus = kp.params.copy(), kp.params.copy()
            plus[index] += h
            minus[index] -= h
            fd = (
                KappaParams(n, plus).to_unitary()
                - KappaParams(n, minus).to_unitary()
            ) / (2 * h)
            worst = max(worst, np.max(np.abs(fd - w @ u)))
    passed = worst < 1e-7
    report(
        4, passed,
        f"all U entries, incl. 1e-13 spectral gap: worst FD deviation "
        f"{worst:.2e} (tolerance 1e-7), no NaN",
    )


def _best_time(fn, repeats=3):
    best = np.inf
    for _ in range(repeats):
        tic = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - tic)
    return best


def test_criterion_5_complexity_growth_soft():
    """Soft criterion: logged and warned about, never failed."""
    times = {}
    for n in (8, 16):
        rng = np.random.default_rng(n)
        data = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
        data = 0.5 * (data + np.transpose(data, (2, 3, 0, 1)))
        t = CoeffTensor4(data, CHARGE_CHARGE)
        kp = KappaParams(n, 0.2 * rng.standard_normal(n * n))
        times[("chain", n)] = _best_time(lambda: gradient(t, kp))
        repeats = 3 if n == 8 else 1
        times[("reference", n)] = _best_time(
            lambda: reference_gradient(t, kp), repeats=repeats
        )
    chain_ratio = times[("chain", 16)] / times[("chain", 8)]
    ref_ratio = times[("reference", 16)] / times[("reference", 8)]
    detail = (
        f"chain gradient n=8→16 growth {chain_ratio:.1f} (target ≤ 48, "
        f"O(n⁵) predicts 32); reference growth {ref_ratio:.1f} (target ≥ 80, "
        f"O(n⁷) predicts 128); times "
        f"chain {times[('chain', 8)]*1e3:.1f}→{times[('chain', 16)]*1e3:.1f} ms, "
        f"reference {times[('reference', 8)]*1e3:.0f}→{times[('reference', 16)]*1e3:.0f} ms"
    )
    ok = chain_ratio <= 48 and ref_ratio >= 80
    if not ok:
        warnings.warn(f"complexity growth outside expected window: {detail}")
    print(f"\nACCEPTANCE  5: {'PASS' if ok else 'WARN'} — {detail}")


def test_criterion_6_greedy_recovery():
    n = 6
    worst = 0.0
    for seed in range(5):
        rng = np.random.default_rng(4000 + seed)
        mu = random_unitary(n, seed=seed)
        j = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        j = j + j.T
        t = CoeffTensor4(factor_tensor(SOSFactor(mu, j, "uc")), CHARGE_CHARGE)
        factors, rep = greedy_compress(
            t, CompressionConfig(threshold=1e-8, max_factors=3, seed=seed)
        )
        assert len(factors) == 1, f"seed {seed}: took {len(factors)} factors"
        worst = max(worst, rep.rows[0].residual_l2)
    report(
        6, worst < 1e-8,
        f"planted factor recovered in 1 iteration for all 5 seeds; worst "
        f"residual L2 {worst:.2e} (tolerance 1e-8)",
    )


def test_criterion_7_monotonicity_and_pythagoras():
    t_ladder = random_antihermitian_ladder_tensor(4, seed=77)
    t, _ = normal_order_to_charge_charge(t_ladder)
    factors, rep = greedy_compress(
        t, CompressionConfig(threshold=1e-6, max_factors=8, seed=3)
    )
    l2 = [rep.initial_l2] + [row.residual_l2 for row in rep.rows]
    worst = 0.0
    for i, row in enumerate(rep.rows):
        assert l2[i + 1] < l2[i]
        drop = l2[i] ** 2 - l2[i + 1] ** 2
        worst = max(worst, abs(drop - row.objective_value) / row.objective_value)
    passed = worst < 1e-8
    report(
        7, passed,
        f"{len(rep.rows)} iterations: residual strictly decreasing, squared-"
        f"norm drop matches O(κ*) to {worst:.2e} relative (tolerance 1e-8)",
    )


@pytest.fixture(scope="module")
def fixture_curves(fixture_dir):
    """Takagi truncation and 10-step UC curves for both amplitude fixtures."""
    curves = {}
    for label in ("h4_631g", "hf_sto3g"):
        t = read_coeff_tensor(fixture_dir / f"{label}_tau2_ab.ften")
        energy = read_coeff_tensor(fixture_dir / f"{label}_tau2_ab_energy.ften")
        takagi_factors = takagi_sos(t)
        takagi_rows = truncation_rows(t, takagi_factors, energy)
        factors, rep = greedy_compress(
            t, CompressionConfig(threshold=1e-9, max_factors=10, seed=0)
        )
        rec = np.zeros_like(t.data)
        uc_rows = []
        for factor, row in zip(factors, rep.rows):
            rec += factor_tensor(factor)
            residual = CoeffTensor4(t.data - rec, CHARGE_CHARGE)
            uc_rows.append(
                (row.residual_l2, abs(cc_doubles_energy(residual, energy)),
                 row.residual_takagi_rank)
            )
        curves[label] = (t, takagi_factors, takagi_rows, uc_rows)
    return curves


def test_criterion_8_fixture_curves(fixture_curves):
    details = []
    passed = True
    for label, (t, _, takagi_rows, uc_rows) in fixture_curves.items():
        tk_l2 = [row.residual_l2 for row in takagi_rows]
        uc_l2 = [row[0] for row in uc_rows]
        below = all(u <= tk + 1e-12 for u, tk in zip(uc_l2, tk_l2[: len(uc_l2)]))
        tk_cross = next(
            (k + 1 for k, row in enumerate(takagi_rows)
             if row.cum_cc_energy_error < 1e-3),
            None,
        )
        uc_cross = next(
            (k + 1 for k, row in enumerate(uc_rows) if row[1] < 1e-3), None
        )
        strict = uc_cross is not None and tk_cross is not None and uc_cross < tk_cross
        passed = passed and below and strict
        details.append(
            f"{label}: UC ≤ Takagi at counts 1–{len(uc_l2)} ({below}); "
            f"energy < 1mHa at UC {uc_cross} vs Takagi {tk_cross} factors"
        )
    report(8, passed, "; ".join(details))


def test_criterion_9_rank_saturation(fixture_curves):
    details = []
    passed = True
    for label, (t, takagi_factors, takagi_rows, uc_rows) in fixture_curves.items():
        rank_1 = uc_rows[0][2]
        rank_5 = uc_rows[4][2]
        rises = rank_5 >= rank_1
        full_rank = takagi_rows[-1].residual_takagi_rank
        svd_rows = truncation_rows(t, svd_sos(t))
        svd_full_rank = svd_rows[-1].residual_takagi_rank
        zeroed = full_rank == 0 and svd_full_rank == 0
        passed = passed and rises and zeroed
        details.append(
            f"{label}: UC residual rank {rank_1}→{rank_5} after 1→5 iterations; "
            f"takagi/svd full-expansion residual rank {full_rank}/{svd_full_rank}"
        )
    report(9, passed, "; ".join(details))


def test_criterion_10_sz_adaptation():
    worst_comm = 0.0
    worst_rec = 0.0
    for m, seed in ((2, 5), (3, 6)):
        t = random_sz_conserving_cc_tensor(m, seed=seed)
        blocks = partition_by_sz(t)
        sz = fock.sz_operator(2 * m)
        for method in ("takagi", "svd"):
            factors = decompose_blocked(blocks, method)
            rec = reconstruct_tensor(factors, 2 * m)
            plain = reconstruct_tensor(
                takagi_sos(t) if method == "takagi" else svd_sos(t), 2 * m
            )
            worst_rec = max(
                worst_rec,
                np.linalg.norm(rec.data - plain.data) / np.linalg.norm(t.data),
            )
            for factor in factors:
                worst_comm = max(
                    worst_comm,
                    fock.commutator_norm(fock.build_factor(factor), sz),
                )
    passed = worst_comm < 1e-10 and worst_rec < 1e-10
    report(
        10, passed,
        f"m ∈ {{2, 3}}: worst ‖[Z_f, Sz]‖ {worst_comm:.2e}, blocked vs "
        f"unblocked reconstruction {worst_rec:.2e} (tolerances 1e-10)",
    )


def test_criterion_11_circuit_ir():
    # end-to-end realization against the product of factor exponentials
    n, layers_l = 6, 4
    rng = np.random.default_rng(11)
    factors = []
    for k in range(layers_l):
        j = rng.standard_normal((n, n))
        factors.append(
            SOSFactor(random_unitary(n, seed=600 + k), 0.2j * (j + j.T), "uc")
        )
    ir = merge_and_schedule(factors)
    realized = realize_circuit(ir)
    expected = np.eye(2**n, dtype=complex)
    for factor in factors:
        expected = fock.exp_operator(fock.build_factor(factor)).mat @ expected
    trotter_err = np.linalg.norm(realized - expected, 2)

    worst_recon = 0.0
    max_counts_ok = True
    for k in range(20):
        size = 2 + k % 7  # n ≤ 8
        u = random_unitary(size, seed=700 + k)
        layer = givens_decompose(u)
        worst_recon = max(
            worst_recon, np.linalg.norm(layer_unitary(layer, size) - u)
        )
        max_counts_ok = max_counts_ok and len(layer.rotations) <= size * (size - 1) // 2
        max_counts_ok = max_counts_ok and layer.depth <= size
    passed = trotter_err < 1e-10 and worst_recon < 1e-12 and max_counts_ok
    report(
        11, passed,
        f"IR realization vs Trotter product (n=6, L=4): {trotter_err:.2e} "
        f"(tol 1e-10); 20 Givens decompositions (n ≤ 8): worst reconstruction "
        f"{worst_recon:.2e} (tol 1e-12), counts ≤ n(n−1)/2 and depth ≤ n: "
        f"{max_counts_ok}",
    )


def test_criterion_12_eri_path(fixture_dir):
    # spectral baseline reconstructs exactly
    arr = read_coeff_tensor(fixture_dir / "pi10_eri.ften").data
    eri = HermitianERITensor(arr.real)
    baseline = cholesky_baseline(eri)
    rec = sum(factor_tensor(f).real for f in baseline)
    baseline_err = np.linalg.norm(rec - eri.v) / np.linalg.norm(eri.v)

    # planted single real factor
    rng = np.random.default_rng(12)
    m = 6
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    j = rng.standard_normal((m, m))
    j = j + j.T
    planted_v = np.einsum("pj,sj,jk,qk,rk->psqr", q, q, j, q, q)
    planted_factors, planted_rep = compress_eri(
        HermitianERITensor(planted_v),
        CompressionConfig(threshold=1e-8, max_factors=3, seed=0),
    )
    planted_ok = (
        len(planted_factors) == 1 and planted_rep.rows[0].residual_l2 < 1e-8
    )

    # fixture MAD comparison over the early-factor regime
    rec = np.zeros_like(eri.v)
    cholesky_mad = []
    for factor in baseline[:8]:
        rec += factor_tensor(factor).real
        cholesky_mad.append(np.max(np.abs(eri.v - rec)))
    _, uc_rep = compress_eri(
        eri, CompressionConfig(threshold=1e-9, max_factors=8, seed=0)
    )
    uc_mad = [row.residual_mad for row in uc_rep.rows]
    mad_ok = all(u < c for u, c in zip(uc_mad, cholesky_mad))
    passed = baseline_err < 1e-10 and planted_ok and mad_ok
    report(
        12, passed,
        f"baseline reconstruction {baseline_err:.2e} (tol 1e-10); planted "
        f"real factor in 1 iteration: {planted_ok}; UC MAD below Cholesky "
        f"MAD at factor counts 1–8: {mad_ok}",
    )
