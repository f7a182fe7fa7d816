"""Analytical sum-of-squares decompositions via SVD and Takagi factorization.

Both paths emit :class:`~sos_compress.tensors.SOSFactor` lists whose summed
:func:`~sos_compress.tensors.factor_tensor` reproduces the charge-charge
coefficient tensor of an antihermitian generator. The constant weights are
pinned by oracle equality: each Takagi column contributes two factors with
weight 1/4 absorbed into J; each singular value contributes up to four
factors with weights +1/16 (sum combinations) and −1/16 (difference
combinations).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sos_compress.errors import DecompositionError, SymmetryError
from sos_compress.tensors import (
    CoeffTensor4,
    NormalOperatorCoeffs,
    SOSFactor,
    SuperMatrix,
    reshape_to_supermatrix,
)

# Takagi columns (or singular values) below this relative size are dropped:
# they contribute below verification tolerance.
FACTOR_DROP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TakagiResult:
    """Takagi factorization ``m = U diag(sigma) Uᵀ`` with ``sigma ≥ 0`` descending."""

    u: np.ndarray
    sigma: np.ndarray


def _require_complex_symmetric(mat: np.ndarray, rel_tol: float = 1e-10) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    scale = np.linalg.norm(mat)
    defect = np.linalg.norm(mat - mat.T)
    if defect > rel_tol * max(scale, 1e-300):
        raise SymmetryError(
            f"matrix is not complex symmetric: ‖m − mᵀ‖ = {defect:.3e} "
            f"exceeds {rel_tol:.0e}·‖m‖ = {rel_tol * scale:.3e}"
        )
    return mat


def takagi(mat: np.ndarray) -> TakagiResult:
    """Takagi decomposition of a complex symmetric matrix.

    Uses the real symmetric embedding ``[[Re m, Im m], [Im m, −Re m]]``,
    whose eigenpairs come in ±σ pairs; Takagi vectors are ``u = x + iy``
    from the nonnegative half. The zero-eigenvalue subspace is resolved by
    Gram-Schmidt with projection against the pairing map ``(x, y) → (y, −x)``.

    Raises:
        SymmetryError: input is not complex symmetric (no silent
            symmetrization is performed).
    """
    mat = _require_complex_symmetric(mat)
    n = mat.shape[0]
    if n == 0:
        return TakagiResult(np.zeros((0, 0), dtype=complex), np.zeros(0))
    x, y = mat.real, mat.imag
    embedding = np.block([[x, y], [y, -x]])
    evals, evecs = np.linalg.eigh(embedding)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]

    tol = 1e-13 * max(np.abs(evals).max(initial=0.0), 1e-300)
    positive = evals > tol
    n_pos = int(np.count_nonzero(positive))
    if n_pos > n:  # pairing guarantees at most n strictly positive eigenvalues
        raise DecompositionError("±σ eigenvalue pairing violated numerically")

    columns = [evecs[:, k] for k in range(n_pos)]
    sigma = list(evals[:n_pos])

    n_null = n - n_pos
    if n_null:
        null_vecs = evecs[:, np.abs(evals) <= tol]
        columns.extend(_paired_null_basis(null_vecs, n_null))
        sigma.extend([0.0] * n_null)

    u = np.empty((n, n), dtype=complex)
    for k, vec in enumerate(columns):
        u[:, k] = vec[:n] + 1j * vec[n:]
    sigma = np.asarray(sigma)

    recon = (u * sigma) @ u.T
    scale = max(np.linalg.norm(mat), 1e-300)
    if np.linalg.norm(recon - mat) > 1e-10 * scale:
        raise DecompositionError("Takagi reconstruction failed its own tolerance")
    return TakagiResult(u, sigma)


def _pairing_map(vec: np.ndarray) -> np.ndarray:
    half = vec.shape[0] // 2
    return np.concatenate([vec[half:], -vec[:half]])


def _paired_null_basis(null_vecs: np.ndarray, count: int) -> list[np.ndarray]:
    """Select ``count`` orthonormal null vectors whose span is disjoint from
    its image under the pairing map."""
    chosen: list[np.ndarray] = []
    for k in range(null_vecs.shape[1]):
        vec = null_vecs[:, k].copy()
        for prev in chosen:
            vec -= prev * (prev @ vec)
            partner = _pairing_map(prev)
            vec -= partner * (partner @ vec)
        norm = np.linalg.norm(vec)
        if norm > 1e-8:
            chosen.append(vec / norm)
        if len(chosen) == count:
            return chosen
    raise DecompositionError("failed to build a paired basis of the null space")


def eig_normal(
    z: np.ndarray,
    mode_blocks: list[list[int]] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition ``z = mu diag(lam) mu†`` of a normal matrix.

    Splits ``z`` into commuting hermitian parts ``H = (z + z†)/2`` and
    ``K = (z − z†)/2i``, diagonalizes ``H``, then diagonalizes ``K`` inside
    the degenerate blocks of ``H`` (avoiding non-hermitian eigensolvers).
    With ``mode_blocks``, each index group is diagonalized separately and
    ``mu`` is exactly block-diagonal.
    """
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    if mode_blocks is not None:
        lam = np.zeros(n, dtype=complex)
        mu = np.zeros((n, n), dtype=complex)
        for block in mode_blocks:
            idx = np.asarray(block)
            sub_lam, sub_mu = eig_normal(z[np.ix_(idx, idx)])
            lam[idx] = sub_lam
            mu[np.ix_(idx, idx)] = sub_mu
        return lam, mu

    scale = max(np.linalg.norm(z), 1e-300)
    h = 0.5 * (z + z.conj().T)
    k = (z - z.conj().T) / 2j
    for group_tol in (1e-8, 1e-6, 1e-4):
        lam, mu = _eig_commuting_pair(h, k, group_tol * scale)
        defect = np.linalg.norm((mu * lam) @ mu.conj().T - z)
        if defect <= 1e-10 * max(scale, 1.0):
            order = np.lexsort((-lam.imag, -lam.real))
            return lam[order], mu[:, order]
    raise DecompositionError(
        f"normal-matrix eigendecomposition failed: residual {defect:.3e} "
        f"for scale {scale:.3e}"
    )


def _eig_commuting_pair(h, k, gap_tol):
    evals, vecs = np.linalg.eigh(h)
    n = len(evals)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and evals[stop] - evals[stop - 1] <= gap_tol:
            stop += 1
        if stop - start > 1:
            sub = vecs[:, start:stop]
            block = sub.conj().T @ k @ sub
            _, rot = np.linalg.eigh(0.5 * (block + block.conj().T))
            vecs[:, start:stop] = sub @ rot
        start = stop
    lam = np.einsum("ji,jk,ki->i", vecs.conj(), h + 1j * k, vecs)
    return lam, vecs


def _as_supermatrix(a: CoeffTensor4 | SuperMatrix) -> SuperMatrix:
    if isinstance(a, CoeffTensor4):
        return reshape_to_supermatrix(a)
    return a


def takagi_sos(
    a: CoeffTensor4 | SuperMatrix,
    max_columns: int | None = None,
    mode_blocks: list[list[int]] | None = None,
) -> list[SOSFactor]:
    """Takagi-based sum-of-squares factors of an antihermitian generator.

    Each kept Takagi column ``l`` yields the matrix ``y = √σ(l) u(l)`` and
    two normal combinations ``y ± i y†``, each emitted as one factor with
    ``J = ¼ λλᵀ`` from its eigenvalues. Columns are processed in descending
    σ order; ``max_columns`` truncates the expansion (two factors per
    column). Columns with ``σ < 1e-12 σ_max`` are dropped. ``mode_blocks``
    forces the per-factor rotations to stay block-diagonal (used for
    spin-sector locality).
    """
    sm = _as_supermatrix(a)
    n = sm.n
    result = takagi(sm.mat)
    sigma_max = result.sigma[0] if len(result.sigma) else 0.0
    factors: list[SOSFactor] = []
    n_columns = len(result.sigma) if max_columns is None else min(
        max_columns, len(result.sigma)
    )
    for l in range(n_columns):
        sigma = result.sigma[l]
        if sigma_max == 0.0 or sigma < FACTOR_DROP_TOLERANCE * sigma_max:
            break
        y = np.sqrt(sigma) * result.u[:, l].reshape(n, n)
        for sign in (1.0, -1.0):
            z = y + sign * 1j * y.conj().T
            if np.linalg.norm(z) <= 1e-14 * np.sqrt(sigma_max):
                continue
            try:
                lam, mu = eig_normal(z, mode_blocks=mode_blocks)
            except DecompositionError as exc:
                raise DecompositionError(
                    f"takagi factor {l} (sign {sign:+.0f}): {exc}"
                ) from exc
            factors.append(
                SOSFactor(mu, 0.25 * np.outer(lam, lam), "takagi", source_term=l)
            )
    return factors


def svd_sos(
    a: CoeffTensor4 | SuperMatrix,
    mode_blocks: list[list[int]] | None = None,
) -> list[SOSFactor]:
    """SVD-based sum-of-squares factors of an antihermitian generator.

    For each singular triple ``(σ, u, v)`` of the supermatrix, the reshaped
    matrices ``U = √σ mat(u)`` and ``V = √σ mat(v̄)`` combine into
    ``S = U + V`` and ``D = U − V``; the four normal combinations
    ``S ± iS†`` and ``D ± iD†`` enter with weights ``+1/16`` and ``−1/16``.
    Identically vanishing combinations (e.g. ``D`` when ``U = V``) are
    skipped. ``mode_blocks`` forces block-diagonal rotations.
    """
    sm = _as_supermatrix(a)
    n = sm.n
    _require_complex_symmetric(sm.mat)
    left, svals, right_h = np.linalg.svd(sm.mat)
    sigma_max = svals[0] if len(svals) else 0.0
    factors: list[SOSFactor] = []
    for l, sigma in enumerate(svals):
        if sigma_max == 0.0 or sigma < FACTOR_DROP_TOLERANCE * sigma_max:
            break
        root = np.sqrt(sigma)
        u_mat = root * left[:, l].reshape(n, n)
        # rows of right_h are already the conjugated right singular vectors
        v_mat = root * right_h[l, :].reshape(n, n)
        for base, weight in ((u_mat + v_mat, 1 / 16), (u_mat - v_mat, -1 / 16)):
            if np.linalg.norm(base) <= 1e-12 * root:
                continue
            for sign in (1.0, -1.0):
                z = base + sign * 1j * base.conj().T
                if np.linalg.norm(z) <= 1e-14 * np.sqrt(sigma_max):
                    continue
                try:
                    lam, mu = eig_normal(z, mode_blocks=mode_blocks)
                except DecompositionError as exc:
                    raise DecompositionError(
                        f"svd factor {l} (sign {sign:+.0f}): {exc}"
                    ) from exc
                factors.append(
                    SOSFactor(mu, weight * np.outer(lam, lam), "svd", source_term=l)
                )
    return factors


def factor_to_normal_operator(factor: SOSFactor) -> NormalOperatorCoeffs:
    """Coefficients of the single normal operator ``Z`` with ``Z² = factor``.

    Requires a rank-one coupling ``J = λλᵀ`` (svd/takagi/cholesky origin);
    the result is ``z = mu diag(λ) mu†``.

    Raises:
        DecompositionError: ``J`` has rank above one. Such factors realize
            ``e^{Σ J n n}`` directly (the uc-factor path) and do not define
            a single squared normal operator.
    """
    j = factor.j
    svals = np.linalg.svd(j, compute_uv=False)
    if svals[0] == 0.0:
        return NormalOperatorCoeffs(np.zeros_like(j))
    if len(svals) > 1 and svals[1] > 1e-8 * svals[0]:
        raise DecompositionError(
            "coupling matrix has rank > 1; use the uc-factor path "
            "(exp(Σ J n n) under the factor's rotation) instead of a single "
            "squared normal operator"
        )
    pivot = int(np.argmax(np.abs(np.diagonal(j))))
    lam_pivot = np.sqrt(j[pivot, pivot])
    lam = j[:, pivot] / lam_pivot
    if np.linalg.norm(np.outer(lam, lam) - j) > 1e-8 * svals[0]:
        raise DecompositionError("rank-one resolution of J failed")
    z = (factor.mu * lam) @ factor.mu.conj().T
    return NormalOperatorCoeffs(z)
