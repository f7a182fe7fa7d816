"""Hermitian two-electron-integral compression with real orthogonal rotations.

The unitary compression loop is reused over the space of real antisymmetric
generators (m(m−1)/2 parameters for m spatial orbitals); the baseline is a
spectral (Cholesky-style, performed via an eigendecomposition) expansion of
the integral supermatrix. The objective sums |ṽ[x,x,y,y]|² over all (x, y)
pairs without deduplicating the 8-fold index symmetry.

Maximum-absolute-deviation (MAD) of the residual is tracked per factor but
is not monotone in general; only the residual L2 norm is.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from sos_compress.errors import DecompositionError
from sos_compress.tensors import HERMITIAN_CHEMIST, CoeffTensor4, SOSFactor
from sos_compress.compression import (
    CompressionConfig,
    CompressionReport,
    greedy_compress,
)

_EIGHT_FOLD_PERMS = (
    (1, 0, 2, 3),
    (0, 1, 3, 2),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (3, 2, 0, 1),
    (2, 3, 1, 0),
    (3, 2, 1, 0),
)


@dataclass(frozen=True)
class HermitianERITensor:
    """Real chemist-convention integrals (ps|qr) with 8-fold symmetry."""

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float).copy()
        if v.ndim != 4 or len(set(v.shape)) != 1:
            raise ValueError(f"expected (m, m, m, m) real tensor, got {v.shape}")
        scale = max(1.0, float(np.max(np.abs(v))))
        for perm in _EIGHT_FOLD_PERMS:
            defect = float(np.max(np.abs(v - np.transpose(v, perm))))
            if defect > 1e-12 * scale:
                raise ValueError(
                    f"integral tensor violates 8-fold symmetry (permutation "
                    f"{perm}, defect {defect:.3e})"
                )
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        return self.v.shape[0]

    def supermatrix(self) -> np.ndarray:
        m = self.m
        return self.v.reshape(m * m, m * m)

    def as_coeff_tensor(self) -> CoeffTensor4:
        return CoeffTensor4(self.v, HERMITIAN_CHEMIST)


def cholesky_baseline(
    eri: HermitianERITensor,
    max_factors: int | None = None,
) -> list[SOSFactor]:
    """Spectral baseline: top eigenpairs of the integral supermatrix.

    Each kept eigenpair gives a rank-one real factor (eigenvector reshaped
    to a symmetric matrix, then diagonalized by a real orthogonal
    rotation). Eigenvalues below −1e-10 of the largest magnitude fail the
    positivity expected of Coulomb integrals; smaller negative ones are
    clipped with a warning.
    """
    sm = eri.supermatrix()
    evals, evecs = np.linalg.eigh(sm)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    scale = max(np.abs(evals).max(initial=0.0), 1e-300)
    if evals.min(initial=0.0) < -1e-10 * scale:
        raise DecompositionError(
            f"integral supermatrix is strongly indefinite "
            f"(most negative eigenvalue {evals.min():.3e})"
        )
    if evals.min(initial=0.0) < 0:
        warnings.warn(
            f"clipping small negative supermatrix eigenvalues "
            f"(most negative {evals.min():.3e})",
            stacklevel=2,
        )
        evals = np.clip(evals, 0.0, None)
    m = eri.m
    factors: list[SOSFactor] = []
    limit = len(evals) if max_factors is None else min(max_factors, len(evals))
    for l in range(limit):
        if evals[l] <= 1e-12 * scale:
            break
        y = evecs[:, l].reshape(m, m)
        y = 0.5 * (y + y.T)
        lam, mu = np.linalg.eigh(y)
        factors.append(
            SOSFactor(mu, evals[l] * np.outer(lam, lam), "cholesky", source_term=l)
        )
    return factors


def compress_eri(
    eri: HermitianERITensor,
    config: CompressionConfig | None = None,
) -> tuple[list[SOSFactor], CompressionReport]:
    """Greedy compression restricted to real orthogonal spatial rotations."""
    config = config or CompressionConfig()
    if not config.real_rotations:
        config = replace(config, real_rotations=True)
    return greedy_compress(eri.as_coeff_tensor(), config)
