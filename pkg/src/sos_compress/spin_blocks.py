"""Sz-adapted decomposition: partition into spin blocks, decompose per block.

Spin-orbital indexing is interleaved: spatial orbital p with spin σ sits at
mode ``2p + σ``, α = 0. A charge-charge tensor commuting with Sz and written
in same-spin-pair form has nonzero entries only where both ``a†a`` pairs
carry a single spin; its supermatrix then consists of the blocks
``[[A, B], [Bᵀ, C]]`` over αα and ββ pair indices. Decomposing A and C
separately and the coupling through the zero-diagonal embedding
``[[0, B], [Bᵀ, 0]]`` keeps every emitted basis rotation inside one spin
sector.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from sos_compress.errors import SymmetryError, SzSymmetryError
from sos_compress.tensors import (
    CHARGE_CHARGE,
    CoeffTensor4,
    SOSFactor,
    reshape_to_supermatrix,
)
from sos_compress import decompositions
from sos_compress.compression import CompressionConfig, CompressionReport, greedy_compress


@dataclass(frozen=True)
class SpinBlockedSuperMatrix:
    """Spin blocks of the supermatrix of an Sz-conserving generator.

    ``a`` is the αα×αα block, ``c`` the ββ×ββ block, ``b`` the αα×ββ
    coupling; pair indices are flattened row-major over spatial orbitals
    (``p * m + s``). The full supermatrix ``[[a, b], [bᵀ, c]]`` is complex
    symmetric.
    """

    n_spatial: int
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


def _spin_masks(n: int) -> np.ndarray:
    spin = np.arange(n) % 2
    return spin[:, None] == spin[None, :]


def partition_by_sz(t: CoeffTensor4, tol: float = 1e-12) -> SpinBlockedSuperMatrix:
    """Partition a same-spin-pair charge-charge tensor into spin blocks.

    Raises:
        SzSymmetryError: entries coupling unlike spin patterns (either
            spin-flip pairs or cross-pattern supermatrix entries) exceed
            ``tol`` relative to the largest coefficient; the worst
            offenders are listed.
        SymmetryError: the supermatrix is not complex symmetric.
    """
    t.require_convention(CHARGE_CHARGE)
    n = t.n
    if n % 2:
        raise ValueError("Sz partition requires an even number of spin-orbitals")
    m = n // 2
    scale = max(1.0, float(np.max(np.abs(t.data))))
    same = _spin_masks(n)
    allowed = same[:, :, None, None] & same[None, None, :, :]
    violations = np.abs(np.where(allowed, 0.0, t.data))
    if np.max(violations, initial=0.0) > tol * scale:
        flat = np.argsort(violations, axis=None)[::-1][:5]
        worst = [
            f"t[{', '.join(map(str, np.unravel_index(k, violations.shape)))}] "
            f"= {t.data[np.unravel_index(k, violations.shape)]:.3e}"
            for k in flat
            if violations[np.unravel_index(k, violations.shape)] > tol * scale
        ]
        raise SzSymmetryError(
            "tensor has Sz-violating (unlike-spin-pair) entries above "
            f"{tol:g}·max|t|; worst offenders: " + "; ".join(worst)
        )
    sm = reshape_to_supermatrix(t)
    if sm.symmetry_defect() > tol * scale * n * n:
        raise SymmetryError(
            f"supermatrix is not complex symmetric (defect {sm.symmetry_defect():.3e})"
        )
    alpha = 2 * np.arange(m)
    beta = alpha + 1
    data = t.data
    a = data[np.ix_(alpha, alpha, alpha, alpha)].reshape(m * m, m * m)
    c = data[np.ix_(beta, beta, beta, beta)].reshape(m * m, m * m)
    b = data[np.ix_(alpha, alpha, beta, beta)].reshape(m * m, m * m)
    return SpinBlockedSuperMatrix(m, a, b, c)


def reassemble(blocks: SpinBlockedSuperMatrix) -> CoeffTensor4:
    """Charge-charge tensor over 2m spin-orbitals with the given blocks."""
    m = blocks.n_spatial
    n = 2 * m
    data = np.zeros((n, n, n, n), dtype=complex)
    alpha = 2 * np.arange(m)
    beta = alpha + 1
    data[np.ix_(alpha, alpha, alpha, alpha)] = blocks.a.reshape(m, m, m, m)
    data[np.ix_(beta, beta, beta, beta)] = blocks.c.reshape(m, m, m, m)
    data[np.ix_(alpha, alpha, beta, beta)] = blocks.b.reshape(m, m, m, m)
    data[np.ix_(beta, beta, alpha, alpha)] = blocks.b.T.reshape(m, m, m, m)
    return CoeffTensor4(data, CHARGE_CHARGE)


def _lift_spatial_factor(factor: SOSFactor, m: int, spin: int) -> SOSFactor:
    """Embed an m-mode factor into 2m interleaved modes on one spin sector."""
    n = 2 * m
    mu = np.eye(n, dtype=complex)
    j = np.zeros((n, n), dtype=complex)
    sector = 2 * np.arange(m) + spin
    mu[np.ix_(sector, sector)] = factor.mu
    j[np.ix_(sector, sector)] = factor.j
    return SOSFactor(
        mu,
        j,
        factor.tag,
        sector="alpha" if spin == 0 else "beta",
        simultaneous_group=factor.simultaneous_group,
    )


def _cross_tensor(blocks: SpinBlockedSuperMatrix) -> CoeffTensor4:
    """Zero-diagonal embedding of the B coupling as a full-space tensor."""
    cross = replace(
        blocks,
        a=np.zeros_like(blocks.a),
        c=np.zeros_like(blocks.c),
    )
    return reassemble(cross)


def _sector_tensor(block: np.ndarray, m: int) -> CoeffTensor4:
    return CoeffTensor4(block.reshape(m, m, m, m), CHARGE_CHARGE)


def decompose_blocked(
    blocks: SpinBlockedSuperMatrix,
    method: str,
    config: CompressionConfig | None = None,
) -> list[SOSFactor]:
    """Decompose spin blocks so every rotation stays in one spin sector.

    The A and C blocks are decomposed over the spatial index space and
    lifted onto their sectors; same-index A/C factors are paired under a
    shared ``simultaneous_group`` (they commute and can share a circuit
    layer). The cross coupling is decomposed through ``[[0, B], [Bᵀ, 0]]``
    with sector-blocked eigensolvers, so its rotations are block-diagonal
    while the couplings span both sectors.

    ``method`` is ``takagi``, ``svd`` or ``uc``; ``config`` applies to the
    uc path.
    """
    m = blocks.n_spatial
    n = 2 * m
    sector_modes = [tuple(2 * np.arange(m)), tuple(2 * np.arange(m) + 1)]

    def run(tensor: CoeffTensor4, mode_blocks=None) -> list[SOSFactor]:
        if method == "takagi":
            return decompositions.takagi_sos(tensor, mode_blocks=mode_blocks)
        if method == "svd":
            return decompositions.svd_sos(tensor, mode_blocks=mode_blocks)
        if method == "uc":
            cfg = config or CompressionConfig()
            if mode_blocks is not None:
                cfg = replace(cfg, mode_blocks=tuple(mode_blocks))
            return greedy_compress(tensor, cfg)[0]
        raise ValueError(f"unknown method {method!r}")

    factors_a = run(_sector_tensor(blocks.a, m))
    factors_c = run(_sector_tensor(blocks.c, m))
    group = 0
    out: list[SOSFactor] = []
    for i in range(max(len(factors_a), len(factors_c))):
        for flist, spin in ((factors_a, 0), (factors_c, 1)):
            if i < len(flist):
                lifted = _lift_spatial_factor(
                    replace(flist[i], simultaneous_group=group), m, spin
                )
                out.append(lifted)
        group += 1

    cross = _cross_tensor(blocks)
    if np.linalg.norm(cross.data) > 0:
        for factor in run(cross, mode_blocks=sector_modes):
            out.append(
                replace(factor, sector="cross", simultaneous_group=group)
            )
            group += 1
    return out


def factor_spin_sector_defect(factor: SOSFactor) -> float:
    """How far the factor's rotation strays outside single-spin sectors.

    Zero iff each rotated mode (column of mu) is supported on one spin,
    which is equivalent to every one-body operator of the factor commuting
    with Sz.
    """
    n = factor.n
    spin = np.arange(n) % 2
    defect = 0.0
    for k in range(n):
        col = factor.mu[:, k]
        alpha_w = np.linalg.norm(col[spin == 0])
        beta_w = np.linalg.norm(col[spin == 1])
        defect = max(defect, min(alpha_w, beta_w))
    return defect
