"""Random test operators with controlled symmetries."""

from __future__ import annotations

import numpy as np

from sos_compress.tensors import (
    CHARGE_CHARGE,
    PQRS_LADDER,
    CoeffTensor4,
    antisymmetrize_ladder,
)


def random_unitary(n: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(mat)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_antihermitian_ladder_tensor(n: int, seed=None) -> CoeffTensor4:
    """Pair-antisymmetric ladder tensor of an antihermitian generator.

    Returns ``A`` with ``A[p,q,r,s] = −A[q,p,r,s] = −A[p,q,s,r]`` and
    ``A[p,q,r,s] = −A*[r,s,p,q]``, so that ``Σ A a†a†aa`` is antihermitian.
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
    raw = antisymmetrize_ladder(raw)
    data = raw - np.transpose(raw, (2, 3, 0, 1)).conj()
    return CoeffTensor4(data, PQRS_LADDER)


def random_hermitian_ladder_tensor(n: int, seed=None) -> CoeffTensor4:
    """Like :func:`random_antihermitian_ladder_tensor` but hermitian."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
    raw = antisymmetrize_ladder(raw)
    data = raw + np.transpose(raw, (2, 3, 0, 1)).conj()
    return CoeffTensor4(data, PQRS_LADDER)


def random_antihermitian_cc_tensor(n: int, seed=None) -> CoeffTensor4:
    """Charge-charge tensor of an antihermitian operator, symmetric supermatrix.

    Built with ``t[p,s,q,r] = t[q,r,p,s]`` (complex symmetric supermatrix)
    and ``t[p,s,q,r] = −t*[s,p,r,q]`` so the represented charge-charge
    operator is antihermitian.
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
    raw = 0.5 * (raw + np.transpose(raw, (2, 3, 0, 1)))
    # dagger of a charge-charge tensor is the conjugated full index reversal
    data = raw - np.transpose(raw, (3, 2, 1, 0)).conj()
    return CoeffTensor4(data, CHARGE_CHARGE)


def random_sz_conserving_cc_tensor(m: int, seed=None, cross_only: bool = False) -> CoeffTensor4:
    """Antihermitian charge-charge tensor over ``2m`` interleaved spin-orbitals.

    Entries are restricted to same-spin pairs (modes ``2p + σ`` with α = 0),
    so the operator commutes with Sz. With ``cross_only`` the same-spin
    blocks are zeroed, leaving only the αα×ββ coupling.
    """
    rng = np.random.default_rng(seed)
    n = 2 * m
    raw = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
    spin = np.arange(n) % 2
    same_pair = spin[:, None] == spin[None, :]
    mask = same_pair[:, :, None, None] & same_pair[None, None, :, :]
    if cross_only:
        first_alpha = (spin == 0)[:, None] & (spin == 0)[None, :]
        diff_block = first_alpha[:, :, None, None] ^ first_alpha[None, None, :, :]
        mask &= diff_block
    raw = np.where(mask, raw, 0)
    raw = 0.5 * (raw + np.transpose(raw, (2, 3, 0, 1)))
    data = raw - np.transpose(raw, (3, 2, 1, 0)).conj()
    return CoeffTensor4(data, CHARGE_CHARGE)
