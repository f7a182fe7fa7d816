"""Brute-force dense Fock-space realization of fermionic operators.

Jordan-Wigner encoding with mode 0 on the least significant bit of the
occupation-number basis index. Everything is dense on purpose: the oracle
trades speed for auditability. Memory grows as 16 MiB per matrix at the
default cap of 10 modes; anticommutation relations are verified once per
mode count when the ladder operators are first built.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from sos_compress.errors import OracleCapError
from sos_compress.tensors import (
    CHARGE_CHARGE,
    PQRS_LADDER,
    CoeffTensor4,
    OneBodyCorrection,
    SOSFactor,
    factor_tensor,
    normal_order_to_charge_charge,
)

DEFAULT_MODE_CAP = 10
_EXCITATION_CACHE_MAX = 8

_ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]])
_PARITY = np.array([[1.0, 0.0], [0.0, -1.0]])


def mode_cap() -> int:
    return int(os.environ.get("SOS_COMPRESS_ORACLE_CAP", DEFAULT_MODE_CAP))


def _check_cap(n: int, cap: int | None) -> None:
    limit = mode_cap() if cap is None else cap
    if n > limit:
        raise OracleCapError(
            f"dense Fock build for n={n} modes exceeds the cap of {limit} "
            f"(dimension 2^{n}); raise SOS_COMPRESS_ORACLE_CAP to override"
        )


@dataclass(frozen=True)
class DenseOperator:
    """Dense matrix of an operator in the occupation-number basis."""

    n: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (2**self.n, 2**self.n):
            raise ValueError(f"matrix shape {mat.shape} does not match n={self.n}")
        object.__setattr__(self, "mat", mat)

    def norm(self) -> float:
        """Operator 2-norm (largest singular value)."""
        return float(np.linalg.norm(self.mat, 2))

    def antihermiticity_defect(self) -> float:
        return float(np.linalg.norm(self.mat + self.mat.conj().T))


def _kron_chain(mats) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


@lru_cache(maxsize=None)
def annihilation_operators(n: int) -> tuple[np.ndarray, ...]:
    """Dense Jordan-Wigner annihilation operators ``a_0 .. a_{n-1}``.

    Anticommutation relations are checked exactly on first construction.
    """
    eye = np.eye(2)
    ops = []
    for p in range(n):
        mats = [eye] * (n - 1 - p) + [_ANNIHILATE] + [_PARITY] * p
        ops.append(_kron_chain(mats))
    _verify_anticommutation(ops)
    for op in ops:
        op.setflags(write=False)
    return tuple(ops)


def _verify_anticommutation(ops) -> None:
    n = len(ops)
    dim = ops[0].shape[0]
    eye = np.eye(dim)
    for p in range(n):
        for q in range(p, n):
            anti = ops[p] @ ops[q] + ops[q] @ ops[p]
            if not np.array_equal(anti, np.zeros_like(anti)):
                raise AssertionError(f"{{a_{p}, a_{q}}} != 0")
            mixed = ops[p] @ ops[q].T + ops[q].T @ ops[p]
            expected = eye if p == q else np.zeros_like(eye)
            if not np.array_equal(mixed, expected):
                raise AssertionError(f"{{a_{p}, a†_{q}}} != δ")


@lru_cache(maxsize=4)
def _excitation_stack(n: int) -> np.ndarray:
    """Array ``E[p, q] = a†_p a_q``, cached for small n."""
    ann = annihilation_operators(n)
    dim = 2**n
    stack = np.empty((n, n, dim, dim), dtype=complex)
    for p in range(n):
        for q in range(n):
            stack[p, q] = ann[p].T @ ann[q]
    stack.setflags(write=False)
    return stack


def build_one_body(coeffs: np.ndarray, cap: int | None = None) -> DenseOperator:
    """Dense matrix of ``Σ_{pq} coeffs[p, q] a†_p a_q``."""
    coeffs = np.asarray(coeffs)
    n = coeffs.shape[0]
    _check_cap(n, cap)
    if n <= _EXCITATION_CACHE_MAX:
        mat = np.tensordot(coeffs, _excitation_stack(n), axes=2)
    else:
        ann = annihilation_operators(n)
        mat = np.zeros((2**n, 2**n), dtype=complex)
        for p in range(n):
            row = coeffs[p]
            if not np.any(row):
                continue
            mat += ann[p].T @ np.tensordot(row, np.stack(ann), axes=1)
    return DenseOperator(n, mat)


def build_two_body(
    t: CoeffTensor4,
    s: OneBodyCorrection | None = None,
    cap: int | None = None,
) -> DenseOperator:
    """Dense matrix of the two-body operator described by ``t``.

    Ladder convention realizes ``Σ A[p,q,r,s] a†_p a†_q a_s a_r``; charge-charge
    realizes ``Σ t[p,s,q,r] a†_p a_s a†_q a_r``. If ``s`` is given, the one-body
    operator ``Σ S[p,r] a†_p a_r`` is subtracted.
    """
    n = t.n
    _check_cap(n, cap)
    ann = annihilation_operators(n)
    dim = 2**n
    mat = np.zeros((dim, dim), dtype=complex)
    if t.convention == CHARGE_CHARGE:
        for p in range(n):
            for sidx in range(n):
                block = t.data[p, sidx]
                if not np.any(block):
                    continue
                mat += (ann[p].T @ ann[sidx]) @ build_one_body(block, cap=cap).mat
    elif t.convention == PQRS_LADDER:
        stacked = np.stack(ann)
        for p in range(n):
            for q in range(n):
                block = t.data[p, q]  # indexed (r, s)
                if not np.any(block):
                    continue
                # Σ_{rs} block[r, s] a_s a_r
                inner = np.zeros((dim, dim), dtype=complex)
                for sidx in range(n):
                    col = block[:, sidx]
                    if not np.any(col):
                        continue
                    inner += ann[sidx] @ np.tensordot(col, stacked, axes=1)
                mat += ann[p].T @ ann[q].T @ inner
    else:
        raise ValueError(f"cannot realize convention {t.convention!r}")
    if s is not None:
        mat -= build_one_body(s.s, cap=cap).mat
    return DenseOperator(n, mat)


def build_factor(factor: SOSFactor, cap: int | None = None) -> DenseOperator:
    """Dense matrix of the charge-charge operator of one SOS factor."""
    return build_two_body(
        CoeffTensor4(factor_tensor(factor), CHARGE_CHARGE), cap=cap
    )


def number_operator(n: int, cap: int | None = None) -> DenseOperator:
    return build_one_body(np.eye(n), cap=cap)


def sz_operator(n: int, cap: int | None = None) -> DenseOperator:
    """``Sz = ½ Σ_p (n_{pα} − n_{pβ})`` for interleaved modes ``2p + σ``, α = 0."""
    if n % 2:
        raise ValueError("Sz requires an even number of spin-orbitals")
    coeffs = np.diag(0.5 * (-1.0) ** np.arange(n))
    return build_one_body(coeffs, cap=cap)


def commutator_norm(a: DenseOperator, b: DenseOperator) -> float:
    return float(np.linalg.norm(a.mat @ b.mat - b.mat @ a.mat, 2))


def exp_operator(g: DenseOperator) -> DenseOperator:
    """Exact exponential. Antihermitian input uses a hermitian eigensolve
    (unitary result); anything else falls back to scaling-and-squaring."""
    mat = g.mat
    scale = np.linalg.norm(mat)
    if scale == 0:
        return DenseOperator(g.n, np.eye(mat.shape[0], dtype=complex))
    if np.linalg.norm(mat + mat.conj().T) <= 1e-12 * max(1.0, scale):
        evals, vecs = np.linalg.eigh(1j * mat)
        return DenseOperator(g.n, (vecs * np.exp(-1j * evals)) @ vecs.conj().T)
    return DenseOperator(g.n, scipy.linalg.expm(mat))


def gaussian_unitary(v: np.ndarray, cap: int | None = None) -> DenseOperator:
    """Fock unitary of a one-particle rotation ``v``.

    Satisfies ``G a†_p G† = Σ_q v[q, p] a†_q``.
    """
    v = np.asarray(v, dtype=complex)
    # principal log of a unitary via its Schur (= spectral) decomposition
    tmat, qmat = scipy.linalg.schur(v, output="complex")
    gen = (qmat * (1j * np.angle(np.diagonal(tmat)))) @ qmat.conj().T
    gen = 0.5 * (gen - gen.conj().T)
    return exp_operator(build_one_body(gen, cap=cap))


@dataclass(frozen=True)
class VerificationResult:
    op_error: float | None = None
    trotter_error: float | None = None


def verify_factorization(
    t: CoeffTensor4,
    s: OneBodyCorrection | None,
    factors: list[SOSFactor],
    mode: str = "exact-sum",
    cap: int | None = None,
) -> VerificationResult:
    """Check a factor list against the dense realization of its source tensor.

    ``exact-sum`` compares ``matrix(G)`` with ``matrix(Σ_l Z_l² − S-term)``;
    ``trotter`` compares ``exp(G)`` with the ordered product
    ``e^{−S} · e^{F_L} ··· e^{F_1}``. Errors are operator 2-norms.

    Ladder-convention input is reordered internally (any supplied ``s`` is
    an error in that case); charge-charge input uses ``s`` as given.
    """
    if t.convention == PQRS_LADDER:
        if s is not None:
            raise ValueError(
                "one-body correction is derived from ladder input; pass s=None"
            )
        cc, s = normal_order_to_charge_charge(t)
    else:
        t.require_convention(CHARGE_CHARGE)
        cc = t
    n = cc.n
    _check_cap(n, cap)
    cc_mat = build_two_body(cc, cap=cap).mat
    s_mat = (
        build_one_body(s.s, cap=cap).mat
        if s is not None
        else np.zeros_like(cc_mat)
    )
    factor_mats = [build_factor(f, cap=cap).mat for f in factors]

    if mode == "exact-sum":
        reconstructed = sum(factor_mats, np.zeros_like(cc_mat)) - s_mat
        target = cc_mat - s_mat
        return VerificationResult(
            op_error=float(np.linalg.norm(target - reconstructed, 2))
        )
    if mode == "trotter":
        g_full = DenseOperator(n, cc_mat - s_mat)
        if g_full.antihermiticity_defect() > 1e-10 * max(1.0, np.linalg.norm(g_full.mat)):
            raise ValueError(
                "trotter mode compares unitaries and requires an antihermitian "
                "generator; got a non-antihermitian operator"
            )
        exact = exp_operator(g_full).mat
        product = exp_operator(DenseOperator(n, -s_mat)).mat
        for fmat in reversed(factor_mats):
            product = product @ exp_operator(DenseOperator(n, fmat)).mat
        return VerificationResult(
            trotter_error=float(np.linalg.norm(exact - product, 2))
        )
    raise ValueError(f"unknown verification mode {mode!r}")
