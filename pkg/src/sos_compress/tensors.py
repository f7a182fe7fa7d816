"""Core tensor types: rank-4 coefficient tensors, supermatrices, SOS factors.

Index conventions
-----------------

A rank-4 coefficient tensor carries one of three convention tags:

- ``"pqrs-ladder"``: ``data[p, q, r, s]`` multiplies ``a†_p a†_q a_s a_r``.
- ``"charge-charge"``: ``data[p, s, q, r]`` multiplies ``a†_p a_s a†_q a_r``.
- ``"hermitian-chemist"``: real two-electron integrals ``(ps|qr)`` over
  spatial orbitals, same operator pairing as charge-charge.

The supermatrix of a charge-charge tensor flattens the pair indices
row-major: row ``p * n + s``, column ``q * n + r``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from sos_compress.errors import ConventionError

PQRS_LADDER = "pqrs-ladder"
CHARGE_CHARGE = "charge-charge"
HERMITIAN_CHEMIST = "hermitian-chemist"

CONVENTIONS = (PQRS_LADDER, CHARGE_CHARGE, HERMITIAN_CHEMIST)

# Relative cutoff on singular values used for rank counting throughout.
RANK_THRESHOLD = 1e-10


def _as_locked_complex(array: np.ndarray, ndim: int) -> np.ndarray:
    array = np.asarray(array, dtype=complex).copy()
    if array.ndim != ndim:
        raise ValueError(f"expected a rank-{ndim} array, got rank {array.ndim}")
    if len(set(array.shape)) != 1:
        raise ValueError(f"expected equal dimensions, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class CoeffTensor4:
    """Rank-4 complex coefficient tensor of a two-body operator.

    Attributes:
        data: Complex array of shape ``(n, n, n, n)``. Read-only.
        convention: One of the module-level convention tags.
    """

    data: np.ndarray
    convention: str

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ConventionError(
                f"unknown convention {self.convention!r}; expected one of {CONVENTIONS}"
            )
        object.__setattr__(self, "data", _as_locked_complex(self.data, 4))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def require_convention(self, convention: str) -> None:
        if self.convention != convention:
            raise ConventionError(
                f"operation requires a {convention!r} tensor, got {self.convention!r}"
            )


@dataclass(frozen=True)
class SuperMatrix:
    """``n² × n²`` matrix from geminal reshaping of a charge-charge tensor.

    Row index is the flattened pair ``(p, s)`` (row-major, ``p * n + s``),
    column index the flattened pair ``(q, r)``.
    """

    n: int
    mat: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex).copy()
        if mat.shape != (self.n**2, self.n**2):
            raise ValueError(
                f"supermatrix for n={self.n} must have shape "
                f"{(self.n**2, self.n**2)}, got {mat.shape}"
            )
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    def symmetry_defect(self) -> float:
        return float(np.linalg.norm(self.mat - self.mat.T))


@dataclass(frozen=True)
class OneBodyCorrection:
    """Coefficients ``S[p, r]`` of the one-body term split off by reordering.

    The reordered operator satisfies
    ``ladder operator = charge-charge operator − Σ_{pr} S[p, r] a†_p a_r``.
    """

    s: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "s", _as_locked_complex(self.s, 2))

    @property
    def n(self) -> int:
        return self.s.shape[0]


@dataclass(frozen=True)
class NormalOperatorCoeffs:
    """Coefficient matrix ``z`` of a one-body operator ``Z = Σ z[p,q] a†_p a_q``."""

    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", _as_locked_complex(self.z, 2))

    @property
    def n(self) -> int:
        return self.z.shape[0]

    def normality_defect(self) -> float:
        """Norm of ``[z, z†]`` relative to ``‖z‖²`` (0 for a normal operator)."""
        z = self.z
        comm = z @ z.conj().T - z.conj().T @ z
        scale = np.linalg.norm(z) ** 2
        if scale == 0:
            return 0.0
        return float(np.linalg.norm(comm) / scale)


@dataclass(frozen=True)
class SOSFactor:
    """One factor of a sum-of-squares decomposition.

    The factor represents the charge-charge operator
    ``Σ_{jk} J[j, k] ñ_j ñ_k`` where ``ñ_k = b†_k b_k`` are number operators
    of the rotated modes ``b†_k = Σ_p mu[p, k] a†_p``.  Its coefficient
    tensor in the original basis is given by :func:`factor_tensor`.

    Attributes:
        mu: ``n × n`` unitary basis rotation.
        j: ``n × n`` coupling matrix (weights are pre-absorbed into ``j``).
        tag: origin of the factor (``svd`` | ``takagi`` | ``uc`` | ``cholesky``).
        sector: optional spin-sector annotation (``alpha`` | ``beta`` | ``cross``).
        simultaneous_group: factors sharing a group id commute mode-wise and
            may be compiled into a single circuit layer.
        source_term: index of the tensor factor (Takagi column, singular
            value, or greedy iteration) this factor came from.
    """

    mu: np.ndarray
    j: np.ndarray
    tag: str
    sector: str | None = None
    simultaneous_group: int | None = None
    source_term: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "mu", _as_locked_complex(self.mu, 2))
        object.__setattr__(self, "j", _as_locked_complex(self.j, 2))
        if self.mu.shape != self.j.shape:
            raise ValueError("mu and j must have matching shapes")

    @property
    def n(self) -> int:
        return self.mu.shape[0]

    def unitarity_defect(self) -> float:
        eye = np.eye(self.n)
        return float(np.linalg.norm(self.mu.conj().T @ self.mu - eye))

    def j_second_singular_value(self) -> float:
        svals = np.linalg.svd(self.j, compute_uv=False)
        return float(svals[1]) if len(svals) > 1 else 0.0


def factor_tensor(factor: SOSFactor) -> np.ndarray:
    """Charge-charge coefficient tensor represented by one SOS factor.

    Returns ``t[p, s, q, r] = Σ_{jk} mu[p,j] mu*[s,j] J[j,k] mu[q,k] mu*[r,k]``.
    """
    mu = factor.mu
    return np.einsum(
        "pj,sj,jk,qk,rk->psqr", mu, mu.conj(), factor.j, mu, mu.conj(), optimize=True
    )


def reconstruct_tensor(factors: list[SOSFactor], n: int) -> CoeffTensor4:
    """Sum of the factor tensors, as a charge-charge tensor."""
    total = np.zeros((n, n, n, n), dtype=complex)
    for factor in factors:
        total += factor_tensor(factor)
    return CoeffTensor4(total, CHARGE_CHARGE)


def reshape_to_supermatrix(t: CoeffTensor4) -> SuperMatrix:
    """Flatten a charge-charge tensor into its ``(ps),(qr)`` supermatrix."""
    t.require_convention(CHARGE_CHARGE)
    n = t.n
    return SuperMatrix(n, t.data.reshape(n**2, n**2))


def tensor_from_supermatrix(m: SuperMatrix) -> CoeffTensor4:
    """Inverse of :func:`reshape_to_supermatrix`; exact roundtrip."""
    n = m.n
    return CoeffTensor4(m.mat.reshape(n, n, n, n), CHARGE_CHARGE)


def normal_order_to_charge_charge(
    a: CoeffTensor4,
) -> tuple[CoeffTensor4, OneBodyCorrection]:
    """Reorder a ladder-convention tensor into charge-charge form.

    Implements the operator identity (valid for a generic coefficient
    tensor, no antisymmetry assumed)::

        Σ A[p,q,r,s] a†_p a†_q a_s a_r
            = Σ c[p,s,q,r] a†_p a_s a†_q a_r − Σ S[p,r] a†_p a_r

    with ``c[p,s,q,r] = A[p,q,s,r]`` and ``S[p,r] = Σ_q A[p,q,q,r]``.
    """
    a.require_convention(PQRS_LADDER)
    cc = np.transpose(a.data, (0, 2, 1, 3))
    s = np.einsum("pqqr->pr", a.data)
    return CoeffTensor4(cc, CHARGE_CHARGE), OneBodyCorrection(s)


def antisymmetrize_ladder(data: np.ndarray) -> np.ndarray:
    """Project onto ``A[p,q,r,s] = −A[q,p,r,s] = −A[p,q,s,r]``. Idempotent."""
    return 0.25 * (
        data
        - np.transpose(data, (1, 0, 2, 3))
        - np.transpose(data, (0, 1, 3, 2))
        + np.transpose(data, (1, 0, 3, 2))
    )


def antisymmetry_defect(a: CoeffTensor4) -> float:
    """Norm of the component of ``a`` outside the antisymmetric subspace."""
    return float(np.linalg.norm(a.data - antisymmetrize_ladder(a.data)))


def supermatrix_rank(
    mat: np.ndarray,
    threshold: float = RANK_THRESHOLD,
    floor: float = 0.0,
) -> int:
    """Number of singular values above ``threshold`` times the largest.

    For a complex symmetric matrix the singular values coincide with the
    Takagi values, so this is the Takagi rank used as the compressibility
    diagnostic. ``floor`` sets an absolute cutoff below which values never
    count; residual ranks use the source tensor's scale there so that a
    numerically zero residual has rank zero.
    """
    svals = np.linalg.svd(mat, compute_uv=False)
    if svals.size == 0 or svals[0] == 0:
        return 0
    cutoff = max(threshold * svals[0], floor)
    return int(np.count_nonzero(svals > cutoff))


@dataclass(frozen=True)
class ResidualMetrics:
    l2: float
    mad: float
    takagi_rank: int


def residual_metrics(t: CoeffTensor4, approx: CoeffTensor4) -> ResidualMetrics:
    """L2 norm, maximum absolute deviation and Takagi rank of ``t − approx``."""
    if t.data.shape != approx.data.shape:
        raise ValueError(
            f"shape mismatch: {t.data.shape} vs {approx.data.shape}"
        )
    if t.convention != approx.convention:
        raise ConventionError(
            f"convention mismatch: {t.convention!r} vs {approx.convention!r}"
        )
    diff = t.data - approx.data
    n = t.n
    source_scale = float(
        np.linalg.svd(t.data.reshape(n**2, n**2), compute_uv=False)[0]
    ) if t.data.size else 0.0
    return ResidualMetrics(
        l2=float(np.linalg.norm(diff)),
        mad=float(np.max(np.abs(diff))) if diff.size else 0.0,
        takagi_rank=supermatrix_rank(
            diff.reshape(n**2, n**2), floor=RANK_THRESHOLD * source_scale
        ),
    )


def cc_doubles_energy(t2: CoeffTensor4, v: CoeffTensor4) -> float:
    """Doubles correlation energy ``(1/4) Σ_{ijab} v[ijab] t2[ijab]``.

    Both tensors must be index-aligned over the same spin-orbital space;
    the functional is linear in ``t2``.
    """
    if t2.data.shape != v.data.shape:
        raise ValueError(
            f"shape mismatch: {t2.data.shape} vs {v.data.shape}"
        )
    return float(np.real(0.25 * np.sum(v.data * t2.data)))
