"""Sum-of-squares decompositions of two-body fermion operators."""

from sos_compress.tensors import (
    CHARGE_CHARGE,
    HERMITIAN_CHEMIST,
    PQRS_LADDER,
    CoeffTensor4,
    NormalOperatorCoeffs,
    OneBodyCorrection,
    ResidualMetrics,
    SOSFactor,
    SuperMatrix,
    cc_doubles_energy,
    factor_tensor,
    normal_order_to_charge_charge,
    reconstruct_tensor,
    reshape_to_supermatrix,
    residual_metrics,
    tensor_from_supermatrix,
)
from sos_compress.decompositions import (
    TakagiResult,
    factor_to_normal_operator,
    svd_sos,
    takagi,
    takagi_sos,
)
from sos_compress.compression import (
    CompressionConfig,
    CompressionReport,
    KappaParams,
    RotationDerivative,
    greedy_compress,
    gradient,
    objective,
    reference_gradient,
    transform_tensor,
    wilcox_derivative,
)
from sos_compress.spin_blocks import (
    SpinBlockedSuperMatrix,
    decompose_blocked,
    partition_by_sz,
)
from sos_compress.eri import HermitianERITensor, cholesky_baseline, compress_eri
from sos_compress.circuits import CircuitIR, givens_decompose, merge_and_schedule
from sos_compress.fock import (
    DenseOperator,
    build_two_body,
    exp_operator,
    verify_factorization,
)

__version__ = "0.1.0"
