"""Per-factor decomposition reports shared by the CLI and the test suite.

A "tensor factor" is one Takagi column, one singular value, or one greedy
iteration; analytical methods may emit several SOS factors per tensor
factor (tracked through ``SOSFactor.source_term``). Rows carry the
residual metrics after each tensor factor and, when an energy companion
tensor is supplied, the doubles-energy error of the residual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sos_compress.tensors import (
    CoeffTensor4,
    SOSFactor,
    cc_doubles_energy,
    factor_tensor,
    residual_metrics,
)
from sos_compress.compression import CompressionConfig, greedy_compress
from sos_compress import decompositions

METHODS = ("takagi", "svd", "uc", "uc-takagi")


@dataclass(frozen=True)
class ReportRow:
    factor_index: int
    residual_l2: float
    residual_mad: float
    residual_takagi_rank: int
    objective: float | None
    cum_cc_energy_error: float | None


def _energy_error(residual: CoeffTensor4, energy_tensor: CoeffTensor4 | None):
    if energy_tensor is None:
        return None
    return abs(cc_doubles_energy(residual, energy_tensor))


def _term_keys(factors: list[SOSFactor]) -> list:
    """Grouping key per factor: spin-blocked lists group by their
    simultaneous slice, plain lists by source term, missing keys stand
    alone."""
    blocked = any(f.sector is not None for f in factors)
    keys = []
    for index, factor in enumerate(factors):
        key = factor.simultaneous_group if blocked else factor.source_term
        keys.append(("solo", index) if key is None else key)
    return keys


def truncation_rows(
    t: CoeffTensor4,
    factors: list[SOSFactor],
    energy_tensor: CoeffTensor4 | None = None,
    max_terms: int | None = None,
) -> list[ReportRow]:
    """Residual metrics after each tensor factor of an analytical expansion."""
    keys = _term_keys(factors)
    terms = list(dict.fromkeys(keys))  # unique, first-occurrence order
    if max_terms is not None:
        terms = terms[:max_terms]
    rec = np.zeros_like(t.data)
    rows = []
    for index, term in enumerate(terms):
        for factor, key in zip(factors, keys):
            if key == term:
                rec += factor_tensor(factor)
        metrics = residual_metrics(t, CoeffTensor4(rec, t.convention))
        rows.append(
            ReportRow(
                factor_index=index,
                residual_l2=metrics.l2,
                residual_mad=metrics.mad,
                residual_takagi_rank=metrics.takagi_rank,
                objective=None,
                cum_cc_energy_error=_energy_error(
                    CoeffTensor4(t.data - rec, t.convention), energy_tensor
                ),
            )
        )
    return rows


def decompose_with_report(
    t: CoeffTensor4,
    method: str,
    config: CompressionConfig | None = None,
    energy_tensor: CoeffTensor4 | None = None,
):
    """Run a decomposition method and build its per-tensor-factor report.

    Returns ``(factors, rows, status)`` where status is ``"threshold"`` /
    ``"max_factors"`` / ``"stalled"`` for the greedy methods and derived
    from the final residual for the analytical ones.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    config = config or CompressionConfig()
    if method in ("uc", "uc-takagi"):
        if method == "uc-takagi":
            from dataclasses import replace

            config = replace(config, init="takagi-seed", restarts=0)
        factors, report = greedy_compress(t, config)
        rec = np.zeros_like(t.data)
        rows = []
        for row, factor in zip(report.rows, factors):
            rec += factor_tensor(factor)
            rows.append(
                ReportRow(
                    factor_index=row.factor_index,
                    residual_l2=row.residual_l2,
                    residual_mad=row.residual_mad,
                    residual_takagi_rank=row.residual_takagi_rank,
                    objective=row.objective_value,
                    cum_cc_energy_error=_energy_error(
                        CoeffTensor4(t.data - rec, t.convention), energy_tensor
                    ),
                )
            )
        return factors, rows, report.status

    if method == "takagi":
        max_columns = config.max_factors
        factors = decompositions.takagi_sos(t, max_columns=max_columns)
    else:
        factors = decompositions.svd_sos(t)
        if config.max_factors is not None:
            kept_terms = sorted({f.source_term for f in factors})[: config.max_factors]
            factors = [f for f in factors if f.source_term in set(kept_terms)]
    rows = truncation_rows(t, factors, energy_tensor)
    final_l2 = rows[-1].residual_l2 if rows else float(np.linalg.norm(t.data))
    status = "threshold" if final_l2 < config.threshold else "max_factors"
    return factors, rows, status
