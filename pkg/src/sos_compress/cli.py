"""Command-line interface: decompose, compile, oracle-verify.

Exit codes for ``decompose``: 0 when the residual threshold was met, 2
when the factor budget ran out first, 1 on any error (including a stalled
optimizer). ``oracle-verify`` exits 0 iff all computed errors are below
--tol. The dense-oracle mode cap (default 10) can be overridden through
the SOS_COMPRESS_ORACLE_CAP environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

import sos_compress
from sos_compress import circuits, fock, ften, reporting, spin_blocks
from sos_compress.compression import CompressionConfig
from sos_compress.errors import OracleCapError
from sos_compress.eri import HermitianERITensor, cholesky_baseline
from sos_compress.tensors import (
    CHARGE_CHARGE,
    HERMITIAN_CHEMIST,
    PQRS_LADDER,
    normal_order_to_charge_charge,
)

CSV_COLUMNS = (
    "factor_index",
    "residual_l2",
    "residual_mad",
    "residual_takagi_rank",
    "objective",
    "cum_cc_energy_error",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sos-compress",
        description="Sum-of-squares decompositions of two-body fermion operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dec = sub.add_parser("decompose", help="decompose a tensor into SOS factors")
    dec.add_argument("input", help="FTEN tensor file")
    dec.add_argument(
        "--method",
        default="takagi",
        choices=["takagi", "svd", "uc", "uc-takagi", "cholesky"],
    )
    dec.add_argument("--threshold", type=float, default=1e-5)
    dec.add_argument("--max-factors", type=int, default=None)
    dec.add_argument("--seed", type=int, default=None)
    dec.add_argument("--init", default="takagi-seed", choices=["takagi-seed", "random"])
    dec.add_argument("--restarts", type=int, default=2)
    dec.add_argument("--sz-adapted", action="store_true")
    dec.add_argument("--verify", action="store_true", help="dense-oracle check")
    dec.add_argument("--tol", type=float, default=1e-8)
    dec.add_argument("--energy-fixture", default=None, help="companion FTEN tensor")
    dec.add_argument("--out-dir", default=".")
    dec.set_defaults(func=cmd_decompose)

    comp = sub.add_parser("compile", help="compile a factor list into circuit IR")
    comp.add_argument("factors", help="factor JSON file")
    comp.add_argument("--out-dir", default=".")
    comp.add_argument("--no-merge", action="store_true")
    comp.set_defaults(func=cmd_compile)

    ver = sub.add_parser("oracle-verify", help="verify factors against the dense oracle")
    ver.add_argument("input", help="FTEN tensor file")
    ver.add_argument("factors", help="factor JSON file")
    ver.add_argument("--tol", type=float, default=1e-8)
    ver.set_defaults(func=cmd_oracle_verify)

    return parser


def _write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(
                [
                    row.factor_index,
                    f"{row.residual_l2:.16e}",
                    f"{row.residual_mad:.16e}",
                    row.residual_takagi_rank,
                    "" if row.objective is None else f"{row.objective:.16e}",
                    ""
                    if row.cum_cc_energy_error is None
                    else f"{row.cum_cc_energy_error:.16e}",
                ]
            )


def cmd_decompose(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tensor = ften.read_coeff_tensor(args.input)
    artifacts = {}

    correction = None
    if tensor.convention == PQRS_LADDER:
        tensor, correction = normal_order_to_charge_charge(tensor)
        path = out_dir / "onebody_correction.ften"
        ften.write_ften(path, correction.s, CHARGE_CHARGE)
        artifacts["onebody_correction"] = str(path)

    energy_tensor = None
    if args.energy_fixture:
        energy_tensor = ften.read_coeff_tensor(args.energy_fixture)

    config = CompressionConfig(
        threshold=args.threshold,
        max_factors=args.max_factors,
        init=args.init,
        restarts=args.restarts,
        seed=args.seed,
        real_rotations=tensor.convention == HERMITIAN_CHEMIST,
    )

    if args.method == "cholesky":
        if tensor.convention != HERMITIAN_CHEMIST:
            raise ValueError("cholesky baseline requires a hermitian-chemist tensor")
        eri = HermitianERITensor(tensor.data.real)
        factors = cholesky_baseline(eri, max_factors=args.max_factors)
        rows = reporting.truncation_rows(tensor, factors, energy_tensor)
        status = (
            "threshold"
            if rows and rows[-1].residual_l2 < args.threshold
            else "max_factors"
        )
    elif args.sz_adapted:
        if tensor.convention != CHARGE_CHARGE:
            raise ValueError("--sz-adapted requires a charge-charge tensor")
        blocks = spin_blocks.partition_by_sz(tensor)
        factors = spin_blocks.decompose_blocked(blocks, args.method.replace("-takagi", ""), config)
        rows = reporting.truncation_rows(tensor, factors, energy_tensor)
        status = (
            "threshold"
            if rows and rows[-1].residual_l2 < args.threshold
            else "max_factors"
        )
    else:
        factors, rows, status = reporting.decompose_with_report(
            tensor, args.method, config, energy_tensor
        )

    factor_path = out_dir / "factors.json"
    ften.write_factors(factor_path, factors)
    csv_path = out_dir / "report.csv"
    _write_csv(csv_path, rows)
    artifacts["factors"] = str(factor_path)
    artifacts["report"] = str(csv_path)

    verification = None
    if args.verify:
        result = fock.verify_factorization(tensor, correction, factors, mode="exact-sum")
        verification = {"op_error": result.op_error}
        print(f"op_error: {result.op_error:.3e}")

    manifest = {
        "input": str(args.input),
        "method": args.method,
        "config": {
            "threshold": args.threshold,
            "max_factors": args.max_factors,
            "init": args.init,
            "restarts": args.restarts,
            "sz_adapted": bool(args.sz_adapted),
            "energy_fixture": args.energy_fixture,
        },
        "seed": args.seed,
        "status": status,
        "rows": [row.__dict__ for row in rows],
        "artifacts": artifacts,
        "verification": verification,
        "version": sos_compress.__version__,
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))

    final_l2 = rows[-1].residual_l2 if rows else float(np.linalg.norm(tensor.data))
    print(
        f"{args.method}: {len(factors)} factors, final residual L2 {final_l2:.3e} "
        f"({status})"
    )
    if verification is not None and verification["op_error"] > args.tol:
        print(f"verification failed: op_error above {args.tol:g}", file=sys.stderr)
        return 1
    if status == "stalled":
        print("optimizer stalled; partial factor list written", file=sys.stderr)
        return 1
    if status == "max_factors" and final_l2 >= args.threshold:
        return 2
    return 0


def cmd_compile(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    factors = ften.read_factors(args.factors)
    ir = circuits.merge_and_schedule(factors, merge=not args.no_merge)
    ir_path = out_dir / "circuit.json"
    ir_path.write_text(json.dumps(circuits.circuit_to_json(ir)))

    stats_path = out_dir / "circuit_stats.csv"
    stats_rows: list[list[int]] = []
    gate_total = depth = 0
    for layer in ir.layers:
        depth += layer.depth
        if isinstance(layer, circuits.GivensLayer):
            gate_total += len(layer.rotations)
        elif isinstance(layer, circuits.ChargeLayer):
            gate_total += len(layer.couplings)
            stats_rows.append([len(stats_rows), gate_total, depth])
    if stats_rows:
        # the trailing basis-change closure belongs to the last factor
        stats_rows[-1][1] = gate_total
        stats_rows[-1][2] = depth
    with open(stats_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["factor_index", "gate_count", "cumulative_depth"])
        writer.writerows(stats_rows)
    print(
        f"compiled {len(factors)} factors: {len(ir.layers)} layers, "
        f"{ir.gate_count} gates, depth {ir.depth}"
    )
    return 0


def cmd_oracle_verify(args) -> int:
    tensor = ften.read_coeff_tensor(args.input)
    factors = ften.read_factors(args.factors)
    correction = None
    if tensor.convention == PQRS_LADDER:
        tensor, correction = normal_order_to_charge_charge(tensor)
    exact = fock.verify_factorization(tensor, correction, factors, mode="exact-sum")
    print(f"op_error: {exact.op_error:.6e}")
    try:
        trotter = fock.verify_factorization(
            tensor, correction, factors, mode="trotter"
        )
        # informational: the product-formula error scales with the squared
        # generator norm regardless of factorization quality
        print(f"trotter_error: {trotter.trotter_error:.6e}")
    except ValueError as exc:
        print(f"trotter_error: skipped ({exc})")
    return 0 if exact.op_error <= args.tol else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
