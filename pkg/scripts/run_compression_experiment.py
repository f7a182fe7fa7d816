"""Reproduce the fixture compression curves (residual norms, energy errors).

Writes one CSV per fixture and method combination under results/, in the
same column layout the CLI emits, ready for gnuplot/matplotlib, e.g.:

    python scripts/run_compression_experiment.py --max-factors 10
    gnuplot> plot "results/h4_631g_uc.csv" using 1:2 with lines, \\
                  "results/h4_631g_takagi.csv" using 1:2 with lines

Column 2 is the residual L2 norm, column 6 the cumulative doubles-energy
error of the reconstruction.
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

from sos_compress.compression import CompressionConfig
from sos_compress.ften import read_coeff_tensor
from sos_compress.reporting import decompose_with_report

FIXTURES = {
    "h4_631g": ("h4_631g_tau2_ab.ften", "h4_631g_tau2_ab_energy.ften"),
    "hf_sto3g": ("hf_sto3g_tau2_ab.ften", "hf_sto3g_tau2_ab_energy.ften"),
    "o2_sto3g": ("o2_sto3g_tau2_ab.ften", "o2_sto3g_tau2_ab_energy.ften"),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fixture-dir", default="fixtures")
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--max-factors", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--methods", nargs="+", default=["takagi", "svd", "uc", "uc-takagi"]
    )
    args = parser.parse_args()

    fixture_dir = Path(args.fixture_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for label, (tensor_file, energy_file) in FIXTURES.items():
        tensor = read_coeff_tensor(fixture_dir / tensor_file)
        energy = read_coeff_tensor(fixture_dir / energy_file)
        for method in args.methods:
            config = CompressionConfig(
                threshold=1e-9,
                max_factors=args.max_factors,
                seed=args.seed,
            )
            factors, rows, status = decompose_with_report(
                tensor, method, config, energy_tensor=energy
            )
            path = out_dir / f"{label}_{method}.csv"
            with open(path, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(
                    ["factor_index", "residual_l2", "residual_mad",
                     "residual_takagi_rank", "objective", "cum_cc_energy_error"]
                )
                for row in rows:
                    writer.writerow(
                        [row.factor_index, row.residual_l2, row.residual_mad,
                         row.residual_takagi_rank,
                         "" if row.objective is None else row.objective,
                         row.cum_cc_energy_error]
                    )
            final = rows[-1].residual_l2 if rows else 0.0
            print(f"{label} {method:9s}: {len(rows):2d} tensor factors, "
                  f"final residual L2 {final:.3e} ({status}) -> {path}")


if __name__ == "__main__":
    main()
