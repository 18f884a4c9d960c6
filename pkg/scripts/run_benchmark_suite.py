#!/usr/bin/env python3
"""Desk-scale method comparison on the built-in simulation designs.

Runs the screening methods (both rescalings), forward regression/selection,
one-shot marginal ranking, and the partial-correlation filter on a factor
design and on the masked-variable equicorrelation design, then prints the
FP / FN / L2 summary tables and writes the full outputs (summary.csv,
roc.csv, runs.jsonl, manifest.json) per setup.

Example:
    python scripts/run_benchmark_suite.py --replicates 100 --out results/
"""

import argparse
from pathlib import Path

from tiltsel.bench import BenchmarkConfig, run_benchmark, write_outputs
from tiltsel.metrics import summary_rows

SETUPS = {
    "factor2_p500_r09": dict(
        model="factor2", n=100, p=500, sparsity=10, r_squared=0.9,
        methods=["tcs-r1", "tcs-r2", "fr", "fs", "marginal", "pcsimple"],
    ),
    "factor10_p200_r06": dict(
        model="factor10", n=100, p=200, sparsity=10, r_squared=0.6,
        methods=["tcs-r1", "tcs-r2", "fr", "fs", "marginal"],
    ),
    "fanD_phi05_p200": dict(
        model="fanD", n=100, p=200, phi=0.5,
        methods=["tcs-r1", "tcs-r2", "fr", "fs", "marginal", "pcsimple"],
    ),
    "fanE_phi05_p200": dict(
        model="fanE", n=100, p=200, phi=0.5,
        methods=["tcs-r1", "tcs-r2", "fr", "fs", "marginal", "pcsimple"],
    ),
}


def print_table(name: str, rows) -> None:
    print(f"\n== {name} ==")
    header = f"{'method':<14}{'FP':>8}{'FN':>8}{'FP+FN':>9}{'L2':>12}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(
            f"{row['method']:<14}{row['mean_fp']:>8.2f}{row['mean_fn']:>8.2f}"
            f"{row['mean_fp_plus_fn']:>9.2f}{row['mean_l2_sq']:>12.5f}"
        )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicates", type=int, default=100)
    parser.add_argument("--master-seed", type=int, default=20240817)
    parser.add_argument("--out", default="results")
    parser.add_argument("--setups", nargs="*", default=list(SETUPS),
                        choices=list(SETUPS))
    args = parser.parse_args()

    for name in args.setups:
        cfg = BenchmarkConfig.from_dict(
            {
                **SETUPS[name],
                "replicates": args.replicates,
                "master_seed": args.master_seed,
                "output_dir": str(Path(args.out) / name),
            }
        )
        result = run_benchmark(cfg)
        write_outputs(result, cfg.output_dir)
        if result.status != "OK":
            print(f"{name}: FAILED ({result.error})")
            return 1
        print_table(name, summary_rows(result.reports))
        print(f"outputs in {cfg.output_dir}/ ({result.wall_time_s:.1f}s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
