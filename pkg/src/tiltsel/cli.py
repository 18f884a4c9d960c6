"""Command-line interface: simulate, threshold, select, benchmark.

CSV conventions: comma-separated, no header by default (``--header`` skips
one line), observations in rows. All reported variable indices are
0-based. Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import forward_regression, forward_selection, marginal_screening_path, pc_simple
from .bench import BenchmarkConfig, resolve_threads, run_benchmark, write_outputs
from .linalg import normalize_columns
from .simulate import PRNG_NAME, SimSpec, generate_replicate
from .tcs import Rescaling, SolutionPath, TcsConfig, fit_final_coefficients, resolve_m_max, run_tcs
from .thresholding import estimate_threshold

# Full float round-trip through CSV.
CSV_FLOAT_FORMAT = "%.17g"


def _load_matrix(path: str, header: bool) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)


def _load_vector(path: str, header: bool) -> np.ndarray:
    v = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0)
    return np.atleast_1d(v).ravel()


def _emit_json(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _path_to_json(method: str, path: SolutionPath, n: int, p: int) -> dict:
    return {
        "method": method,
        "n": n,
        "p": p,
        "pi": path.pi_used,
        "steps": [
            {
                "index": s.index,
                "mode": s.mode.value,
                "residual_sq_norm": s.residual_sq_norm,
                "bic": s.bic,
            }
            for s in path.steps
        ],
        "final_model": list(path.final_model),
        "coefficients": [float(c) for c in path.final_coefficients],
    }


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = SimSpec(
        model=args.model,
        n=args.n,
        p=args.p,
        sparsity=args.sparsity,
        phi=args.phi,
        r_squared=args.r2,
        replicate_seed=args.seed,
    )
    raw, _, y, truth = generate_replicate(spec)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    np.savetxt(outdir / "X.csv", raw, fmt=CSV_FLOAT_FORMAT, delimiter=",")
    np.savetxt(outdir / "y.csv", y, fmt=CSV_FLOAT_FORMAT, delimiter=",")
    truth_data = {
        "model": spec.model.value,
        "n": spec.n,
        "p": spec.p,
        "phi": spec.phi,
        "support": list(truth.support),
        "beta": [float(b) for b in truth.beta],
        "sigma": truth.sigma,
        "r_squared_target": truth.r_squared_target,
        "seed": truth.seed,
        "prng": PRNG_NAME,
    }
    _emit_json(truth_data, str(outdir / "truth.json"))
    sys.stdout.write(
        json.dumps({"written": [str(outdir / f) for f in ("X.csv", "y.csv", "truth.json")]})
        + "\n"
    )
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    raw = _load_matrix(args.input, args.header)
    X = normalize_columns(raw, center=args.center)
    estimate = estimate_threshold(X, seed=args.seed, nu_star=args.nu_star)
    _emit_json(
        {
            "pi_hat": estimate.pi_hat,
            "rejected_count": estimate.rejected_count,
            "d": estimate.d,
            "nu_star": estimate.nu_star,
        },
        None,
    )
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    raw = _load_matrix(args.x, args.header)
    y = _load_vector(args.y, args.header)
    X = normalize_columns(raw, center=args.center)
    method = args.method
    if method == "tcs":
        pi = args.pi if args.pi == "auto" else float(args.pi)
        cfg = TcsConfig(pi=pi, rescaling=Rescaling(args.rescaling), m_max=args.m, seed=args.seed)
        path = run_tcs(X, y, cfg)
        label = f"tcs-{args.rescaling}"
    elif method == "fr":
        path = forward_regression(X, y, args.m)
        label = method
    elif method == "fs":
        path = forward_selection(X, y, args.m)
        label = method
    elif method == "marginal":
        path = marginal_screening_path(X, y, args.m)
        label = method
    else:  # pcsimple
        selected = pc_simple(X, y, alpha=args.alpha)
        coefficients = fit_final_coefficients(X, y, selected)
        _emit_json(
            {
                "method": method,
                "n": X.n_obs,
                "p": X.n_vars,
                "steps": [],
                "final_model": list(selected),
                "coefficients": [float(c) for c in coefficients],
            },
            args.out,
        )
        return 0
    m_max = resolve_m_max(args.m, X.n_obs)
    if len(path.final_model) == m_max:
        sys.stderr.write(
            f"warning: final model hit the active-set cap m={m_max}; "
            "consider re-running with a larger --m\n"
        )
    _emit_json(_path_to_json(label, path, X.n_obs, X.n_vars), args.out)
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    data = json.loads(Path(args.config).read_text())
    overrides = {
        "output_dir": args.output_dir,
        "replicates": args.replicates,
        "master_seed": args.master_seed,
        "threads": args.threads,
    }
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    if args.pi_scale:
        data["pi_scale"] = [float(s) for s in args.pi_scale.split(",")]
    cfg = BenchmarkConfig.from_dict(data)
    result = run_benchmark(cfg)
    written = write_outputs(result, cfg.output_dir)
    sys.stdout.write(
        json.dumps(
            {
                "status": result.status,
                "error": result.error,
                "threads": resolve_threads(cfg.threads),
                "outputs": [str(w) for w in written],
            }
        )
        + "\n"
    )
    return 0 if result.status == "OK" else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiltsel",
        description="Variable selection via tilted correlation screening",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a simulated data set")
    sim.add_argument("--model", required=True,
                     choices=["factor2", "factor10", "factor20", "fanD", "fanE"])
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--phi", type=float, default=None)
    sim.add_argument("--r2", type=float, default=None)
    sim.add_argument("--sparsity", type=int, default=10)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(func=cmd_simulate)

    thr = sub.add_parser("threshold", help="calibrate the correlation threshold")
    thr.add_argument("--input", required=True, help="design matrix CSV")
    thr.add_argument("--seed", type=int, required=True)
    thr.add_argument("--nu-star", type=float, default=None, dest="nu_star")
    thr.add_argument("--center", action="store_true")
    thr.add_argument("--header", action="store_true")
    thr.set_defaults(func=cmd_threshold)

    sel = sub.add_parser("select", help="run a selection method on CSV data")
    sel.add_argument("--x", required=True, help="design matrix CSV")
    sel.add_argument("--y", required=True, help="response CSV (single column)")
    sel.add_argument("--method", default="tcs",
                     choices=["tcs", "fs", "fr", "marginal", "pcsimple"])
    sel.add_argument("--pi", default="auto", help="'auto' or a value in [0, 1]")
    sel.add_argument("--rescaling", default="r2", choices=["r1", "r2"])
    sel.add_argument("--m", type=int, default=None, help="active-set cap (default n//2)")
    sel.add_argument("--seed", type=int, default=0)
    sel.add_argument("--alpha", type=float, default=0.05, help="pcsimple test level")
    sel.add_argument("--center", action="store_true")
    sel.add_argument("--header", action="store_true")
    sel.add_argument("--out", default=None, help="output JSON path ('-' for stdout)")
    sel.set_defaults(func=cmd_select)

    ben = sub.add_parser("benchmark", help="run a replicated method comparison")
    ben.add_argument("--config", required=True, help="benchmark config JSON")
    ben.add_argument("--output-dir", default=None)
    ben.add_argument("--replicates", type=int, default=None)
    ben.add_argument("--master-seed", type=int, default=None)
    ben.add_argument("--threads", default=None)
    ben.add_argument("--pi-scale", default=None,
                     help="comma-separated threshold scale factors, e.g. 0.75,0.9,1.0,1.1,1.25")
    ben.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:
        sys.stderr.write(json.dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
