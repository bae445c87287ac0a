"""Command-line front end for the experiment runner.

Settings resolve in three layers: built-in defaults, then an optional
``key = value`` config file (``--config``), then explicit flags.  Every
command writes per-realization history CSVs plus an aggregated
``curves.csv`` under ``--out`` and prints a one-line summary per curve.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments as ex


def _parse_chi(text: str):
    parts = [int(c) for c in text.replace("-", ",").split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def _parse_chi_list(text: str):
    return tuple(tuple(int(c) for c in spec.split("-")) for spec in text.split(","))


def _parse_floats(text: str):
    return tuple(float(x) for x in text.split(","))


def _parse_pattern(text: str):
    return None if text.lower() in ("none", "binary") else text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnvqe",
        description="Tensor-network initialized VQE experiments on random spin models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "bench-optimizers": "alternating sweeps vs BFGS on identical instances",
        "eevqe": "network sweeps, gate embedding, then branching VQE",
        "vqe-baseline": "random-init branching VQE on the same instances",
        "branching-sweep": "network-only sweeps across branchK layouts",
        "chi-sweep": "network-only sweeps across bond-dimension ladders",
        "rainbow": "embedded-init pipeline on the inhomogeneous-field chain",
        "exact": "exact ground energies for the configured instances",
    }
    for name, help_text in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value settings file")
        p.add_argument("--model", choices=["ising", "xyz", "heisenberg", "rainbow"])
        p.add_argument("--sites", type=int)
        p.add_argument("--chi", type=_parse_chi, help="bond dimension, e.g. 2 or 2,4,16")
        p.add_argument("--pattern", type=_parse_pattern, help="branchK, or none for binary")
        p.add_argument("--realizations", type=int)
        p.add_argument("--seed", type=int, help="base Hamiltonian seed")
        p.add_argument("--mera-iters", type=int, dest="mera_iters")
        p.add_argument("--vqe-iters", type=int, dest="vqe_iters")
        p.add_argument("--noise-sigma", type=float, dest="noise_sigma")
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
        p.add_argument("--net-seed", type=int, dest="net_seed")
        p.add_argument("--grad-tol", type=float, dest="grad_tol")
        p.add_argument(
            "--plain-mean",
            action="store_const",
            const="plain",
            dest="aggregate",
            help="aggregate log10 of the mean delta instead of mean of log10",
        )
        p.add_argument(
            "--chi-list",
            type=_parse_chi_list,
            dest="chi_list",
            help="chi-sweep ladders, e.g. 2-2-2,2-4-8,2-4-16",
        )
        p.add_argument(
            "--rainbow-h",
            type=_parse_floats,
            dest="rainbow_h",
            help="field strengths, e.g. 0.0,2.0,3.5",
        )
    return parser


_FIELDS = [
    "model", "sites", "chi", "pattern", "realizations", "seed", "net_seed",
    "mera_iters", "vqe_iters", "noise_sigma", "workers", "out", "aggregate",
    "chi_list", "rainbow_h", "grad_tol",
]


def resolve_config(args: argparse.Namespace) -> ex.ExperimentConfig:
    cfg = (
        ex.ExperimentConfig.from_file(args.config)
        if args.config
        else ex.ExperimentConfig()
    )
    return cfg.override(**{k: getattr(args, k) for k in _FIELDS})


def _summarize(tag: str, curve: ex.AggregateCurve) -> str:
    if len(curve.iteration) == 0:
        return f"{tag}: no realizations (n=0)"
    last = len(curve.iteration) - 1
    return (
        f"{tag}: {int(curve.n[0])} realization(s), {last + 1} iterations, "
        f"final mean log10 delta {curve.mean_log10_delta[last]:+.4f}"
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = resolve_config(args)
    if args.command == "bench-optimizers":
        for arm, curve in ex.cmd_bench_optimizers(cfg).items():
            print(_summarize(arm, curve))
    elif args.command == "eevqe":
        print(_summarize("eevqe", ex.cmd_eevqe(cfg)))
    elif args.command == "vqe-baseline":
        print(_summarize("vqe_baseline", ex.cmd_vqe_baseline(cfg)))
    elif args.command == "branching-sweep":
        for pattern, arms in ex.cmd_branching_sweep(cfg).items():
            for arm, curve in arms.items():
                print(_summarize(f"{pattern}/{arm}", curve))
    elif args.command == "chi-sweep":
        for chi_tag, arms in ex.cmd_chi_sweep(cfg).items():
            for arm, curve in arms.items():
                print(_summarize(f"{chi_tag}/{arm}", curve))
    elif args.command == "rainbow":
        for h, curve in ex.cmd_rainbow(cfg).items():
            print(_summarize(f"h={h}", curve))
    elif args.command == "exact":
        for tag, energy in ex.cmd_exact(cfg):
            print(f"{tag}: E_exact = {energy:.12f}")
    print(f"outputs under {cfg.out}/", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
