"""Batch experiment runner: realization sweeps, aggregation, CSV output.

Every command follows the same shape: a deterministic set of Hamiltonian
realizations (base seed + index, serialized under ``instances/`` and
audited by hash so paired comparisons provably share instances), one
history file per realization (existing files are reused, so interrupted
sweeps resume), and an aggregated ``curves.csv`` whose comment header is
the full resolved configuration.  Aggregates and instance files contain no
timing data, so re-running a command into a fresh directory reproduces
``curves.csv`` byte for byte.

The network initial seed is shared across realizations: disorder enters
through the couplings only, so curves are comparable realization by
realization across arms and commands.
"""

from __future__ import annotations

import ast
import math
import concurrent.futures
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import hamiltonians as ham
from .history import RunHistory, concat_histories
from .network import build
from .optimizer import bfgs_optimize, ev_sweep, modified_ev_sweep
from .vqe import eevqe_pipeline, random_baseline

__all__ = [
    "ExperimentConfig",
    "AggregateCurve",
    "cmd_bench_optimizers",
    "cmd_eevqe",
    "cmd_vqe_baseline",
    "cmd_branching_sweep",
    "cmd_chi_sweep",
    "cmd_rainbow",
    "cmd_exact",
]

_GENERATORS = {
    "ising": ham.gen_ising,
    "xyz": ham.gen_xyz,
    "heisenberg": ham.gen_heisenberg,
}

# Relative errors at or below the eigensolver's own tolerance are clipped
# before taking log10 so exact hits do not produce infinities.
_DELTA_FLOOR = 1e-16


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings for one command invocation.

    ``seed`` is the base Hamiltonian seed; realization r draws couplings
    with seed + r.  ``net_seed`` initializes the network tensors and is
    deliberately shared by all realizations.  ``chi_list`` and
    ``rainbow_h`` only matter to their respective sweep commands.
    """

    model: str = "ising"
    sites: int = 16
    chi: object = 2  # scalar or per-level tuple
    pattern: str | None = None
    realizations: int = 10
    seed: int = 0
    net_seed: int = 0
    mera_iters: int = 1_000
    vqe_iters: int = 10_000
    noise_sigma: float = 0.0
    workers: int = 1
    out: str = "runs"
    aggregate: str = "log10"  # "log10": mean of log10(delta); "plain": log10 of mean
    chi_list: tuple = ((2, 2, 2), (2, 4, 8), (2, 4, 16))
    rainbow_h: tuple = (0.0, 2.0, 3.5)
    grad_tol: float = 1e-10

    def __post_init__(self):
        if self.model not in (*_GENERATORS, "rainbow"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.aggregate not in ("log10", "plain"):
            raise ValueError(f"unknown aggregation {self.aggregate!r}")
        if self.realizations < 0 or self.workers < 1:
            raise ValueError("realizations must be >= 0 and workers >= 1")

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Parse ``key = value`` lines; values are Python literals or strings."""
        updates = {}
        names = {f.name for f in fields(cls)}
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in names:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                updates[key] = ast.literal_eval(val)
            except (ValueError, SyntaxError):
                updates[key] = None if val == "none" else val
        return cls(**updates)

    def override(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kwargs.items() if v is not None})

    def header_lines(self) -> list[str]:
        return [
            f"# {f.name} = {getattr(self, f.name)!r}"
            for f in sorted(fields(self), key=lambda f: f.name)
        ]


@dataclass
class AggregateCurve:
    """Per-iteration aggregate of relative errors across realizations.

    ``mean_log10_delta`` is the mean of log10(delta) (or log10 of the plain
    mean, by configuration), ``variance`` the variance of log10(delta), and
    ``n`` how many realizations reached that iteration.
    """

    iteration: np.ndarray
    mean_log10_delta: np.ndarray
    variance: np.ndarray
    n: np.ndarray
    meta: dict = field(default_factory=dict)

    def to_csv(self, path, cfg: ExperimentConfig) -> None:
        lines = cfg.header_lines()
        meta = {k: v.item() if isinstance(v, np.generic) else v for k, v in self.meta.items()}
        lines += [f"# {k} = {v!r}" for k, v in sorted(meta.items())]
        lines.append("iteration,mean_log10_delta,variance,n")
        for k in range(len(self.iteration)):
            lines.append(
                f"{int(self.iteration[k])},{float(self.mean_log10_delta[k])!r},"
                f"{float(self.variance[k])!r},{int(self.n[k])}"
            )
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text("\n".join(lines) + "\n")


def aggregate_histories(deltas: list[list[float]], mode: str = "log10", meta=None) -> AggregateCurve:
    """Column-wise aggregation of ragged per-realization delta traces."""
    n_it = max((len(d) for d in deltas), default=0)
    its, means, variances, counts = [], [], [], []
    for it in range(n_it):
        vals = np.array([d[it] for d in deltas if it < len(d)], dtype=float)
        logs = np.log10(np.maximum(vals, _DELTA_FLOOR))
        its.append(it)
        if mode == "plain":
            means.append(math.log10(max(float(vals.mean()), _DELTA_FLOOR)))
        else:
            means.append(float(logs.mean()))
        variances.append(float(logs.var()))
        counts.append(len(vals))
    return AggregateCurve(
        np.array(its), np.array(means), np.array(variances), np.array(counts),
        dict(meta or {}),
    )


# -- instances ----------------------------------------------------------


def _instance_path(out: Path, tag: str) -> Path:
    return out / "instances" / f"{tag}.txt"


def _make_instance(cfg: ExperimentConfig, r: int, h: float | None = None):
    """Shifted Hamiltonian + tag for realization r (audited against disk)."""
    if cfg.model == "rainbow":
        H = ham.gen_rainbow(cfg.sites, 0.0 if h is None else h)
        tag = f"rainbow_N{cfg.sites}_h{h}"
    else:
        H = _GENERATORS[cfg.model](cfg.sites, cfg.seed + r)
        tag = f"{cfg.model}_N{cfg.sites}_s{cfg.seed + r}"
    return ham.shift_negative(H), tag


def _load_or_store_instance(cfg: ExperimentConfig, out: Path, r: int, h=None):
    """Returns (H shifted, e_exact); enforces cross-arm instance identity.

    The serialized instance and its exact energy live under ``instances/``;
    a later command with the same output directory must reproduce the same
    hash, which is the paired-seed audit.
    """
    H, tag = _make_instance(cfg, r, h)
    path = _instance_path(out, tag)
    epath = path.with_suffix(".energy")
    if path.exists():
        stored = ham.load_hamiltonian(path)
        if ham.hamiltonian_hash(stored) != ham.hamiltonian_hash(H):
            raise ValueError(
                f"instance audit failed for {path}: stored Hamiltonian differs "
                "from the one this configuration generates"
            )
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        ham.save_hamiltonian(H, path)
    if epath.exists():
        e_exact = float(epath.read_text())
    else:
        e_exact = ham.exact_ground_energy(H)
        epath.write_text(repr(e_exact) + "\n")
    return H, e_exact


# -- per-realization history files --------------------------------------


def _read_history_csv(path: Path):
    """(meta dict, iterations, stages, deltas) from a RunHistory CSV."""
    meta, rows = {}, []
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            try:
                meta[key.strip()] = ast.literal_eval(val.strip())
            except (ValueError, SyntaxError):
                meta[key.strip()] = val.strip()
        elif line and not line.startswith("iteration"):
            it, stage, energy, delta = line.split(",")
            rows.append((int(it), stage, float(energy), float(delta)))
    its = [r[0] for r in rows]
    stages = [r[1] for r in rows]
    deltas = [r[3] for r in rows]
    return meta, its, stages, deltas


def _compute_history(cfg: ExperimentConfig, kind: str, r: int) -> RunHistory:
    """One realization of one arm; ``kind`` encodes the arm and its variant.

    Top-level so process pools can pickle it.  Kinds:
    ``bench:<ev|modified_ev|bfgs>``, ``eevqe``, ``baseline``,
    ``net:<pattern>:<arm>`` (network-only sweep on a branching layout),
    ``chi:<c0-c1-..>:<arm>``, ``rainbow:<h>``.
    """
    out = Path(cfg.out)
    head, _, rest = kind.partition(":")
    if head == "bench":
        H, e_exact = _load_or_store_instance(cfg, out, r)
        net = build(cfg.sites, cfg.chi, cfg.pattern, seed=cfg.net_seed)
        if rest == "ev":
            return ev_sweep(net, H, cfg.mera_iters, e_exact=e_exact)
        if rest == "modified_ev":
            return modified_ev_sweep(net, H, cfg.mera_iters, e_exact=e_exact)
        return bfgs_optimize(
            net, H, cfg.mera_iters, e_exact=e_exact, grad_tol=cfg.grad_tol
        )
    if head == "eevqe":
        H, e_exact = _load_or_store_instance(cfg, out, r)
        mera, vqe = eevqe_pipeline(
            H,
            pattern=cfg.pattern,
            mera_budget=cfg.mera_iters,
            vqe_budget=cfg.vqe_iters,
            noise_sigma=cfg.noise_sigma,
            net_seed=cfg.net_seed,
            noise_seed=cfg.seed + r,
            e_exact=e_exact,
            grad_tol=cfg.grad_tol,
        )
        return concat_histories(mera, vqe)
    if head == "baseline":
        H, e_exact = _load_or_store_instance(cfg, out, r)
        return random_baseline(
            H,
            pattern=cfg.pattern,
            vqe_budget=cfg.vqe_iters,
            seed=cfg.seed + r,
            e_exact=e_exact,
            grad_tol=cfg.grad_tol,
        )
    if head in ("net", "chi"):
        spec, _, arm = rest.partition(":")
        H, e_exact = _load_or_store_instance(cfg, out, r)
        chi = [int(c) for c in spec.split("-")] if head == "chi" else cfg.chi
        pattern = spec if head == "net" else cfg.pattern
        net = build(cfg.sites, chi, pattern, seed=cfg.net_seed)
        sweep = ev_sweep if arm == "ev" else modified_ev_sweep
        return sweep(net, H, cfg.mera_iters, e_exact=e_exact)
    if head == "rainbow":
        h = float(rest)
        H, e_exact = _load_or_store_instance(cfg, out, r, h=h)
        mera, vqe = eevqe_pipeline(
            H,
            pattern=cfg.pattern,
            mera_budget=cfg.mera_iters,
            vqe_budget=cfg.vqe_iters,
            noise_sigma=cfg.noise_sigma,
            net_seed=cfg.net_seed + r,
            noise_seed=cfg.seed + r,
            e_exact=e_exact,
            grad_tol=cfg.grad_tol,
        )
        return concat_histories(mera, vqe)
    raise ValueError(f"unknown arm kind {kind!r}")


def _run_realizations(cfg: ExperimentConfig, out_dir: Path, kind: str):
    """Deltas per realization; completed files are reused, gaps recomputed.

    With ``workers > 1`` missing realizations run in separate processes.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {r: out_dir / f"r{r:03d}.csv" for r in range(cfg.realizations)}
    missing = [r for r, p in paths.items() if not p.exists()]
    if cfg.workers > 1 and len(missing) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = pool.map(
                _compute_history, *zip(*((cfg, kind, r) for r in missing))
            )
            for r, hist in zip(missing, results):
                hist.to_csv(paths[r])
    else:
        for r in missing:
            _compute_history(cfg, kind, r).to_csv(paths[r])
    deltas = []
    for r in range(cfg.realizations):
        _, _, _, ds = _read_history_csv(paths[r])
        deltas.append(ds)
    return deltas


# -- commands -----------------------------------------------------------


def cmd_bench_optimizers(cfg: ExperimentConfig) -> dict[str, AggregateCurve]:
    """Alternating-sweep vs BFGS benchmark on identical realizations.

    Three arms (ev, modified_ev, bfgs) run for ``mera_iters`` sweeps or
    iterations from the same initial network on the same instances; one
    curves.csv per arm under ``out``.
    """
    out = Path(cfg.out)
    curves = {}
    for arm in ("ev", "modified_ev", "bfgs"):
        deltas = _run_realizations(cfg, out / arm, f"bench:{arm}")
        curve = aggregate_histories(deltas, cfg.aggregate, {"arm": arm})
        curve.to_csv(out / arm / "curves.csv", cfg)
        curves[arm] = curve
    return curves


def cmd_eevqe(cfg: ExperimentConfig) -> AggregateCurve:
    """Embedded-init pipeline per realization; aggregate marks the stage cut."""
    out = Path(cfg.out)
    deltas = _run_realizations(cfg, out / "eevqe", "eevqe")
    curve = aggregate_histories(
        deltas, cfg.aggregate, {"arm": "eevqe", "stage_boundary": cfg.mera_iters}
    )
    curve.to_csv(out / "eevqe" / "curves.csv", cfg)
    return curve


def cmd_vqe_baseline(cfg: ExperimentConfig) -> AggregateCurve:
    """Random-init branching VQE on the same instances as cmd_eevqe."""
    out = Path(cfg.out)
    deltas = _run_realizations(cfg, out / "vqe_baseline", "baseline")
    curve = aggregate_histories(deltas, cfg.aggregate, {"arm": "vqe_baseline"})
    curve.to_csv(out / "vqe_baseline" / "curves.csv", cfg)
    return curve


def cmd_branching_sweep(cfg: ExperimentConfig) -> dict[str, dict[str, AggregateCurve]]:
    """EV vs modified-EV across every branchK layout at this system size."""
    out = Path(cfg.out)
    n_layers = cfg.sites.bit_length() - 2
    curves: dict[str, dict[str, AggregateCurve]] = {}
    for k in range(n_layers + 1):
        pattern = f"branch{k}"
        curves[pattern] = {}
        for arm in ("ev", "modified_ev"):
            deltas = _run_realizations(cfg, out / pattern / arm, f"net:{pattern}:{arm}")
            curve = aggregate_histories(
                deltas, cfg.aggregate, {"arm": arm, "pattern": pattern}
            )
            curve.to_csv(out / pattern / arm / "curves.csv", cfg)
            curves[pattern][arm] = curve
    return curves


def cmd_chi_sweep(cfg: ExperimentConfig) -> dict[str, dict[str, AggregateCurve]]:
    """Network-only runs across bond-dimension ladders (no circuit stage)."""
    out = Path(cfg.out)
    curves: dict[str, dict[str, AggregateCurve]] = {}
    for chi in cfg.chi_list:
        spec = "-".join(str(c) for c in chi)
        chi_tag = f"chi_{spec}"
        curves[chi_tag] = {}
        for arm in ("ev", "modified_ev"):
            deltas = _run_realizations(cfg, out / chi_tag / arm, f"chi:{spec}:{arm}")
            curve = aggregate_histories(
                deltas, cfg.aggregate, {"arm": arm, "chi": list(chi)}
            )
            curve.to_csv(out / chi_tag / arm / "curves.csv", cfg)
            curves[chi_tag][arm] = curve
    return curves


def cmd_rainbow(cfg: ExperimentConfig) -> dict[float, AggregateCurve]:
    """Embedded-init pipeline on the inhomogeneous-field chain per h value.

    The Hamiltonian is deterministic given (sites, h), so realizations vary
    the network seed instead of the couplings.
    """
    cfg = cfg.override(model="rainbow")
    out = Path(cfg.out)
    curves: dict[float, AggregateCurve] = {}
    for h in cfg.rainbow_h:
        deltas = _run_realizations(cfg, out / f"h{h}", f"rainbow:{h}")
        curve = aggregate_histories(
            deltas,
            cfg.aggregate,
            {"arm": "eevqe", "h": h, "stage_boundary": cfg.mera_iters},
        )
        curve.to_csv(out / f"h{h}" / "curves.csv", cfg)
        curves[h] = curve
    return curves


def cmd_exact(cfg: ExperimentConfig) -> list[tuple[str, float]]:
    """Exact ground energies for the configured realization set -> exact.csv."""
    out = Path(cfg.out)
    rows = []
    hs = cfg.rainbow_h if cfg.model == "rainbow" else [None]
    for h in hs:
        for r in range(cfg.realizations if cfg.model != "rainbow" else 1):
            _, tag = _make_instance(cfg, r, h)
            _, e_exact = _load_or_store_instance(cfg, out, r, h)
            rows.append((tag, e_exact))
    lines = cfg.header_lines() + ["instance,energy"]
    lines += [f"{tag},{e!r}" for tag, e in rows]
    out.mkdir(parents=True, exist_ok=True)
    (out / "exact.csv").write_text("\n".join(lines) + "\n")
    return rows
