"""Per-iteration optimization traces with reproducibility metadata."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["HistoryRow", "RunHistory", "concat_histories"]


@dataclass(frozen=True)
class HistoryRow:
    iteration: int
    stage: str  # "mera" | "vqe" | optimizer tag
    energy_shifted: float
    energy: float  # unshifted
    delta: float  # (energy - e_exact) / |e_exact|


@dataclass
class RunHistory:
    """Energy/relative-error trace of one optimization run.

    ``delta`` rows compare the unshifted energy against the cached exact
    ground energy: (E - E_exact) / |E_exact|, which is non-negative up to
    eigensolver slack by the variational bound.  ``meta`` carries the seeds
    and configuration snapshot needed to reproduce the run, and optionally
    the final parameter vector of a circuit optimization.
    """

    rows: list[HistoryRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    final_theta: np.ndarray | None = None

    @property
    def e_exact(self) -> float:
        return float(self.meta["e_exact"])

    def append(self, iteration: int, stage: str, shifted: float, shift: float) -> None:
        unshifted = shifted + shift
        delta = (unshifted - self.e_exact) / abs(self.e_exact)
        self.rows.append(HistoryRow(iteration, stage, shifted, unshifted, delta))

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.rows])

    def shifted_energies(self) -> np.ndarray:
        return np.array([r.energy_shifted for r in self.rows])

    def deltas(self) -> np.ndarray:
        return np.array([r.delta for r in self.rows])

    def final_delta(self) -> float:
        return self.rows[-1].delta

    def to_csv(self, path) -> None:
        """Write rows as CSV (iteration, stage, energy, delta).

        The resolved metadata is embedded as comment lines so a file pins the
        run that produced it; energies are the unshifted ones.
        """
        lines = []
        for key in sorted(self.meta):
            val = self.meta[key]
            if isinstance(val, np.generic):  # keep reprs numpy-version independent
                val = val.item()
            lines.append(f"# {key} = {val!r}")
        lines.append("iteration,stage,energy,delta")
        for r in self.rows:
            lines.append(f"{r.iteration},{r.stage},{float(r.energy)!r},{float(r.delta)!r}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")


def concat_histories(first: RunHistory, second: RunHistory) -> RunHistory:
    """Join two stage histories into one continuously numbered trace.

    The second history's iteration i is renumbered to (last iteration of the
    first) + i; its row 0 is dropped because it reports the same state as the
    first stage's final row (exactly so for noiseless embedding).  The stage
    column keeps the boundary observable.
    """
    if not first.rows or not second.rows:
        return RunHistory(list(first.rows) + list(second.rows), dict(first.meta))
    base = first.rows[-1].iteration
    rows = list(first.rows)
    for r in second.rows[1:]:
        rows.append(HistoryRow(base + r.iteration, r.stage, r.energy_shifted, r.energy, r.delta))
    meta = dict(first.meta)
    meta.update({f"second_{k}": v for k, v in second.meta.items()})
    meta["stage_boundary"] = base
    return RunHistory(rows, meta, second.final_theta)
