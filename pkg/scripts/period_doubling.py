"""Warm-started K1 sweep bracketing the period doublings on the unimodal branch."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

from _common import parse_config
from singular_dde import analysis, export
from singular_dde.model import ModelParams


@dataclass(frozen=True)
class Config:
    A: float = 1.5
    K2: float = 0.5
    eps: float = 0.05
    K1_lo: float = 1.5
    K1_hi: float = 4.0
    steps: int = 51
    t_first: float = 400.0
    t_warm: float = 200.0
    out: str = "out/period_doubling"


def doublings(result: analysis.SweepResult) -> list[tuple[float, float, int, int]]:
    """Brackets where the number of cycles per period changes."""
    good = [s for s in result.samples if s.metrics is not None and s.metrics.converged]
    return [(a.K1, b.K1, a.metrics.crossings_per_period, b.metrics.crossings_per_period)
            for a, b in zip(good, good[1:])
            if a.metrics.crossings_per_period != b.metrics.crossings_per_period]


def main(cfg: Config) -> None:
    params = ModelParams.from_ratio(cfg.A, K2=cfg.K2, eps=cfg.eps)
    settings = analysis.SweepSettings(t_first=cfg.t_first, t_warm=cfg.t_warm)
    up = analysis.sweep(params, cfg.K1_lo, cfg.K1_hi, cfg.steps, settings=settings)
    brackets = doublings(up)
    export.write_csv(Path(cfg.out) / "sweep.csv", export.SWEEP_COLUMNS,
                     export.sweep_rows([up]), asdict(cfg))
    export.write_json(Path(cfg.out) / "summary.json",
                      {"cycle_count_changes": brackets,
                       "modality_transitions": analysis.modality_transitions(up)}, asdict(cfg))
    for lo, hi, a, b in brackets:
        print(f"cycles per period {a} -> {b} between K1 = {lo:.4f} and {hi:.4f}")


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
