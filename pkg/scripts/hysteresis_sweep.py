"""Up and down K1 sweeps at small eps; reports the bistability window and modality changes."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

from _common import parse_config
from singular_dde import analysis, export
from singular_dde.model import ModelParams


@dataclass(frozen=True)
class Config:
    A: float = 4.54
    K2: float = 0.5
    eps: float = 0.02
    K1_lo: float = 1.90
    K1_hi: float = 2.15
    steps: int = 60
    t_first: float = 200.0
    t_warm: float = 100.0
    out: str = "out/hysteresis_sweep"


def main(cfg: Config) -> None:
    params = ModelParams.from_ratio(cfg.A, K2=cfg.K2, eps=cfg.eps)
    settings = analysis.SweepSettings(t_first=cfg.t_first, t_warm=cfg.t_warm)
    up, down = analysis.sweep_both(params, cfg.K1_lo, cfg.K1_hi, cfg.steps, settings=settings)
    window = analysis.hysteresis_window(up, down)
    transitions = {r.direction.value: analysis.modality_transitions(r) for r in (up, down)}
    export.write_csv(Path(cfg.out) / "sweep.csv", export.SWEEP_COLUMNS,
                     export.sweep_rows([up, down]), asdict(cfg))
    export.write_json(Path(cfg.out) / "summary.json",
                      {"hysteresis_window": window, "jumps_up": up.jumps,
                       "jumps_down": down.jumps, "modality_transitions": transitions},
                      asdict(cfg))
    print(f"window: {window}")
    print(f"jumps up: {up.jumps}  down: {down.jumps}")
    print(f"modality transitions: {transitions}")


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
