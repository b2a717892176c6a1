"""Singular branch (K1, period) with folds, cusps and gaps for a range of delay ratios."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

from _common import parse_config
from singular_dde import branch, export
from singular_dde.model import ModelParams


@dataclass(frozen=True)
class Config:
    ratios: tuple = (1.5, 4.48, 4.54, 5.0, 6.0, 7 / 6)
    K2: float = 0.5
    n: int = 0
    k1_max: float = 10.0
    samples: int = 200
    out: str = "out/bifurcation_diagram"


def main(cfg: Config) -> None:
    for A in cfg.ratios:
        params = ModelParams.from_ratio(A, K2=cfg.K2)
        items, points = branch.assemble(params, cfg.n, k1_max=cfg.k1_max)
        legs = [x for x in items if isinstance(x, branch.Leg)]
        config = asdict(cfg) | {"A": A}
        stem = Path(cfg.out) / f"A{A:.4f}"
        export.write_csv(stem.with_suffix(".csv"), export.BRANCH_COLUMNS,
                         export.branch_rows(params, legs, cfg.samples, cfg.k1_max), config)
        export.write_json(stem.with_suffix(".json"), export.bifurcation_payload(points), config)
        print(f"A={A:.4f}: {len(legs)} legs, " + ", ".join(
            f"{p.kind.value} at K1={p.K1:.5f}" for p in points))


if __name__ == "__main__":
    main(parse_config(Config, __doc__))
