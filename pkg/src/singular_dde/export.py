"""Deterministic CSV/JSON writers shared by the command line and scripts.

Every file starts with a ``# config: {...}`` line holding the resolved
configuration; floats are written with 17 significant digits so that equal
inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .analysis import OrbitMetrics, SweepResult
from .branch import BifurcationPoint, Leg, sample_leg
from .model import ModelParams
from .profiles import ParametricProfile, Parametrisation, VerificationReport
from .simulator import Trajectory

FLOAT_FORMAT = "{:.17g}"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return FLOAT_FORMAT.format(float(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        # JSON has no inf/nan; strings keep the file valid and lossless
        return x if math.isfinite(x) else str(x)
    if hasattr(x, "value"):
        return x.value
    return x


def header_line(config: dict) -> str:
    return "# config: " + json.dumps(_jsonable(config), sort_keys=True)


def write_csv(path: Path | str, columns: Sequence[str], rows: Iterable[Sequence],
              config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(header_line(config) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path: Path | str, payload, config: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config": _jsonable(config), "result": _jsonable(payload)}
    text = json.dumps(body, indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


def read_csv(path: Path | str) -> tuple[dict, list[dict]]:
    """Inverse of ``write_csv``: (config, rows as dicts of strings)."""
    with Path(path).open() as fh:
        first = fh.readline()
        config = json.loads(first.removeprefix("# config: "))
        return config, list(csv.DictReader(fh))


PROFILE_COLUMNS = ("mu", "t", "u")
PARAMETRISATION_COLUMNS = ("eta", "mu0", "mu1", "mu2", "F")
BRANCH_COLUMNS = ("kind", "n", "m", "K1", "T", "T1", "T2", "theta", "amplitude", "period")
TRAJECTORY_COLUMNS = ("t", "u")
METRICS_KEYS = ("K1", "eps", "period", "amplitude", "modality", "converged")
SWEEP_COLUMNS = ("direction", "K1", "period", "amplitude", "modality", "converged")


def profile_rows(profile: ParametricProfile) -> list[tuple]:
    return list(zip(profile.mu, profile.t, profile.u))


def parametrisation_rows(parm: Parametrisation, per_piece: int = 20) -> list[tuple]:
    eta = np.linspace(0.0, float(parm.period_eta), parm.period_eta * per_piece + 1)
    mus = parm.mus(eta)
    F = parm.F(eta)
    rows = []
    for i, e in enumerate(eta):
        mu = list(mus[i]) + [math.nan] * (3 - mus.shape[1])
        rows.append((e, *mu[:3], F[i]))
    return rows


def branch_rows(params: ModelParams, legs: Iterable[Leg], samples: int = 400,
                k1_max: float = 50.0) -> list[tuple]:
    rows = []
    for leg in legs:
        for r in sample_leg(params, leg, samples, k1_max):
            rows.append(tuple(r[c] for c in BRANCH_COLUMNS))
    return rows


def bifurcation_payload(points: Iterable[BifurcationPoint]) -> list[dict]:
    return [p.as_dict() for p in points]


def trajectory_rows(traj: Trajectory, stride: int = 10) -> list[tuple]:
    t, u = traj.sampled(stride)
    return list(zip(t, u))


def metrics_payload(m: OrbitMetrics) -> dict:
    return {k: getattr(m, k) for k in METRICS_KEYS} | {
        "u_min": m.u_min, "u_max": m.u_max, "crossings_per_period": m.crossings_per_period}


def sweep_rows(results: Iterable[SweepResult]) -> list[tuple]:
    rows = []
    for res in results:
        for s in res.samples:
            m = s.metrics
            if m is None:
                rows.append((res.direction.value, s.K1, math.nan, math.nan, 0, False))
            else:
                rows.append((res.direction.value, s.K1, m.period, m.amplitude,
                             m.modality, m.converged))
    return rows


def report_payload(report: VerificationReport) -> dict:
    return {
        "max_delay_identity_residual": report.max_delay_identity_residual,
        "max_abs_F_on_Jstar": report.max_abs_F_on_Jstar,
        "max_F_on_Jminus": report.max_F_on_Jminus,
        "max_F_on_Jminus_interior": report.max_F_on_Jminus_interior,
        "grid_points": report.grid_points,
        "monotone": report.monotone,
        "tol_F": report.tol_F,
        "pass": report.passed,
    }
