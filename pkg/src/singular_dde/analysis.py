"""Orbit metrics from trajectories, warm-started K1 sweeps and comparison to eps = 0."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks

from . import algebra
from .model import Kind, ModelParams, SingularSolution
from .simulator import (
    IntegrationError,
    StepControl,
    Trajectory,
    history_span,
    integrate,
)

CONVERGENCE_RTOL = 1e-3
PROMINENCE_FRACTION = 0.01
JUMP_TOL = 0.05
MAX_BLOCK = 6


class NoOscillation(RuntimeError):
    """The tail of the trajectory does not oscillate (decay to equilibrium)."""


@dataclass(frozen=True)
class OrbitMetrics:
    period: float
    amplitude: float
    modality: int
    converged: bool
    K1: float
    eps: float
    u_min: float = math.nan
    u_max: float = math.nan
    crossings_per_period: int = 1

    def as_dict(self) -> dict:
        return asdict(self)


def _upward_crossings(t: np.ndarray, u: np.ndarray, level: float) -> np.ndarray:
    i = np.nonzero((u[:-1] < level) & (u[1:] >= level))[0]
    w = (level - u[i]) / (u[i + 1] - u[i])
    return t[i] + w * (t[i + 1] - t[i])


def _cycle_features(t: np.ndarray, u: np.ndarray, cross: np.ndarray) -> np.ndarray:
    """Per crossing-to-crossing cycle: (span, max u, min u)."""
    idx = np.searchsorted(t, cross)
    feats = []
    for a, b, i, j in zip(cross, cross[1:], idx, idx[1:]):
        seg = u[i:j] if j > i else u[i - 1:i + 1]
        feats.append((b - a, float(seg.max()), float(seg.min())))
    return np.array(feats)


def _block_mismatch(feats: np.ndarray, k: int, scale: np.ndarray, count: int = 5) -> float:
    """Largest scaled change of the cycle features under a shift by k cycles."""
    diff = np.abs(feats[k:] - feats[:-k])[-count * k:]
    return float(np.max(diff / scale))


def extract(traj: Trajectory, tail_fraction: float = 0.5) -> OrbitMetrics:
    """Period, amplitude and modality of the trailing part of ``traj``.

    Cycles are delimited by upward crossings of the mid-level section and
    described by (span, max, min).  The period block is the smallest number
    k <= 6 of cycles after which those features repeat; this resolves orbits
    whose cycles alternate, including period doublings that leave the
    section spacing almost unchanged.  ``converged`` means the features repeat
    to a relative 1e-3 over the last five blocks.
    """
    t, u = traj.tail(tail_fraction)
    if t.size < 10:
        raise NoOscillation("trajectory tail too short")
    lo, hi = float(u.min()), float(u.max())
    scale = 1.0 + max(abs(lo), abs(hi))
    if hi - lo < 1e-6 * scale:
        raise NoOscillation(f"amplitude {hi - lo:.3g} is below resolution")
    cross = _upward_crossings(t, u, 0.5 * (lo + hi))
    if cross.size < 3:
        raise NoOscillation(f"only {cross.size} section crossings in the tail")

    feats = _cycle_features(t, u, cross)
    norm = np.array([float(np.mean(feats[:, 0])), hi - lo, hi - lo])
    mismatch = {k: _block_mismatch(feats, k, norm)
                for k in range(1, MAX_BLOCK + 1) if feats.shape[0] >= 2 * k + 1}
    if not mismatch:
        raise NoOscillation("too few cycles to measure a period")
    k = next((k for k in sorted(mismatch) if mismatch[k] < CONVERGENCE_RTOL), None)
    if k is None:
        # unsettled: prefer a single cycle unless a longer block is clearly better
        best = min(mismatch, key=mismatch.get)
        k = best if mismatch[best] < 0.5 * mismatch.get(1, math.inf) else 1
    spans = cross[k:] - cross[:-k]
    converged = mismatch[k] < CONVERGENCE_RTOL and spans.size >= 5
    period = float(np.mean(spans[-5:]))

    # one period ending at the last upward crossing; peaks never sit on it
    t_hi = cross[-1]
    t_lo = t_hi - period
    win = (t >= t_lo) & (t < t_hi)
    amp = float(u[win].max() - u[win].min()) if win.any() else hi - lo
    if amp < 1e-6 * scale:
        raise NoOscillation(f"last-period amplitude {amp:.3g} is below resolution")
    pad = (t >= t_lo - 0.5 * period) & (t <= t_hi + 0.25 * period)
    idx = np.nonzero(pad)[0]
    peaks, _ = find_peaks(u[idx], prominence=PROMINENCE_FRACTION * amp)
    pt = t[idx][peaks]
    modality = int(np.sum((pt >= t_lo) & (pt < t_hi)))

    p = traj.params
    return OrbitMetrics(period=period, amplitude=amp, modality=modality, converged=converged,
                        K1=p.K1, eps=p.eps, u_min=float(u[win].min()), u_max=float(u[win].max()),
                        crossings_per_period=k)


def compare_to_singular(metrics: OrbitMetrics, sol: SingularSolution,
                        params: ModelParams) -> dict:
    amp = algebra.amplitude(sol, params)
    expected_modality = 1 if sol.kind is Kind.UNIMODAL else 2
    return {
        "period_rel_err": abs(metrics.period - sol.T) / sol.T,
        "amp_rel_err": abs(metrics.amplitude - amp) / amp,
        "amp_below_singular": metrics.amplitude < amp,
        "modality_match": metrics.modality == expected_modality,
    }


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class SweepSample:
    K1: float
    metrics: OrbitMetrics | None
    error: str | None = None


@dataclass
class SweepResult:
    direction: Direction
    samples: list[SweepSample] = field(default_factory=list)
    jumps: list[tuple[float, float]] = field(default_factory=list)

    @property
    def K1(self) -> np.ndarray:
        return np.array([s.K1 for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s.metrics, name) if s.metrics else math.nan for s in self.samples])


@dataclass(frozen=True)
class SweepSettings:
    """Integration lengths for a sweep: the first run settles longer than warm starts.

    A run whose orbit has not converged is continued for another ``t_warm``
    up to ``max_extensions`` times; slow passages near folds need this.
    """

    t_first: float = 200.0
    t_warm: float = 100.0
    tail_fraction: float = 0.5
    max_extensions: int = 3
    step: StepControl = field(default_factory=StepControl)

    def keep(self, t_end: float) -> float:
        """Stored span covering the analysed tail and the next warm start."""
        return self.tail_fraction * t_end + 4.0 * MAX_BLOCK


def find_jumps(samples: list[SweepSample], tol: float = JUMP_TOL) -> list[tuple[float, float]]:
    out = []
    good = [s for s in samples if s.metrics is not None and s.metrics.converged]
    for a, b in zip(good, good[1:]):
        ta, tb = a.metrics.period, b.metrics.period
        if abs(tb - ta) / min(ta, tb) > tol:
            out.append((min(a.K1, b.K1), max(a.K1, b.K1)))
    return out


def sweep(params: ModelParams, K1_from: float, K1_to: float, steps: int,
          eps: float | None = None, settings: SweepSettings | None = None,
          history=None) -> SweepResult:
    """Warm-started sweep of K1 from ``K1_from`` to ``K1_to`` inclusive.

    Each run starts from the tail of the previous one; the first run uses
    ``history`` (default: the simulator's cold start).  A failing sample is
    recorded with its error and the next run restarts from the last good
    trajectory.
    """
    if steps < 2:
        raise ValueError("a sweep needs at least two steps")
    settings = settings or SweepSettings()
    base = params if eps is None else params.with_eps(eps)
    direction = Direction.UP if K1_to >= K1_from else Direction.DOWN
    result = SweepResult(direction)
    prev: Trajectory | None = None
    for K1 in np.linspace(K1_from, K1_to, steps):
        p = base.with_K1(float(K1))
        if prev is None:
            hist, t_end = history, settings.t_first
        else:
            span = history_span(p, prev.as_history(1.0))
            hist, t_end = prev.as_history(span), settings.t_warm
        try:
            traj = integrate(p, hist, t_end, settings.step, keep=settings.keep(t_end))
            metrics = extract(traj, settings.tail_fraction)
            for _ in range(settings.max_extensions):
                if metrics.converged:
                    break
                hist = traj.as_history(history_span(p, traj.as_history(1.0)))
                traj = integrate(p, hist, settings.t_warm, settings.step,
                                 keep=settings.keep(settings.t_warm))
                metrics = extract(traj, settings.tail_fraction)
        except (IntegrationError, NoOscillation) as exc:
            result.samples.append(SweepSample(float(K1), None, f"{type(exc).__name__}: {exc}"))
            continue
        result.samples.append(SweepSample(float(K1), metrics))
        prev = traj
    result.jumps = find_jumps(result.samples)
    return result


def sweep_both(params: ModelParams, K1_lo: float, K1_hi: float, steps: int,
               eps: float | None = None, settings: SweepSettings | None = None,
               workers: int = 2) -> tuple[SweepResult, SweepResult]:
    """Up and down sweeps over the same grid, run concurrently when ``workers`` > 1."""
    args_up = (params, K1_lo, K1_hi, steps, eps, settings)
    args_down = (params, K1_hi, K1_lo, steps, eps, settings)
    if workers <= 1:
        return sweep(*args_up), sweep(*args_down)
    with ThreadPoolExecutor(max_workers=2) as pool:
        up = pool.submit(sweep, *args_up)
        down = pool.submit(sweep, *args_down)
        return up.result(), down.result()


def _converged_periods(result: SweepResult) -> np.ndarray:
    ok = np.array([bool(s.metrics and s.metrics.converged) for s in result.samples])
    return np.where(ok, result.column("period"), math.nan)


def hysteresis_window(up: SweepResult, down: SweepResult,
                      tol: float = JUMP_TOL) -> tuple[float, float] | None:
    """K1 range over which the two sweeps settle on orbits of different period.

    Only converged samples count; a run still drifting after a fold is ignored.
    """
    T_up = dict(zip(up.K1.round(12), _converged_periods(up)))
    T_dn = dict(zip(down.K1.round(12), _converged_periods(down)))
    differ = [k for k in sorted(T_up) if k in T_dn
              and np.isfinite(T_up[k]) and np.isfinite(T_dn[k])
              and abs(T_up[k] - T_dn[k]) / min(T_up[k], T_dn[k]) > tol]
    if not differ:
        return None
    return float(min(differ)), float(max(differ))


def modality_transitions(result: SweepResult) -> list[tuple[float, float, int, int]]:
    """(K1_a, K1_b, modality_a, modality_b) wherever adjacent samples differ."""
    good = [s for s in result.samples if s.metrics is not None and s.metrics.converged]
    return [(a.K1, b.K1, a.metrics.modality, b.metrics.modality)
            for a, b in zip(good, good[1:]) if a.metrics.modality != b.metrics.modality]
