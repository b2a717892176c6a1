"""Adaptive explicit integration of the eps > 0 DDE with cubic Hermite dense output.

Accepted step times, values and slopes are stored in one array that starts
inside the tabulated history; delayed values come from Hermite interpolation
located by bisection.  A delayed time inside the step being taken is served
by extrapolating the last completed interval.

Near each minimum of a relaxation orbit u approaches -a1/c at a rate of order
1/eps and turns within a time of order eps**2, so a fixed step either wastes
work everywhere or overshoots into an advanced delay.  The step is therefore
adaptive, capped by ``StepControl.h_max``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .model import Kind, ModelParams, SingularSolution
from .profiles import profile_for

ADVANCE_TOL = 1e-12

OK, ADVANCED, UNDERRUN, NONFINITE, FULL, STEP_UNDERFLOW = 0, 1, 2, 3, 4, 5


class IntegrationError(RuntimeError):
    """Base class for failures while stepping; carries the offending time."""

    def __init__(self, message: str, t: float, alpha: float = math.nan):
        self.t = t
        self.alpha = alpha
        super().__init__(message)


class AdvancedDelay(IntegrationError):
    pass


class HistoryUnderrun(IntegrationError):
    pass


class NonFiniteState(IntegrationError):
    pass


def rhs(params: ModelParams, t: float, u_t: float, u_d1: float, u_d2: float) -> float:
    """u'(t) given the current and both delayed values."""
    return (-u_t - params.K1 * u_d1 - params.K2 * u_d2) / params.eps


def reference_period(params: ModelParams) -> float:
    return params.a1 * (1.0 + params.K1 + params.K2)


@dataclass(frozen=True)
class StepControl:
    """Adaptive step settings.

    ``h_max`` caps the step (default min(eps/10, T_ref/400)); the step shrinks
    below it wherever the local error estimate or a would-be advanced delayed
    argument demands it.
    """

    h_max: float | None = None
    rtol: float = 1e-9
    atol: float = 1e-11
    h_min_factor: float = 1e-9

    def resolve(self, params: ModelParams) -> float:
        if self.h_max is not None:
            if not self.h_max > 0:
                raise ValueError(f"step must be positive, got {self.h_max}")
            return float(self.h_max)
        return min(params.eps / 10.0, reference_period(params) / 400.0)


# History variants.  Each returns (u, u') at an array of times t <= 0.

@dataclass(frozen=True)
class Constant:
    u0: float = 0.0

    def evaluate(self, params, t):
        return np.full_like(t, self.u0), np.zeros_like(t)

    def max_abs(self, params) -> float:
        return abs(self.u0)


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float = 0.1
    period: float | None = None
    offset: float = 0.0

    def _period(self, params):
        if self.period is not None:
            return self.period
        return params.a1 * (1.0 + params.K1 + params.K2) / (1.0 + params.K2)

    def evaluate(self, params, t):
        w = 2.0 * math.pi / self._period(params)
        return (self.offset + self.amplitude * np.sin(w * t),
                self.amplitude * w * np.cos(w * t))

    def max_abs(self, params) -> float:
        return abs(self.offset) + abs(self.amplitude)


@dataclass(frozen=True)
class SingularWarmStart:
    """u(t) read off the rising legs of a singular profile.

    ``phase`` is the time into the period that t = 0 corresponds to; the
    default (None) puts t = 0 halfway up the first rising leg.
    """

    solution: SingularSolution
    phase: float | None = None

    def _segments(self, params):
        prof = profile_for(params, self.solution)
        segs = []
        for k in range(len(prof.mu) - 1):
            ta, tb = prof.t[k], prof.t[k + 1]
            if tb > ta:
                segs.append((ta, tb, prof.u[k], prof.u[k + 1]))
        return np.array(segs), prof.period_T

    def evaluate(self, params, t):
        segs, T = self._segments(params)
        phase = 0.5 * segs[0, 1] if self.phase is None else self.phase
        r = np.mod(t + phase, T)
        j = np.clip(np.searchsorted(segs[:, 1], r, side="right"), 0, len(segs) - 1)
        ta, tb, ua, ub = segs[j, 0], segs[j, 1], segs[j, 2], segs[j, 3]
        slope = (ub - ua) / (tb - ta)
        return ua + slope * (r - ta), slope

    def max_abs(self, params) -> float:
        prof = profile_for(params, self.solution)
        return float(np.max(np.abs(prof.u)))


@dataclass(frozen=True)
class Tabulated:
    """Samples of a past solution, shifted so that the last time is 0."""

    t: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    du: np.ndarray = field(repr=False)

    def evaluate(self, params, t):
        if t[0] < self.t[0] - 1e-12:
            raise HistoryUnderrun(
                f"tabulated history starts at {self.t[0]:.6g}, need {t[0]:.6g}", float(t[0]))
        return _hermite_eval(self.t, self.u, self.du, t)

    def max_abs(self, params) -> float:
        return float(np.max(np.abs(self.u)))


def _hermite_eval(ts, us, ds, t):
    """Cubic Hermite interpolation on a (not necessarily uniform) grid."""
    t = np.asarray(t, float)
    k = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2)
    h = ts[k + 1] - ts[k]
    s = (t - ts[k]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    u = h00 * us[k] + h10 * h * ds[k] + h01 * us[k + 1] + h11 * h * ds[k + 1]
    d00 = 6 * s * s - 6 * s
    d10 = 3 * s * s - 4 * s + 1
    d01 = -d00
    d11 = 3 * s * s - 2 * s
    du = (d00 * us[k] + d01 * us[k + 1]) / h + d10 * ds[k] + d11 * ds[k + 1]
    return u, du


@numba.njit(cache=True, nogil=True)
def _locate(T, last, s):
    """Index k with T[k] <= s < T[k+1], clamped to [0, last-1]; -1 before T[0]."""
    if s < T[0]:
        return -1
    if s >= T[last]:
        return last - 1
    lo, hi = 0, last
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if T[mid] <= s:
            lo = mid
        else:
            hi = mid
    return lo


@numba.njit(cache=True, nogil=True)
def _dense(T, U, F, last, s):
    """u(s) by cubic Hermite; past ``T[last]`` the last interval is extrapolated."""
    k = _locate(T, last, s)
    if k < 0:
        return 0.0, UNDERRUN
    h = T[k + 1] - T[k]
    th = (s - T[k]) / h
    h00 = (1 + 2 * th) * (1 - th) ** 2
    h10 = th * (1 - th) ** 2
    h01 = th * th * (3 - 2 * th)
    h11 = th * th * (th - 1)
    return h00 * U[k] + h10 * h * F[k] + h01 * U[k + 1] + h11 * h * F[k + 1], OK


@numba.njit(cache=True, nogil=True)
def _slope(T, U, F, last, t, u, eps, K1, K2, a1, a2, c):
    al1 = t - a1 - c * u
    al2 = t - a2 - c * u
    if al1 > t + ADVANCE_TOL:
        return 0.0, ADVANCED, al1
    v1, st = _dense(T, U, F, last, al1)
    if st != OK:
        return 0.0, st, al1
    v2, st = _dense(T, U, F, last, al2)
    if st != OK:
        return 0.0, st, al2
    return (-u - K1 * v1 - K2 * v2) / eps, OK, 0.0


@numba.njit(cache=True, nogil=True)
def _integrate(T, U, F, last, t_end, h, h_max, h_min, rtol, atol,
               eps, K1, K2, a1, a2, c):
    """Advance from index ``last`` until ``t_end`` or the arrays are full.

    Embedded 3(2) Bogacki-Shampine pair (four stages, first-same-as-last).
    A stage whose delayed argument is advanced, or that produces a
    non-finite value, rejects the step.  Returns (status, last, h, alpha).
    """
    cap = T.size
    if not math.isfinite(F[last]):
        f0, st, al = _slope(T, U, F, last, T[last], U[last], eps, K1, K2, a1, a2, c)
        if st != OK:
            return st, last, h, al
        F[last] = f0
    while T[last] < t_end:
        if last + 1 >= cap:
            return FULL, last, h, 0.0
        t = T[last]
        y = U[last]
        k1 = F[last]
        if t + (1.0 + 1e-6) * h >= t_end:
            # land exactly on t_end without leaving a sliver step behind
            h = t_end - t
        reject = False
        bad_status = OK
        bad_alpha = 0.0
        k2, st, al = _slope(T, U, F, last, t + 0.5 * h, y + 0.5 * h * k1, eps, K1, K2, a1, a2, c)
        if st == UNDERRUN:
            return st, last, h, al
        if st != OK:
            reject, bad_status, bad_alpha = True, st, al
        if not reject:
            k3, st, al = _slope(T, U, F, last, t + 0.75 * h, y + 0.75 * h * k2,
                                eps, K1, K2, a1, a2, c)
            if st == UNDERRUN:
                return st, last, h, al
            if st != OK:
                reject, bad_status, bad_alpha = True, st, al
        if not reject:
            yn = y + h * (2.0 / 9.0 * k1 + 1.0 / 3.0 * k2 + 4.0 / 9.0 * k3)
            if not math.isfinite(yn):
                reject, bad_status = True, NONFINITE
        if not reject:
            k4, st, al = _slope(T, U, F, last, t + h, yn, eps, K1, K2, a1, a2, c)
            if st == UNDERRUN:
                return st, last, h, al
            if st != OK:
                reject, bad_status, bad_alpha = True, st, al
        if not reject:
            err = abs(h * (-5.0 / 72.0 * k1 + 1.0 / 12.0 * k2 + 1.0 / 9.0 * k3 - 0.125 * k4))
            tol = atol + rtol * max(abs(y), abs(yn))
            if err <= tol:
                last += 1
                T[last] = t + h
                U[last] = yn
                F[last] = k4
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (tol / err) ** (1.0 / 3.0)))
                h = min(h_max, h * fac)
                continue
            h = h * max(0.1, 0.9 * (tol / err) ** (1.0 / 3.0))
        else:
            h = 0.25 * h
        if h < h_min:
            return bad_status if reject else STEP_UNDERFLOW, last, h, bad_alpha
    return OK, last, h, 0.0


@dataclass
class Trajectory:
    """Accepted steps from the start of the tabulated history to ``t_end``.

    ``T``, ``U``, ``F`` hold times, values and slopes; entries before index
    ``n_hist`` are the tabulated history.  Calling the trajectory evaluates the
    Hermite dense output at any time in its span.
    """

    params: ModelParams
    history: object
    step: "StepControl"
    n_hist: int
    T: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict)
    start: float = 0.0

    @property
    def t0(self) -> float:
        """Start of the integration; earlier steps may have been discarded."""
        return self.start

    @property
    def t_end(self) -> float:
        return float(self.T[-1])

    @property
    def t(self) -> np.ndarray:
        return self.T[self.n_hist:]

    @property
    def u(self) -> np.ndarray:
        return self.U[self.n_hist:]

    @property
    def du(self) -> np.ndarray:
        return self.F[self.n_hist:]

    @property
    def steps(self) -> int:
        return int(self.diagnostics.get("steps", self.T.size - 1 - self.n_hist))

    def __call__(self, s):
        return self.evaluate(s)[0]

    def evaluate(self, s):
        """(u, u') at arbitrary times inside the stored span."""
        return _hermite_eval(self.T, self.U, self.F, s)

    def residual(self, s) -> np.ndarray:
        """eps u' + u + K1 u(alpha1) + K2 u(alpha2) at times ``s``."""
        p = self.params
        u, du = self.evaluate(s)
        v1 = self(s - p.a1 - p.c * u)
        v2 = self(s - p.a2 - p.c * u)
        return p.eps * du + u + p.K1 * v1 + p.K2 * v2

    def tail(self, fraction: float):
        """(t, u) on the last ``fraction`` of [t0, t_end] at the accepted steps."""
        start = self.t_end - fraction * (self.t_end - self.t0)
        keep = self.T >= start
        keep[: self.n_hist] = False
        return self.T[keep], self.U[keep]

    def resample(self, dt: float, t_from: float | None = None):
        """(t, u) on a uniform grid of spacing ``dt``."""
        lo = self.t0 if t_from is None else max(t_from, float(self.T[0]))
        ts = lo + dt * np.arange(int(math.floor((self.t_end - lo) / dt)) + 1)
        return ts, self(ts)

    def sampled(self, stride: int = 10):
        return self.t[::stride], self.u[::stride]

    def as_history(self, span: float) -> Tabulated:
        """The last ``span`` time units, shifted to end at t = 0."""
        start = np.searchsorted(self.T, self.t_end - span, side="right") - 1
        start = max(0, int(start))
        ts = self.T[start:]
        return Tabulated(ts - ts[-1], self.U[start:].copy(), self.F[start:].copy())

    def min_delay_slope(self, window: float) -> float:
        """Smallest d(alpha)/dt = 1 - c u' over the last ``window`` time units.

        Both delayed arguments share this slope; it is positive when they
        advance monotonically.
        """
        keep = self.T >= self.t_end - window
        keep[: self.n_hist] = False
        return float(np.min(1.0 - self.params.c * self.F[keep])) if keep.any() else math.nan


def history_span(params: ModelParams, history) -> float:
    return (params.a2 + params.a1 + params.c * history.max_abs(params)
            + 2.0 * reference_period(params))


def integrate(params: ModelParams, history=None, t_end: float = 200.0,
              step: StepControl | None = None, keep: float | None = None) -> Trajectory:
    """Integrate from t = 0 to ``t_end``; raises an IntegrationError subclass on failure.

    With ``keep`` set, storage is bounded: steps older than the delay
    look-back window plus ``keep`` time units are discarded as the run
    proceeds, so only the last ``keep`` time units are guaranteed in the result.
    """
    if not params.eps > 0:
        raise ValueError("integration needs eps > 0")
    history = Sinusoid() if history is None else history
    step = step or StepControl()
    h_max = step.resolve(params)
    span = history_span(params, history)
    if isinstance(history, Tabulated):
        # keep the stored nodes: resampling would smear the steep layers
        span = min(span, -float(history.t[0]))
        th = history.t[np.searchsorted(history.t, -span, side="left"):]
        n_hist = th.size - 1
    else:
        n_hist = int(math.floor(span / h_max))
        th = -h_max * np.arange(n_hist, -1, -1, dtype=float)
        th[-1] = 0.0

    stored = t_end if keep is None else min(t_end, keep + span)
    cap = n_hist + 1 + max(1024, int(2.0 * stored / h_max))
    T = np.empty(cap)
    U = np.empty(cap)
    F = np.empty(cap)
    T[: n_hist + 1] = th
    U[: n_hist + 1], F[: n_hist + 1] = history.evaluate(params, th)
    # slope at t = 0 from the DDE; lookups inside the last history interval
    # use the history's own derivative while it is being computed
    f0, status, alpha = _slope(T, U, F, n_hist, 0.0, float(U[n_hist]), params.eps, params.K1,
                               params.K2, params.a1, params.a2, params.c)
    if status == ADVANCED:
        raise AdvancedDelay(f"delayed argument {alpha:.12g} ahead of t=0", 0.0, alpha)
    if status == UNDERRUN:
        raise HistoryUnderrun(f"delayed argument {alpha:.12g} precedes stored history "
                              f"(starts at {T[0]:.12g}) at t=0", 0.0, alpha)
    F[n_hist] = f0

    p = params
    last, h = n_hist, h_max
    h_min = step.h_min_factor * h_max
    dropped_steps = 0
    while True:
        status, last, h, alpha = _integrate(T, U, F, last, float(t_end), h, h_max, h_min,
                                            step.rtol, step.atol,
                                            p.eps, p.K1, p.K2, p.a1, p.a2, p.c)
        if status != FULL:
            break
        if keep is not None:
            lookback = p.a2 + p.a1 + 1.5 * p.c * float(np.max(np.abs(U[: last + 1])))
            drop = int(np.searchsorted(T[: last + 1], T[last] - lookback - keep)) - 1
            if drop > 0:
                n = last + 1 - drop
                T[:n], U[:n], F[:n] = T[drop:last + 1], U[drop:last + 1], F[drop:last + 1]
                dropped_steps += max(0, drop - n_hist)
                n_hist = max(0, n_hist - drop)
                last = n - 1
        if last + 1 > cap // 2:
            cap = 2 * cap
            T, U, F = (np.resize(x, cap) for x in (T, U, F))
    t_fail = float(T[last])
    if status == ADVANCED:
        raise AdvancedDelay(f"delayed argument {alpha:.12g} ahead of t={t_fail:.12g} "
                            f"with step {h:.3g}", t_fail, alpha)
    if status == UNDERRUN:
        raise HistoryUnderrun(f"delayed argument {alpha:.12g} precedes stored history "
                              f"(starts at {T[0]:.12g}) at t={t_fail:.12g}", t_fail, alpha)
    if status == NONFINITE:
        raise NonFiniteState(f"non-finite state at t={t_fail:.12g}", t_fail)
    if status == STEP_UNDERFLOW:
        raise IntegrationError(f"step size underflow ({h:.3g}) at t={t_fail:.12g}", t_fail)

    n = last + 1
    traj = Trajectory(params, history, step, n_hist, T[:n].copy(), U[:n].copy(), F[:n].copy(),
                      start=0.0)
    traj.diagnostics["steps"] = n - 1 - n_hist + dropped_steps
    window = min(t_end / 4.0, 4.0 * reference_period(params))
    traj.diagnostics["min_delay_slope"] = traj.min_delay_slope(window)
    return traj


def warm_start(sol: SingularSolution, phase: float | None = None) -> SingularWarmStart:
    if sol.kind not in (Kind.UNIMODAL, Kind.TYPE_I, Kind.TYPE_II):
        raise ValueError(sol.kind)
    return SingularWarmStart(sol, phase)
