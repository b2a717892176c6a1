"""Piecewise-linear singular profiles, their inner parametrisations and a verifier.

A profile is a periodic curve mu -> (t(mu), u(mu)) that is affine between
integer values of mu.  A parametrisation is a periodic map eta -> (mu0, mu1, mu2)
that is affine between integer values of eta.  The singular-solution
conditions tie the two together: t(mu_i) must equal the delayed time of
t(mu0), and F(eta) = -u(mu0) - K1 u(mu1) - K2 u(mu2) must vanish on J* and be
non-positive on J-.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    DegenerateCoefficient,
    InvalidGain,
    Kind,
    KindMismatch,
    ModelParams,
    SingularSolution,
)

CONTINUITY_TOL = 1e-12
TOL_ID = 1e-9
STRICT_NEG = 1e-12


@dataclass(frozen=True)
class ParametricProfile:
    """One period of breakpoints; ``mu`` runs from 0 to ``period_mu``."""

    mu: np.ndarray
    t: np.ndarray
    u: np.ndarray
    period_mu: float
    period_T: float

    @property
    def breakpoints(self) -> list[tuple[float, float, float]]:
        return list(zip(self.mu.tolist(), self.t.tolist(), self.u.tolist()))

    def at(self, mu):
        """(t, u) at arbitrary mu, extended periodically."""
        mu = np.asarray(mu, dtype=float)
        k = np.floor(mu / self.period_mu)
        r = mu - k * self.period_mu
        t = np.interp(r, self.mu, self.t) + k * self.period_T
        u = np.interp(r, self.mu, self.u)
        return t, u

    def u_range(self) -> tuple[float, float]:
        return float(self.u.min()), float(self.u.max())

    def sample(self, per_piece: int = 50, periods: int = 1) -> np.ndarray:
        """Dense (t, u) points, shape (N, 2), covering ``periods`` periods."""
        pieces = int(round(self.period_mu)) * periods
        mu = np.linspace(0.0, pieces, pieces * per_piece + 1)
        t, u = self.at(mu)
        return np.column_stack([t, u])


def _profile(mu, t, u, period_mu, period_T) -> ParametricProfile:
    return ParametricProfile(np.asarray(mu, float), np.asarray(t, float),
                             np.asarray(u, float), float(period_mu), float(period_T))


def sawtooth_profile(params: ModelParams, n: int, T: float) -> ParametricProfile:
    if not T > 0:
        raise ValueError(f"period must be positive, got {T}")
    a1, c = params.a1, params.c
    lo = (-a1 + n * T) / c
    hi = (-a1 + (n + 1) * T) / c
    return _profile([0, 1, 2], [0.0, T, T], [lo, hi, lo], 2, T)


def _check_kind(sol: SingularSolution, kind: Kind):
    if sol.kind is not kind:
        raise KindMismatch(f"expected a {kind.value} solution, got {sol.kind.value}")


def typeI_profile(params: ModelParams, sol: SingularSolution) -> ParametricProfile:
    _check_kind(sol, Kind.TYPE_I)
    a1, c = params.a1, params.c
    T, T1, T2, th = sol.T, sol.T1, sol.T2, sol.theta
    base = -a1 + sol.n * T
    u = np.array([base, base + T1, base + (1 - th) * T1 - T2, base + (1 - th) * T1, base]) / c
    return _profile([0, 1, 2, 3, 4], [0.0, T1, T1, T, T], u, 4, T)


def typeII_profile(params: ModelParams, sol: SingularSolution) -> ParametricProfile:
    _check_kind(sol, Kind.TYPE_II)
    a1, c = params.a1, params.c
    T, T1, T2, th = sol.T, sol.T1, sol.T2, sol.theta
    base = -a1 + sol.n * T
    u = np.array([base, base + T1, base + T1 - th * T2, base + T - th * T2, base]) / c
    return _profile([0, 1, 2, 3, 4], [0.0, T1, T1, T, T], u, 4, T)


def profile_for(params: ModelParams, sol: SingularSolution) -> ParametricProfile:
    if sol.kind is Kind.UNIMODAL:
        return sawtooth_profile(params, sol.n, sol.T)
    if sol.kind is Kind.TYPE_I:
        return typeI_profile(params, sol)
    return typeII_profile(params, sol)


@dataclass(frozen=True)
class Parametrisation:
    """Node values of (mu0, mu1, ...) at eta = 0, 1, ..., period_eta.

    ``delays`` and ``gains`` describe the delayed terms that mu1, mu2, ...
    stand for, so the same evaluation path serves one- and two-delay cases.
    """

    nodes: np.ndarray
    period_eta: int
    period_mu: float
    jstar: tuple[tuple[int, int], ...]
    delays: tuple[float, ...]
    gains: tuple[float, ...]
    profile: ParametricProfile = field(repr=False)

    @property
    def jminus(self) -> tuple[tuple[int, int], ...]:
        """Complement of J* in one period, as closed intervals."""
        out, start = [], 0
        for lo, hi in sorted(self.jstar):
            if lo > start:
                out.append((start, lo))
            start = hi
        if start < self.period_eta:
            out.append((start, self.period_eta))
        return tuple(out)

    @property
    def pieces(self) -> list[tuple[int, int, np.ndarray, np.ndarray]]:
        """(eta_lo, eta_hi, mus at eta_lo, mus at eta_hi) for each unit piece."""
        return [(k, k + 1, self.nodes[k], self.nodes[k + 1]) for k in range(self.period_eta)]

    def mus(self, eta) -> np.ndarray:
        """Array of shape (..., 1 + number of delays)."""
        eta = np.asarray(eta, dtype=float)
        k = np.floor(eta / self.period_eta)
        r = eta - k * self.period_eta
        grid = np.arange(self.period_eta + 1, dtype=float)
        cols = [np.interp(r, grid, self.nodes[:, i]) + k * self.period_mu
                for i in range(self.nodes.shape[1])]
        return np.stack(cols, axis=-1)

    def F(self, eta) -> np.ndarray:
        mus = self.mus(eta)
        _, u0 = self.profile.at(mus[..., 0])
        out = -u0
        for i, g in enumerate(self.gains, start=1):
            _, ui = self.profile.at(mus[..., i])
            out = out - g * ui
        return out


def _tabulate(rows, period_eta, period_mu, jstar, delays, gains, profile) -> Parametrisation:
    """Evaluate each row at both ends of its unit interval and check continuity."""
    nodes = np.empty((period_eta + 1, len(rows[0](0.0))))
    for k, row in enumerate(rows):
        left = np.asarray(row(float(k)), float)
        right = np.asarray(row(float(k + 1)), float)
        if k == 0:
            nodes[0] = left
        elif np.max(np.abs(nodes[k] - left)) > CONTINUITY_TOL * max(1.0, np.max(np.abs(left))):
            raise AssertionError(f"parametrisation discontinuous at eta={k}: "
                                 f"{nodes[k].tolist()} vs {left.tolist()}")
        nodes[k + 1] = right
    wrap = nodes[0] + period_mu
    if np.max(np.abs(nodes[-1] - wrap)) > CONTINUITY_TOL * max(1.0, np.max(np.abs(wrap))):
        raise AssertionError(f"parametrisation not periodic: {nodes[-1].tolist()} vs {wrap.tolist()}")
    return Parametrisation(nodes, period_eta, float(period_mu), tuple(jstar),
                           tuple(delays), tuple(gains), profile)


def _require_unit(name: str, value: float):
    if not 0.0 < value < 1.0:
        raise DegenerateCoefficient(f"{name}={value!r} is outside (0, 1)")


def _unimodal_rows(n, m, K1, th):
    nm = n + m
    return [
        lambda e: (e, -2 * n + (e - 1) / K1, -2 * nm - 1 - th),
        lambda e: (1 + (e - 1) * th, -2 * n + (e - 1) * th, -2 * nm - 1 - th + (e - 1) * th),
        lambda e: (1 + th, -2 * n + th, -2 * nm - 1 + (e - 2)),
        lambda e: (1 + th + (e - 3) * (1 - th), -2 * n + th + (e - 3) * (1 - th),
                   -2 * nm + (e - 3) * (1 - th)),
        lambda e: (2, -2 * n + 1 + (1 - 1 / K1) * (e - 4), 2 * (1 - nm) - 1 - th),
    ]


def _typeI_rows(n, m, K1, K2, T1, T2, th):
    nm = n + m
    s11 = th * T1 / (T2 + th * T1)
    s12 = 1 - T2 / ((1 - th) * T1)
    s13 = 1 - 1 / (K1 * (1 - th))
    s14 = 1 - T2 / (K2 * (1 - th) * T1)
    for name, v in (("s11", s11), ("s12", s12), ("s13", s13), ("s14", s14)):
        _require_unit(name, v)
    r = T2 / T1
    return [
        lambda e: (e, -4 * n - 1 + s13 + (1 - s13) * e, -4 * nm - 3 - th),
        lambda e: (1 + (e - 1) * s11, -4 * n + (e - 1) * th, -4 * nm - 3 - th + (e - 1) * th),
        lambda e: (1 + s11, -4 * n + th, -4 * nm - 3 + (e - 2)),
        lambda e: (2 + (e - 4) * (1 - s11), -4 * n + th + (e - 3) * r, -4 * nm - 2 + (e - 3)),
        lambda e: (2, -4 * n + th + r, -4 * nm - 1 + (e - 4) * s14),
        lambda e: (e - 3, -4 * n + th + r, -4 * nm + (e - 6) * (1 - s14)),
        lambda e: (3 + (e - 6) * s12, -4 * n + 1 + (e - 7) * (1 - th - r),
                   -4 * nm + (1 - th - r) * (e - 6)),
        lambda e: (3 + s12, -4 * n + 1 + (e - 7), -4 * nm + 1 - th - r),
        lambda e: (4 + (e - 9) * (1 - s12), -4 * n + 2 + (e - 8), -4 * nm + 1 - th + r * (e - 9)),
        lambda e: (4, -4 * n + 3 + (e - 9) * s13, 4 * (1 - nm) - 3 - th),
    ]


def _typeII_rows(n, m, K1, K2, T, T1, T2, th):
    nm = n + m
    s21 = (T1 - th * T2) / (T - th * T2)
    s22 = (T - T2) / (T - th * T2)
    s23 = 1 - T1 / (K1 * (T1 + (1 - th) * T2))
    s24 = 1 - T2 / (K2 * (T1 + (1 - th) * T2))
    for name, v in (("s21", s21), ("s22", s22), ("s23", s23), ("s24", s24)):
        _require_unit(name, v)
    q = th * T2 / T1
    return [
        lambda e: (e, -4 * n + (e - 1) * (1 - s23), -4 * nm - 1 - th),
        lambda e: (e, -4 * n + (e - 1) * q, -4 * nm - 1 - th + th * (e - 1)),
        lambda e: (2, -4 * n + q, -4 * nm - 1 + (e - 2) * s24),
        lambda e: (e - 1, -4 * n + q, -4 * nm + (e - 4) * (1 - s24)),
        lambda e: (3 + (e - 4) * s21, -4 * n + 1 + (1 - q) * (e - 5), -4 * nm + (1 - q) * (e - 4)),
        lambda e: (3 + s21, -4 * n + 1 + (e - 5), -4 * nm + 1 - q),
        lambda e: (3 + s21 + (e - 6) * (s22 - s21), -4 * n + 2 + (e - 6) * th,
                   -4 * nm + 1 + q * (e - 7)),
        lambda e: (3 + s22, -4 * n + 2 + th, -4 * nm + 1 + (e - 7)),
        lambda e: (4 + (e - 9) * (1 - s22), -4 * n + 2 + th + (e - 8) * (1 - th),
                   -4 * nm + 2 + (1 - th) * (e - 8)),
        lambda e: (4, -4 * n + 3 + (e - 9) * s23, 4 * (1 - nm) - 1 - th),
    ]


def parametrisation(params: ModelParams, sol: SingularSolution) -> Parametrisation:
    n, m, K1, K2 = sol.n, sol.m, sol.K1, params.K2
    prof = profile_for(params, sol)
    delays, gains = (params.a1, params.a2), (K1, K2)
    if sol.kind is Kind.UNIMODAL:
        rows = _unimodal_rows(n, m, K1, sol.theta)
        return _tabulate(rows, 5, 2, [(0, 1)], delays, gains, prof)
    if sol.kind is Kind.TYPE_I:
        rows = _typeI_rows(n, m, K1, K2, sol.T1, sol.T2, sol.theta)
        return _tabulate(rows, 10, 4, [(0, 1), (5, 6)], delays, gains, prof)
    rows = _typeII_rows(n, m, K1, K2, sol.T, sol.T1, sol.T2, sol.theta)
    return _tabulate(rows, 10, 4, [(0, 1), (3, 4)], delays, gains, prof)


def evaluate_F(params: ModelParams, sol: SingularSolution, parm: Parametrisation, eta):
    """F at ``eta``; ``params``/``sol`` are accepted for symmetry with ``verify``."""
    return parm.F(eta)


@dataclass(frozen=True)
class VerificationReport:
    max_delay_identity_residual: float
    max_abs_F_on_Jstar: float
    max_F_on_Jminus: float
    max_F_on_Jminus_interior: float
    grid_points: int
    monotone: bool
    tol_F: float
    passed: bool


def _grid(period_eta: int, per_piece: int) -> np.ndarray:
    return np.linspace(0.0, float(period_eta), period_eta * per_piece + 1)


def _in_intervals(eta, intervals, shrink=0.0):
    mask = np.zeros_like(eta, dtype=bool)
    for lo, hi in intervals:
        mask |= (eta >= lo + shrink - 1e-12) & (eta <= hi - shrink + 1e-12)
    return mask


def verify_parametrisation(parm: Parametrisation, c: float, per_piece: int = 200) -> VerificationReport:
    eta = _grid(parm.period_eta, per_piece)
    mus = parm.mus(eta)
    t0, u0 = parm.profile.at(mus[:, 0])
    residual = 0.0
    for i, a in enumerate(parm.delays, start=1):
        ti, _ = parm.profile.at(mus[:, i])
        residual = max(residual, float(np.max(np.abs(ti - (t0 - a - c * u0)))))
    F = parm.F(eta)
    umax = float(np.max(np.abs(parm.profile.u)))
    tol_F = 1e-9 * (1.0 + umax * (1.0 + sum(parm.gains)) / c)

    on_star = _in_intervals(eta, parm.jstar)
    on_minus = ~on_star
    far = _in_intervals(eta, parm.jminus, shrink=1.0)
    max_star = float(np.max(np.abs(F[on_star])))
    max_minus = float(np.max(F[on_minus])) if on_minus.any() else -np.inf
    max_far = float(np.max(F[far])) if far.any() else -np.inf
    monotone = bool(np.all(np.diff(parm.nodes, axis=0) >= -CONTINUITY_TOL))

    passed = (residual <= TOL_ID and max_star <= tol_F and max_minus <= tol_F
              and max_far <= -STRICT_NEG and monotone)
    return VerificationReport(residual, max_star, max_minus, max_far, eta.size,
                              monotone, tol_F, passed)


def verify(params: ModelParams, sol: SingularSolution, per_piece: int = 200) -> VerificationReport:
    return verify_parametrisation(parametrisation(params, sol), params.c, per_piece)


def one_delay_period(a1: float, K: float, n: int) -> float:
    return a1 * (1.0 + K) / (1.0 + n * (1.0 + K))


def one_delay_solution(a1: float, c: float, K: float, n: int):
    """(T, Parametrisation, ParametricProfile) for u' = -u - K u(t - a1 - c u)."""
    if not K > 1:
        raise InvalidGain(f"one-delay construction needs K > 1, got {K}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    T = one_delay_period(a1, K, n)
    # K2 and a2 are placeholders; only a1 and c enter the sawtooth profile
    prof = sawtooth_profile(ModelParams(K1=K, a1=a1, a2=2 * a1, c=c), n, T)
    rows = [
        lambda e: (e, -2 * n - 1 + (e + K - 1) / K),
        lambda e: (e, -2 * n + (e - 1)),
        lambda e: (2, -2 * n + 1 + (e - 2) * (K - 1) / K),
    ]
    parm = _tabulate(rows, 3, 2, [(0, 1)], (a1,), (K,), prof)
    return T, parm, prof


def _vertices(p: ParametricProfile) -> np.ndarray:
    return np.column_stack([p.t, p.u])


def _distance_to_polyline(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Exact Euclidean distance from each point to the polyline through ``verts``."""
    a, b = verts[:-1], verts[1:]
    d = b - a
    len2 = np.einsum("ij,ij->i", d, d)
    rel = points[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.einsum("kij,ij->ki", rel, d) / len2
    s = np.clip(np.nan_to_num(s), 0.0, 1.0)
    foot = a[None, :, :] + s[..., None] * d[None, :, :]
    return np.min(np.linalg.norm(points[:, None, :] - foot, axis=-1), axis=1)


def _dense_points(verts: np.ndarray, per_piece: int) -> np.ndarray:
    s = np.linspace(0.0, 1.0, per_piece, endpoint=False)
    a, d = verts[:-1], np.diff(verts, axis=0)
    pts = (a[:, None, :] + s[None, :, None] * d[:, None, :]).reshape(-1, 2)
    return np.vstack([pts, verts[-1:]])


def hausdorff_distance(p: ParametricProfile, q: ParametricProfile, per_piece: int = 200) -> float:
    """Symmetric Hausdorff distance between one-period curves in (t, u).

    Points sampled along each curve are measured against the exact segments
    of the other, so the error is at most half the sampling spacing.
    """
    a, b = _vertices(p), _vertices(q)
    return float(max(_distance_to_polyline(_dense_points(a, per_piece), b).max(),
                     _distance_to_polyline(_dense_points(b, per_piece), a).max()))
