"""Closed-form quantities for the eps = 0 periodic solutions.

Everything here is a pure function of its arguments.  ``K1`` arguments, where
present, override ``params.K1`` so that callers can scan without rebuilding
parameter objects.
"""

from __future__ import annotations

import math

from .model import (
    BranchIndex,
    ConditionViolation,
    DegenerateIndex,
    Kind,
    ModelParams,
    SingularDenominator,
    SingularSolution,
)

DISC_TOL = 1e-14
DENOM_TOL = 1e-12
MARGINAL_TOL = 1e-9


def offset(params: ModelParams, idx: BranchIndex) -> float:
    """m - n(A-1); every leg quantity depends on (n, m) only through this."""
    return idx.m - idx.n * (params.A - 1.0)


def _beta(A: float, K2: float) -> float:
    return (A - 1.0) * (1.0 + K2) - K2


def g_nm(params: ModelParams, idx: BranchIndex, K1: float | None = None) -> float:
    """The quadratic whose sign decides the unimodal lower bound on theta."""
    K1 = params.K1 if K1 is None else K1
    A, K2 = params.A, params.K2
    d = offset(params, idx)
    return d * ((K1 + K2) ** 2 - 1.0) - K1 * _beta(A, K2) + K2 * (1.0 + K2) + (A - 1.0)


def h_nm(params: ModelParams, idx: BranchIndex, K1: float | None = None) -> float:
    K1 = params.K1 if K1 is None else K1
    A, K2 = params.A, params.K2
    d = offset(params, idx)
    return (d * (K1 + K2 + 1.0) * (K1 + 2.0 * K2 - 1.0) - K1 * _beta(A, K2)
            + K2 * (1.0 + K2) + (A - 1.0) * (1.0 - K2))


def l_nm(params: ModelParams, idx: BranchIndex) -> float:
    """K1 above which the unimodal bound theta < 1 holds."""
    d = offset(params, idx)
    if d + 1.0 <= 0.0:
        raise DegenerateIndex(
            f"m={idx.m} <= n(A-1)-1 for n={idx.n}: no unimodal leg exists")
    return (params.A - 1.0) / (d + 1.0) - (1.0 + params.K2)


def m_roots(params: ModelParams, idx: BranchIndex) -> tuple[float, ...]:
    """Real roots of g_nm in K1, ascending.

    Returns ``()`` when there are none, a 1-tuple in the linear case
    m = n(A-1), and a pair otherwise (a double root is reported twice).
    """
    A, K2 = params.A, params.K2
    d = offset(params, idx)
    beta = _beta(A, K2)
    if d == 0.0:
        if beta == 0.0:
            return ()
        root = (K2 * (1.0 + K2) + A - 1.0) / beta
        return (root,) if root > 0.0 else ()
    a = d
    b = 2.0 * d * K2 - beta
    c = d * (K2 * K2 - 1.0) + K2 * (1.0 + K2) + (A - 1.0)
    disc = b * b - 4.0 * a * c
    if disc < -DISC_TOL:
        return ()
    if abs(disc) <= DISC_TOL:
        r = -b / (2.0 * a)
        return (r, r)
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q / a
    r2 = c / q
    return (r1, r2) if r1 <= r2 else (r2, r1)


def m_zero(params: ModelParams, n: int) -> int:
    """The unique integer in (n(A-1)-1, n(A-1)]."""
    return math.floor(n * (params.A - 1.0))


def m_star(params: ModelParams, n: int) -> float:
    K2 = params.K2
    return n * (params.A - 1.0) + (params.A - 3.0 - K2) / (2.0 + K2)


def m_star_star(params: ModelParams, n: int) -> float:
    A, K2 = params.A, params.K2
    lin = 0.5 * ((A - 1.0) * ((1.0 + K2) ** 2 - K2) + K2)
    rad = (1.0 + (1.0 + K2) ** 2) * (((A - 1.0) * K2 + 1.0) ** 2 - 1.0)
    return n * (A - 1.0) + lin - 0.5 * math.sqrt(rad)


def m_dagger(params: ModelParams, n: int) -> float:
    A, K2 = params.A, params.K2
    return m_star(params, n) + min((1.0 + K2) / (2.0 + K2),
                                   1.0 - (A - 1.0) / ((2.0 + K2) * (3.0 + K2)))


def s_of_k1(idx: BranchIndex, K2: float, K1: float) -> float:
    """Common denominator of the bimodal period formulas."""
    return 1.0 - idx.m * (K1 - 1.0) + idx.n * (1.0 + K1 + K2)


def unimodal_period(params: ModelParams, idx: BranchIndex, K1: float | None = None) -> float:
    K1 = params.K1 if K1 is None else K1
    a1, a2, K2 = params.a1, params.a2, params.K2
    num = a1 * (1.0 + K1 + K2) + (a2 - a1) * K2
    return num / (1.0 + (idx.m + 1) * K2 + idx.n * (1.0 + K1 + K2))


def bimodal_period(params: ModelParams, idx: BranchIndex, K1: float | None = None) -> float:
    K1 = params.K1 if K1 is None else K1
    s = s_of_k1(idx, params.K2, K1)
    if abs(s) <= DENOM_TOL:
        raise SingularDenominator(f"s(K1)=0 at K1={K1} for n={idx.n}, m={idx.m}")
    a1, a2, K2 = params.a1, params.a2, params.K2
    return (a1 * (1.0 + K1 + K2) + (a2 - a1) * (1.0 - K1)) / s


def _lower_theta_bound(K1: float, K2: float) -> float:
    den = K1 + K2 - 1.0
    return K2 / den if den > 0.0 else math.inf


def _div(num: float, den: float) -> float:
    if den == 0.0:
        return math.copysign(math.inf, num) if num != 0.0 else math.nan
    return num / den


def evaluate(params: ModelParams, idx: BranchIndex, kind: Kind,
             K1: float | None = None) -> tuple[dict, dict]:
    """Return ``(quantities, margins)`` without judging them.

    ``quantities`` has T, T1, T2, theta; ``margins`` maps each strict
    inequality of the corresponding existence result to a value that is
    positive exactly when the inequality holds.
    """
    K1 = params.K1 if K1 is None else K1
    K2, a1, a2 = params.K2, params.a1, params.a2
    gap = a2 - a1
    m = idx.m
    nan_safe = lambda x: -math.inf if math.isnan(x) else x  # noqa: E731

    if kind is Kind.UNIMODAL:
        T = unimodal_period(params, idx, K1)
        theta = gap / T - m
        q = {"T": T, "T1": T, "T2": 0.0, "theta": theta}
        margins = {
            "K1>1": K1 - 1.0,
            "T>0": T,
            "theta.lower": theta - _lower_theta_bound(K1, K2),
            "theta<1": 1.0 - theta,
        }
        return q, {k: nan_safe(v) for k, v in margins.items()}

    s = s_of_k1(idx, K2, K1)
    if abs(s) <= DENOM_TOL:
        raise SingularDenominator(f"s(K1)=0 at K1={K1} for n={idx.n}, m={m}")
    T = (a1 * (1.0 + K1 + K2) + gap * (1.0 - K1)) / s

    if kind is Kind.TYPE_I:
        T2 = a1 * g_nm(params, idx, K1) / s
        T1 = T - T2
        theta = _div(gap - m * T - T2, T1)
        q = {"T": T, "T1": T1, "T2": T2, "theta": theta}
        lower = (K2 / (K1 - 1.0)) * T2 if K1 > 1.0 else math.inf
        margins = {
            "K1>1": K1 - 1.0,
            "T>0": T,
            "T2>0": T2,
            "theta>0": theta,
            "theta<1-1/K1": 1.0 - 1.0 / K1 - theta,
            "tIthbds.lower": theta * T1 - lower,
            "tIthbds.upper": T1 - T2 / K2 - theta * T1,
            # F at the eighth node of the parametrisation must be negative
            "F8<0": (K1 + K2 - 1.0) / (2.0 * K1 + K2 - 1.0) - _div(T2, T1) - theta,
        }
        return q, {k: nan_safe(v) for k, v in margins.items()}

    if kind is Kind.TYPE_II:
        T2 = a1 * h_nm(params, idx, K1) / s
        T1 = T - T2
        theta = _div(gap - m * T, T2)
        q = {"T": T, "T1": T1, "T2": T2, "theta": theta}
        ratio = _div(T1, T2)
        margins = {
            "K1+K2>1": K1 + K2 - 1.0,
            "T>0": T,
            "T2>0": T2,
            "theta>0": theta,
            "theta<1": 1.0 - theta,
            "theta<T1/T2+1-1/K2": ratio + 1.0 - 1.0 / K2 - theta,
        }
        # F at the sixth and eighth nodes of the parametrisation must be negative;
        # F(6) - F(8) = (K1 - 1) theta T2, so each bound binds on one side of K1 = 1
        den = 2.0 * K1 + K2 - 1.0
        margins["F6<0"] = ((1.0 - K1 / den) * ratio - theta) if den > 0.0 else -math.inf
        margins["F8<0"] = (1.0 - 1.0 / (K1 + K2)) * ratio - theta
        if K1 < 1.0:
            margins["s23"] = 1.0 - (1.0 - K1) / K1 * ratio - theta
        return q, {k: nan_safe(v) for k, v in margins.items()}

    raise ValueError(f"unknown kind {kind!r}")


def construct(params: ModelParams, idx: BranchIndex, kind: Kind,
              K1: float | None = None) -> SingularSolution:
    """Build the singular solution of the given kind or raise ConditionViolation.

    All inequalities are strict: a margin ``<= 0`` is a violation.  Conditions
    holding with margin below ``MARGINAL_TOL`` are listed in ``marginal``.
    """
    K1 = params.K1 if K1 is None else K1
    q, margins = evaluate(params, idx, kind, K1)
    violated = {k: v for k, v in margins.items() if not v > 0.0}
    if violated:
        raise ConditionViolation(kind, violated, margins)
    notes = ()
    if idx.n > 0 and offset(params, idx) == 0.0:
        notes = ("linear-G: m = n(A-1) with n > 0; leg existence not asserted",)
    return SingularSolution(
        kind=kind, index=idx, T=q["T"], T1=q["T1"], T2=q["T2"], theta=q["theta"], K1=K1,
        margins=margins,
        marginal=tuple(k for k, v in margins.items() if v < MARGINAL_TOL),
        notes=notes,
    )


def try_construct(params: ModelParams, idx: BranchIndex, kind: Kind,
                  K1: float | None = None) -> SingularSolution | None:
    try:
        return construct(params, idx, kind, K1)
    except (ConditionViolation, SingularDenominator):
        return None


def amplitude(sol: SingularSolution, params: ModelParams) -> float:
    """Max minus min of the profile over one period."""
    if sol.kind is Kind.UNIMODAL:
        return sol.T / params.c
    if sol.kind is Kind.TYPE_I:
        return sol.T1 / params.c
    return (sol.T1 + (1.0 - sol.theta) * sol.T2) / params.c
