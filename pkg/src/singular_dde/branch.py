"""Legs of singular solutions in K1 and their assembly into branches.

A leg is a maximal open K1-interval on which one kind of singular solution
with fixed (n, m) exists.  Unimodal legs come from closed-form bounds; bimodal
legs are located by scanning the construction predicate and bisecting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import algebra
from .model import BranchIndex, DegenerateIndex, Kind, ModelParams

K1_CAP = 50.0
SCAN_STEP = 0.01
EQUAL_TOL = 1e-12
MATCH_TOL = 1e-6
PROBE_OFFSETS = (1e-7, 1e-5, 1e-3)


class BoundaryKind(str, enum.Enum):
    FOLD_AT_M = "FoldAtM"
    FOLD_AT_L = "FoldAtL"
    COINCIDENCE_NO_FOLD = "CoincidenceNoFold"
    CONDITION = "ConditionBoundary"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class Boundary:
    kind: BoundaryKind
    condition: str | None = None
    partner: tuple[str, int, int] | None = None

    def __str__(self):
        return f"{self.kind.value}({self.condition})" if self.condition else self.kind.value


UNBOUNDED = Boundary(BoundaryKind.UNBOUNDED)


@dataclass(frozen=True)
class Leg:
    kind: Kind
    index: BranchIndex
    k1_lo: float
    k1_hi: float
    lo_boundary: Boundary
    hi_boundary: Boundary

    @property
    def n(self) -> int:
        return self.index.n

    @property
    def m(self) -> int:
        return self.index.m

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.k1_hi)

    def midpoint(self, cap: float = K1_CAP) -> float:
        hi = self.k1_hi if self.bounded else max(cap, 2.0 * self.k1_lo + 1.0)
        return 0.5 * (self.k1_lo + hi)

    def label(self) -> tuple[str, int, int]:
        return (self.kind.value, self.n, self.m)


@dataclass(frozen=True)
class Gap:
    """K1 interval between two legs on which nothing is constructed."""

    k1_lo: float
    k1_hi: float


class BifurcationKind(str, enum.Enum):
    FOLD = "Fold"
    CUSP = "Cusp"
    COINCIDENCE = "Coincidence"


@dataclass(frozen=True)
class BifurcationPoint:
    kind: BifurcationKind
    K1: float
    participants: tuple[tuple[str, int, int], ...]

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "K1": self.K1,
                "participants": [list(p) for p in self.participants]}


class LTransition(str, enum.Enum):
    FOLD_CASE_I = "FoldCaseI"
    NO_FOLD_CASE_II = "NoFoldCaseII"
    DISJOINT_CASE_III = "DisjointCaseIII"


def _exists(params, idx, kind, K1) -> bool:
    if K1 <= 0.0:
        return False
    return algebra.try_construct(params, idx, kind, K1) is not None


def _side(params, idx, kind, K1) -> str | None:
    """Which side of K1 a leg of ``kind`` lives on: "below", "above" or None."""
    for off in PROBE_OFFSETS:
        d = off * max(1.0, abs(K1))
        below = _exists(params, idx, kind, K1 - d)
        above = _exists(params, idx, kind, K1 + d)
        if below != above:
            return "below" if below else "above"
    return None


def _label(params, partner_idx, partner_kind, K1, own_side, fold_kind) -> Boundary | None:
    """Fold if the partner leg sits on the same side of K1 as ours, coincidence if opposite."""
    if partner_idx is None:
        return None
    side = _side(params, partner_idx, partner_kind, K1)
    if side is None:
        return None
    partner = (partner_kind.value, partner_idx.n, partner_idx.m)
    if side == own_side:
        return Boundary(fold_kind, partner=partner)
    return Boundary(BoundaryKind.COINCIDENCE_NO_FOLD, partner=partner)


def _next_index(idx: BranchIndex, dm: int) -> BranchIndex | None:
    m = idx.m + dm
    return BranchIndex(idx.n, m) if m >= 0 else None


def _unimodal_boundary(params, idx, K1, own_side, source: str) -> Boundary:
    if source == "M":
        b = _label(params, idx, Kind.TYPE_I, K1, own_side, BoundaryKind.FOLD_AT_M)
        return b or Boundary(BoundaryKind.CONDITION, "theta.lower")
    if source == "L":
        b = _label(params, _next_index(idx, 1), Kind.TYPE_II, K1, own_side, BoundaryKind.FOLD_AT_L)
        return b or Boundary(BoundaryKind.CONDITION, "theta<1")
    b = _label(params, _next_index(idx, 1), Kind.TYPE_II, K1, own_side, BoundaryKind.FOLD_AT_L)
    return b or Boundary(BoundaryKind.CONDITION, "K1>1")


def unimodal_legs(params: ModelParams, n: int) -> list[Leg]:
    """Unimodal legs for every admissible m, ascending in m."""
    A, K2 = params.A, params.K2
    m0 = algebra.m_zero(params, n)
    mstar = algebra.m_star(params, n)
    mss = algebra.m_star_star(params, n)
    nA = n * (A - 1.0)
    legs = []
    for m in range(max(m0, 0), math.floor(mss) + 2):
        idx = BranchIndex(n, m)
        roots = algebra.m_roots(params, idx)
        if m == m0:
            if m == nA and not A > 1.0 + K2 / (1.0 + K2):
                continue
            L = algebra.l_nm(params, idx)
            Mp = roots[-1] if roots else -math.inf
            cands = [(L, "L"), (Mp, "M"), (1.0, "one")]
            lo, src = max(cands, key=lambda c: c[0])
            legs.append(Leg(Kind.UNIMODAL, idx, lo, math.inf,
                            _unimodal_boundary(params, idx, lo, "above", src), UNBOUNDED))
            continue
        if len(roots) < 2:
            continue
        Mm, Mp = roots
        if abs(m - mstar) <= EQUAL_TOL:
            lo, src = 1.0, "one"
        elif m < mstar:
            lo, src = algebra.l_nm(params, idx), "L"
        elif m < mss and A > 1.0 + K2 / (1.0 + K2):
            lo, src = Mm, "M"
        else:
            continue
        if not lo < Mp:
            continue
        legs.append(Leg(Kind.UNIMODAL, idx, lo, Mp,
                        _unimodal_boundary(params, idx, lo, "above", src),
                        _unimodal_boundary(params, idx, Mp, "below", "M")))
    return legs


def _seed_points(params, idx, kind) -> list[float]:
    """Analytic candidates for leg endpoints; scanning near them catches thin legs."""
    pts = list(algebra.m_roots(params, idx))
    if kind is Kind.TYPE_II and idx.m >= 1:
        try:
            pts.append(algebra.l_nm(params, BranchIndex(idx.n, idx.m - 1)))
        except DegenerateIndex:
            pass
    out = []
    for p in pts:
        for off in (1e-9, 1e-6, 1e-3):
            d = off * max(1.0, abs(p))
            out += [p - d, p + d]
    return out


def _bisect(params, idx, kind, good: float, bad: float) -> float:
    """Shrink [good, bad] around the existence boundary; returns the limit point."""
    for _ in range(200):
        if abs(good - bad) <= EQUAL_TOL * max(1.0, abs(good)):
            break
        mid = 0.5 * (good + bad)
        if mid == good or mid == bad:
            break
        if _exists(params, idx, kind, mid):
            good = mid
        else:
            bad = mid
    return 0.5 * (good + bad)


def _tight_condition(params, idx, kind, K1_inside: float) -> str:
    """The condition closest to failing just inside a leg endpoint."""
    try:
        _, margins = algebra.evaluate(params, idx, kind, K1_inside)
    except ZeroDivisionError:
        return "s(K1)!=0"
    scale = {k: abs(v) for k, v in margins.items()}
    return min(scale, key=scale.get)


def _bimodal_boundary(params, idx, kind, K1, own_side) -> tuple[float, Boundary]:
    """Label an endpoint found by bisection, snapping it onto an analytic root if it matches."""
    inside = K1 + (1e-9 if own_side == "above" else -1e-9) * max(1.0, abs(K1))
    tight = _tight_condition(params, idx, kind, inside)
    if kind is Kind.TYPE_I:
        partner, fold = idx, BoundaryKind.FOLD_AT_M
        targets = list(algebra.m_roots(params, idx))
    elif idx.m >= 1:
        partner, fold = BranchIndex(idx.n, idx.m - 1), BoundaryKind.FOLD_AT_L
        try:
            targets = [algebra.l_nm(params, partner)]
        except DegenerateIndex:
            targets = []
    else:
        targets = []
    for r in targets:
        if abs(K1 - r) <= MATCH_TOL * max(1.0, abs(r)):
            b = _label(params, partner, Kind.UNIMODAL, r, own_side, fold)
            if b is not None:
                return r, b
    return K1, Boundary(BoundaryKind.CONDITION, tight)


def bimodal_legs(params: ModelParams, n: int, m: int, kind: Kind,
                 k1_max: float = K1_CAP, step: float = SCAN_STEP) -> list[Leg]:
    """All legs of a bimodal kind in [max(1-K2, 1e-3), k1_max], ascending."""
    kind = Kind.parse(kind) if isinstance(kind, str) else kind
    if kind is Kind.UNIMODAL:
        raise ValueError("bimodal_legs needs TYPE_I or TYPE_II")
    idx = BranchIndex(n, m)
    lo = max(1.0 - params.K2, 1e-3)
    grid = np.arange(lo, k1_max + 0.5 * step, step)
    extra = [p for p in _seed_points(params, idx, kind) if lo < p < k1_max]
    grid = np.unique(np.concatenate([grid, extra]))
    alive = np.array([_exists(params, idx, kind, float(k)) for k in grid])

    legs = []
    i = 0
    while i < grid.size:
        if not alive[i]:
            i += 1
            continue
        j = i
        while j + 1 < grid.size and alive[j + 1]:
            j += 1
        if i == 0:
            k_lo = float(grid[0])
            lo_b = Boundary(BoundaryKind.CONDITION, "scan.lower")
        else:
            k_lo = _bisect(params, idx, kind, float(grid[i]), float(grid[i - 1]))
            k_lo, lo_b = _bimodal_boundary(params, idx, kind, k_lo, "above")
        if j == grid.size - 1:
            k_hi, hi_b = math.inf, UNBOUNDED
        else:
            k_hi = _bisect(params, idx, kind, float(grid[j]), float(grid[j + 1]))
            k_hi, hi_b = _bimodal_boundary(params, idx, kind, k_hi, "below")
        legs.append(Leg(kind, idx, k_lo, k_hi, lo_b, hi_b))
        i = j + 1
    return legs


def bimodal_leg(params: ModelParams, n: int, m: int, kind: Kind,
                k1_max: float = K1_CAP, step: float = SCAN_STEP) -> Leg | None:
    """The first (lowest-K1) leg, or None; see ``bimodal_legs`` for all of them."""
    legs = bimodal_legs(params, n, m, kind, k1_max, step)
    return legs[0] if legs else None


def classify_L_transition(params: ModelParams, n: int, p: int) -> LTransition | None:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    K2 = params.K2
    m0 = algebra.m_zero(params, n)
    ms = algebra.m_star(params, n)
    f = (1.0 + K2) / (2.0 + K2)
    if m0 + 1 <= p < ms + f:
        return LTransition.FOLD_CASE_I
    if ms + f < p <= ms + 1:
        return LTransition.NO_FOLD_CASE_II
    upper = min(algebra.m_star_star(params, n) + 1, (n + 0.5) * (params.A - 1.0))
    if ms + 1 < p < upper:
        return LTransition.DISJOINT_CASE_III
    return None


def cusp_locus(K2: float, n: int, m: int) -> tuple[float, float]:
    """(A, K1) at which the fold at L_{n,m-1} degenerates."""
    if m == n:
        raise DegenerateIndex(f"cusp locus undefined for m = n = {m}")
    A = 1.0 + (1.0 + m * (2.0 + K2)) / (1.0 + n * (2.0 + K2))
    K1 = 1.0 + (1.0 + n * (2.0 + K2)) / (m - n)
    return A, K1


def _max_m(params: ModelParams, n: int) -> int:
    return max(math.floor(algebra.m_star_star(params, n)) + 1, algebra.m_zero(params, n) + 1)


def _clip(leg: Leg, k1_max: float) -> Leg | None:
    if leg.k1_lo >= k1_max:
        return None
    return leg


def _chain_gaps(chain: list[Leg]) -> list:
    out: list = []
    for leg in chain:
        if out:
            prev = out[-1]
            ends_p = [prev.k1_lo, prev.k1_hi]
            ends_c = [leg.k1_lo, leg.k1_hi]
            pairs = [(abs(a - b), a, b) for a in ends_p for b in ends_c
                     if math.isfinite(a) and math.isfinite(b)]
            if pairs:
                dist, a, b = min(pairs)
                if dist > MATCH_TOL * max(1.0, abs(a)):
                    out.append(Gap(min(a, b), max(a, b)))
        out.append(leg)
    return out


def assemble(params: ModelParams, n: int = 0, k1_max: float = K1_CAP):
    """Order legs along the branch and list its bifurcation points.

    Chain order, descending in m: bounded U(m), I(m), II(m), U(m-1), ...; the
    unbounded U(m0) closes the chain.  A Gap separates neighbours that do not
    share an endpoint.
    """
    if not k1_max > 1:
        raise ValueError("k1_max must exceed 1")
    uni = {leg.m: leg for leg in unimodal_legs(params, n) if _clip(leg, k1_max)}
    typeI, typeII = {}, {}
    m0 = algebra.m_zero(params, n)
    for m in range(max(m0, 0), _max_m(params, n) + 1):
        typeI[m] = [leg for leg in bimodal_legs(params, n, m, Kind.TYPE_I, k1_max)]
        typeII[m] = [leg for leg in bimodal_legs(params, n, m, Kind.TYPE_II, k1_max)]

    chain: list[Leg] = []
    for m in sorted(set(uni) | {k for k, v in typeI.items() if v} | {k for k, v in typeII.items() if v},
                    reverse=True):
        u = uni.get(m)
        bim = sorted(typeI.get(m, []), key=lambda l: -l.k1_lo) + \
            sorted(typeII.get(m, []), key=lambda l: -l.k1_lo)
        if u is not None and u.bounded:
            chain.append(u)
            chain.extend(bim)
        else:
            chain.extend(sorted(bim, key=lambda l: l.k1_lo))
            if u is not None:
                chain.append(u)
    items = _chain_gaps(chain)

    points: dict[tuple, BifurcationPoint] = {}
    legs = [x for x in items if isinstance(x, Leg)]
    for leg in legs:
        for K1, b in ((leg.k1_lo, leg.lo_boundary), (leg.k1_hi, leg.hi_boundary)):
            if b.partner is None:
                continue
            parts = tuple(sorted((leg.label(), b.partner), key=_participant_order))
            kind = (BifurcationKind.COINCIDENCE if b.kind is BoundaryKind.COINCIDENCE_NO_FOLD
                    else BifurcationKind.FOLD)
            key = (kind, parts, round(K1, 6))
            points.setdefault(key, BifurcationPoint(kind, K1, parts))
    for m in range(1, _max_m(params, n) + 2):
        if m == n:
            continue
        A_c, K_c = cusp_locus(params.K2, n, m)
        if abs(A_c - params.A) <= 1e-9 * max(1.0, A_c):
            parts = (("unimodal", n, m - 1), ("typeII", n, m))
            points.setdefault((BifurcationKind.CUSP, parts, round(K_c, 6)),
                              BifurcationPoint(BifurcationKind.CUSP, K_c, parts))
    return items, sorted(points.values(), key=lambda p: p.K1)


def _participant_order(p):
    return (["unimodal", "typeI", "typeII"].index(p[0]), p[1], p[2])


def alignment_check(params: ModelParams, k: int, n0: int, m0: int,
                    max_denominator: int = 1000) -> bool:
    """Do (n0, m0) and (n0 + kq, m0 + k(p - q)) give bitwise-identical L and M?

    A is read as p/q; if no fraction with denominator <= ``max_denominator``
    reproduces A exactly the check fails.
    """
    A = params.A
    frac = Fraction(A).limit_denominator(max_denominator)
    if float(frac) != A:
        return False
    p, q = frac.numerator, frac.denominator
    a = BranchIndex(n0, m0)
    b = BranchIndex(n0 + k * q, m0 + k * (p - q))

    def l_or_none(idx):
        try:
            return algebra.l_nm(params, idx)
        except DegenerateIndex:
            return None

    return (l_or_none(a) == l_or_none(b)
            and algebra.m_roots(params, a) == algebra.m_roots(params, b))


def sample_leg(params: ModelParams, leg: Leg, samples: int = 400,
               k1_max: float = K1_CAP) -> list[dict]:
    """Rows of (K1, T, T1, T2, theta, amplitude) strictly inside the leg."""
    hi = leg.k1_hi if leg.bounded else max(k1_max, leg.k1_lo + 1.0)
    width = hi - leg.k1_lo
    ks = leg.k1_lo + width * (np.arange(samples) + 0.5) / samples
    rows = []
    for K1 in ks:
        sol = algebra.try_construct(params, leg.index, leg.kind, float(K1))
        if sol is None:
            continue
        rows.append({"kind": leg.kind.value, "n": leg.n, "m": leg.m, "K1": float(K1),
                     "T": sol.T, "T1": sol.T1, "T2": sol.T2, "theta": sol.theta,
                     "amplitude": algebra.amplitude(sol, params), "period": sol.T})
    return rows
