import math

import pytest
from hypothesis import given, strategies as st

from singular_dde import algebra, branch, profiles
from singular_dde.branch import BifurcationKind, BoundaryKind, Gap, Leg, LTransition
from singular_dde.model import BranchIndex, DegenerateIndex, Kind, ModelParams

I = BranchIndex


def spans(legs):
    return [(l.m, l.k1_lo, l.k1_hi) for l in legs]


def test_unimodal_legs_a6(P):
    legs = branch.unimodal_legs(P(6.0), 0)
    assert spans(legs) == [(0, 3.5, math.inf), (1, pytest.approx(1.0), pytest.approx(5.0))]
    assert legs[0].lo_boundary.kind is BoundaryKind.FOLD_AT_L
    assert legs[1].hi_boundary.kind is BoundaryKind.FOLD_AT_M


def test_unimodal_legs_a15(P):
    legs = branch.unimodal_legs(P(1.5), 0)
    assert spans(legs) == [(0, pytest.approx(5.0), math.inf)]
    assert legs[0].lo_boundary.kind is BoundaryKind.COINCIDENCE_NO_FOLD


def test_unimodal_legs_a575(P):
    m1 = [l for l in branch.unimodal_legs(P(5.75), 0) if l.m == 1][0]
    assert m1.k1_lo == pytest.approx(1.0348, abs=5e-5)


def test_unimodal_legs_start_at_m_zero(P):
    legs = branch.unimodal_legs(P(11.1), 1)
    assert [l.m for l in legs] == [10, 11, 12, 13]


def test_bimodal_legs_a6(P):
    p = P(6.0)
    t1 = branch.bimodal_leg(p, 0, 1, Kind.TYPE_I)
    assert (t1.k1_lo, t1.k1_hi) == (pytest.approx(4.7122, abs=1e-3), pytest.approx(5.0, abs=1e-3))
    assert t1.hi_boundary.kind is BoundaryKind.FOLD_AT_M
    t2 = branch.bimodal_leg(p, 0, 1, Kind.TYPE_II)
    assert (t2.k1_lo, t2.k1_hi) == (pytest.approx(3.5, abs=1e-3), pytest.approx(4.5549, abs=1e-3))
    assert t2.lo_boundary.kind is BoundaryKind.FOLD_AT_L


def test_type_ii_leg_a76_is_unbounded(P):
    leg = branch.bimodal_leg(P(7 / 6), 0, 0, Kind.TYPE_II)
    assert leg.k1_hi == math.inf
    # lower end set by the F(8) sign condition (see module notes); every point above it verifies
    assert leg.k1_lo == pytest.approx(0.6586, abs=1e-4)
    assert leg.lo_boundary.condition == "F8<0"


def test_l_transition_classes(P):
    assert branch.classify_L_transition(P(6.0), 0, 1) is LTransition.FOLD_CASE_I
    assert branch.classify_L_transition(P(4.48), 0, 1) is LTransition.NO_FOLD_CASE_II
    assert branch.classify_L_transition(P(5.75), 0, 2) is LTransition.DISJOINT_CASE_III


@pytest.mark.parametrize("m,expected", [(1, (4.5, 2.0)), (2, (7.0, 1.5)), (3, (9.5, 4 / 3))])
def test_cusp_locus(m, expected):
    assert branch.cusp_locus(0.5, 0, m) == pytest.approx(expected)


def test_cusp_locus_degenerate():
    with pytest.raises(DegenerateIndex):
        branch.cusp_locus(0.5, 1, 1)


def folds(points):
    return sorted(p.K1 for p in points if p.kind is BifurcationKind.FOLD)


def test_assemble_a5(P):
    items, points = branch.assemble(P(5.0), 0)
    assert folds(points) == [pytest.approx(2.5, abs=1e-3), pytest.approx(3.2808, abs=1e-3)]
    gaps = [g for g in items if isinstance(g, Gap)]
    assert any(g.k1_lo < 3.0 < g.k1_hi for g in gaps)


def test_assemble_a6(P):
    items, points = branch.assemble(P(6.0), 0)
    assert folds(points) == [pytest.approx(3.5), pytest.approx(5.0)]
    gaps = [(g.k1_lo, g.k1_hi) for g in items if isinstance(g, Gap)]
    assert (pytest.approx(4.5549, abs=1e-3), pytest.approx(4.7122, abs=1e-3)) in gaps


def test_assemble_a15_has_no_fold(P):
    items, points = branch.assemble(P(1.5), 0)
    assert not folds(points)
    legs = [x for x in items if isinstance(x, Leg)]
    t1 = [l for l in legs if l.kind is Kind.TYPE_I][0]
    assert (t1.k1_lo, t1.k1_hi) == (pytest.approx(3.3508, abs=1e-3), pytest.approx(5.0))
    assert t1.hi_boundary.kind is BoundaryKind.COINCIDENCE_NO_FOLD
    assert any(p.kind is BifurcationKind.COINCIDENCE and p.K1 == pytest.approx(5.0)
               for p in points)


def test_assemble_reports_cusp(P):
    _, points = branch.assemble(P(4.5), 0)
    assert any(p.kind is BifurcationKind.CUSP and p.K1 == pytest.approx(2.0) for p in points)


def test_assemble_single_type_ii_near_a_equal_one(P):
    items, points = branch.assemble(P(1.01), 0)
    legs = [x for x in items if isinstance(x, Leg)]
    assert [l.kind for l in legs] == [Kind.TYPE_II]
    assert not folds(points)


def test_alignment(P):
    assert branch.alignment_check(P(5.5), 1, 0, 2)
    assert branch.alignment_check(P(6.0), 1, 0, 1)
    irrational = P((9 + math.sqrt(5)) / 2)
    assert not any(branch.alignment_check(irrational, k, 0, 1) for k in range(1, 11))


@pytest.mark.parametrize("A", [1.5, 4.54, 5.0, 6.0, 7 / 6])
def test_leg_midpoints_verify(P, A):
    p = P(A)
    items, _ = branch.assemble(p, 0, k1_max=20.0)
    for leg in (x for x in items if isinstance(x, Leg)):
        sol = algebra.construct(p, leg.index, leg.kind, leg.midpoint(20.0))
        assert profiles.verify(p, sol, per_piece=50).passed, leg


@pytest.mark.parametrize("A", [4.54, 5.0, 5.75, 6.0])
def test_fold_at_m_invariants(P, A):
    p = P(A)
    items, _ = branch.assemble(p, 0)
    for leg in (x for x in items if isinstance(x, Leg) and x.kind is Kind.TYPE_I):
        if leg.hi_boundary.kind is not BoundaryKind.FOLD_AT_M:
            continue
        K1 = leg.k1_hi - 1e-9
        ti = algebra.construct(p, leg.index, Kind.TYPE_I, K1)
        un = algebra.construct(p, leg.index, Kind.UNIMODAL, K1)
        assert abs(ti.T - un.T) <= 1e-6 * ti.T
        assert ti.T2 <= 1e-6 * ti.T


@pytest.mark.parametrize("A", [4.54, 5.0, 6.0])
def test_fold_at_l_periods_meet(P, A):
    p = P(A)
    items, _ = branch.assemble(p, 0)
    for leg in (x for x in items if isinstance(x, Leg) and x.kind is Kind.TYPE_II):
        if leg.lo_boundary.kind is not BoundaryKind.FOLD_AT_L:
            continue
        K1 = leg.k1_lo + 1e-9
        target = (p.a2 - p.a1) / leg.m
        t2 = algebra.construct(p, leg.index, Kind.TYPE_II, K1)
        un = algebra.construct(p, I(leg.n, leg.m - 1), Kind.UNIMODAL, K1)
        assert t2.T == pytest.approx(target, rel=1e-6)
        assert un.T == pytest.approx(target, rel=1e-6)


@pytest.mark.parametrize("A,m,kind", [(6.0, 1, Kind.TYPE_I), (6.0, 1, Kind.TYPE_II),
                                      (5.0, 1, Kind.TYPE_I), (1.5, 0, Kind.TYPE_I)])
def test_bisection_stable_under_step_halving(P, A, m, kind):
    p = P(A)
    a = branch.bimodal_legs(p, 0, m, kind, k1_max=10.0, step=0.01)
    b = branch.bimodal_legs(p, 0, m, kind, k1_max=10.0, step=0.005)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert abs(x.k1_lo - y.k1_lo) < 1e-6
        assert x.k1_hi == y.k1_hi or abs(x.k1_hi - y.k1_hi) < 1e-6


@given(st.floats(1.05, 12.0), st.floats(0.1, 0.9))
def test_sampled_rows_lie_inside_legs(A, K2):
    p = ModelParams.from_ratio(A, K2=K2)
    for leg in branch.unimodal_legs(p, 0):
        rows = branch.sample_leg(p, leg, samples=20, k1_max=20.0)
        assert all(leg.k1_lo < r["K1"] < (leg.k1_hi if leg.bounded else 21.0) for r in rows)
        assert all(r["T"] > 0 for r in rows)
