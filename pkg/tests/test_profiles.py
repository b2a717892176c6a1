import numpy as np
import pytest
from hypothesis import given, strategies as st

from singular_dde import algebra, profiles
from singular_dde.model import (
    BranchIndex,
    InvalidGain,
    Kind,
    KindMismatch,
    ModelParams,
)
from singular_dde.sampling import draw_solution

I = BranchIndex


def test_sawtooth_profile(P):
    prof = profiles.sawtooth_profile(P(6.0), 0, 5.0)
    assert prof.u_range() == (-1.0, 4.0)
    t, u = prof.at(np.array([0.0, 2.0, 0.5, 2.5]))
    assert u[0] == -1.0 and t[1] - t[0] == 5.0
    assert u[2] == u[3] and t[3] - t[2] == 5.0


def test_bimodal_profile_extrema(P):
    p = P(6.0, K1=4.8)
    sol = algebra.construct(p, I(0, 1), Kind.TYPE_I)
    prof = profiles.typeI_profile(p, sol)
    assert prof.u.max() == pytest.approx((-1 + sol.T1) / p.c)
    assert int(np.argmax(prof.u)) % 4 == 1
    assert prof.u.min() == pytest.approx(-1.0)

    p = P(6.0, K1=4.0)
    sol = algebra.construct(p, I(0, 1), Kind.TYPE_II)
    prof = profiles.typeII_profile(p, sol)
    assert prof.u.max() == pytest.approx(-1 + sol.T1 + (1 - sol.theta) * sol.T2)
    assert int(np.argmax(prof.u)) % 4 == 3


def test_profile_kind_mismatch(P):
    p = P(6.0, K1=4.0)
    sol = algebra.construct(p, I(0, 1), Kind.TYPE_II)
    with pytest.raises(KindMismatch):
        profiles.typeI_profile(p, sol)


@pytest.mark.parametrize("A,K1,m,kind", [
    (6.0, 4.0, 0, Kind.UNIMODAL),
    (6.0, 4.0, 1, Kind.TYPE_II),
    (6.0, 4.8, 1, Kind.TYPE_I),
])
def test_verify_fixture_solutions(P, A, K1, m, kind):
    p = P(A, K1=K1)
    rep = profiles.verify(p, algebra.construct(p, I(0, m), kind))
    assert rep.passed
    assert rep.max_delay_identity_residual <= 1e-9


def test_unimodal_parametrisation_slopes_and_F(P):
    p = P(6.0, K1=4.0)
    sol = algebra.construct(p, I(0, 0), Kind.UNIMODAL)
    parm = profiles.parametrisation(p, sol)
    mus = parm.mus(np.array([1.0, 2.0]))
    assert mus[1, 0] - mus[0, 0] == pytest.approx(sol.theta)
    F = parm.F(np.array([0.0, 3.0, 4.0]))
    T = sol.T
    assert abs(F[0]) <= 1e-9 * (1 + 5 * 5.5)
    assert F[1] == pytest.approx((p.K2 - (p.K1 + p.K2 - 1) * sol.theta) * T)
    assert F[2] == pytest.approx((1 - 4.0) * T)


def test_type_ii_slope_vanishes_at_l(P):
    p = P(6.0)
    sol = algebra.construct(p, I(0, 1), Kind.TYPE_II, 3.5 + 1e-9)
    parm = profiles.parametrisation(p, sol)
    d = parm.nodes[2] - parm.nodes[1]
    assert d[1] == pytest.approx(0.0, abs=1e-8)


def test_one_delay_periods():
    assert profiles.one_delay_period(1.0, 2.0, 0) == 3.0
    assert profiles.one_delay_period(1.0, 2.0, 1) == 0.75
    assert profiles.one_delay_period(1.0, 1e6, 0) == pytest.approx(1e6 + 1)


@pytest.mark.parametrize("K", [1.5, 2.0, 5.0, 20.0])
@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_one_delay_solution_verifies(K, n):
    T, parm, prof = profiles.one_delay_solution(1.0, 1.0, K, n)
    assert profiles.verify_parametrisation(parm, 1.0).passed


def test_one_delay_rejects_small_gain():
    with pytest.raises(InvalidGain):
        profiles.one_delay_solution(1.0, 1.0, 1.0, 0)


def test_verifier_rejects_wrong_solution(P):
    """A perturbed period breaks the delayed-time identity."""
    p = P(6.0, K1=4.0)
    sol = algebra.construct(p, I(0, 0), Kind.UNIMODAL)
    from dataclasses import replace
    bad = replace(sol, T=sol.T * 1.01)
    assert not profiles.verify(p, bad).passed


seeds = st.integers(0, 2**32 - 1)
kinds = st.sampled_from(list(Kind))


@given(seeds, kinds)
def test_random_solutions_verify(seed, kind):
    params, sol = draw_solution(np.random.default_rng(seed), kind)
    rep = profiles.verify(params, sol, per_piece=50)
    assert rep.passed, rep


@given(seeds, kinds)
def test_F_affine_per_piece(seed, kind):
    params, sol = draw_solution(np.random.default_rng(seed), kind)
    parm = profiles.parametrisation(params, sol)
    scale = 1 + np.abs(parm.profile.u).max() * (1 + params.K1 + params.K2) / params.c
    for lo, hi, *_ in parm.pieces:
        mid = parm.F(0.5 * (lo + hi))
        ends = parm.F(np.array([lo, hi], dtype=float))
        assert abs(mid - ends.mean()) <= 1e-9 * scale


@given(seeds, kinds, st.floats(0, 20))
def test_parametrisation_periodic(seed, kind, eta):
    params, sol = draw_solution(np.random.default_rng(seed), kind)
    parm = profiles.parametrisation(params, sol)
    a = parm.mus(eta)
    b = parm.mus(eta + parm.period_eta)
    assert np.allclose(b - a, parm.period_mu, rtol=0, atol=1e-12 * (1 + abs(eta)))


@given(seeds, kinds)
def test_profile_invariants(seed, kind):
    params, sol = draw_solution(np.random.default_rng(seed), kind)
    prof = profiles.profile_for(params, sol)
    assert np.all(np.diff(prof.t) >= 0)
    flat = np.diff(prof.t) == 0
    du = np.diff(prof.u)
    assert np.all(du[flat] != 0)
    t0, u0 = prof.at(0.3)
    t1, u1 = prof.at(0.3 + prof.period_mu)
    assert t1 - t0 == pytest.approx(prof.period_T, rel=1e-12)
    assert u1 == pytest.approx(u0, rel=1e-12, abs=1e-12)


def test_type_i_hausdorff_shrinks_to_unimodal(P):
    p = P(6.0)
    dist = []
    for k in range(2, 8):
        K1 = 5.0 - 10.0 ** -k
        ti = algebra.construct(p, I(0, 1), Kind.TYPE_I, K1)
        un = algebra.construct(p, I(0, 1), Kind.UNIMODAL, K1)
        dist.append(profiles.hausdorff_distance(profiles.profile_for(p, ti),
                                                profiles.profile_for(p, un)))
    assert all(b < a for a, b in zip(dist, dist[1:]))
    assert dist[-1] < 1e-5


def test_type_i_parametrisation_tends_to_unimodal(P):
    """Type I slope coefficients approach 1 as the solution merges with the unimodal one."""
    p = P(6.0)
    sol = algebra.construct(p, I(0, 1), Kind.TYPE_I, 5.0 - 1e-8)
    assert sol.T2 / sol.T < 1e-6
    parm = profiles.parametrisation(p, sol)
    assert profiles.verify_parametrisation(parm, p.c).passed
