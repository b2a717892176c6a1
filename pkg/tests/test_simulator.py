import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singular_dde import algebra, analysis, simulator as sim
from singular_dde.model import BranchIndex, Kind, ModelParams

FIXED = dict(rtol=1e6, atol=1e6)  # error control off: every step has length h_max


def osc(K1=4.0, eps=0.1, A=6.0):
    return ModelParams.from_ratio(A, K1=K1, K2=0.5, eps=eps)


def test_rhs_examples():
    p = osc(K1=2.0, eps=0.5)
    assert sim.rhs(p, 0.0, 1.0, 0.5, -2.0) == pytest.approx((-1.0 - 1.0 + 1.0) / 0.5)
    assert sim.rhs(p, 3.0, 0.0, 0.0, 0.0) == 0.0


def test_zero_history_stays_zero():
    tr = sim.integrate(osc(), sim.Constant(0.0), t_end=20.0)
    assert np.all(tr.u == 0.0)


def test_decays_below_hopf():
    tr = sim.integrate(osc(K1=0.5, eps=1.0), t_end=100.0)
    assert np.max(np.abs(tr.tail(0.1)[1])) < 1e-6
    with pytest.raises(analysis.NoOscillation):
        analysis.extract(tr)


def midpoint_residual(tr, t_from):
    s = 0.5 * (tr.t[:-1] + tr.t[1:])
    return float(np.max(np.abs(tr.residual(s[s > t_from]))))


@pytest.mark.parametrize("K1,eps", [(3.0, 1.0), (2.0, 0.5)])
def test_fixed_step_residual_is_third_order(K1, eps):
    p = osc(K1, eps)
    res = [midpoint_residual(sim.integrate(p, t_end=40.0, step=sim.StepControl(h_max=h, **FIXED)), 20.0)
           for h in (0.01, 0.005, 0.0025)]
    ratios = [a / b for a, b in zip(res, res[1:])]
    assert all(7.0 < r < 9.5 for r in ratios), ratios


def test_adaptive_residual_small():
    p = osc()
    tr = sim.integrate(p, t_end=60.0)
    h = sim.StepControl().resolve(p)
    scale = float(np.max(np.abs(tr.u))) * (1 + p.K1 + p.K2)
    assert midpoint_residual(tr, 30.0) <= 10 * h * h * scale


def test_advanced_delay_is_reported():
    with pytest.raises(sim.AdvancedDelay) as info:
        sim.integrate(osc(), sim.Constant(-2.0), t_end=5.0)
    assert info.value.alpha > info.value.t


def test_short_tabulated_history_underruns():
    p = osc()
    tr = sim.integrate(p, t_end=50.0)
    with pytest.raises(sim.HistoryUnderrun):
        sim.integrate(p, tr.as_history(3.0), t_end=20.0)


def test_rejects_zero_eps():
    with pytest.raises(ValueError):
        sim.integrate(osc(eps=0.0), t_end=1.0)


def test_bounded_storage_gives_identical_orbit():
    p = osc()
    full = sim.integrate(p, t_end=300.0)
    kept = sim.integrate(p, t_end=300.0, keep=60.0)
    assert kept.T.size < full.T.size / 2
    assert kept.steps == full.steps
    assert kept.t_end == full.t_end
    assert kept.u[-1] == full.u[-1]
    assert analysis.extract(kept, 0.2) == analysis.extract(full, 0.2)


def test_period_stable_under_step_halving():
    p = osc()
    h = sim.StepControl().resolve(p)
    a = analysis.extract(sim.integrate(p, t_end=200.0))
    b = analysis.extract(sim.integrate(p, t_end=200.0, step=sim.StepControl(h_max=h / 2)))
    assert abs(a.period - b.period) / a.period < 1e-3


def test_warm_start_lands_near_singular_orbit():
    p = osc(K1=4.0, eps=0.02)
    sol = algebra.construct(p, BranchIndex(0, 0), Kind.UNIMODAL)
    tr = sim.integrate(p, sim.warm_start(sol), t_end=60.0)
    m = analysis.extract(tr)
    assert m.converged
    assert abs(m.period - sol.T) / sol.T < 0.05


def test_warm_start_history_follows_profile():
    p = osc()
    sol = algebra.construct(p, BranchIndex(0, 0), Kind.UNIMODAL)
    hist = sim.warm_start(sol)
    t = np.linspace(-20.0, 0.0, 2001)
    u, du = hist.evaluate(p, t)
    amp = algebra.amplitude(sol, p)
    assert np.ptp(u) == pytest.approx(amp, rel=1e-2)
    assert np.all(np.isfinite(du))


def test_invalid_step():
    with pytest.raises(ValueError):
        sim.StepControl(h_max=0.0).resolve(osc())


@settings(max_examples=15)
@given(st.floats(0.0, 40.0))
def test_dense_output_matches_steps(shift):
    tr = sim.integrate(osc(), t_end=50.0)
    i = np.searchsorted(tr.t, shift)
    assert tr(tr.t[i]) == pytest.approx(tr.u[i], abs=1e-12)


@settings(max_examples=10)
@given(st.floats(1.5, 8.0), st.floats(1.0, 6.0), st.floats(0.05, 0.5))
def test_orbits_finite_with_monotone_delays_or_reported(A, K1, eps):
    p = ModelParams.from_ratio(A, K1=K1, K2=0.5, eps=eps)
    tr = sim.integrate(p, t_end=60.0)
    assert np.all(np.isfinite(tr.u))
    assert np.isfinite(tr.diagnostics["min_delay_slope"])


def test_first_delay_inside_last_history_interval():
    # u(0) close to -a1/c puts t - a1 - c u(0) just before 0
    t = np.linspace(-30.0, 0.0, 3001)
    hist = sim.Tabulated(t, np.full_like(t, -0.995), np.zeros_like(t))
    tr = sim.integrate(osc(), hist, t_end=5.0)
    assert np.all(np.isfinite(tr.u))


def test_tabulated_history_nodes_are_kept():
    p = osc()
    prev = sim.integrate(p, t_end=100.0)
    hist = prev.as_history(sim.history_span(p, prev.as_history(1.0)))
    tr = sim.integrate(p, hist, t_end=40.0)
    stored = tr.T[: tr.n_hist + 1]
    np.testing.assert_array_equal(stored, hist.t[hist.t.size - stored.size:])
    # continuing from the history reproduces the uninterrupted run
    ref = sim.integrate(p, t_end=140.0)
    m_ref = analysis.extract(ref, 0.25)
    m_cont = analysis.extract(tr, 0.8)
    assert m_cont.period == pytest.approx(m_ref.period, rel=1e-6)


def test_delayed_arguments_increase_on_converged_orbit():
    tr = sim.integrate(osc(), t_end=200.0)
    assert analysis.extract(tr).converged
    assert 0.0 < tr.diagnostics["min_delay_slope"] < 1.0
