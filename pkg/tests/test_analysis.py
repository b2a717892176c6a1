import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singular_dde import analysis as an
from singular_dde.analysis import Direction, OrbitMetrics, SweepResult, SweepSample
from singular_dde.model import ModelParams
from singular_dde.simulator import StepControl, Trajectory

P = ModelParams.from_ratio(6.0, K1=4.0, eps=0.1)


def synthetic(f, t_end=100.0, dt=1e-3, shift=0.0):
    t = np.arange(0.0, t_end + dt / 2, dt)
    u = f(t + shift)
    return Trajectory(P, None, StepControl(), 0, t, u, np.gradient(u, t))


def test_sine():
    m = an.extract(synthetic(lambda t: np.sin(2 * np.pi * t / 2.5)))
    assert m.period == pytest.approx(2.5, rel=1e-6)
    assert m.amplitude == pytest.approx(2.0, rel=1e-5)
    assert (m.modality, m.crossings_per_period, m.converged) == (1, 1, True)


def test_bimodal_wave():
    m = an.extract(synthetic(lambda t: np.sin(t) + 0.8 * np.sin(2 * t)))
    assert m.period == pytest.approx(2 * np.pi, rel=1e-6)
    assert m.modality == 2
    assert m.converged


def test_alternating_cycles_form_one_period():
    # two cycles per period of equal length but different peaks
    m = an.extract(synthetic(lambda t: np.sin(2 * np.pi * t) * (1.0 + 0.2 * np.cos(np.pi * t) ** 2)
                             + 0.05 * np.sin(np.pi * t)))
    assert m.crossings_per_period == 2
    assert m.period == pytest.approx(2.0, rel=1e-6)
    assert m.modality == 2


def test_drifting_orbit_is_not_converged():
    m = an.extract(synthetic(lambda t: (1.0 + 0.01 * t) * np.sin(2 * np.pi * t)))
    assert not m.converged


def test_constant_has_no_oscillation():
    with pytest.raises(an.NoOscillation):
        an.extract(synthetic(lambda t: np.full_like(t, 3.0)))


def test_monotone_has_no_oscillation():
    with pytest.raises(an.NoOscillation):
        an.extract(synthetic(lambda t: np.tanh(t - 80.0)))


@settings(max_examples=25)
@given(st.floats(0.0, 10.0), st.floats(1.0, 4.0))
def test_time_translation_invariance(shift, period):
    f = lambda t: np.sin(2 * np.pi * t / period) + 0.6 * np.sin(4 * np.pi * t / period + 0.3)
    a = an.extract(synthetic(f))
    b = an.extract(synthetic(f, shift=shift))
    assert b.period == pytest.approx(a.period, rel=1e-5)
    assert b.amplitude == pytest.approx(a.amplitude, rel=1e-5)
    assert b.modality == a.modality


def metrics(period, modality=1, converged=True):
    return OrbitMetrics(period, 1.0, modality, converged, 0.0, 0.1)


def result(direction, K1s, periods, modality=None, converged=None):
    modality = modality or [1] * len(K1s)
    converged = converged or [True] * len(K1s)
    return SweepResult(direction, [SweepSample(k, metrics(T, mo, c))
                                   for k, T, mo, c in zip(K1s, periods, modality, converged)])


def test_find_jumps():
    r = result(Direction.UP, [1.0, 1.1, 1.2, 1.3], [2.0, 2.01, 3.0, 3.01])
    assert an.find_jumps(r.samples) == [(1.1, 1.2)]


def test_find_jumps_skips_unconverged_and_failed():
    r = result(Direction.UP, [1.0, 1.1, 1.2], [2.0, 2.6, 3.0], converged=[True, False, True])
    r.samples.insert(1, SweepSample(1.05, None, "IntegrationError"))
    assert an.find_jumps(r.samples) == [(1.0, 1.2)]


def test_hysteresis_window():
    K1 = [1.0, 1.1, 1.2, 1.3, 1.4]
    up = result(Direction.UP, K1, [2.0, 2.0, 2.0, 3.0, 3.0])
    down = result(Direction.DOWN, K1[::-1], [3.0, 3.0, 3.0, 3.0, 2.0])
    assert an.hysteresis_window(up, down) == (1.1, 1.2)


def test_no_hysteresis():
    K1 = [1.0, 1.1, 1.2]
    up = result(Direction.UP, K1, [2.0, 2.5, 3.0])
    down = result(Direction.DOWN, K1[::-1], [3.0, 2.5, 2.0])
    assert an.hysteresis_window(up, down) is None


def test_modality_transitions():
    r = result(Direction.DOWN, [2.0, 1.9, 1.8], [3.0, 3.0, 3.0], modality=[1, 1, 2])
    assert an.modality_transitions(r) == [(1.9, 1.8, 1, 2)]


def test_sweep_needs_two_steps():
    with pytest.raises(ValueError):
        an.sweep(P, 1.0, 2.0, 1)


def test_sweep_is_deterministic():
    s = an.SweepSettings(t_first=100.0, t_warm=60.0, max_extensions=0)
    a = an.sweep(P, 3.9, 4.1, 3, settings=s)
    b = an.sweep(P, 3.9, 4.1, 3, settings=s)
    assert a.samples == b.samples
    assert all(x.metrics is not None for x in a.samples)


def test_compare_to_singular():
    from singular_dde import algebra
    from singular_dde.model import BranchIndex, Kind
    sol = algebra.construct(P, BranchIndex(0, 0), Kind.UNIMODAL)
    amp = algebra.amplitude(sol, P)
    m = OrbitMetrics(sol.T * 1.01, amp * 0.98, 1, True, P.K1, P.eps)
    c = an.compare_to_singular(m, sol, P)
    assert c["period_rel_err"] == pytest.approx(0.01)
    assert c["amp_rel_err"] == pytest.approx(0.02)
    assert c["amp_below_singular"] and c["modality_match"]


@pytest.mark.slow
def test_sweeps_bracket_singular_folds():
    p = ModelParams.from_ratio(6.0, eps=0.1)
    up, down = an.sweep_both(p, 3.2, 5.3, 43)
    window = an.hysteresis_window(up, down)
    assert window is not None and 3.2 < window[0] < window[1] < 5.1
    assert len(up.jumps) == 1 and len(down.jumps) == 1
    assert abs(0.5 * sum(up.jumps[0]) - 5.0) < 0.3
    assert abs(0.5 * sum(down.jumps[0]) - 3.5) < 0.3


@pytest.mark.slow
def test_amplitude_error_shrinks_with_eps():
    from singular_dde import algebra, simulator
    from singular_dde.model import BranchIndex, Kind
    p = ModelParams.from_ratio(6.0, K1=4.0)
    sol = algebra.construct(p, BranchIndex(0, 0), Kind.UNIMODAL)
    reports = []
    for eps in (0.2, 0.1, 0.05, 0.02, 0.01):
        q = p.with_eps(eps)
        m = an.extract(simulator.integrate(q, None, 200.0, keep=100.0))
        assert m.converged
        reports.append(an.compare_to_singular(m, sol, q))
    errs = [r["amp_rel_err"] for r in reports]
    assert errs == sorted(errs, reverse=True)
    assert all(r["amp_below_singular"] and r["modality_match"] for r in reports)
    assert reports[-1]["period_rel_err"] < 0.02 and reports[-1]["amp_rel_err"] < 0.03
