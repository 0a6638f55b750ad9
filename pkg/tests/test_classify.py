import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PI2, synthetic_record
from stefanduo.classify import (BLOWUP_LABEL, FAST, SLOW, UNDECIDED, ClassifyConfig,
                                bisect_threshold, classify_run, comparison_test,
                                fit_decay_rate, fit_lifespan, lifespan_scaling, run_many,
                                simulate)
from stefanduo.model import ProblemSpec
from stefanduo.solver import BLOWUP, NONFINITE, UNDERFLOW, StepControl

QUICK = StepControl(n=64, horizon=0.3, sample_every=5)


@settings(max_examples=50, deadline=None)
@given(rate=st.floats(0.01, 50.0), c=st.floats(1e-6, 1e3))
def test_decay_rate_exact_exponential(rate, c):
    t = np.linspace(0.0, 2.0, 40)
    rec = synthetic_record(t, c * np.exp(-rate * t))
    fit = fit_decay_rate(rec, "u")
    assert fit.rate == pytest.approx(rate, rel=1e-9, abs=1e-12)
    assert fit.quality == pytest.approx(1.0)


def test_decay_rate_edge_cases(caplog):
    t = np.linspace(0.0, 1.0, 20)
    zero = synthetic_record(t, np.zeros_like(t))
    fit = fit_decay_rate(zero)
    assert fit.rate == 0.0 and math.isnan(fit.quality)
    y = np.exp(-t)
    y[3] = 0.0
    with caplog.at_level(logging.WARNING):
        assert fit_decay_rate(synthetic_record(t, y)).rate == pytest.approx(1.0)
    assert "dropping 1 zero" in caplog.text
    with pytest.raises(ValueError, match="need >= 8"):
        fit_decay_rate(synthetic_record(t[:5], y[:5]))
    with pytest.raises(ValueError, match="component"):
        fit_decay_rate(zero, "w")


def test_classify_synthetic_blowup():
    T = 0.5
    t = T * (1 - np.logspace(-0.5, -6, 80))
    rec = synthetic_record(t, 1.0 / (T - t), termination=BLOWUP)
    c = classify_run(rec)
    assert c.label == BLOWUP_LABEL and not c.is_global
    assert c.T_est == pytest.approx(T, rel=1e-8)
    assert c.fit_exponent == pytest.approx(1.0)


def test_underflow_with_large_norm_counts_as_blowup():
    t = 0.5 * (1 - np.logspace(-0.5, -6, 80))
    rec = synthetic_record(t, 1.0 / (0.5 - t), termination=UNDERFLOW)
    assert classify_run(rec).label == BLOWUP_LABEL
    small = synthetic_record(t, np.ones_like(t), termination=UNDERFLOW)
    assert classify_run(small).label == UNDECIDED


def test_other_terminations_are_undecided():
    t = np.linspace(0, 1, 20)
    c = classify_run(synthetic_record(t, np.ones_like(t), termination=NONFINITE))
    assert c.label == UNDECIDED and NONFINITE in c.reason


def test_slow_candidate_and_undecided():
    t = np.linspace(0, 10, 100)
    norm = 1.0 + 0.0 * t
    growing = 1.0 + 0.1 * t
    c = classify_run(synthetic_record(t, norm, h=growing, g=growing))
    assert c.label == SLOW and c.front_growth > 0.01
    c = classify_run(synthetic_record(t, norm))
    assert c.label == UNDECIDED and "front growth" in c.reason
    c = classify_run(synthetic_record(t, np.exp(t)))
    assert c.label == UNDECIDED and "peak norm" in c.reason


def test_thresholds_are_configurable():
    t = np.linspace(0, 10, 100)
    rec = synthetic_record(t, np.exp(-0.5 * t))  # final/initial = e^-5 > 1e-3
    assert classify_run(rec).label != FAST
    assert classify_run(rec, ClassifyConfig(decay_factor=1e-2)).label == FAST


def test_zero_data_is_degenerate_fast(canon):
    c = classify_run(simulate(canon, "cosine", 0.0, QUICK))
    assert c.label == FAST and c.degenerate and c.decay_rate_u == 0.0


def test_small_data_decays_at_heat_rate(canon):
    rec = simulate(canon, "cosine", 3.0 / 128.0, StepControl(n=128, horizon=4.0))
    c = classify_run(rec)
    assert c.label == FAST
    # slowest heat mode of the unit ball in three dimensions, fronts nearly fixed
    assert c.decay_rate_u == pytest.approx(PI2, rel=0.02)
    assert c.as_dict()["T_est"] is None


def test_large_data_blows_up(canon):
    c = classify_run(simulate(canon, "cosine", 800.0, QUICK))
    assert c.label == BLOWUP_LABEL and c.T_est < 0.01


def test_run_many_parallel_matches_serial(canon):
    amps = [0.5, 800.0, 2.0]
    serial = run_many(canon, "cosine", amps, QUICK, jobs=1)
    parallel = run_many(canon, "cosine", amps, QUICK, jobs=2)
    assert [r.samples for r, _ in serial] == [r.samples for r, _ in parallel]
    assert [c.label for _, c in serial] == [c.label for _, c in parallel]


def test_bisect_preconditions(canon):
    ctrl = StepControl(n=64, horizon=1.5, sample_every=5)
    with pytest.raises(ValueError, match="A_hi=0.02 classified GlobalFast"):
        bisect_threshold(canon, "cosine", 0.01, 0.02, 0.1, ctrl)
    with pytest.raises(ValueError, match="A_lo=800 classified"):
        bisect_threshold(canon, "cosine", 800.0, 900.0, 0.1, QUICK)
    with pytest.raises(ValueError):
        bisect_threshold(canon, "cosine", 2.0, 1.0, 0.1, QUICK)


def test_bisect_brackets_transition(canon):
    ctrl = StepControl(n=64, horizon=0.2, sample_every=5)
    cfg = ClassifyConfig(front_tol=1.0)
    br = bisect_threshold(canon, "cosine", 1.0, 1000.0, 0.25, ctrl, cfg, jobs=2)
    labels = dict(br.history)
    if not br.widened:
        assert br.A_hi / br.A_lo - 1 < 0.25
    assert labels[br.A_hi] == BLOWUP_LABEL
    assert labels[br.A_lo] != BLOWUP_LABEL


@settings(max_examples=30, deadline=None)
@given(c=st.floats(1e-3, 1e3), k=st.floats(0.2, 3.0))
def test_fit_lifespan_power_law(c, k):
    A = np.array([10.0, 20.0, 40.0, 80.0])
    slope, icpt = fit_lifespan(A, c * A ** (-k))
    assert slope == pytest.approx(-k, rel=1e-9)
    assert math.exp(icpt) == pytest.approx(c, rel=1e-9)


def test_fit_lifespan_errors():
    with pytest.raises(ValueError):
        fit_lifespan([1.0], [1.0])
    with pytest.raises(ValueError):
        fit_lifespan([1.0, -2.0], [1.0, 1.0])


def test_lifespan_scaling_refuses_global_runs(canon):
    with pytest.raises(ValueError, match="did not blow up"):
        lifespan_scaling(canon, "cosine", [1.0, 800.0], QUICK)


def test_comparison_ordered(canon):
    ctrl = StepControl(n=64, horizon=1.0, sample_every=1, snapshot_times=(0.0, 0.5, 1.0))
    small = simulate(canon, "cosine", 0.02, ctrl)
    large = simulate(canon, "cosine", 0.03, ctrl)
    rep = comparison_test(small, large, canon)
    assert rep.ordered and rep.profile_checked
    assert rep.max_excess_u <= 0.0
    with pytest.raises(ValueError, match="smaller amplitude"):
        comparison_test(large, small, canon)
    swapped = comparison_test(large, large, canon)
    assert swapped.ordered


def test_comparison_detects_violation(canon):
    ctrl = StepControl(n=64, horizon=0.2, snapshot_times=(0.0, 0.2))
    small = simulate(canon, "cosine", 0.02, ctrl)
    large = simulate(canon, "cosine", 0.03, ctrl)
    small.snapshots[-1].w[:] *= 10.0
    rep = comparison_test(small, large, canon)
    assert not rep.ordered
    assert any(name == "u" for _, name, _ in rep.violations)
