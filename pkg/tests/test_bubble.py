import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from families import exponential_case, logistic_case
from memeflow.bubble import (
    BubbleConfig,
    Label,
    Stability,
    classify,
    detect_inflection,
    stability_check,
)
from memeflow.dynamics import LogisticParams, integrate, logistic_closed_form
from memeflow.errors import TooFewSamples, ValidationError
from memeflow.fitting import fit_exponential, fit_logistic
from memeflow.noise import gaussian
from memeflow.series import TimeSeries

STD = LogisticParams(1.0, 1.0, 0.01)


def closed(p=STD, t_end=20.0, n=200):
    t = np.linspace(0.0, t_end, n)
    return TimeSeries(t, logistic_closed_form(t, p))


@pytest.mark.parametrize("series", [integrate(STD, 20.0, 0.01), closed()], ids=["rk4", "closed"])
def test_inflection_at_half_amplitude(series):
    t_star, y_star = detect_inflection(series)
    assert abs(y_star - 0.5) < 0.02 * 0.5
    assert abs(t_star - np.log(99.0)) < 0.1


def test_no_inflection_for_exponential_or_line():
    t = np.linspace(0, 10, 101)
    assert detect_inflection(TimeSeries(t, 0.1 * np.exp(0.5 * t))) is None
    assert detect_inflection(TimeSeries(t, t)) is None


def test_window_fraction_limits_search():
    s = closed()
    assert detect_inflection(s, window_fraction=0.2) is None
    assert detect_inflection(s, window_fraction=0.5) is not None


def test_decreasing_sigmoid_reports_first_sign_change():
    s = closed()
    flipped = TimeSeries(s.t, 2.0 - s.y)
    t_star, y_star = detect_inflection(flipped)
    assert abs(y_star - 1.5) < 0.01


def test_explicit_window():
    s = closed()
    assert abs(detect_inflection(s, window=3)[1] - 0.5) < 0.01
    with pytest.raises(ValidationError):
        detect_inflection(s, window=4)


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        detect_inflection(TimeSeries(np.arange(4.0), np.arange(4.0)))


@pytest.mark.parametrize("seed", range(5))
def test_noisy_logistic_inflection_found(seed):
    s, p = logistic_case(seed, 0.02)
    t_star, y_star = detect_inflection(s)
    assert abs(y_star / p.delta_e - 0.5) < 0.1


def test_classify_noiseless_logistic_stable():
    v = classify(closed())
    assert v.label is Label.STABLE
    assert v.inflection is not None
    assert v.logistic_fit.aic <= v.exponential_fit.aic


def test_classify_noiseless_exponential_bubble():
    t = np.linspace(0, 10, 101)
    v = classify(TimeSeries(t, 0.1 * np.exp(0.5 * t)))
    assert v.label is Label.BUBBLE
    assert v.inflection is None
    assert v.exponential_fit.sse < v.logistic_fit.sse


def test_classify_too_short_indeterminate():
    v = classify(TimeSeries(np.arange(4.0), np.array([1.0, 2.0, 4.0, 8.0])))
    assert v.label is Label.INDETERMINATE
    assert "TooFewSamples" in v.rationale
    json.dumps(v.to_dict(), allow_nan=False)


def test_classify_fit_error_indeterminate():
    t = np.linspace(0, 5, 20)
    v = classify(TimeSeries(t, np.full(20, 3.0)))
    assert v.label is Label.INDETERMINATE and "DegenerateSeries" in v.rationale


def _verdict_rules_hold(v, cfg):
    if v.label is Label.STABLE:
        assert v.inflection is not None and v.logistic_fit.aic <= v.exponential_fit.aic
    if v.label is Label.BUBBLE:
        aic_rule = v.exponential_fit.aic + cfg.aic_margin < v.logistic_fit.aic
        disp_rule = v.disparity > cfg.disparity_threshold and v.inflection is None
        assert aic_rule or disp_rule


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("noise", [0.0, 0.02])
def test_verdict_invariants_on_families(seed, noise):
    cfg = BubbleConfig()
    for fam in (logistic_case, exponential_case):
        _verdict_rules_hold(classify(fam(seed, noise)[0], cfg), cfg)


def test_early_phase_logistic_is_not_stable():
    # only the lead-up to the midpoint is observed: no inflection yet
    v = classify(closed(t_end=3.5, n=80))
    assert v.label is not Label.STABLE
    _verdict_rules_hold(v, BubbleConfig())


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 50), st.floats(1e-3, 1e3), st.booleans())
def test_labels_scale_invariant(seed, c, exponential):
    fam = exponential_case if exponential else logistic_case
    s = fam(seed, 0.02)[0]
    assert classify(s).label == classify(s.scaled(c)).label


def test_config_validation():
    with pytest.raises(ValidationError):
        BubbleConfig(disparity_threshold=0.0)
    with pytest.raises(ValidationError):
        BubbleConfig(inflection_window_fraction=1.5)


def test_stability_sustained_on_clean_tail():
    s = closed()
    rep = stability_check(s, fit_logistic(s), 0.05)
    assert rep.label is Stability.SUSTAINED
    assert rep.t_inflection == pytest.approx(np.log(99.0), rel=1e-6)


def test_stability_collapsing_on_linear_decay():
    s = closed()
    fit = fit_logistic(s)
    dt = np.arange(1, 101) * 0.1
    t = np.concatenate([s.t, 20.0 + dt])
    y = np.concatenate([s.y, s.y[-1] - 0.1 * dt])
    rep = stability_check(TimeSeries(t, y), fit, 0.05)
    assert rep.label is Stability.COLLAPSING
    # the tail lies entirely on the decay segment: slope -0.1 * delta_e per unit time
    assert rep.tail_slope == pytest.approx(-0.1, rel=1e-9)


def test_stability_noisy_tail_mostly_sustained():
    s = closed()
    fit = fit_logistic(s)
    hits = 0
    for seed in range(100):
        noisy = TimeSeries(s.t, s.y + gaussian(seed, len(s), 0.01))
        hits += stability_check(noisy, fit, 0.05).label is Stability.SUSTAINED
    assert hits >= 95


def test_stability_watch_when_off_curve_without_decline():
    s = closed()
    fit = fit_logistic(s)
    bumped = TimeSeries(s.t, np.where(s.t > 12, s.y + 0.2, s.y))
    assert stability_check(bumped, fit, 0.05).label is Stability.WATCH


def test_stability_errors():
    s = closed()
    fit = fit_logistic(s)
    early = TimeSeries(s.t[:20], s.y[:20])
    with pytest.raises(ValidationError):
        stability_check(early, fit, 0.05)
    t = np.linspace(0, 5, 20)
    with pytest.raises(ValidationError):
        stability_check(s, fit_exponential(TimeSeries(t, np.exp(t))), 0.05)
