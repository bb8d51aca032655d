import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from memeflow.dynamics import (
    EnergyContext,
    LogisticParams,
    StageSpec,
    Validity,
    check_context,
    exponential_solution,
    integrate,
    logistic_closed_form,
    logistic_curvature,
    logistic_rhs,
    run_stages,
    time_to_level,
)
from memeflow.errors import StepUnstable, ValidationError

STD = LogisticParams(1.0, 1.0, 0.01)

params = st.builds(
    lambda a, de, frac: LogisticParams(a, de, frac * de),
    st.floats(0.0, 5.0),
    st.floats(0.1, 100.0),
    st.floats(0.001, 0.999),
)


def test_params_validated():
    with pytest.raises(ValidationError):
        LogisticParams(1.0, 0.0, 0.0)
    with pytest.raises(ValidationError):
        LogisticParams(1.0, 1.0, 1.0)
    with pytest.raises(ValidationError):
        LogisticParams(math.nan, 1.0, 0.5)
    assert LogisticParams.from_epsilon(2.0, 4.0).y0 == pytest.approx(0.04)


def test_rhs_examples():
    p = LogisticParams(2.0, 4.0, 0.1)
    assert logistic_rhs(0.0, p) == 0.0
    assert logistic_rhs(4.0, p) == 0.0
    assert logistic_rhs(2.0, p) == 2.0


def test_closed_form_examples():
    assert logistic_closed_form(0.0, STD) == STD.y0
    flat = LogisticParams(0.0, 3.0, 0.7)
    assert np.all(logistic_closed_form(np.linspace(0, 50, 11), flat) == pytest.approx(0.7, abs=1e-15))
    mid = LogisticParams(1.0, 1.0, 0.5)
    assert logistic_closed_form(0.0, mid) == 0.5
    assert logistic_curvature(logistic_closed_form(-0.1, mid), mid) > 0
    assert logistic_curvature(logistic_closed_form(0.1, mid), mid) < 0


def test_curvature_examples():
    p = LogisticParams(1.0, 1.0, 0.1)
    assert logistic_curvature(0.5, p) == 0.0
    assert logistic_curvature(0.25, p) == 0.09375
    assert logistic_curvature(0.0, p) == 0.0 and logistic_curvature(1.0, p) == 0.0
    assert np.all(logistic_curvature(np.linspace(0.01, 0.49, 30), p) > 0)
    assert np.all(logistic_curvature(np.linspace(0.51, 0.99, 30), p) < 0)


def test_exponential_examples():
    assert exponential_solution(0.0, 0.7, 2.5) == 2.5
    assert exponential_solution(9.0, 0.0, 2.5) == 2.5
    assert exponential_solution(3.0, math.log(2), 1.0) == pytest.approx(8.0, rel=1e-14)
    with pytest.raises(ValidationError):
        exponential_solution(1.0, 1.0, 0.0)


@settings(max_examples=100)
@given(params, st.floats(0.0, 20.0))
def test_closed_form_solves_ode(p, t):
    h = 1e-4
    fd = (logistic_closed_form(t + h, p) - logistic_closed_form(t - h, p)) / (2 * h)
    exact = logistic_rhs(logistic_closed_form(t, p), p)
    # central difference error is O(h^2 * y''') with |y'''| <= A^3 * delta_e
    assert fd == pytest.approx(exact, abs=1e-7 * p.delta_e * (1 + p.affinity) ** 3 + 1e-9)


@settings(max_examples=100)
@given(params)
def test_closed_form_monotone_and_bounded(p):
    y = logistic_closed_form(np.linspace(0, 30, 301), p)
    assert np.all(np.diff(y) >= 0)
    assert np.all(y > 0) and np.all(y <= p.delta_e)


def test_integrate_matches_closed_form():
    ts = integrate(STD, 20.0, 0.01)
    assert len(ts) == 2001 and ts.t[-1] == 20.0
    err = np.max(np.abs(ts.y - logistic_closed_form(ts.t, STD)))
    assert err < 1e-8
    assert np.all((ts.y > 0) & (ts.y < 1)) and np.all(np.diff(ts.y) >= 0)


def test_integrate_zero_affinity_constant():
    ts = integrate(LogisticParams(0.0, 2.0, 0.3), 5.0, 0.1)
    assert np.all(ts.y == 0.3)


def test_integrate_reaches_amplitude():
    assert abs(integrate(STD, 40.0, 0.01).y[-1] - 1.0) < 1e-6


def test_integrate_uneven_final_step():
    ts = integrate(STD, 1.005, 0.01)
    assert ts.t[-1] == 1.005 and len(ts) == 102
    assert abs(ts.y[-1] - logistic_closed_form(1.005, STD)) < 1e-10


def test_stability_guard():
    with pytest.raises(StepUnstable):
        integrate(LogisticParams(10.0, 1.0, 0.01), 5.0, 0.1)
    # amplitude does not enter the guard
    integrate(LogisticParams(1.0, 1e4, 1.0), 5.0, 0.1)


def test_inflection_single_sign_change_at_midpoint():
    ts = integrate(STD, 20.0, 0.01)
    d2 = np.diff(ts.y, 2)
    signs = np.sign(d2[np.abs(d2) > 1e-15])
    assert np.count_nonzero(np.diff(signs)) == 1
    k = int(np.argmax(d2 < 0))  # first negative second difference, centered at k + 1
    nearest = int(np.argmin(np.abs(ts.y - 0.5)))
    assert abs((k + 1) - nearest) <= 1


def test_larger_affinity_reaches_90_percent_sooner():
    times = [time_to_level(integrate(LogisticParams(a, 1.0, 0.01), 30.0, 0.01), 0.9)
             for a in (0.5, 1.0, 2.0, 4.0)]
    assert all(b < a for a, b in zip(times, times[1:]))


def test_check_context():
    ctx = EnergyContext(0.0, 0.0, 5.0)
    assert check_context(STD, ctx) is Validity.IN_RANGE
    assert check_context(STD, EnergyContext(6.0, 0.0, 5.0)) is Validity.OUT_OF_RANGE
    assert check_context(STD, EnergyContext(2.0, 0.0, 10.0)) is Validity.IN_RANGE
    with pytest.raises(ValidationError):
        EnergyContext(1.0, 3.0, 2.0)


def test_out_of_range_context_attaches_warning():
    ok = integrate(STD, 1.0, 0.1, EnergyContext(0.5, 0.0, 1.0))
    bad = integrate(STD, 1.0, 0.1, EnergyContext(20.0, 0.0, 10.0))
    assert ok.warnings == () and len(bad.warnings) == 1
    assert np.array_equal(ok.y, bad.y)


def test_single_stage_is_truncated_integration():
    stage = run_stages([StageSpec(STD, 0.99)], 0.01)
    full = integrate(STD, 15.0, 0.01)
    k = len(stage) - 1
    assert np.max(np.abs(stage.y[:k] - full.y[:k])) < 1e-12
    assert stage.y[-1] == 0.99
    assert full.y[k - 1] < 0.99 <= full.y[k]


def test_two_identical_stages_stack():
    ts = run_stages([StageSpec(STD, 0.99), StageSpec(STD, 0.99)], 0.01)
    # stage 1 climbs 0.01 -> 0.99, stage 2 adds 0.99 - 0.01 on top
    assert abs(ts.y[-1] - (0.99 + 0.99 - 0.01)) < 1e-6
    assert np.all(np.diff(ts.t) > 0)
    assert np.max(np.abs(np.diff(ts.y))) < 0.01  # continuous at the handover


def test_steeper_second_stage_completes_faster():
    p2 = LogisticParams(2.0, 1.0, 0.01)
    first = run_stages([StageSpec(STD, 0.99)], 0.01).t[-1]
    both = run_stages([StageSpec(STD, 0.99), StageSpec(p2, 0.99)], 0.01).t[-1]
    assert both - first < first


def test_stage_that_cannot_complete():
    with pytest.raises(ValidationError):
        run_stages([StageSpec(LogisticParams(0.0, 1.0, 0.01), 0.9)], 0.01)
    with pytest.raises(ValidationError):
        run_stages([], 0.01)
    with pytest.raises(ValidationError):
        StageSpec(STD, 1.0)
