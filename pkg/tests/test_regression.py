from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gauss_inverse, gauss_solve, random_ate_data
from hackint.data import Dataset
from hackint.errors import DimensionMismatch, SingularGram, ThetaBelowMinLoss
from hackint.regression import (
    ArmError,
    ate_interval,
    fit_ols,
    ite_interval,
    linear_stat_interval,
    prediction_interval,
)


def test_mean_of_two_points():
    fit = fit_ols(Dataset(np.ones((2, 1)), [3.0, 5.0]))
    assert fit.beta_ls == pytest.approx([4.0])
    assert fit.sse == pytest.approx(2.0)


def test_exact_linear_fit_has_zero_sse():
    x = np.column_stack([np.ones(6), np.arange(6.0)])
    fit = fit_ols(Dataset(x, 2.0 + 3.0 * np.arange(6.0)))
    assert fit.sse == pytest.approx(0.0, abs=1e-20)


def test_coefficients_match_normal_equations(rng):
    x = rng.normal(size=(20, 3))
    y = rng.normal(size=20)
    fit = fit_ols(Dataset(x, y))
    ref = gauss_solve(x.T @ x, x.T @ y)
    assert np.max(np.abs(fit.beta_ls - ref)) < 1e-9


def test_treatment_fit_matches_normal_equations(rng):
    d = random_ate_data(rng, 25, 3)
    fit = fit_ols(d, include_treatment=True)
    xa = np.column_stack([d.x, d.w])
    ref = gauss_solve(xa.T @ xa, xa.T @ d.y)
    assert fit.beta0_ls == pytest.approx(ref[-1], abs=1e-9)
    assert fit.v_tt == pytest.approx(gauss_inverse(xa.T @ xa)[-1, -1], rel=1e-9)


def test_singular_gram_rejected():
    x = np.column_stack([np.ones(5), 2 * np.ones(5)])
    with pytest.raises(SingularGram):
        fit_ols(Dataset(x, np.arange(5.0)))


def test_ate_degenerate_at_sse(rng):
    fit = fit_ols(random_ate_data(rng, 30, 2), include_treatment=True)
    iv = ate_interval(fit, fit.sse)
    assert iv.lower == pytest.approx(fit.beta0_ls, abs=1e-12)
    assert iv.upper == pytest.approx(fit.beta0_ls, abs=1e-12)


def test_ate_below_sse_rejected(rng):
    fit = fit_ols(random_ate_data(rng, 30, 2), include_treatment=True)
    with pytest.raises(ThetaBelowMinLoss):
        ate_interval(fit, 0.5 * fit.sse)


def test_ate_closed_form_against_independent_algebra(rng):
    d = random_ate_data(rng, 40, 3)
    fit = fit_ols(d, include_treatment=True)
    theta = 1.2 * fit.sse
    xa = np.column_stack([d.x, d.w])
    v_tt = gauss_inverse(xa.T @ xa)[-1, -1]
    b = gauss_solve(xa.T @ xa, xa.T @ d.y)
    half = np.sqrt(v_tt * (theta - fit.sse))
    iv = ate_interval(fit, theta)
    assert iv.lower == pytest.approx(b[-1] - half, abs=1e-9)
    assert iv.upper == pytest.approx(b[-1] + half, abs=1e-9)


def test_ate_witnesses_replay(rng):
    d = random_ate_data(rng, 30, 3)
    fit = fit_ols(d, include_treatment=True)
    theta = 1.3 * fit.sse
    iv = ate_interval(fit, theta)
    xa = np.column_stack([d.x, d.w])
    for wit, val in ((iv.witness_lower, iv.lower), (iv.witness_upper, iv.upper)):
        r = d.y - xa @ wit
        assert r @ r == pytest.approx(theta, rel=1e-9)
        assert wit[-1] == pytest.approx(val, abs=1e-12)


def test_prediction_degenerate_at_sse(rng):
    x = rng.normal(size=(15, 2))
    fit = fit_ols(Dataset(x, rng.normal(size=15)))
    xn = np.array([0.3, -1.0])
    iv = prediction_interval(fit, xn, fit.sse)
    assert iv.lower == pytest.approx(xn @ fit.beta_ls, abs=1e-12)
    assert iv.width == pytest.approx(0.0, abs=1e-12)


def test_constant_model_prediction():
    fit = fit_ols(Dataset(np.ones((2, 1)), [0.0, 2.0]))
    iv = prediction_interval(fit, np.array([1.0]), 4.0)
    assert (iv.lower, iv.upper) == pytest.approx((0.0, 2.0), abs=1e-12)


def test_prediction_rejects_treatment_fit(rng):
    fit = fit_ols(random_ate_data(rng, 20, 2), include_treatment=True)
    with pytest.raises(DimensionMismatch):
        prediction_interval(fit, np.zeros(2), fit.sse * 1.1)


def test_linear_stat_generalizes_ate(rng):
    fit = fit_ols(random_ate_data(rng, 30, 2), include_treatment=True)
    theta = 1.1 * fit.sse
    a = ate_interval(fit, theta)
    b = linear_stat_interval(fit, np.array([0.0, 0.0, 1.0]), theta)
    assert (a.lower, a.upper) == pytest.approx((b.lower, b.upper), abs=1e-12)


def test_ite_matches_two_prediction_intervals(rng):
    d = random_ate_data(rng, 30, 2)
    treated, control = d.split_by_treatment()
    xn = np.array([0.5, -0.2])
    ft, fc = fit_ols(treated), fit_ols(control)
    tt, tc = 1.2 * ft.sse, 1.1 * fc.sse
    pt, pc = prediction_interval(ft, xn, tt), prediction_interval(fc, xn, tc)
    iv = ite_interval(treated, control, xn, tt, tc)
    assert iv.lower == pytest.approx(pt.lower - pc.upper, abs=1e-9)
    assert iv.upper == pytest.approx(pt.upper - pc.lower, abs=1e-9)


def test_ite_degenerate_at_sse(rng):
    d = random_ate_data(rng, 30, 2)
    treated, control = d.split_by_treatment()
    xn = np.array([0.1, 0.2])
    ft, fc = fit_ols(treated), fit_ols(control)
    iv = ite_interval(treated, control, xn, ft.sse, fc.sse)
    assert iv.width == pytest.approx(0.0, abs=1e-12)
    assert iv.lower == pytest.approx(xn @ ft.beta_ls - xn @ fc.beta_ls, abs=1e-12)


def test_ite_error_names_arm(rng):
    d = random_ate_data(rng, 30, 2)
    treated, control = d.split_by_treatment()
    fc = fit_ols(control)
    with pytest.raises(ThetaBelowMinLoss, match="control arm") as info:
        ite_interval(treated, control, np.zeros(2), 1e6, 0.5 * fc.sse)
    assert info.value.exit_code == 3
    with pytest.raises(ArmError) as info:
        ite_interval(treated, control, np.zeros(3), 1e6, 1e6)
    assert info.value.arm == "treated"
    assert info.value.exit_code == 2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), r=st.floats(0.0, 2.0))
def test_ate_interval_is_ordered_and_centred(seed, r):
    d = random_ate_data(np.random.default_rng(seed), 25, 2)
    fit = fit_ols(d, include_treatment=True)
    iv = ate_interval(fit, (1 + r) * fit.sse)
    assert iv.lower <= fit.beta0_ls <= iv.upper
    assert (iv.lower + iv.upper) / 2 == pytest.approx(fit.beta0_ls, abs=1e-9 * (1 + abs(fit.beta0_ls)))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), r1=st.floats(0.0, 1.0), r2=st.floats(0.0, 1.0))
def test_prediction_interval_monotone_in_theta(seed, r1, r2):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(20, 3))
    fit = fit_ols(Dataset(x, rng.normal(size=20)))
    xn = rng.normal(size=3)
    a = prediction_interval(fit, xn, (1 + min(r1, r2)) * fit.sse)
    b = prediction_interval(fit, xn, (1 + max(r1, r2)) * fit.sse)
    assert b.lower <= a.lower + 1e-12 and a.upper <= b.upper + 1e-12
