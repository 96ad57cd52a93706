from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hackint.errors import EmptyRange, UnsupportedOrYu
from hackint.prescriptive import (
    FeatureHackConstraints,
    KnnSpec,
    adjustment_factor,
    af_grid_search,
    knn_interval,
    knn_select_kstar,
    knn_window_sweep,
    new_feature_interval,
    new_feature_sweep,
)


def knn_loo_oracle(x, y, k):
    """Leave-one-out squared error with neighbours found by explicit sorting of (distance, index)."""
    err = 0.0
    for i in range(len(y)):
        others = sorted((float(np.sum((x[j] - x[i]) ** 2)), j) for j in range(len(y)) if j != i)
        pred = sum(y[j] for _, j in others[:k]) / k
        err += (y[i] - pred) ** 2
    return err


def test_hand_instance():
    iv = knn_interval(KnnSpec([1, 2, 3, 4], [0, 1, 1, 0], [2.2], 1, 3))
    assert (iv.lower, iv.upper) == (2 / 3, 1.0)
    assert iv.witness_lower[0] == 3
    assert iv.witness_upper[0] == 1
    assert [k for k, _ in iv.info["trace"]] == [1, 2, 3]


def test_single_k_is_degenerate():
    iv = knn_interval(KnnSpec([1, 2, 3, 4], [0, 1, 1, 0], [2.2], 3, 3))
    assert iv.lower == iv.upper == 2 / 3


def test_empty_range():
    with pytest.raises(EmptyRange):
        KnnSpec([1, 2], [0, 1], [0.0], 2, 3)


def test_kstar_constant_outcome():
    x = np.arange(10.0)
    assert knn_select_kstar(x, np.ones(10), (2, 6)) == 2


def test_kstar_clustered_pairs():
    # three tight pairs far apart; each point's single neighbour is its twin
    x = np.array([0.0, 0.1, 10.0, 10.1, 20.0, 20.1])
    y = np.array([1.0, 1.0, 5.0, 5.0, -3.0, -3.0])
    assert knn_select_kstar(x, y) == 1


def test_kstar_random_matches_loo_enumeration():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(30, 2))
    y = rng.normal(size=30)
    errs = [knn_loo_oracle(x, y, k) for k in range(1, 30)]
    assert knn_select_kstar(x, y) == 1 + int(np.argmin(errs))


def test_window_sweep_equals_individual_calls():
    rng = np.random.default_rng(9)
    x, y = rng.normal(size=(25, 2)), rng.normal(size=25)
    xn = np.zeros(2)
    for m, lo, hi, iv in knn_window_sweep(x, y, xn, 6, range(1, 6)):
        ref = knn_interval(KnnSpec(x, y, xn, lo, hi))
        assert (lo, hi) == (max(1, 6 - m), 6 + m)
        assert (iv.lower, iv.upper) == (ref.lower, ref.upper)


def test_window_covering_3_7_has_width():
    rng = np.random.default_rng(10)
    x = rng.uniform(size=(60, 2))
    y = (rng.uniform(size=60) < x[:, 0]).astype(float)
    rows = knn_window_sweep(x, y, np.array([0.5, 0.5]), 5, [2])
    assert (rows[0][1], rows[0][2]) == (3, 7)
    assert rows[0][3].width > 0


@settings(max_examples=1000, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    k_min=st.integers(1, 10),
    span=st.integers(0, 8),
    grow_lo=st.integers(0, 5),
    grow_hi=st.integers(0, 5),
)
def test_knn_nesting(seed, k_min, span, grow_lo, grow_hi):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(25, 2)), rng.normal(size=25)
    xn = rng.normal(size=2)
    k_max = min(25, k_min + span)
    inner = knn_interval(KnnSpec(x, y, xn, k_min, k_max))
    outer = knn_interval(KnnSpec(x, y, xn, max(1, k_min - grow_lo), min(25, k_max + grow_hi)))
    assert outer.lower <= inner.lower and inner.upper <= outer.upper


def test_af_identities():
    assert adjustment_factor(1.7, 0.3, 0.3) == 1.0
    assert adjustment_factor(1.0, 0.1, 0.9) == 1.0
    assert adjustment_factor(1.5, 0.2, 0.5) == pytest.approx(1.25 / 1.1, rel=1e-12)


def test_zero_c_is_degenerate():
    iv = new_feature_interval(FeatureHackConstraints(1.4, 1.5, 0.0, 0.3))
    assert iv.lower == pytest.approx(1.4) and iv.upper == pytest.approx(1.4)


def test_unfloored_formula_reproduces_worked_numbers():
    cons = FeatureHackConstraints(1.25, 1.5, 0.3, 0.2)
    iv = new_feature_interval(cons, clip=False)
    assert iv.info["af_max"] == pytest.approx(1.13636, abs=1e-5)
    assert iv.lower == pytest.approx(1.1000, abs=1e-4)
    assert iv.info["af_min"] == pytest.approx(0.86364, abs=1e-5)
    assert iv.upper == pytest.approx(1.4474, abs=1e-4)


def test_clipped_minimum_matches_grid():
    cons = FeatureHackConstraints(1.25, 1.5, 0.3, 0.2)
    iv = new_feature_interval(cons)
    g_min, g_max, arg_min, _ = af_grid_search(cons)
    assert iv.info["min_clipped"]
    assert iv.info["af_min"] == pytest.approx(g_min, abs=1e-12)
    assert iv.info["af_max"] == pytest.approx(g_max, abs=1e-12)
    assert tuple(iv.witness_upper) == pytest.approx(arg_min)
    p0, p1 = iv.witness_upper
    assert 0 <= p1 <= 1 and p0 >= cons.d and abs(p1 - p0) <= cons.c + 1e-12


@pytest.mark.parametrize("or_yu", [1.5, 1.75, 3.0])
@pytest.mark.parametrize("c", [0.05, 0.1, 0.3])
@pytest.mark.parametrize("d", [0.0, 0.2, 0.5])
def test_closed_form_against_grid(or_yu, c, d):
    cons = FeatureHackConstraints(1.3, or_yu, c, d)
    iv = new_feature_interval(cons)
    g_min, g_max, _, _ = af_grid_search(cons)
    assert iv.lower == pytest.approx(1.3 / g_max, abs=1e-3)
    assert iv.upper == pytest.approx(1.3 / g_min, abs=1e-3)


def test_or_yu_below_one_uses_grid():
    cons = FeatureHackConstraints(1.3, 0.6, 0.2, 0.1)
    iv = new_feature_interval(cons)
    assert iv.info["method"] == "grid"
    with pytest.raises(UnsupportedOrYu):
        new_feature_interval(cons, allow_grid=False)


def test_sweep_grid_monotone_and_compositional():
    cs = [0.1, 0.15, 0.2, 0.25, 0.3]
    rows = new_feature_sweep(1.2, 0.0, cs, [1.5, 1.75])
    by = {(r["or_yu"], r["c"]): r for r in rows}
    for oy in (1.5, 1.75):
        widths = [by[(oy, c)]["width"] for c in cs]
        assert all(b > a for a, b in zip(widths, widths[1:]))
    for c in cs:
        assert by[(1.75, c)]["width"] > by[(1.5, c)]["width"]
    for (oy, c), r in itertools.islice(by.items(), 2):
        one = new_feature_interval(FeatureHackConstraints(1.2, oy, c, 0.0))
        assert (r["lower"], r["upper"]) == (one.lower, one.upper)
