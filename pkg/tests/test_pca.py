from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import jacobi_eigen, procrustes_oracle
from hackint.errors import DimensionMismatch, RankDeficient, SubsetSpaceTooLarge
from hackint.pca import PcaSubsetQuery, pca_scores, procrustes_loss, subset_hacking_report, subset_loss


def test_single_nonzero_column():
    x = np.zeros((6, 3))
    x[:, 1] = [1.0, -2.0, 3.0, 0.5, -1.0, 4.0]
    s = pca_scores(x, 1)
    xc = x[:, 1] - x[:, 1].mean()
    assert abs(np.corrcoef(s[:, 0], xc)[0, 1]) == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_design():
    x = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 3.0], [0.0, -3.0]])
    s = pca_scores(x, 2)
    assert np.abs(s[:, 0]) == pytest.approx(np.abs(x[:, 1]))
    assert np.abs(s[:, 1]) == pytest.approx(np.abs(x[:, 0]))


def test_eigendecomposition_against_jacobi():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(10, 4))
    xc = x - x.mean(axis=0)
    _, vecs = jacobi_eigen(xc.T @ xc)
    s = pca_scores(x, 4)
    ref = xc @ vecs
    # loadings are unique up to sign
    for j in range(4):
        sign = np.sign(s[:, j] @ ref[:, j])
        assert np.max(np.abs(s[:, j] - sign * ref[:, j])) < 1e-8


def test_rank_check():
    x = np.column_stack([np.arange(5.0), 2 * np.arange(5.0)])
    with pytest.raises(RankDeficient):
        pca_scores(x, 2)


def test_full_subset_has_zero_loss():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(12, 5))
    assert subset_loss(x, range(5), 2) == pytest.approx(0.0, abs=1e-10)


def test_dropping_constant_column_has_zero_loss():
    rng = np.random.default_rng(2)
    x = np.column_stack([rng.normal(size=(12, 3)), np.full(12, 7.0)])
    assert subset_loss(x, [0, 1, 2], 2) == pytest.approx(0.0, abs=1e-10)


def test_dropping_a_duplicate_column_changes_the_weighting():
    # duplicating a column doubles its variance weight, so dropping it is not free
    rng = np.random.default_rng(3)
    base = rng.normal(size=(12, 3))
    x = np.column_stack([base, base[:, 0]])
    assert subset_loss(x, [0, 1, 2], 2) > 1e-3


def test_scale_invariance():
    rng = np.random.default_rng(4)
    a, b = rng.normal(size=(10, 2)), rng.normal(size=(10, 2))
    assert procrustes_loss(a, b) == pytest.approx(procrustes_loss(3 * a, 0.5 * b), abs=1e-12)
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert procrustes_loss(a, a @ rot) == pytest.approx(0.0, abs=1e-10)


def test_losses_match_oracle():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(12, 6))
    rep = subset_hacking_report(PcaSubsetQuery(x, 2, 2))
    assert len(rep.subsets) == 15
    for sub, v in zip(rep.subsets, rep.losses):
        assert v == pytest.approx(procrustes_oracle(x, sub, 2), abs=1e-8)


def test_report_extremes():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(15, 6))
    lo = subset_hacking_report(PcaSubsetQuery(x, 3, 2, 0.0))
    assert lo.num_within >= 1 and lo.max_hamming == 0 and lo.features_covered == 3
    hi = subset_hacking_report(PcaSubsetQuery(x, 3, 2, 100.0))
    assert hi.num_within == math.comb(6, 3)
    assert hi.features_covered == 6
    assert hi.max_hamming == 6


def test_curves_nondecreasing():
    rng = np.random.default_rng(7)
    rep = subset_hacking_report(PcaSubsetQuery(rng.normal(size=(20, 7)), 3, 2))
    rows = rep.curves(np.linspace(0, 50, 51))
    for key in ("num_within", "features_covered", "max_hamming"):
        vals = [r[key] for r in rows]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_query_validation_and_cap():
    x = np.random.default_rng(8).normal(size=(10, 4))
    with pytest.raises(DimensionMismatch):
        PcaSubsetQuery(x, 4, 2)
    with pytest.raises(SubsetSpaceTooLarge):
        subset_hacking_report(PcaSubsetQuery(x, 2, 1), cap=5)


@settings(max_examples=1000, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    n=st.integers(4, 12),
    p=st.integers(2, 6),
    data=st.data(),
)
def test_loss_bounds_fuzz(seed, n, p, data):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p)) * rng.choice([1e-3, 1.0, 1e3], size=p)
    if data.draw(st.booleans()):
        x[:, 0] = x[:, -1]
    k = data.draw(st.integers(1, min(p, n - 1)))
    q = data.draw(st.integers(k, p))
    sub = data.draw(st.sampled_from(list(combinations(range(p), q))))
    try:
        v = subset_loss(x, sub, k)
    except RankDeficient:
        return
    assert 0.0 <= v <= 100.0
