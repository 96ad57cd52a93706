"""Hacking intervals for PCA-based feature subset selection.

A subset of ``q`` columns is scored by how well its first ``k`` principal
component scores reproduce the full-data scores up to rotation/reflection
(a Procrustes comparison), on a 0-100 scale. The report summarizes every
subset whose loss is within ``theta_prime`` of the best.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DataError, DimensionMismatch, RankDeficient, SubsetSpaceTooLarge

DEFAULT_CAP = 10_000_000
WITHIN_TOL = 1e-12


def _prepare(x: np.ndarray, standardize: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch("x must be a 2-d array")
    xc = x - x.mean(axis=0)
    if standardize:
        sd = xc.std(axis=0, ddof=1)
        sd[sd == 0] = 1.0
        xc = xc / sd
    return xc


def pca_scores(
    x: np.ndarray, k: int, standardize: bool = False, centred: bool = False, check_rank: bool = True
) -> np.ndarray:
    """First ``k`` principal component scores of the column-centred ``x``.

    Loadings are ordered by descending eigenvalue of ``X^T X`` and signed so
    that each loading's largest-magnitude entry is positive. With
    ``check_rank=False`` components beyond the numerical rank are kept; their
    scores are numerically zero.
    """
    xc = np.asarray(x, dtype=float) if centred else _prepare(x, standardize)
    n, p = xc.shape
    if not 1 <= k <= p:
        raise DimensionMismatch(f"k must lie in [1, {p}], got {k}")
    vals, vecs = np.linalg.eigh(xc.T @ xc)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    rank = int(np.sum(vals > 1e-10 * max(vals[0], 0.0))) if vals[0] > 0 else 0
    if check_rank and k > rank:
        raise RankDeficient(f"k={k} exceeds the numerical rank {rank}")
    w = vecs[:, :k]
    lead = np.argmax(np.abs(w), axis=0)
    w = w * np.sign(w[lead, np.arange(k)])
    return xc @ w


def procrustes_loss(s: np.ndarray, s_q: np.ndarray) -> float:
    """Scaled Procrustes discrepancy of two score matrices, in ``[0, 100]``."""
    a = s / np.linalg.norm(s)
    norm_q = np.linalg.norm(s_q)
    if norm_q == 0:
        return 100.0
    b = s_q / norm_q
    sv = np.linalg.svd(a.T @ b, compute_uv=False)
    return float(min(100.0, max(0.0, 100.0 * (1.0 - sv.sum()))))


def subset_loss(x: np.ndarray, subset, k: int, standardize: bool = False) -> float:
    """Loss of structural information when keeping only the columns in ``subset``."""
    xc = _prepare(x, standardize)
    subset = sorted(int(i) for i in subset)
    if len(subset) < k:
        raise DimensionMismatch(f"subset size {len(subset)} is smaller than k={k}")
    s = pca_scores(xc, k, centred=True)
    return procrustes_loss(s, pca_scores(xc[:, subset], k, centred=True, check_rank=False))


@dataclass
class PcaSubsetQuery:
    x: np.ndarray
    q: int
    k: int
    theta_prime: float = 0.0
    standardize: bool = False

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        n, p = self.x.shape
        if not 1 <= self.k <= self.q < p:
            raise DimensionMismatch(f"need 1 <= k <= q < p, got k={self.k}, q={self.q}, p={p}")
        if not n > self.k:
            raise DimensionMismatch(f"need n > k, got n={n}, k={self.k}")
        if not self.theta_prime >= 0:
            raise DataError(f"theta_prime must be >= 0, got {self.theta_prime}")


@dataclass
class PcaHackReport:
    min_loss: float
    optimal_subset: tuple[int, ...]
    num_within: int
    features_covered: int
    max_hamming: int
    theta_prime: float
    subsets: list[tuple[int, ...]] = field(default_factory=list, repr=False)
    losses: np.ndarray | None = field(default=None, repr=False)

    def at(self, theta_prime: float) -> tuple[int, int, int]:
        """``(num_within, features_covered, max_hamming)`` at another tolerance."""
        return _summarize(self.subsets, self.losses, self.optimal_subset, self.min_loss, theta_prime)

    def curves(self, grid) -> list[dict]:
        rows = []
        for t in grid:
            nw, fc, mh = self.at(float(t))
            rows.append({"theta_prime": float(t), "num_within": nw, "features_covered": fc, "max_hamming": mh})
        return rows

    def to_dict(self, include_losses: bool = False) -> dict:
        out = {
            "min_loss": self.min_loss,
            "optimal_subset": list(self.optimal_subset),
            "num_within": self.num_within,
            "features_covered": self.features_covered,
            "max_hamming": self.max_hamming,
            "theta_prime": self.theta_prime,
        }
        if include_losses:
            out["per_subset_losses"] = [
                {"subset": list(s), "loss": float(v)} for s, v in zip(self.subsets, self.losses)
            ]
        return out


def _summarize(subsets, losses, optimal, min_loss, theta_prime) -> tuple[int, int, int]:
    within = np.flatnonzero(losses <= min_loss + theta_prime + WITHIN_TOL)
    opt = set(optimal)
    covered: set[int] = set()
    max_ham = 0
    q = len(optimal)
    for i in within:
        s = subsets[i]
        covered.update(s)
        max_ham = max(max_ham, 2 * (q - len(opt.intersection(s))))
    return int(within.size), len(covered), max_ham


def subset_hacking_report(query: PcaSubsetQuery, cap: int = DEFAULT_CAP) -> PcaHackReport:
    """Exhaustive enumeration of ``q``-subsets with the three summary statistics."""
    n, p = query.x.shape
    total = math.comb(p, query.q)
    if total > cap:
        raise SubsetSpaceTooLarge(f"C({p},{query.q}) = {total} subsets exceeds the cap of {cap}")
    xc = _prepare(query.x, query.standardize)
    s = pca_scores(xc, query.k, centred=True)
    subsets = list(combinations(range(p), query.q))
    losses = np.empty(total)
    for i, sub in enumerate(subsets):
        losses[i] = procrustes_loss(s, pca_scores(xc[:, list(sub)], query.k, centred=True, check_rank=False))
    best = int(np.argmin(losses))
    min_loss = float(losses[best])
    nw, fc, mh = _summarize(subsets, losses, subsets[best], min_loss, query.theta_prime)
    return PcaHackReport(min_loss, subsets[best], nw, fc, mh, query.theta_prime, subsets, losses)
