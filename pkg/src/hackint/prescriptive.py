"""Prescriptively constrained hacking intervals.

Two families: k-nearest-neighbour predictions over a range of ``k``, and the
odds ratio of a treatment after adjusting for an unmeasured binary feature
whose prevalence in each arm is constrained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateDenominator, DimensionMismatch, EmptyRange, UnsupportedOrYu
from .interval import HackingInterval


def _as_xy(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if x.shape[0] < 1:
        raise DimensionMismatch("need at least one training row")
    return x, y


def neighbour_order(x: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row indices sorted by Euclidean distance to ``query``; ties keep row order."""
    d = np.sum((x - np.asarray(query, dtype=float)) ** 2, axis=1)
    return np.argsort(d, kind="stable")


@dataclass
class KnnSpec:
    x: np.ndarray
    y: np.ndarray
    x_new: np.ndarray
    k_min: int
    k_max: int

    def __post_init__(self):
        self.x, self.y = _as_xy(self.x, self.y)
        self.x_new = np.asarray(self.x_new, dtype=float).ravel()
        if self.x_new.shape[0] != self.x.shape[1]:
            raise DimensionMismatch(f"x_new has length {self.x_new.shape[0]}, expected {self.x.shape[1]}")
        n = self.x.shape[0]
        if not 1 <= self.k_min <= self.k_max <= n:
            raise EmptyRange(f"need 1 <= k_min <= k_max <= n={n}, got [{self.k_min}, {self.k_max}]")


def knn_interval(spec: KnnSpec) -> HackingInterval:
    """Range of the k-NN mean prediction at ``x_new`` over ``k`` in ``[k_min, k_max]``.

    Witnesses are the arg-min and arg-max ``k`` (smallest on ties); the per-k
    trace is in ``info["trace"]``.
    """
    order = neighbour_order(spec.x, spec.x_new)
    running = np.cumsum(spec.y[order])
    ks = np.arange(spec.k_min, spec.k_max + 1)
    preds = running[ks - 1] / ks
    i_lo, i_hi = int(np.argmin(preds)), int(np.argmax(preds))
    return HackingInterval(
        lower=float(preds[i_lo]),
        upper=float(preds[i_hi]),
        stat_at_min_loss=float("nan"),
        theta=float("nan"),
        witness_lower=np.array([ks[i_lo]]),
        witness_upper=np.array([ks[i_hi]]),
        info={"kind": "knn", "trace": [(int(k), float(v)) for k, v in zip(ks, preds)]},
    )


def loo_errors(x: np.ndarray, y: np.ndarray, k_values: np.ndarray) -> np.ndarray:
    """Leave-one-out sum of squared errors of k-NN for each ``k`` in ``k_values``."""
    n = x.shape[0]
    errs = np.zeros(len(k_values))
    for i in range(n):
        order = neighbour_order(x, x[i])
        order = order[order != i]
        running = np.cumsum(y[order])
        errs += (y[i] - running[k_values - 1] / k_values) ** 2
    return errs


def knn_select_kstar(x: np.ndarray, y: np.ndarray, k_range: tuple[int, int] | None = None) -> int:
    """``k`` minimizing leave-one-out squared error; ties go to the smallest ``k``.

    ``k_range`` defaults to ``[1, n - 1]``.
    """
    x, y = _as_xy(x, y)
    n = x.shape[0]
    if n < 2:
        raise DimensionMismatch("need at least two rows to select k")
    lo, hi = k_range if k_range is not None else (1, n - 1)
    if not 1 <= lo <= hi <= n - 1:
        raise EmptyRange(f"k range must lie in [1, {n - 1}], got [{lo}, {hi}]")
    ks = np.arange(lo, hi + 1)
    errs = loo_errors(x, y, ks)
    # exact ties are common with discrete outcomes; compare with a relative slack
    best = errs.min()
    tied = np.flatnonzero(errs <= best + 1e-12 * (1.0 + abs(best)))
    return int(ks[tied[0]])


def knn_window_sweep(
    x: np.ndarray, y: np.ndarray, x_new: np.ndarray, k_star: int, widths: range | list[int]
) -> list[tuple[int, int, int, HackingInterval]]:
    """Intervals for windows ``[k* - m, k* + m]`` clipped to ``[1, n]``."""
    x, y = _as_xy(x, y)
    n = x.shape[0]
    out = []
    for m in widths:
        lo, hi = max(1, k_star - m), min(n, k_star + m)
        out.append((int(m), lo, hi, knn_interval(KnnSpec(x, y, x_new, lo, hi))))
    return out


def adjustment_factor(or_yu: float, p0: float, p1: float) -> float:
    """Multiplicative change in the odds ratio from adjusting for a binary feature.

    ``p1`` and ``p0`` are the feature's prevalence among treated and control.
    """
    for name, v in (("p0", p0), ("p1", p1)):
        if not 0.0 <= v <= 1.0:
            raise DataError(f"{name} must lie in [0, 1], got {v}")
    num = (or_yu - 1.0) * p1 + 1.0
    den = (or_yu - 1.0) * p0 + 1.0
    if den <= 0 or num <= 0:
        raise DegenerateDenominator(f"adjustment factor undefined for or_yu={or_yu}, p0={p0}, p1={p1}")
    return num / den


@dataclass(frozen=True)
class FeatureHackConstraints:
    """Constraints on an unmeasured binary feature.

    ``c`` bounds ``|p1 - p0|`` and ``d`` is a lower bound on ``p0``.
    """

    or_yw_x: float
    or_yu: float
    c: float
    d: float = 0.0

    def __post_init__(self):
        if not self.or_yw_x > 0:
            raise DataError(f"or_yw_x must be positive, got {self.or_yw_x}")
        if not self.or_yu > 0:
            raise DataError(f"or_yu must be positive, got {self.or_yu}")
        if not 0.0 <= self.c <= 1.0:
            raise DataError(f"c must lie in [0, 1], got {self.c}")
        if not 0.0 <= self.d < 1.0:
            raise DataError(f"d must lie in [0, 1), got {self.d}")
        if self.c + self.d > 1.0 + 1e-12:
            raise DataError(f"c + d must not exceed 1, got {self.c + self.d}")


def af_grid_search(cons: FeatureHackConstraints, step: float = 1e-4) -> tuple[float, float, tuple, tuple]:
    """Extremes of the adjustment factor over a ``(p0, p1)`` grid.

    The grid covers ``p0 >= d``, ``|p1 - p0| <= c`` and ``p0, p1 in [0, 1]``.
    Returns ``(af_min, af_max, argmin, argmax)``.
    """
    m = int(round(1.0 / step))
    grid = np.arange(m + 1) / m
    p0 = grid[grid >= cons.d - 1e-12]
    k = cons.or_yu - 1.0
    den = k * p0 + 1.0
    # for fixed p0 the factor is monotone in p1, so only the ends of the p1 range matter
    p1_lo = np.maximum(0.0, p0 - cons.c)
    p1_hi = np.minimum(1.0, p0 + cons.c)
    p1_lo = np.ceil(p1_lo * m - 1e-9) / m + 0.0
    p1_hi = np.floor(p1_hi * m + 1e-9) / m + 0.0
    cand = np.concatenate([(k * p1_lo + 1.0) / den, (k * p1_hi + 1.0) / den])
    p0s = np.concatenate([p0, p0])
    p1s = np.concatenate([p1_lo, p1_hi])
    i_min, i_max = int(np.argmin(cand)), int(np.argmax(cand))
    return float(cand[i_min]), float(cand[i_max]), (p0s[i_min], p1s[i_min]), (p0s[i_max], p1s[i_max])


def af_extremes(cons: FeatureHackConstraints, clip: bool = True) -> tuple[float, float, tuple, tuple, dict]:
    """Closed-form extremes of the adjustment factor for ``or_yu > 1``.

    The maximum is at ``p0 = d, p1 = d + c``. For the minimum the unconstrained
    choice ``p0 = d, p1 = d - c`` leaves the unit interval when ``c > d``;
    with ``clip=True`` (default) the exact optimum over valid probabilities is
    returned instead, ``p0 = max(d, c), p1 = p0 - c``. ``clip=False`` keeps the
    unconstrained formula.
    """
    k = cons.or_yu - 1.0
    shift = k * cons.c / (k * cons.d + 1.0)
    af_max = 1.0 + shift
    arg_max = (cons.d, cons.d + cons.c)
    notes = {}
    if clip and cons.c > cons.d:
        p0 = min(1.0, cons.c)
        arg_min = (p0, p0 - cons.c)
        af_min = adjustment_factor(cons.or_yu, *arg_min)
        notes["min_clipped"] = True
    else:
        arg_min = (cons.d, cons.d - cons.c)
        af_min = 1.0 - shift
        notes["min_clipped"] = False
        if af_min <= 0:
            raise DegenerateDenominator("unclipped minimum adjustment factor is not positive")
    return af_min, af_max, arg_min, arg_max, notes


def new_feature_interval(
    cons: FeatureHackConstraints, clip: bool = True, allow_grid: bool = True, step: float = 1e-4
) -> HackingInterval:
    """Range of the adjusted odds ratio ``or_yw_x / AF`` under the constraints.

    For ``or_yu <= 1`` no closed form is used; the grid search answers instead
    (flagged in ``info``), or :class:`UnsupportedOrYu` is raised when
    ``allow_grid`` is False. Witnesses are the achieving ``(p0, p1)``.
    """
    if cons.or_yu > 1.0:
        af_min, af_max, arg_min, arg_max, notes = af_extremes(cons, clip=clip)
        method = "closed_form"
    elif allow_grid:
        af_min, af_max, arg_min, arg_max = af_grid_search(cons, step)
        notes = {}
        method = "grid"
    else:
        raise UnsupportedOrYu(f"closed form needs or_yu > 1, got {cons.or_yu}")
    return HackingInterval(
        lower=cons.or_yw_x / af_max,
        upper=cons.or_yw_x / af_min,
        stat_at_min_loss=cons.or_yw_x,
        theta=float("nan"),
        witness_lower=np.array(arg_max, dtype=float),
        witness_upper=np.array(arg_min, dtype=float),
        info={"kind": "feature", "method": method, "af_min": af_min, "af_max": af_max,
              "layout": {"p0": [0, 1], "p1": [1, 2]}, **notes},
    )


def new_feature_sweep(
    or_yw_x: float, d: float, c_values, or_yu_values, clip: bool = True
) -> list[dict]:
    """Intervals over a grid of ``c`` and ``or_yu``, sorted by ``(or_yu, c)``."""
    rows = []
    for oy in sorted(or_yu_values):
        for c in sorted(c_values):
            iv = new_feature_interval(FeatureHackConstraints(or_yw_x, oy, c, d), clip=clip)
            rows.append({"or_yu": float(oy), "c": float(c), "lower": iv.lower, "upper": iv.upper,
                         "width": iv.width, "interval": iv})
    return rows
