"""Brute-force estimates of tethered intervals for validating closed forms.

The oracle only ever reports statistic values of points it has checked to be
feasible, so its interval is an inner approximation of the true one.

Samples are drawn as a stream of fixed-size blocks: each block holds 1024
scrambled Sobol points over the box and 1024 Gaussian points around the loss
minimizer (from a generator keyed by ``(seed, block)``). A larger sample
budget therefore sees a superset of the points a smaller one sees. Local
polishing is triggered inside the stream whenever a block improves an
extreme, so it too depends only on the stream prefix, and the reported
interval can only grow as the budget grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import DataError, NoFeasibleSample
from .interval import HackingInterval

BLOCK = 1024
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class OracleBudget:
    samples: int = 100_000
    refine_steps: int = 20
    box: Sequence[tuple[float, float]] | np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise DataError("samples must be at least 1")
        if self.box is not None:
            box = np.asarray(self.box, dtype=float)
            if box.ndim != 2 or box.shape[1] != 2 or not np.all(np.isfinite(box)) or np.any(box[:, 0] >= box[:, 1]):
                raise DataError("box must be a finite (d, 2) array of increasing bounds")
            self.box = box


class _Problem:
    def __init__(self, loss, stat, theta, vectorized):
        self.loss, self.stat, self.theta = loss, stat, theta
        self.vectorized = vectorized

    def eval_many(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.vectorized:
            return np.asarray(self.loss(pts), dtype=float), np.asarray(self.stat(pts), dtype=float)
        lv = np.array([self.loss(p) for p in pts], dtype=float)
        sv = np.array([self.stat(p) for p in pts], dtype=float)
        return lv, sv

    def loss1(self, p: np.ndarray) -> float:
        return float(self.eval_many(p[None, :])[0][0])

    def stat1(self, p: np.ndarray) -> float:
        return float(self.eval_many(p[None, :])[1][0])

    def feasible(self, p: np.ndarray) -> bool:
        v = self.loss1(p)
        return bool(np.isfinite(v) and v <= self.theta)


def _axis_extent(prob: _Problem, c: np.ndarray, axis: int, sign: float, hi: float) -> float:
    """Largest step along ``sign * e_axis`` from feasible ``c`` found feasible (bisection)."""
    e = np.zeros_like(c)
    e[axis] = sign
    lo = 0.0
    step = hi
    for _ in range(60):
        if prob.feasible(c + step * e):
            lo = step
            step *= 2.0
            if step > 1e12:
                return lo
        else:
            break
    top = step
    for _ in range(60):
        mid = 0.5 * (lo + top)
        if prob.feasible(c + mid * e):
            lo = mid
        else:
            top = mid
    return lo


def _golden(f, a: float, b: float, iters: int = 40) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return c if fc <= fd else d


def _polish(prob: _Problem, p: np.ndarray, s: float, steps: int, scale: np.ndarray) -> np.ndarray:
    """Improve ``s * stat`` from feasible ``p`` without leaving the feasible set."""
    best = p.copy()
    best_v = s * prob.stat1(best)

    def objective(q):
        return s * prob.stat1(q) if prob.feasible(q) else np.inf

    for _ in range(steps):
        before = best_v
        for i in range(best.size):
            lo = -_axis_extent(prob, best, i, -1.0, scale[i] * 1e-3)
            hi = _axis_extent(prob, best, i, 1.0, scale[i] * 1e-3)
            if hi - lo <= 0:
                continue
            e = np.zeros_like(best)
            e[i] = 1.0
            t = _golden(lambda t: objective(best + t * e), lo, hi)
            cand = best + t * e
            v = objective(cand)
            if v < best_v:
                best, best_v = cand, v
        if before - best_v <= 1e-12 * (1.0 + abs(best_v)):
            break
    # a gradient-based constrained step, kept only if feasible and better
    try:
        res = minimize(
            lambda q: s * prob.stat1(q),
            best,
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": lambda q: prob.theta - prob.loss1(q)}],
            options={"maxiter": 200, "ftol": 1e-14},
        )
        cand = res.x
        if not prob.feasible(cand):
            # SLSQP tends to finish a rounding error outside; walk back toward best
            lo, hi = 0.0, 1.0
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if prob.feasible(best + mid * (cand - best)):
                    lo = mid
                else:
                    hi = mid
            cand = best + lo * (cand - best)
        if prob.feasible(cand) and s * prob.stat1(cand) < best_v:
            best = cand
    except (ValueError, ArithmeticError):
        pass
    return best


def brute_force_interval(
    loss: Callable,
    stat: Callable,
    theta: float,
    budget: OracleBudget,
    center: np.ndarray | None = None,
    vectorized: bool = True,
) -> HackingInterval:
    """Inner approximation of ``[min, max] stat`` over ``{loss <= theta}``.

    ``loss`` and ``stat`` map a parameter vector to a scalar, or an ``(m, d)``
    batch to ``(m,)`` when ``vectorized``. ``center`` seeds the search for the
    loss minimizer (defaults to the box centre). When ``budget.box`` is None
    the box is derived from the feasible extents along each axis.
    """
    prob = _Problem(loss, stat, float(theta), vectorized)
    if center is None:
        if budget.box is None:
            raise DataError("need a center or a box")
        center = budget.box.mean(axis=1)
    center = np.asarray(center, dtype=float).ravel()
    d = center.size
    res = minimize(prob.loss1, center, method="Powell", options={"xtol": 1e-12, "ftol": 1e-15, "maxfev": 200_000})
    c_min = res.x if prob.loss1(res.x) <= prob.loss1(center) else center
    min_loss = prob.loss1(c_min)

    rng_box = budget.box
    feasible_center = np.isfinite(min_loss) and min_loss <= prob.theta
    if feasible_center:
        scale = np.array(
            [max(_axis_extent(prob, c_min, i, 1.0, 1e-3), _axis_extent(prob, c_min, i, -1.0, 1e-3)) for i in range(d)]
        )
        scale = np.where(scale > 0, scale, 1e-6)
    else:
        scale = (rng_box[:, 1] - rng_box[:, 0]) / 4.0 if rng_box is not None else np.ones(d)
    if rng_box is None:
        rng_box = np.column_stack([c_min - 4.0 * scale, c_min + 4.0 * scale])

    sobol = qmc.Sobol(d, scramble=True, seed=budget.seed)
    n_blocks = max(1, math.ceil(budget.samples / (2 * BLOCK)))
    best = {1.0: (np.inf, None), -1.0: (np.inf, None)}
    if feasible_center:
        v = prob.stat1(c_min)
        best = {1.0: (v, c_min.copy()), -1.0: (-v, c_min.copy())}
    n_feasible = 0
    evaluated = 0
    for b in range(n_blocks):
        unit = sobol.random(BLOCK)
        pts = [qmc.scale(unit, rng_box[:, 0], rng_box[:, 1])]
        if feasible_center:
            g = np.random.default_rng([budget.seed, b])
            pts.append(c_min + g.standard_normal((BLOCK, d)) * scale)
        pts = np.vstack(pts)
        lv, sv = prob.eval_many(pts)
        evaluated += pts.shape[0]
        ok = np.isfinite(lv) & (lv <= prob.theta)
        n_feasible += int(ok.sum())
        if not ok.any():
            continue
        idx = np.flatnonzero(ok)
        for s in (1.0, -1.0):
            j = idx[np.argmin(s * sv[idx])]
            if s * sv[j] < best[s][0]:
                q = pts[j]
                if budget.refine_steps > 0:
                    q = _polish(prob, q, s, budget.refine_steps, scale)
                val = s * prob.stat1(q)
                best[s] = (val, q.copy()) if val < s * sv[j] else (s * sv[j], pts[j].copy())
    if best[1.0][1] is None:
        raise NoFeasibleSample(f"no sampled point has loss <= theta={theta:.6g} (best loss found {min_loss:.6g})")
    lo_v, lo_p = best[1.0]
    hi_v, hi_p = best[-1.0]
    return HackingInterval(
        lower=float(lo_v),
        upper=float(-hi_v),
        stat_at_min_loss=float(prob.stat1(c_min)),
        theta=float(theta),
        witness_lower=lo_p,
        witness_upper=hi_p,
        info={"kind": "oracle", "evaluated": evaluated, "feasible": n_feasible, "min_loss": min_loss,
              "inner_approximation": True},
    )
