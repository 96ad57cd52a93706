"""Tethered hacking intervals for linear SVM decision values.

The loss is ``0.5 ||lam||^2 + psi * sum_i (1 - y_i (lam . x_i + lam0))_+``.
For a query ``x_new`` the extremes of ``lam . x_new + lam0`` over models with
loss at most ``theta`` are found through the Lagrange dual

    max_{alpha, beta}  -a / (2 beta) + sum(alpha) - beta * theta
    s.t.  0 <= alpha_i <= beta * psi,  sum_i alpha_i y_i = s,

with ``a = ||-s x_new + sum_i alpha_i y_i x_i||^2``. Direction ``s = +1`` gives
the minimum; ``s = -1`` gives the negated maximum.

Substituting ``alpha = beta * alpha'`` makes the quadratic term and the box
independent of ``beta``: for fixed ``beta`` the inner problem is a standard
SVM-type QP in ``alpha'`` (solved by SMO), and the dual value is concave in
``beta``, which is maximized by a bracketed 1-d search on ``log beta``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from . import _backend
from .errors import DimensionMismatch, DualStall, SingleClass
from .interval import HackingInterval, check_theta

GAP_TOL = 1e-4


def _check_problem(x: np.ndarray, y: np.ndarray, psi_d: float) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatch("x contains non-finite entries")
    if not np.all((y == 1) | (y == -1)):
        raise DimensionMismatch("labels must be -1 or +1")
    if np.all(y == 1) or np.all(y == -1):
        raise SingleClass("both classes must be present")
    if not psi_d > 0:
        raise DimensionMismatch(f"psi_d must be positive, got {psi_d}")
    return x, y


def svm_loss(lam: np.ndarray, lam0: float, x: np.ndarray, y: np.ndarray, psi_d: float) -> float:
    """Regularized hinge loss of the hyperplane ``(lam, lam0)``."""
    hinge = np.maximum(0.0, 1.0 - y * (x @ lam + lam0))
    return 0.5 * float(lam @ lam) + psi_d * float(hinge.sum())


class _InterceptProfile:
    """Hinge part of the loss as an exact piecewise-linear function of the intercept.

    With margins ``m = x @ lam`` the term for row ``i`` has its kink at
    ``b_i = y_i - m_i``; positive rows are active left of the kink and
    negative rows right of it.
    """

    def __init__(self, margins: np.ndarray, y: np.ndarray, psi_d: float):
        kinks = y - margins
        self.psi = psi_d
        self.pos = np.sort(kinks[y > 0])
        self.neg = np.sort(kinks[y < 0])
        self.cum_pos = np.concatenate([[0.0], np.cumsum(self.pos)])
        self.cum_neg = np.concatenate([[0.0], np.cumsum(self.neg)])
        self.points = np.sort(kinks)
        self.values = self(self.points)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        ip = np.searchsorted(self.pos, t, side="right")
        s_pos = (self.cum_pos[-1] - self.cum_pos[ip]) - t * (self.pos.size - ip)
        iN = np.searchsorted(self.neg, t, side="left")
        s_neg = t * iN - self.cum_neg[iN]
        return self.psi * (s_pos + s_neg)

    def minimum(self) -> tuple[float, float]:
        k = int(np.argmin(self.values))
        return float(self.points[k]), float(self.values[k])

    def level_range(self, budget: float) -> tuple[float, float] | None:
        """Interval of intercepts with hinge part ``<= budget``, or None if empty."""
        pts, vals = self.points, self.values
        k = int(np.argmin(vals))
        if vals[k] > budget:
            return None
        # left end: h is nonincreasing on pts[:k+1]
        left = np.flatnonzero(vals[: k + 1] <= budget)[0]
        if left == 0:
            lo = pts[0] - (budget - vals[0]) / (self.psi * self.pos.size)
        else:
            a, b = pts[left - 1], pts[left]
            fa, fb = vals[left - 1], vals[left]
            lo = b if fa == fb else a + (fa - budget) * (b - a) / (fa - fb)
        right = k + np.flatnonzero(vals[k:] <= budget)[-1]
        if right == pts.size - 1:
            hi = pts[-1] + (budget - vals[-1]) / (self.psi * self.neg.size)
        else:
            a, b = pts[right], pts[right + 1]
            fa, fb = vals[right], vals[right + 1]
            hi = a if fa == fb else a + (budget - fa) * (b - a) / (fb - fa)
        return float(lo), float(hi)


@dataclass
class SvmModel:
    lam: np.ndarray
    lam0: float
    loss: float
    alpha: np.ndarray | None = None
    converged: bool = True

    def decision(self, x_new: np.ndarray) -> float:
        return float(np.asarray(x_new, dtype=float) @ self.lam + self.lam0)


def svm_min_loss(
    x: np.ndarray, y: np.ndarray, psi_d: float, eps: float = 1e-12, max_iter: int | None = None
) -> SvmModel:
    """Train the soft-margin linear SVM; returns the minimizer and its loss.

    The weight vector comes from the standard dual, the intercept from an
    exact minimization of the piecewise-linear hinge sum.
    """
    x, y = _check_problem(x, y, psi_d)
    n = x.shape[0]
    K = (y[:, None] * y[None, :]) * (x @ x.T)
    max_iter = max_iter or max(100_000, 200 * n)
    alpha, _, _, ok = _backend.smo_solve(K, -np.ones(n), y, float(psi_d), 0.0, np.zeros(n), eps, max_iter)
    lam = (alpha * y) @ x
    prof = _InterceptProfile(x @ lam, y, psi_d)
    lam0, hinge = prof.minimum()
    return SvmModel(lam, lam0, 0.5 * float(lam @ lam) + hinge, alpha, ok)


@dataclass
class SvmDualSolution:
    """Dual point for one direction plus the recovered primal hyperplane."""

    alpha: np.ndarray
    beta: float
    s: int
    lam: np.ndarray
    lam0: float
    objective: float
    statistic: float
    converged: bool = True
    repaired: bool = False
    lam0_kkt: float | None = None

    def check(self, x: np.ndarray, y: np.ndarray, psi_d: float, x_new: np.ndarray, theta: float) -> dict:
        """Residuals of the dual feasibility and recovery conditions."""
        box = float(max(0.0, -self.alpha.min(), (self.alpha - self.beta * psi_d).max()))
        eq = abs(float(self.alpha @ y) - self.s)
        recovered = (-self.s * np.asarray(x_new, dtype=float) + (self.alpha * y) @ x) / self.beta
        loss = svm_loss(self.lam, self.lam0, x, y, psi_d)
        return {
            "box_violation": box,
            "equality_violation": eq,
            "lambda_recovery_error": float(np.max(np.abs(recovered - self.lam))) if not self.repaired else None,
            "primal_loss": loss,
            "primal_feasible": loss <= theta * (1 + 1e-6),
        }


class _Direction:
    """Dual value ``g(beta)`` for one direction, in scaled variables ``alpha'``."""

    def __init__(self, K, x, y, psi_d, x_new, theta, s, eps, max_iter):
        self.K, self.x, self.y = K, x, y
        self.psi, self.theta, self.s = psi_d, theta, s
        self.x_new = x_new
        self.kx = y * (x @ x_new)
        self.xx = float(x_new @ x_new)
        self.eps, self.max_iter = eps, max_iter
        self.n_s = int(np.sum(y == s))
        self.beta_lo = 1.0 / (psi_d * self.n_s)
        self.cache: dict[float, tuple[float, np.ndarray, bool]] = {}
        self._last: tuple[float, np.ndarray] | None = None

    def _start(self, beta: float) -> np.ndarray:
        if self._last is not None:
            b_prev, a_prev = self._last
            scaled = a_prev * (b_prev / beta)
            if scaled.max() <= self.psi:
                return scaled
        a0 = np.zeros_like(self.y)
        a0[self.y == self.s] = 1.0 / (beta * self.n_s)
        return a0

    def __call__(self, u: float) -> float:
        if u in self.cache:
            return self.cache[u][0]
        beta = math.exp(u)
        p = -1.0 - (self.s / beta) * self.kx
        a, _, _, ok = _backend.smo_solve(
            self.K, p, self.y, self.psi, self.s / beta, self._start(beta), self.eps, self.max_iter
        )
        f = 0.5 * float(a @ (self.K @ a)) + float(p @ a)
        g = -beta * f - self.xx / (2.0 * beta) - beta * self.theta
        self.cache[u] = (g, a, ok)
        self._last = (beta, a)
        return g

    def maximize(self, span: float = 60.0) -> tuple[float, np.ndarray, float, bool]:
        u0 = math.log(self.beta_lo)
        step = 1.0
        a, b = u0, u0 + step
        ga, gb = self(a), self(b)
        if gb <= ga:
            lo, hi = u0, b
        else:
            while True:
                step *= 2.0
                c = b + step
                if c - u0 > span:
                    lo, hi = a, b + step / 2
                    break
                gc = self(c)
                if gc <= gb:
                    lo, hi = a, c
                    break
                a, b, gb = b, c, gc
        res = minimize_scalar(lambda u: -self(u), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        self(float(res.x))
        u_best = max(self.cache, key=lambda u: self.cache[u][0])
        g, alpha_s, ok = self.cache[u_best]
        return math.exp(u_best), alpha_s, g, ok


def _recover(
    direction: _Direction, beta: float, alpha_s: np.ndarray, base: SvmModel
) -> tuple[np.ndarray, float, bool, float | None]:
    x, y, psi, theta, s = direction.x, direction.y, direction.psi, direction.theta, direction.s
    lam = (alpha_s * y) @ x - s * direction.x_new / beta
    # intercept from an interior support vector, kept for reference
    interior = (alpha_s > 1e-9 * psi) & (alpha_s < psi * (1 - 1e-9))
    lam0_kkt = float(np.mean(y[interior] - x[interior] @ lam)) if interior.any() else None

    # a witness whose loss sits exactly on theta leaves the intercept range at
    # the mercy of rounding when the hinge minimum is flat, so keep a margin
    margin = 1e-10 * (1.0 + theta)

    def hinge_profile(lam_c: np.ndarray) -> tuple[_InterceptProfile, float]:
        return _InterceptProfile(x @ lam_c, y, psi), theta - 0.5 * float(lam_c @ lam_c)

    def slack(lam_c: np.ndarray) -> float:
        prof, budget = hinge_profile(lam_c)
        return budget - prof.minimum()[1]

    def best_intercept(lam_c: np.ndarray) -> float:
        prof, budget = hinge_profile(lam_c)
        lo, hi = prof.level_range(budget)
        b, b_min = (lo if s > 0 else hi), prof.minimum()[0]
        # the level-set end can overshoot theta by an ulp; step toward the minimizer
        for frac in (0.0, *np.logspace(-15, 0, 16)):
            cand = b + (b_min - b) * frac
            if svm_loss(lam_c, cand, x, y, psi) <= theta:
                return cand
        return b_min

    if slack(lam) >= margin:
        return lam, best_intercept(lam), False, lam0_kkt
    if slack(base.lam) < margin:
        return base.lam.copy(), base.lam0, True, lam0_kkt
    # blend toward the baseline minimizer until strictly feasible
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if slack((1 - mid) * base.lam + mid * lam) >= margin:
            lo = mid
        else:
            hi = mid
    lam_t = (1 - lo) * base.lam + lo * lam
    lam0 = best_intercept(lam_t)
    return lam_t, lam0, True, lam0_kkt


def svm_hacking_interval(
    x: np.ndarray,
    y: np.ndarray,
    psi_d: float,
    x_new: np.ndarray,
    theta: float,
    *,
    base: SvmModel | None = None,
    strict: bool = False,
    eps: float = 1e-12,
    max_iter: int | None = None,
    _K: np.ndarray | None = None,
) -> HackingInterval:
    """Range of the decision value at ``x_new`` over SVMs with loss <= theta.

    Reported endpoints are the decision values of primal-feasible witnesses;
    the dual objective values, which bound the true extremes from outside,
    are kept in ``info["outer"]``. If either direction misses the duality-gap
    tolerance the result is flagged ``info["degraded"]``; with ``strict=True``
    a :class:`DualStall` is raised instead.
    """
    x, y = _check_problem(x, y, psi_d)
    x_new = np.asarray(x_new, dtype=float).ravel()
    if x_new.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"x_new has length {x_new.shape[0]}, expected {x.shape[1]}")
    if base is None:
        base = svm_min_loss(x, y, psi_d)
    theta = check_theta(theta, base.loss)
    centre = base.decision(x_new)
    base_w = np.append(base.lam, base.lam0)
    if theta - base.loss <= 1e-12 * (1.0 + base.loss):
        return HackingInterval(
            centre, centre, centre, theta, base_w, base_w.copy(),
            info={"kind": "svm", "min_loss": base.loss, "outer": [centre, centre], "degraded": False,
                  "layout": {"lambda": [0, x.shape[1]], "lambda0": [x.shape[1], x.shape[1] + 1]}},
        )
    n = x.shape[0]
    K = _K if _K is not None else (y[:, None] * y[None, :]) * (x @ x.T)
    max_iter = max_iter or max(100_000, 200 * n)
    sols = {}
    degraded = not base.converged
    for s in (1, -1):
        d = _Direction(K, x, y, float(psi_d), x_new, theta, s, eps, max_iter)
        beta, alpha_s, g, ok = d.maximize()
        lam, lam0, repaired, lam0_kkt = _recover(d, beta, alpha_s, base)
        stat = float(lam @ x_new + lam0)
        sol = SvmDualSolution(beta * alpha_s, beta, s, lam, lam0, g, stat, ok, repaired, lam0_kkt)
        # primal value of the direction's minimization is s * stat >= g
        gap = s * stat - g
        if not ok or gap > GAP_TOL * (1.0 + abs(stat)):
            degraded = True
        sols[s] = (sol, gap)
    lo_sol, hi_sol = sols[1][0], sols[-1][0]
    out = HackingInterval(
        lower=lo_sol.statistic,
        upper=hi_sol.statistic,
        stat_at_min_loss=centre,
        theta=theta,
        witness_lower=np.append(lo_sol.lam, lo_sol.lam0),
        witness_upper=np.append(hi_sol.lam, hi_sol.lam0),
        info={
            "kind": "svm",
            "min_loss": base.loss,
            "outer": [lo_sol.objective, -hi_sol.objective],
            "duality_gap": [sols[1][1], sols[-1][1]],
            "degraded": degraded,
            "dual": {1: lo_sol, -1: hi_sol},
            "layout": {"lambda": [0, x.shape[1]], "lambda0": [x.shape[1], x.shape[1] + 1]},
        },
    )
    if degraded and strict:
        raise DualStall("SVM dual did not reach the duality-gap tolerance", result=out)
    return out


class SignClass(str, Enum):
    ALL_NEGATIVE = "AllNegative"
    STRADDLES = "Straddles"
    ALL_POSITIVE = "AllPositive"


def classify(interval: HackingInterval) -> SignClass:
    if interval.upper < 0:
        return SignClass.ALL_NEGATIVE
    if interval.lower > 0:
        return SignClass.ALL_POSITIVE
    return SignClass.STRADDLES


def thread_count() -> int:
    """Worker cap from ``HACKINT_THREADS`` (default: CPU count, at most 8)."""
    env = os.environ.get("HACKINT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


@dataclass
class BatchResult:
    intervals: list[HackingInterval]
    classes: list[SignClass]
    base: SvmModel
    theta: float
    degraded_rows: list[int] = field(default_factory=list)


def svm_interval_batch(
    x: np.ndarray,
    y: np.ndarray,
    psi_d: float,
    rel_tolerance: float,
    queries: np.ndarray,
    *,
    strict: bool = False,
    threads: int | None = None,
) -> BatchResult:
    """Per-row SVM hacking intervals at ``theta = (1 + rel_tolerance) * min loss``."""
    if not rel_tolerance >= 0:
        raise DimensionMismatch(f"rel_tolerance must be >= 0, got {rel_tolerance}")
    x, y = _check_problem(x, y, psi_d)
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if queries.shape[1] != x.shape[1]:
        raise DimensionMismatch(f"queries have {queries.shape[1]} columns, expected {x.shape[1]}")
    base = svm_min_loss(x, y, psi_d)
    theta = (1.0 + rel_tolerance) * base.loss
    K = (y[:, None] * y[None, :]) * (x @ x.T)

    def one(row: int) -> HackingInterval:
        try:
            return svm_hacking_interval(x, y, psi_d, queries[row], theta, base=base, strict=strict, _K=K)
        except DualStall as exc:
            raise DualStall(f"row {row}: {exc}", result=exc.result, row=row) from exc

    workers = threads or thread_count()
    if workers == 1 or len(queries) == 1:
        intervals = [one(i) for i in range(len(queries))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            intervals = list(pool.map(one, range(len(queries))))
    degraded = [i for i, iv in enumerate(intervals) if iv.info.get("degraded")]
    return BatchResult(intervals, [classify(iv) for iv in intervals], base, theta, degraded)
