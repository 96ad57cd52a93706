"""Hacking intervals for kernel regression under a learned Mahalanobis metric.

Predictions are Nadaraya-Watson averages with Gaussian weights
``exp(-d_A / psi^2) / sqrt(2 pi psi^2)`` where ``d_A = ||A (x_i - x_j)||^2``.
The training loss is the leave-one-out squared error. The interval is the
range of the prediction at ``x_new`` over metric matrices ``A`` whose loss
is at most ``theta``; it is found by a multi-start penalty method and is an
inner approximation (every endpoint has a feasible witness ``A``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import _backend
from .errors import AllWeightsUnderflow, DimensionMismatch, NoFeasiblePoint
from .interval import HackingInterval


def _validate(x, y, psi_d):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y, dtype=float).ravel()
    if x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
    if not psi_d > 0:
        raise DimensionMismatch(f"psi_d must be positive, got {psi_d}")
    return x, y


def kernel_predict(a, psi_d: float, x, y, query, exclude_self: bool = False) -> float:
    """Nadaraya-Watson prediction under metric ``a``.

    With ``exclude_self=True``, ``query`` is a training row index and that row
    is left out of the average.
    """
    x, y = _validate(x, y, psi_d)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if exclude_self:
        idx = int(query)
        keep = np.arange(x.shape[0]) != idx
        point, x, y = x[idx], x[keep], y[keep]
    else:
        point = np.asarray(query, dtype=float).ravel()
    if point.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"query has length {point.shape[0]}, expected {x.shape[1]}")
    pred, top = _backend.nw_predict(x @ a.T, y, a @ point, float(psi_d))
    if not top >= _backend.UNDERFLOW:
        raise AllWeightsUnderflow("every kernel weight underflows at the query")
    return pred


def kernel_loss(a, psi_d: float, x, y) -> float:
    """Leave-one-out squared error of the kernel regression under metric ``a``."""
    x, y = _validate(x, y, psi_d)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    pred, worst = _backend.nw_loo_predictions(x @ a.T, y, float(psi_d))
    if not worst >= _backend.UNDERFLOW:
        raise AllWeightsUnderflow("every kernel weight underflows for some training row")
    r = y - pred
    return float(r @ r)


@dataclass
class KernelOptions:
    restarts: int = 8
    max_iters: int = 60
    stages: int = 6
    penalty_start: float = 1.0
    penalty_growth: float = 10.0
    tol: float = 1e-9
    seed: int = 0


@dataclass
class MetricKernelSpec:
    x: np.ndarray
    y: np.ndarray
    x_new: np.ndarray
    psi_d: float
    theta: float
    a_init: np.ndarray | None = None
    opts: KernelOptions = field(default_factory=KernelOptions)

    def __post_init__(self):
        self.x, self.y = _validate(self.x, self.y, self.psi_d)
        self.x_new = np.asarray(self.x_new, dtype=float).ravel()
        p = self.x.shape[1]
        if self.x_new.shape[0] != p:
            raise DimensionMismatch(f"x_new has length {self.x_new.shape[0]}, expected {p}")
        if self.a_init is None:
            self.a_init = np.eye(p)
        self.a_init = np.atleast_2d(np.asarray(self.a_init, dtype=float))
        if self.a_init.shape != (p, p):
            raise DimensionMismatch(f"a_init must be {p}x{p}")


class _Evaluator:
    """Cached (prediction, loss) pairs; underflow maps to an infinite loss."""

    def __init__(self, spec: MetricKernelSpec):
        self.spec = spec
        self.p = spec.x.shape[1]
        self.cache: dict[bytes, tuple[float, float]] = {}

    def __call__(self, flat: np.ndarray) -> tuple[float, float]:
        key = flat.tobytes()
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        a = flat.reshape(self.p, self.p)
        s = self.spec
        try:
            loss = kernel_loss(a, s.psi_d, s.x, s.y)
            pred = kernel_predict(a, s.psi_d, s.x, s.y, s.x_new)
        except AllWeightsUnderflow:
            loss, pred = np.inf, np.nan
        self.cache[key] = (pred, loss)
        return pred, loss


def kernel_min_loss(spec: MetricKernelSpec, starts: list[np.ndarray] | None = None) -> tuple[np.ndarray, float]:
    """Best leave-one-out loss over metrics, by quasi-Newton from several starts."""
    ev = _Evaluator(spec)
    p = ev.p
    rng = np.random.default_rng(spec.opts.seed)
    starts = starts or [spec.a_init, np.eye(p), rng.normal(size=(p, p))]
    best_a, best = None, np.inf
    for a0 in starts:
        res = minimize(lambda v: min(ev(v)[1], 1e300), np.asarray(a0, dtype=float).ravel(), method="L-BFGS-B")
        loss = ev(res.x)[1]
        if loss < best:
            best_a, best = res.x.reshape(p, p), loss
    if best_a is None:
        raise AllWeightsUnderflow("kernel weights underflow at every start")
    return best_a, best


def _fd_grad(fun, v: np.ndarray) -> np.ndarray:
    g = np.zeros_like(v)
    for i in range(v.size):
        h = 1e-5 * (1.0 + abs(v[i]))
        e = np.zeros_like(v)
        e[i] = h
        g[i] = (fun(v + e) - fun(v - e)) / (2.0 * h)
    return g


def _penalty_descent(ev: _Evaluator, v0: np.ndarray, s: int, theta: float, opts: KernelOptions, record) -> np.ndarray:
    v = v0.copy()
    mu = opts.penalty_start
    for _ in range(opts.stages):

        def obj(w, mu=mu):
            pred, loss = ev(w)
            record(w, pred, loss)
            if not np.isfinite(loss):
                return np.inf
            return s * pred + mu * max(0.0, loss / theta - 1.0) ** 2

        step = 1.0
        f = obj(v)
        for _ in range(opts.max_iters):
            g = _fd_grad(obj, v)
            gn = float(g @ g)
            if not np.isfinite(gn) or gn == 0.0:
                break
            step *= 2.0
            while step > 1e-14:
                trial = v - step * g
                ft = obj(trial)
                if ft <= f - 1e-4 * step * gn:
                    break
                step *= 0.5
            else:
                break
            if abs(f - ft) < opts.tol * (1.0 + abs(f)):
                v, f = trial, ft
                break
            v, f = trial, ft
        mu *= opts.penalty_growth
    return v


def kernel_hacking_interval(spec: MetricKernelSpec, min_loss: tuple[np.ndarray, float] | None = None) -> HackingInterval:
    """Inner approximation of the prediction range at ``x_new`` over feasible metrics.

    Raises :class:`NoFeasiblePoint` when even the best metric found exceeds
    ``theta``. Witness matrices are flattened row-major in the output.
    """
    opts = spec.opts
    ev = _Evaluator(spec)
    p = ev.p
    a_min, loss_min = min_loss if min_loss is not None else kernel_min_loss(spec)
    if loss_min > spec.theta:
        raise NoFeasiblePoint(f"best metric loss {loss_min:.6g} exceeds theta={spec.theta:.6g}")
    centre = ev(a_min.ravel())[0]
    best = {1: (centre, a_min.ravel().copy()), -1: (centre, a_min.ravel().copy())}

    def record(w, pred, loss):
        if loss <= spec.theta and np.isfinite(pred):
            if pred < best[1][0]:
                best[1] = (pred, w.copy())
            if pred > best[-1][0]:
                best[-1] = (pred, w.copy())

    rng = np.random.default_rng(opts.seed)
    starts = [spec.a_init.ravel(), np.eye(p).ravel(), np.zeros(p * p), a_min.ravel()]
    while len(starts) < opts.restarts:
        starts.append(rng.normal(size=p * p))
    starts = starts[: max(1, opts.restarts)]
    for s in (1, -1):
        for v0 in starts:
            v = _penalty_descent(ev, v0, s, spec.theta, opts, record)
            # pull an infeasible end point back toward the minimizer along a line
            if ev(v)[1] > spec.theta:
                lo, hi = 0.0, 1.0
                for _ in range(40):
                    mid = 0.5 * (lo + hi)
                    w = (1 - mid) * a_min.ravel() + mid * v
                    pred, loss = ev(w)
                    record(w, pred, loss)
                    if loss <= spec.theta:
                        lo = mid
                    else:
                        hi = mid
    lower, w_lo = best[1]
    upper, w_hi = best[-1]
    return HackingInterval(
        lower=lower,
        upper=upper,
        stat_at_min_loss=centre,
        theta=spec.theta,
        witness_lower=w_lo,
        witness_upper=w_hi,
        info={
            "kind": "kernel",
            "min_loss": loss_min,
            "inner_approximation": True,
            "evaluations": len(ev.cache),
            "layout": {"A": [0, p * p], "shape": [p, p], "order": "row-major"},
        },
    )
