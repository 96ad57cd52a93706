"""Pure-Python implementations of the hot loops.

These mirror ``_ckernels.pyx`` operation for operation and are used when the
compiled extension is unavailable or ``HACKINT_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import math

import numpy as np

_TAU = 1e-12
UNDERFLOW = 1e-300


def smo_solve(
    Q: np.ndarray,
    p: np.ndarray,
    y: np.ndarray,
    C: float,
    delta: float,
    alpha0: np.ndarray,
    eps: float = 1e-10,
    max_iter: int = 100_000,
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """Minimize ``0.5 a'Qa + p'a`` subject to ``0 <= a <= C`` and ``y'a = delta``.

    ``Q`` must already carry the label products ``y_i y_j``. ``alpha0`` must be
    feasible; ``delta`` is implied by it and kept only for signature parity.
    Working-set selection uses second-order information. Returns
    ``(alpha, gradient, iterations, converged)``.
    """
    Q = np.ascontiguousarray(Q, dtype=float)
    y = np.asarray(y, dtype=float)
    alpha = np.array(alpha0, dtype=float)
    grad = Q @ alpha + p
    diag = np.diag(Q).copy()
    for it in range(max_iter):
        # i: maximal violating index in the "up" set
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        score = -y * grad
        if not up.any() or not low.any():
            return alpha, grad, it, True
        up_scores = np.where(up, score, -np.inf)
        i = int(np.argmax(up_scores))
        gmax = up_scores[i]
        low_scores = np.where(low, score, np.inf)
        if gmax - low_scores.min() < eps:
            return alpha, grad, it, True
        b = gmax - low_scores
        a = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, _TAU)
        cand = low & (b > 0)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        if not cand[j]:
            return alpha, grad, it, True
        ai_old, aj_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] + 2.0 * Q[i, j]
            if quad <= 0:
                quad = _TAU
            d = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai, aj = ai_old + d, aj_old + d
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Q[i, j]
            if quad <= 0:
                quad = _TAU
            d = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai, aj = ai_old - d, aj_old + d
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * (ai - ai_old) + Q[:, j] * (aj - aj_old)
    return alpha, grad, max_iter, False


def nw_loo_predictions(z: np.ndarray, y: np.ndarray, psi: float) -> tuple[np.ndarray, float]:
    """Leave-one-out Nadaraya-Watson predictions for transformed points ``z``.

    Weights are ``exp(-d / psi^2) / sqrt(2 pi psi^2)`` with ``d`` the squared
    distance. Returns the predictions and the smallest over rows of the
    largest raw weight, so callers can detect underflow.
    """
    n = z.shape[0]
    s2 = psi * psi
    norm = 1.0 / math.sqrt(2.0 * math.pi * s2)
    diff = z[:, None, :] - z[None, :, :]
    d = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d, np.inf)
    dmin = d.min(axis=1)
    w = np.exp(-(d - dmin[:, None]) / s2)
    pred = (w @ y) / w.sum(axis=1)
    worst = float(np.min(norm * np.exp(-dmin / s2))) if n > 1 else 0.0
    return pred, worst


def nw_predict(z: np.ndarray, y: np.ndarray, zq: np.ndarray, psi: float) -> tuple[float, float]:
    """Nadaraya-Watson prediction at a transformed query ``zq``; also returns the largest raw weight."""
    s2 = psi * psi
    norm = 1.0 / math.sqrt(2.0 * math.pi * s2)
    diff = z - zq
    d = np.einsum("ij,ij->i", diff, diff)
    dmin = float(d.min())
    w = np.exp(-(d - dmin) / s2)
    return float(w @ y / w.sum()), norm * math.exp(-dmin / s2)
