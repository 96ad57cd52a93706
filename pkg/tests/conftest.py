"""Independent oracles shared by the test modules.

Each oracle is written from first principles and deliberately avoids the
code paths it checks (no QR, no eigh, no vectorized kernel sums).
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from hackint.data import Dataset


def gauss_solve(a, b):
    """Solve ``a x = b`` by Gaussian elimination with partial pivoting (pure Python)."""
    n = len(a)
    m = [list(map(float, a[i])) + [float(b[i])] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        m[col], m[piv] = m[piv], m[col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            for c in range(col, n + 1):
                m[r][c] -= f * m[col][c]
    x = [0.0] * n
    for r in range(n - 1, -1, -1):
        x[r] = (m[r][n] - sum(m[r][c] * x[c] for c in range(r + 1, n))) / m[r][r]
    return np.array(x)


def gauss_inverse(a):
    n = len(a)
    return np.column_stack([gauss_solve(a, np.eye(n)[:, j]) for j in range(n)])


def t_quantile(prob: float, df: float) -> float:
    """Student-t quantile through mpmath's regularized incomplete beta."""
    mpmath.mp.dps = 40

    def cdf(t):
        x = df / (df + t * t)
        tail = mpmath.betainc(df / 2, mpmath.mpf(1) / 2, 0, x, regularized=True) / 2
        return 1 - tail if t > 0 else tail

    return float(mpmath.findroot(lambda t: cdf(t) - prob, 1.0 if prob > 0.5 else -1.0))


def chi2_quantile(prob: float, df: float) -> float:
    mpmath.mp.dps = 40
    f = lambda x: mpmath.gammainc(df / 2, 0, x / 2, regularized=True) - prob  # noqa: E731
    return float(mpmath.findroot(f, (mpmath.mpf("1e-12"), mpmath.mpf(500)), solver="illinois"))


def jacobi_eigen(s, tol=1e-14, sweeps=100):
    """Cyclic Jacobi eigenvalues/vectors of a symmetric matrix, descending order."""
    a = np.array(s, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off < tol * max(1.0, np.abs(a).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                sn = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = sn, -sn
                a = rot.T @ a @ rot
                v = v @ rot
    vals = np.diag(a).copy()
    order = np.argsort(vals)[::-1]
    return vals[order], v[:, order]


def procrustes_oracle(x, subset, k):
    """Subset Procrustes loss via Jacobi PCA and a Jacobi-based nuclear norm."""
    xc = np.asarray(x, dtype=float) - np.mean(x, axis=0)

    def scores(m):
        _, vecs = jacobi_eigen(m.T @ m)
        return m @ vecs[:, :k]

    s = scores(xc)
    sq = scores(xc[:, list(subset)])
    if np.linalg.norm(sq) == 0:
        return 100.0
    a = s / math.sqrt((s * s).sum())
    b = sq / math.sqrt((sq * sq).sum())
    # nuclear norm of a^T b = sum of sqrt(eigenvalues of (a^T b)^T (a^T b))
    m = a.T @ b
    ev, _ = jacobi_eigen(m.T @ m)
    nuc = sum(math.sqrt(max(e, 0.0)) for e in ev)
    return min(100.0, max(0.0, 100.0 * (1.0 - nuc)))


def nw_direct(x, y, a, psi, query, skip=None):
    """Nadaraya-Watson prediction written as explicit loops."""
    a = np.atleast_2d(a)
    num = den = 0.0
    for i in range(len(y)):
        if i == skip:
            continue
        diff = a @ (np.asarray(x[i], dtype=float) - np.asarray(query, dtype=float))
        w = math.exp(-float(diff @ diff) / psi**2) / math.sqrt(2 * math.pi * psi**2)
        num += w * y[i]
        den += w
    return num / den


def svm_primal_oracle(x, y, psi, x_new, theta):
    """Exact primal extremes of the SVM decision value with cvxpy."""
    cp = pytest.importorskip("cvxpy")
    p = x.shape[1]
    lam, lam0 = cp.Variable(p), cp.Variable()
    loss = 0.5 * cp.sum_squares(lam) + psi * cp.sum(cp.pos(1 - cp.multiply(y, x @ lam + lam0)))
    out = []
    for sense in (cp.Minimize, cp.Maximize):
        prob = cp.Problem(sense(x_new @ lam + lam0), [loss <= theta])
        prob.solve(solver=cp.CLARABEL)
        out.append(float(prob.value))
    return tuple(out)


def svm_subgradient_min(x, y, psi, iters=200_000):
    """Min of the SVM objective: best iterate of subgradient descent with 1/t steps."""
    n, p = x.shape
    w = np.zeros(p + 1)
    best = np.inf
    xa = np.column_stack([x, np.ones(n)])
    for t in range(1, iters + 1):
        marg = y * (xa @ w)
        g = np.append(w[:p], 0.0) - psi * ((marg < 1) * y) @ xa
        w -= g / (t + 10)
        if t % 100 == 0:
            lam, lam0 = w[:p], w[p]
            best = min(best, 0.5 * lam @ lam + psi * np.maximum(0, 1 - y * (x @ lam + lam0)).sum())
    return best


def random_ate_data(rng, n, p):
    x = rng.normal(size=(n, p))
    w = (rng.random(n) < 0.5).astype(float)
    w[:2] = [0.0, 1.0]
    y = 1.5 * w + x @ rng.normal(size=p) + rng.normal(size=n)
    return Dataset(x, y, w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
