# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot loops; see ``_pykernels`` for the reference."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, sqrt, M_PI, INFINITY

cnp.import_array()

cdef double _TAU = 1e-12


def smo_solve(Q, p, y, double C, double delta, alpha0, double eps=1e-10, long max_iter=100000):
    cdef double[:, ::1] q = np.ascontiguousarray(Q, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    alpha_arr = np.array(alpha0, dtype=np.float64)
    grad_arr = np.ascontiguousarray(Q @ alpha_arr + p, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] grad = grad_arr
    cdef Py_ssize_t n = alpha.shape[0]
    cdef Py_ssize_t t, i, j
    cdef long it
    cdef double gmax, gmin, score, b, a, obj, best
    cdef double ai_old, aj_old, ai, aj, quad, d, diff, total, dai, daj
    cdef bint converged = False
    with nogil:
        it = 0
        while it < max_iter:
            i = -1
            gmax = -INFINITY
            for t in range(n):
                if (yv[t] > 0 and alpha[t] < C) or (yv[t] < 0 and alpha[t] > 0):
                    score = -yv[t] * grad[t]
                    if score > gmax:
                        gmax = score
                        i = t
            gmin = INFINITY
            j = -1
            best = INFINITY
            if i >= 0:
                for t in range(n):
                    if (yv[t] > 0 and alpha[t] > 0) or (yv[t] < 0 and alpha[t] < C):
                        score = -yv[t] * grad[t]
                        if score < gmin:
                            gmin = score
                        b = gmax - score
                        if b > 0:
                            a = q[i, i] + q[t, t] - 2.0 * yv[i] * yv[t] * q[i, t]
                            if a <= 0:
                                a = _TAU
                            obj = -(b * b) / a
                            if obj < best:
                                best = obj
                                j = t
            if i < 0 or j < 0 or gmax - gmin < eps:
                converged = True
                break
            ai_old = alpha[i]
            aj_old = alpha[j]
            if yv[i] != yv[j]:
                quad = q[i, i] + q[j, j] + 2.0 * q[i, j]
                if quad <= 0:
                    quad = _TAU
                d = (-grad[i] - grad[j]) / quad
                diff = ai_old - aj_old
                ai = ai_old + d
                aj = aj_old + d
                if diff > 0:
                    if aj < 0:
                        aj = 0.0
                        ai = diff
                elif ai < 0:
                    ai = 0.0
                    aj = -diff
                if diff > 0:
                    if ai > C:
                        ai = C
                        aj = C - diff
                elif aj > C:
                    aj = C
                    ai = C + diff
            else:
                quad = q[i, i] + q[j, j] - 2.0 * q[i, j]
                if quad <= 0:
                    quad = _TAU
                d = (grad[i] - grad[j]) / quad
                total = ai_old + aj_old
                ai = ai_old - d
                aj = aj_old + d
                if total > C:
                    if ai > C:
                        ai = C
                        aj = total - C
                elif aj < 0:
                    aj = 0.0
                    ai = total
                if total > C:
                    if aj > C:
                        aj = C
                        ai = total - C
                elif ai < 0:
                    ai = 0.0
                    aj = total
            alpha[i] = ai
            alpha[j] = aj
            dai = ai - ai_old
            daj = aj - aj_old
            for t in range(n):
                grad[t] += q[t, i] * dai + q[t, j] * daj
            it += 1
    return alpha_arr, grad_arr, int(it), bool(converged)


def nw_loo_predictions(z, y, double psi):
    cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0], m = zv.shape[1]
    pred_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] pred = pred_arr
    dist_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    cdef Py_ssize_t i, j, k
    cdef double s2 = psi * psi
    cdef double norm = 1.0 / sqrt(2.0 * M_PI * s2)
    cdef double dmin, dd, diff, w, num, den, worst = INFINITY, raw
    with nogil:
        for i in range(n):
            dmin = INFINITY
            for j in range(n):
                if j == i:
                    continue
                dd = 0.0
                for k in range(m):
                    diff = zv[i, k] - zv[j, k]
                    dd += diff * diff
                dist[j] = dd
                if dd < dmin:
                    dmin = dd
            num = 0.0
            den = 0.0
            for j in range(n):
                if j == i:
                    continue
                w = exp(-(dist[j] - dmin) / s2)
                num += w * yv[j]
                den += w
            pred[i] = num / den
            raw = norm * exp(-dmin / s2)
            if raw < worst:
                worst = raw
    if n < 2:
        worst = 0.0
    return pred_arr, float(worst)


def nw_predict(z, y, zq, double psi):
    cdef double[:, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] qv = np.ascontiguousarray(zq, dtype=np.float64)
    cdef Py_ssize_t n = zv.shape[0], m = zv.shape[1]
    dist_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    cdef Py_ssize_t j, k
    cdef double s2 = psi * psi
    cdef double dmin = INFINITY, dd, diff, w, num = 0.0, den = 0.0
    with nogil:
        for j in range(n):
            dd = 0.0
            for k in range(m):
                diff = zv[j, k] - qv[k]
                dd += diff * diff
            dist[j] = dd
            if dd < dmin:
                dmin = dd
        for j in range(n):
            w = exp(-(dist[j] - dmin) / s2)
            num += w * yv[j]
            den += w
    return float(num / den), float(exp(-dmin / s2) / sqrt(2.0 * M_PI * s2))
