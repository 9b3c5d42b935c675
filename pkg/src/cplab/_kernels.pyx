# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled solver and DP kernels.

Mirrors ``_kernels_py`` operation for operation; see that module for the
argument conventions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, pow, copysign, INFINITY

cnp.import_array()


cdef double _root(double av, double c, double gm1, double lo, double hi) noexcept nogil:
    cdef double s = hi, sp, h, dh, s_new
    cdef int i
    for i in range(200):
        if s <= 0.0:
            return 0.0
        sp = pow(s, gm1)
        h = s + c * sp - av
        if h > 0:
            hi = s
        elif h < 0:
            lo = s
        else:
            return s
        dh = 1.0 + c * gm1 * sp / s
        s_new = s - h / dh
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if fabs(s_new - s) <= 4e-16 * s or hi - lo <= 4e-16 * hi:
            return s_new
        s = s_new
    return s


cdef double _prox(double v, double a, double gamma) noexcept nogil:
    cdef double av, s, c, s_star
    if a <= 0.0 or v == 0.0:
        return v
    av = fabs(v)
    if gamma == 1.0:
        s = av - a
        if s < 0.0:
            s = 0.0
    elif gamma == 2.0:
        s = av / (1.0 + 2.0 * a)
    elif gamma > 1.0:
        s = _root(av, a * gamma, gamma - 1.0, 0.0, av)
    else:
        c = a * gamma
        s_star = pow(c * (1.0 - gamma), 1.0 / (2.0 - gamma))
        if av <= s_star + c * pow(s_star, gamma - 1.0):
            s = 0.0
        else:
            s = _root(av, c, gamma - 1.0, s_star, av)
            if 0.5 * (s - av) * (s - av) + a * pow(s, gamma) >= 0.5 * av * av:
                s = 0.0
    return copysign(s, v)


def bridge_prox(double v, double a, double gamma):
    return _prox(v, a, gamma)


cdef double _objective(double[:, ::1] G, double[::1] b, double w, double gamma,
                       double[::1] phi, Py_ssize_t p) noexcept nogil:
    cdef double quad = 0.0, lin = 0.0, pen = 0.0, acc
    cdef Py_ssize_t j, k
    for j in range(p):
        acc = 0.0
        for k in range(p):
            acc += G[j, k] * phi[k]
        quad += phi[j] * acc
        lin += b[j] * phi[j]
        if gamma == 1.0:
            pen += fabs(phi[j])
        else:
            pen += pow(fabs(phi[j]), gamma)
    return quad - 2.0 * lin + w * pen


cdef double _smooth(double[:, ::1] G, double[::1] b, double[::1] phi, Py_ssize_t p) noexcept nogil:
    cdef double quad = 0.0, lin = 0.0, acc
    cdef Py_ssize_t j, k
    for j in range(p):
        acc = 0.0
        for k in range(p):
            acc += G[j, k] * phi[k]
        quad += phi[j] * acc
        lin += b[j] * phi[j]
    return quad - 2.0 * lin


def cd_lasso(G_in, b_in, double w, phi0, long max_iter, double tol, hist=None):
    cdef double[:, ::1] G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    phi_arr = np.array(phi0, dtype=np.float64)
    cdef double[::1] phi = phi_arr
    cdef Py_ssize_t p = b.shape[0], j, k
    cdef double half_w = 0.5 * w, gjj, old, new, r, change, max_change
    cdef long it = 0
    cdef bint converged = False
    cdef bint record = hist is not None
    cdef double[::1] h
    cdef Py_ssize_t n_hist = 0
    if record:
        h = hist
        h[0] = _objective(G, b, w, 1.0, phi, p)
        n_hist = 1
    with nogil:
        while it < max_iter:
            it += 1
            max_change = 0.0
            for j in range(p):
                gjj = G[j, j]
                old = phi[j]
                if gjj <= 0.0:
                    new = 0.0
                else:
                    r = b[j]
                    for k in range(p):
                        if k != j:
                            r -= G[j, k] * phi[k]
                    if r > half_w:
                        new = (r - half_w) / gjj
                    elif r < -half_w:
                        new = (r + half_w) / gjj
                    else:
                        new = 0.0
                phi[j] = new
                change = fabs(new - old)
                if change > max_change:
                    max_change = change
            if record:
                h[n_hist] = _objective(G, b, w, 1.0, phi, p)
                n_hist += 1
            if max_change < tol:
                converged = True
                break
    return phi_arr, it, converged, n_hist


def prox_grad(G_in, b_in, double w, double gamma, phi0, double step0, double shrink,
              long max_iter, double tol, hist=None):
    cdef double[:, ::1] G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    phi_arr = np.array(phi0, dtype=np.float64)
    cdef double[::1] phi = phi_arr
    cdef Py_ssize_t p = b.shape[0], j, k
    cdef double[::1] grad = np.zeros(p)
    cdef double[::1] z = np.zeros(p)
    cdef double step_max = step0 * 1024.0, t = step0
    cdef double acc, f_phi, lin, dist2, d, change, max_change
    cdef long it = 0
    cdef bint converged = False
    cdef bint record = hist is not None
    cdef double[::1] h
    cdef Py_ssize_t n_hist = 0
    if record:
        h = hist
        h[0] = _objective(G, b, w, gamma, phi, p)
        n_hist = 1
    with nogil:
        while it < max_iter:
            it += 1
            for j in range(p):
                acc = 0.0
                for k in range(p):
                    acc += G[j, k] * phi[k]
                grad[j] = 2.0 * (acc - b[j])
            f_phi = _smooth(G, b, phi, p)
            t = t / shrink
            if t > step_max:
                t = step_max
            while True:
                lin = 0.0
                dist2 = 0.0
                for j in range(p):
                    z[j] = _prox(phi[j] - t * grad[j], t * w, gamma)
                    d = z[j] - phi[j]
                    lin += grad[j] * d
                    dist2 += d * d
                if t <= step0 or _smooth(G, b, z, p) <= f_phi + lin + dist2 / (2.0 * t):
                    break
                t *= shrink
                if t < step0:
                    t = step0
            max_change = 0.0
            for j in range(p):
                change = fabs(z[j] - phi[j])
                if change > max_change:
                    max_change = change
                phi[j] = z[j]
            if record:
                h[n_hist] = _objective(G, b, w, gamma, phi, p)
                n_hist += 1
            if max_change < tol:
                converged = True
                break
    return phi_arr, it, converged, n_hist


def dp_suffix(C_in, long k, long min_len):
    cdef double[:, ::1] C = np.ascontiguousarray(C_in, dtype=np.float64)
    cdef Py_ssize_t n = C.shape[0] - 1
    B_arr = np.full((k + 2, n + 1), np.inf)
    A_arr = np.full((k + 2, n + 1), -1, dtype=np.int64)
    cdef double[:, ::1] B = B_arr
    cdef long long[:, ::1] A = A_arr
    cdef Py_ssize_t s, e, j, e_hi, best_e
    cdef double best, val
    with nogil:
        for s in range(n - min_len + 1):
            B[1, s] = C[s, n]
            A[1, s] = n
        for j in range(2, k + 2):
            e_hi = n - (j - 1) * min_len
            for s in range(e_hi - min_len + 1):
                best = INFINITY
                best_e = -1
                for e in range(s + min_len, e_hi + 1):
                    val = C[s, e] + B[j - 1, e]
                    if val < best:
                        best = val
                        best_e = e
                B[j, s] = best
                A[j, s] = best_e
    return B_arr, A_arr
