"""Pure-Python solver and DP kernels.

Reference implementation of everything in ``_kernels.pyx``. The two must
perform the same floating-point operations in the same order so that the
selected backend never changes results.
"""

import math

import numpy as np

INF = float("inf")


def _root(av, c, gm1, lo, hi):
    # s + c * s**gm1 = av, with h(lo) < 0 < h(hi) and h increasing on [lo, hi]
    s = hi
    for _ in range(200):
        if s <= 0.0:
            return 0.0  # bracket collapsed at subnormal scale
        sp = s ** gm1
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
        if abs(s_new - s) <= 4e-16 * s or hi - lo <= 4e-16 * hi:
            return s_new
        s = s_new
    return s


def bridge_prox(v, a, gamma):
    """argmin_t 0.5 * (t - v)**2 + a * |t|**gamma."""
    if a <= 0.0 or v == 0.0:
        return v
    av = abs(v)
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
        s_star = (c * (1.0 - gamma)) ** (1.0 / (2.0 - gamma))
        if av <= s_star + c * s_star ** (gamma - 1.0):
            s = 0.0
        else:
            s = _root(av, c, gamma - 1.0, s_star, av)
            if 0.5 * (s - av) * (s - av) + a * s ** gamma >= 0.5 * av * av:
                s = 0.0
    return math.copysign(s, v)


def _objective(G, b, w, gamma, phi, p):
    quad = 0.0
    lin = 0.0
    pen = 0.0
    for j in range(p):
        gj = G[j]
        acc = 0.0
        for k in range(p):
            acc += gj[k] * phi[k]
        quad += phi[j] * acc
        lin += b[j] * phi[j]
        if gamma == 1.0:
            pen += abs(phi[j])
        else:
            pen += abs(phi[j]) ** gamma
    return quad - 2.0 * lin + w * pen


def cd_lasso(G, b, w, phi0, max_iter, tol, hist=None):
    """Cyclic coordinate descent for ``phi'G phi - 2 b'phi + w * ||phi||_1``.

    Coordinates are visited in ascending order. Returns
    ``(phi, iterations, converged, n_hist)``; when ``hist`` is given the
    objective after each sweep is written to it (entry 0 is the start).
    """
    p = len(b)
    G = np.asarray(G, dtype=float).tolist()
    b = np.asarray(b, dtype=float).tolist()
    phi = np.asarray(phi0, dtype=float).tolist()
    half_w = 0.5 * w
    n_hist = 0
    if hist is not None:
        hist[0] = _objective(G, b, w, 1.0, phi, p)
        n_hist = 1
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        max_change = 0.0
        for j in range(p):
            gj = G[j]
            gjj = gj[j]
            old = phi[j]
            if gjj <= 0.0:
                new = 0.0
            else:
                r = b[j]
                for k in range(p):
                    if k != j:
                        r -= gj[k] * phi[k]
                if r > half_w:
                    new = (r - half_w) / gjj
                elif r < -half_w:
                    new = (r + half_w) / gjj
                else:
                    new = 0.0
            phi[j] = new
            change = abs(new - old)
            if change > max_change:
                max_change = change
        if hist is not None:
            hist[n_hist] = _objective(G, b, w, 1.0, phi, p)
            n_hist += 1
        if max_change < tol:
            converged = True
            break
    return np.array(phi), it, converged, n_hist


def _smooth(G, b, phi, p):
    quad = 0.0
    lin = 0.0
    for j in range(p):
        gj = G[j]
        acc = 0.0
        for k in range(p):
            acc += gj[k] * phi[k]
        quad += phi[j] * acc
        lin += b[j] * phi[j]
    return quad - 2.0 * lin


def prox_grad(G, b, w, gamma, phi0, step0, shrink, max_iter, tol, hist=None):
    """Proximal gradient with backtracking for ``phi'G phi - 2 b'phi + w * sum |phi|**gamma``.

    ``step0`` must be a safe step (at most one over the gradient Lipschitz
    constant); trial steps start above the previous accepted one and shrink
    by ``shrink`` until the quadratic upper bound holds. Any step at or below
    ``step0`` is accepted outright.
    """
    p = len(b)
    G = np.asarray(G, dtype=float).tolist()
    b = np.asarray(b, dtype=float).tolist()
    phi = np.asarray(phi0, dtype=float).tolist()
    step_max = step0 * 1024.0
    t = step0
    grad = [0.0] * p
    z = [0.0] * p
    n_hist = 0
    if hist is not None:
        hist[0] = _objective(G, b, w, gamma, phi, p)
        n_hist = 1
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        for j in range(p):
            gj = G[j]
            acc = 0.0
            for k in range(p):
                acc += gj[k] * phi[k]
            grad[j] = 2.0 * (acc - b[j])
        f_phi = _smooth(G, b, phi, p)
        t = t / shrink
        if t > step_max:
            t = step_max
        while True:
            lin = 0.0
            dist2 = 0.0
            for j in range(p):
                z[j] = bridge_prox(phi[j] - t * grad[j], t * w, gamma)
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
            change = abs(z[j] - phi[j])
            if change > max_change:
                max_change = change
            phi[j] = z[j]
        if hist is not None:
            hist[n_hist] = _objective(G, b, w, gamma, phi, p)
            n_hist += 1
        if max_change < tol:
            converged = True
            break
    return np.array(phi), it, converged, n_hist


def dp_suffix(C, k, min_len):
    """Suffix dynamic program over a window cost matrix.

    ``C[s, e]`` is the cost of rows ``s .. e - 1`` (``inf`` when unavailable).
    ``B[j, s]`` is the best cost of covering rows ``s .. n - 1`` with ``j``
    segments and ``A[j, s]`` the smallest end index attaining it.
    """
    C = np.asarray(C, dtype=float)
    n = C.shape[0] - 1
    B = np.full((k + 2, n + 1), INF)
    A = np.full((k + 2, n + 1), -1, dtype=np.int64)
    rows = C.tolist()
    for s in range(n - min_len + 1):
        B[1, s] = rows[s][n]
        A[1, s] = n
    prev = B[1].tolist()
    for j in range(2, k + 2):
        cur = [INF] * (n + 1)
        arg = [-1] * (n + 1)
        e_hi = n - (j - 1) * min_len
        for s in range(e_hi - min_len + 1):
            row = rows[s]
            best = INF
            best_e = -1
            for e in range(s + min_len, e_hi + 1):
                val = row[e] + prev[e]
                if val < best:
                    best = val
                    best_e = e
            cur[s] = best
            arg[s] = best_e
        B[j] = cur
        A[j] = arg
        prev = cur
    return B, A
