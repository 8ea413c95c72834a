"""numba kernels.  Loop-level twins of the vectorized code in ``_np``."""

import math

import numpy as np
from numba import njit, prange

_EPS = np.finfo(np.float64).eps


@njit(cache=True)
def project_simplex(v):
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = 0.0
    theta = 0.0
    for j in range(n):
        css += u[j]
        t = (css - 1.0) / (j + 1)
        if u[j] - t > 0.0:
            theta = t
    out = np.empty(n)
    for i in range(n):
        w = v[i] - theta
        out[i] = w if w > 0.0 else 0.0
    return out


@njit(cache=True, parallel=True)
def project_simplex_columns(v):
    out = np.empty_like(v)
    for j in prange(v.shape[1]):
        out[:, j] = project_simplex(np.ascontiguousarray(v[:, j]))
    return out


# relative tolerance within which a converged iterate beats the best-by-f one
F_SLACK = 1e-12


@njit(cache=True)
def _residual(z, b, y, out):
    d, k = z.shape
    for r in range(d):
        out[r] = -y[r]
    for c in range(k):
        bc = b[c]
        if bc != 0.0:
            for r in range(d):
                out[r] += z[r, c] * bc


@njit(cache=True)
def _gradient(z, res, out):
    d, k = z.shape
    for c in range(k):
        s = 0.0
        for r in range(d):
            s += z[r, c] * res[r]
        out[c] = s


@njit(cache=True)
def _kkt(b, g):
    step = b - g
    p = project_simplex(step)
    worst = 0.0
    for i in range(b.shape[0]):
        e = abs(b[i] - p[i])
        if e > worst:
            worst = e
    return worst


# every POLISH_EVERY iterations the current support is solved exactly
POLISH_EVERY = 25


@njit(cache=True)
def _face_solve(z, y, b):
    """Exact minimizer over the face spanned by ``b``'s support.

    Equality-constrained least squares on the support; the most negative
    coefficient is dropped and the solve repeated until all are >= 0.
    """
    d, k = z.shape
    support = np.empty(k, dtype=np.int64)
    s = 0
    for i in range(k):
        if b[i] > 0.0:
            support[s] = i
            s += 1
    c = np.zeros(k)
    while s > 0:
        coef = np.empty(s)
        if s == 1:
            coef[0] = 1.0
        else:
            j0 = support[0]
            m = np.empty((d, s - 1))
            rhs = np.empty(d)
            for r in range(d):
                rhs[r] = y[r] - z[r, j0]
                for t in range(1, s):
                    m[r, t - 1] = z[r, support[t]] - z[r, j0]
            w = np.linalg.lstsq(m, rhs)[0]
            acc = 0.0
            for t in range(1, s):
                coef[t] = w[t - 1]
                acc += w[t - 1]
            coef[0] = 1.0 - acc
        worst = 0
        for t in range(1, s):
            if coef[t] < coef[worst]:
                worst = t
        if coef[worst] >= 0.0:
            for t in range(s):
                c[support[t]] = coef[t]
            break
        for t in range(worst, s - 1):
            support[t] = support[t + 1]
        s -= 1
    return c


@njit(cache=True)
def apg_single(z, y, b0, lipschitz, tol, max_iter):
    """Accelerated projected gradient with function-value restart for one rhs.

    Returns ``(b_best, f_best, iterations, converged)``; ``f = 0.5 * ||z b - y||^2``.
    """
    d, k = z.shape
    b = project_simplex(b0.copy())
    res = np.empty(d)
    _residual(z, b, y, res)
    g = np.empty(k)
    _gradient(z, res, g)
    f = 0.5 * np.dot(res, res)
    best_b = b.copy()
    best_f = f
    if _kkt(b, g) < tol:
        return best_b, best_f, 0, True

    yk = b.copy()
    res_y = res.copy()
    g_y = g.copy()
    t = 1.0
    res_n = np.empty(d)
    g_n = np.empty(k)
    inv_l = 1.0 / lipschitz
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        bn = project_simplex(yk - inv_l * g_y)
        _residual(z, bn, y, res_n)
        fn = 0.5 * np.dot(res_n, res_n)
        if fn > f and t > 1.0:
            # momentum overshot: restart from the last accepted iterate
            t = 1.0
            yk[:] = b
            res_y[:] = res
            g_y[:] = g
            continue
        _gradient(z, res_n, g_n)
        t_n = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        beta = (t - 1.0) / t_n
        for i in range(k):
            yk[i] = bn[i] + beta * (bn[i] - b[i])
            g_y[i] = g_n[i] + beta * (g_n[i] - g[i])
        for r in range(d):
            res_y[r] = res_n[r] + beta * (res_n[r] - res[r])
        b = bn
        res[:] = res_n
        g[:] = g_n
        f = fn
        t = t_n
        if f < best_f:
            best_f = f
            best_b[:] = b
        if it % POLISH_EVERY == 0:
            c = _face_solve(z, y, b)
            _residual(z, c, y, res_n)
            fc = 0.5 * np.dot(res_n, res_n)
            _gradient(z, res_n, g_n)
            if _kkt(c, g_n) < tol and fc <= best_f * (1.0 + F_SLACK):
                best_b[:] = c
                best_f = fc
                converged = True
                break
            if fc < f:
                # adopt the face solution and restart momentum there
                b = c
                res[:] = res_n
                g[:] = g_n
                f = fc
                t = 1.0
                yk[:] = b
                res_y[:] = res
                g_y[:] = g
                if f < best_f:
                    best_f = f
                    best_b[:] = b
        if _kkt(b, g) < tol:
            converged = True
            # near the optimum f differs between iterates only by rounding;
            # prefer the iterate that passed the optimality test
            if f <= best_f * (1.0 + F_SLACK):
                best_b[:] = b
                best_f = f
            break
    return best_b, best_f, it, converged


@njit(cache=True, parallel=True)
def apg_batch(z, y, b0, lipschitz, tol, max_iter):
    """Solve ``min ||z b - y[:, j]||`` over the simplex for every column ``j``."""
    n = y.shape[1]
    k = z.shape[1]
    zc = np.ascontiguousarray(z)
    out = np.empty((k, n))
    fvals = np.empty(n)
    iters = np.empty(n, dtype=np.int64)
    conv = np.empty(n, dtype=np.bool_)
    for j in prange(n):
        bj, fj, itj, cj = apg_single(
            zc, np.ascontiguousarray(y[:, j]), np.ascontiguousarray(b0[:, j]),
            lipschitz, tol[j], max_iter)
        out[:, j] = bj
        fvals[j] = fj
        iters[j] = itj
        conv[j] = cj
    return out, fvals, iters, conv


@njit(cache=True, parallel=True)
def argmax_projections(dirs, xt):
    """Index of the column of ``x`` maximizing each direction's inner product.

    ``dirs`` is (m, d), ``xt`` is x transposed (n, d).  Ties go to the lowest index.
    """
    m, d = dirs.shape
    n = xt.shape[0]
    winners = np.empty(m, dtype=np.int64)
    for i in prange(m):
        best = -np.inf
        arg = 0
        for j in range(n):
            s = 0.0
            for r in range(d):
                s += dirs[i, r] * xt[j, r]
            if s > best:
                best = s
                arg = j
        winners[i] = arg
    return winners


@njit(cache=True)
def householder_qr(a, drop_tol):
    """Householder QR that skips columns whose remaining norm is <= drop_tol.

    Returns ``(Q, R, pivots)`` where ``pivots[t]`` is the column that produced
    reflector ``t``; ``R`` has one row per kept column.
    """
    m, n = a.shape
    w = a.copy()
    vs = np.zeros((m, min(m, n)))
    pivots = np.empty(min(m, n), dtype=np.int64)
    r = 0
    for j in range(n):
        if r == m:
            break
        nrm = 0.0
        for i in range(r, m):
            nrm += w[i, j] * w[i, j]
        nrm = math.sqrt(nrm)
        if nrm <= drop_tol:
            continue
        alpha = -nrm if w[r, j] >= 0.0 else nrm
        vnorm2 = 0.0
        for i in range(r, m):
            vs[i, r] = w[i, j]
        vs[r, r] -= alpha
        for i in range(r, m):
            vnorm2 += vs[i, r] * vs[i, r]
        vn = math.sqrt(vnorm2)
        for i in range(r, m):
            vs[i, r] /= vn
        for c in range(j, n):
            s = 0.0
            for i in range(r, m):
                s += vs[i, r] * w[i, c]
            for i in range(r, m):
                w[i, c] -= 2.0 * s * vs[i, r]
        w[r, j] = alpha
        for i in range(r + 1, m):
            w[i, j] = 0.0
        pivots[r] = j
        r += 1

    q = np.zeros((m, r))
    for i in range(r):
        q[i, i] = 1.0
    for t in range(r - 1, -1, -1):
        for c in range(r):
            s = 0.0
            for i in range(t, m):
                s += vs[i, t] * q[i, c]
            for i in range(t, m):
                q[i, c] -= 2.0 * s * vs[i, t]
    return q, w[:r, :].copy(), pivots[:r].copy()


@njit(cache=True)
def _pythag(a, b):
    a = abs(a)
    b = abs(b)
    if a > b:
        return a * math.sqrt(1.0 + (b / a) ** 2)
    if b == 0.0:
        return 0.0
    return b * math.sqrt(1.0 + (a / b) ** 2)


@njit(cache=True)
def svd_golub_kahan(a, max_sweeps):
    """Golub-Kahan bidiagonalization + implicit-shift QR on the bidiagonal.

    ``a`` must have ``m >= n``.  Returns unsorted ``(U, w, V, sweeps, ok)``.
    """
    m, n = a.shape
    u = a.copy()
    w = np.zeros(n)
    v = np.zeros((n, n))
    rv1 = np.zeros(n)
    g = 0.0
    scale = 0.0
    anorm = 0.0
    l = 0
    for i in range(n):
        l = i + 1
        rv1[i] = scale * g
        g = 0.0
        s = 0.0
        scale = 0.0
        if i < m:
            for k in range(i, m):
                scale += abs(u[k, i])
            if scale != 0.0:
                for k in range(i, m):
                    u[k, i] /= scale
                    s += u[k, i] * u[k, i]
                f = u[i, i]
                g = -math.copysign(math.sqrt(s), f)
                h = f * g - s
                u[i, i] = f - g
                for j in range(l, n):
                    s = 0.0
                    for k in range(i, m):
                        s += u[k, i] * u[k, j]
                    f = s / h
                    for k in range(i, m):
                        u[k, j] += f * u[k, i]
                for k in range(i, m):
                    u[k, i] *= scale
        w[i] = scale * g
        g = 0.0
        s = 0.0
        scale = 0.0
        if i < m and i != n - 1:
            for k in range(l, n):
                scale += abs(u[i, k])
            if scale != 0.0:
                for k in range(l, n):
                    u[i, k] /= scale
                    s += u[i, k] * u[i, k]
                f = u[i, l]
                g = -math.copysign(math.sqrt(s), f)
                h = f * g - s
                u[i, l] = f - g
                for k in range(l, n):
                    rv1[k] = u[i, k] / h
                for j in range(l, m):
                    s = 0.0
                    for k in range(l, n):
                        s += u[j, k] * u[i, k]
                    for k in range(l, n):
                        u[j, k] += s * rv1[k]
                for k in range(l, n):
                    u[i, k] *= scale
        anorm = max(anorm, abs(w[i]) + abs(rv1[i]))

    for i in range(n - 1, -1, -1):
        if i < n - 1:
            if g != 0.0:
                for j in range(l, n):
                    v[j, i] = (u[i, j] / u[i, l]) / g
                for j in range(l, n):
                    s = 0.0
                    for k in range(l, n):
                        s += u[i, k] * v[k, j]
                    for k in range(l, n):
                        v[k, j] += s * v[k, i]
            for j in range(l, n):
                v[i, j] = 0.0
                v[j, i] = 0.0
        v[i, i] = 1.0
        g = rv1[i]
        l = i

    for i in range(min(m, n) - 1, -1, -1):
        l = i + 1
        g = w[i]
        for j in range(l, n):
            u[i, j] = 0.0
        if g != 0.0:
            g = 1.0 / g
            for j in range(l, n):
                s = 0.0
                for k in range(l, m):
                    s += u[k, i] * u[k, j]
                f = (s / u[i, i]) * g
                for k in range(i, m):
                    u[k, j] += f * u[k, i]
            for j in range(i, m):
                u[j, i] *= g
        else:
            for j in range(i, m):
                u[j, i] = 0.0
        u[i, i] += 1.0

    tol = _EPS * anorm
    sweeps = 0
    for k in range(n - 1, -1, -1):
        while True:
            flag = True
            l = k
            nm = 0
            while l >= 0:
                nm = l - 1
                if l == 0 or abs(rv1[l]) <= tol:
                    flag = False
                    break
                if abs(w[nm]) <= tol:
                    break
                l -= 1
            if flag:
                # w[nm] negligible: chase the superdiagonal entry off row l-1
                c = 0.0
                s = 1.0
                for i in range(l, k + 1):
                    f = s * rv1[i]
                    rv1[i] = c * rv1[i]
                    if abs(f) <= tol:
                        break
                    g = w[i]
                    h = _pythag(f, g)
                    w[i] = h
                    h = 1.0 / h
                    c = g * h
                    s = -f * h
                    for j in range(m):
                        y = u[j, nm]
                        z = u[j, i]
                        u[j, nm] = y * c + z * s
                        u[j, i] = z * c - y * s
            z = w[k]
            if l == k:
                if z < 0.0:
                    w[k] = -z
                    for j in range(n):
                        v[j, k] = -v[j, k]
                break
            if sweeps >= max_sweeps:
                return u, w, v, sweeps, False
            sweeps += 1
            x = w[l]
            nm = k - 1
            y = w[nm]
            g = rv1[nm]
            h = rv1[k]
            f = ((y - z) * (y + z) + (g - h) * (g + h)) / (2.0 * h * y)
            g = _pythag(f, 1.0)
            f = ((x - z) * (x + z) + h * ((y / (f + math.copysign(g, f))) - h)) / x
            c = 1.0
            s = 1.0
            for j in range(l, nm + 1):
                i = j + 1
                g = rv1[i]
                y = w[i]
                h = s * g
                g = c * g
                z = _pythag(f, h)
                rv1[j] = z
                c = f / z
                s = h / z
                f = x * c + g * s
                g = g * c - x * s
                h = y * s
                y *= c
                for jj in range(n):
                    x = v[jj, j]
                    z = v[jj, i]
                    v[jj, j] = x * c + z * s
                    v[jj, i] = z * c - x * s
                z = _pythag(f, h)
                w[j] = z
                if z != 0.0:
                    z = 1.0 / z
                    c = f * z
                    s = h * z
                f = c * g + s * y
                x = c * y - s * g
                for jj in range(m):
                    y = u[jj, j]
                    z = u[jj, i]
                    u[jj, j] = y * c + z * s
                    u[jj, i] = z * c - y * s
            rv1[l] = 0.0
            rv1[k] = f
            w[k] = x
    return u, w, v, sweeps, True
