"""Pure-numpy kernels, vectorized where the numba twins loop."""

import math

import numpy as np

_EPS = np.finfo(np.float64).eps


def project_simplex_columns(v):
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    u = -np.sort(-v, axis=0)
    css = np.cumsum(u, axis=0) - 1.0
    idx = np.arange(1, n + 1, dtype=np.float64)[:, None]
    cond = u - css / idx > 0
    # cond holds on a prefix; rho is its last row
    rho = n - 1 - np.argmax(cond[::-1], axis=0)
    theta = css[rho, np.arange(v.shape[1])] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_simplex(v):
    return project_simplex_columns(np.asarray(v, dtype=np.float64)[:, None])[:, 0]

F_SLACK = 1e-12


def _kkt(b, g):
    return np.max(np.abs(b - project_simplex_columns(b - g)), axis=0)


POLISH_EVERY = 25


def _face_solve(z, y, b):
    """Exact minimizer over the face spanned by ``b``'s support (see the numba twin)."""
    support = list(np.flatnonzero(b > 0.0))
    c = np.zeros(z.shape[1])
    while support:
        if len(support) == 1:
            coef = np.ones(1)
        else:
            j0 = support[0]
            m = z[:, support[1:]] - z[:, [j0]]
            w = np.linalg.lstsq(m, y - z[:, j0], rcond=-1)[0]
            coef = np.concatenate([[1.0 - w.sum()], w])
        worst = int(np.argmin(coef))
        if coef[worst] >= 0.0:
            c[support] = coef
            break
        del support[worst]
    return c


def apg_batch(z, y, b0, lipschitz, tol, max_iter):
    """Batched accelerated projected gradient; columns evolve independently."""
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[1]
    b = project_simplex_columns(b0)
    res = z @ b - y
    g = z.T @ res
    f = 0.5 * np.einsum("ij,ij->j", res, res)
    best_b = b.copy()
    best_f = f.copy()
    iters = np.zeros(n, dtype=np.int64)
    conv = _kkt(b, g) < tol
    active = np.flatnonzero(~conv)

    yk = b.copy()
    res_y = res.copy()
    g_y = g.copy()
    t = np.ones(n)
    inv_l = 1.0 / lipschitz
    it = 0
    while active.size and it < max_iter:
        it += 1
        a = active
        iters[a] = it
        bn = project_simplex_columns(yk[:, a] - inv_l * g_y[:, a])
        res_n = z @ bn - y[:, a]
        fn = 0.5 * np.einsum("ij,ij->j", res_n, res_n)

        restart = (fn > f[a]) & (t[a] > 1.0)
        if restart.any():
            r = a[restart]
            t[r] = 1.0
            yk[:, r] = b[:, r]
            res_y[:, r] = res[:, r]
            g_y[:, r] = g[:, r]
        keep = ~restart
        a = a[keep]
        if a.size == 0:
            continue
        bn = bn[:, keep]
        res_n = res_n[:, keep]
        fn = fn[keep]
        g_n = z.T @ res_n

        t_n = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t[a] ** 2))
        beta = (t[a] - 1.0) / t_n
        yk[:, a] = bn + beta * (bn - b[:, a])
        res_y[:, a] = res_n + beta * (res_n - res[:, a])
        g_y[:, a] = g_n + beta * (g_n - g[:, a])
        b[:, a] = bn
        res[:, a] = res_n
        g[:, a] = g_n
        f[a] = fn
        t[a] = t_n

        better = fn < best_f[a]
        if better.any():
            ab = a[better]
            best_f[ab] = fn[better]
            best_b[:, ab] = bn[:, better]

        if it % POLISH_EVERY == 0:
            for pos, col in enumerate(a):
                c = _face_solve(z, y[:, col], b[:, col])
                rc = z @ c - y[:, col]
                fc = 0.5 * float(rc @ rc)
                gc = z.T @ rc
                if _kkt(c[:, None], gc[:, None])[0] < tol[col] and fc <= best_f[col] * (1.0 + F_SLACK):
                    best_b[:, col] = c
                    best_f[col] = fc
                    conv[col] = True
                elif fc < f[col]:
                    # adopt the face solution and restart momentum there
                    b[:, col] = c
                    res[:, col] = rc
                    g[:, col] = gc
                    f[col] = fc
                    t[col] = 1.0
                    yk[:, col] = c
                    res_y[:, col] = rc
                    g_y[:, col] = gc
                    if fc < best_f[col]:
                        best_f[col] = fc
                        best_b[:, col] = c
                    bn[:, pos] = c
                    g_n[:, pos] = gc
                    fn[pos] = fc
            polished = conv[a]
            if polished.any():
                active = np.flatnonzero(~conv)
                keep = ~polished
                a, bn, g_n, fn = a[keep], bn[:, keep], g_n[:, keep], fn[keep]

        done = _kkt(bn, g_n) < tol[a]
        if done.any():
            ad = a[done]
            conv[ad] = True
            # near the optimum f differs between iterates only by rounding;
            # prefer the iterate that passed the optimality test
            take = fn[done] <= best_f[ad] * (1.0 + F_SLACK)
            best_f[ad[take]] = fn[done][take]
            best_b[:, ad[take]] = bn[:, done][:, take]
            active = np.flatnonzero(~conv)
    return best_b, best_f, iters, conv


def argmax_projections(dirs, xt, block=4096):
    m = dirs.shape[0]
    winners = np.empty(m, dtype=np.int64)
    for start in range(0, m, block):
        stop = min(m, start + block)
        # argmax returns the first maximizer, i.e. ties go to the lowest index
        winners[start:stop] = np.argmax(dirs[start:stop] @ xt.T, axis=1)
    return winners


def householder_qr(a, drop_tol):
    a = np.asarray(a, dtype=np.float64)
    m, n = a.shape
    w = a.copy()
    vs = []
    pivots = []
    r = 0
    for j in range(n):
        if r == m:
            break
        x = w[r:, j]
        nrm = math.sqrt(float(x @ x))
        if nrm <= drop_tol:
            continue
        alpha = -nrm if x[0] >= 0.0 else nrm
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        w[r:, j:] -= 2.0 * np.outer(v, v @ w[r:, j:])
        w[r, j] = alpha
        w[r + 1:, j] = 0.0
        vs.append(v)
        pivots.append(j)
        r += 1
    q = np.zeros((m, r))
    q[np.arange(r), np.arange(r)] = 1.0
    for t in range(r - 1, -1, -1):
        v = vs[t]
        q[t:, :] -= 2.0 * np.outer(v, v @ q[t:, :])
    return q, w[:r, :].copy(), np.asarray(pivots, dtype=np.int64)


def _pythag(a, b):
    return math.hypot(a, b)


def _rotate(mat, i, j, c, s):
    x = mat[:, i].copy()
    z = mat[:, j]
    mat[:, i] = x * c + z * s
    mat[:, j] = z * c - x * s


def svd_golub_kahan(a, max_sweeps):
    """Vectorized Golub-Kahan-Reinsch; same contract as the numba kernel."""
    a = np.asarray(a, dtype=np.float64)
    m, n = a.shape
    u = a.copy()
    w = np.zeros(n)
    v = np.zeros((n, n))
    rv1 = np.zeros(n)
    g = scale = anorm = 0.0
    l = 0
    for i in range(n):
        l = i + 1
        rv1[i] = scale * g
        g = scale = 0.0
        if i < m:
            scale = np.abs(u[i:, i]).sum()
            if scale != 0.0:
                u[i:, i] /= scale
                s = float(u[i:, i] @ u[i:, i])
                f = u[i, i]
                g = -math.copysign(math.sqrt(s), f)
                h = f * g - s
                u[i, i] = f - g
                if l < n:
                    fs = (u[i:, i] @ u[i:, l:]) / h
                    u[i:, l:] += np.outer(u[i:, i], fs)
                u[i:, i] *= scale
        w[i] = scale * g
        g = scale = 0.0
        if i < m and i != n - 1:
            scale = np.abs(u[i, l:]).sum()
            if scale != 0.0:
                u[i, l:] /= scale
                s = float(u[i, l:] @ u[i, l:])
                f = u[i, l]
                g = -math.copysign(math.sqrt(s), f)
                h = f * g - s
                u[i, l] = f - g
                rv1[l:] = u[i, l:] / h
                if l < m:
                    ss = u[l:, l:] @ u[i, l:]
                    u[l:, l:] += np.outer(ss, rv1[l:])
                u[i, l:] *= scale
        anorm = max(anorm, abs(w[i]) + abs(rv1[i]))

    for i in range(n - 1, -1, -1):
        if i < n - 1:
            if g != 0.0:
                v[l:, i] = (u[i, l:] / u[i, l]) / g
                ss = u[i, l:] @ v[l:, l:]
                v[l:, l:] += np.outer(v[l:, i], ss)
            v[i, l:] = 0.0
            v[l:, i] = 0.0
        v[i, i] = 1.0
        g = rv1[i]
        l = i

    for i in range(min(m, n) - 1, -1, -1):
        l = i + 1
        g = w[i]
        u[i, l:] = 0.0
        if g != 0.0:
            g = 1.0 / g
            if l < n:
                ss = u[l:, i] @ u[l:, l:]
                fs = (ss / u[i, i]) * g
                u[i:, l:] += np.outer(u[i:, i], fs)
            u[i:, i] *= g
        else:
            u[i:, i] = 0.0
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
                c, s = 0.0, 1.0
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
                    _rotate(u, nm, i, c, s)
            z = w[k]
            if l == k:
                if z < 0.0:
                    w[k] = -z
                    v[:, k] = -v[:, k]
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
            c = s = 1.0
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
                _rotate(v, j, i, c, s)
                z = _pythag(f, h)
                w[j] = z
                if z != 0.0:
                    z = 1.0 / z
                    c = f * z
                    s = h * z
                f = c * g + s * y
                x = c * y - s * g
                _rotate(u, j, i, c, s)
            rv1[l] = 0.0
            rv1[k] = f
            w[k] = x
    return u, w, v, sweeps, True
