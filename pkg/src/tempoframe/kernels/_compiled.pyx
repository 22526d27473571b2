# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Statement-for-statement transliteration of `tempoframe.kernels.pure`; the
two backends must produce bit-identical doubles. Keep iteration and
accumulation order in lockstep with pure.py, and build with fused
multiply-add disabled (see setup.py: -ffp-contract=off), otherwise GCC
contracts a*b+c sequences and the twins diverge in the last ulp.

Divergence is tolerated only where inputs are already pathological (risk-set
sums underflowing to zero), where the pure backend raises and C arithmetic
yields non-finite values.
"""

from cpython cimport array
import array

from libc.math cimport exp, log, sqrt, fabs

BACKEND = "compiled"

cdef array.array _DBL = array.array('d', [])
cdef array.array _LNG = array.array('l', [])


def lu_solve(int n, a_flat, b):
    cdef array.array a_arr = array.array('d', a_flat)
    cdef array.array x_arr = array.array('d', b)
    cdef double* a = a_arr.data.as_doubles
    cdef double* x = x_arr.data.as_doubles
    cdef int col, r, c, p, i, j
    cdef double best, v, f, s, tmp
    for col in range(n):
        p = col
        best = fabs(a[col * n + col])
        for r in range(col + 1, n):
            v = fabs(a[r * n + col])
            if v > best:
                best = v
                p = r
        if best == 0.0:
            raise ValueError("singular matrix")
        if p != col:
            for c in range(n):
                tmp = a[col * n + c]
                a[col * n + c] = a[p * n + c]
                a[p * n + c] = tmp
            tmp = x[col]
            x[col] = x[p]
            x[p] = tmp
        for r in range(col + 1, n):
            f = a[r * n + col] / a[col * n + col]
            a[r * n + col] = 0.0
            for c in range(col + 1, n):
                a[r * n + c] -= f * a[col * n + c]
            x[r] -= f * x[col]
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= a[i * n + j] * x[j]
        x[i] = s / a[i * n + i]
    return [x[i] for i in range(n)]


def ridge_normal_solve(int n_rows, int n_cols, x_flat, y,
                       double lam, penalty):
    cdef array.array x_arr = array.array('d', x_flat)
    cdef array.array y_arr = array.array('d', y)
    cdef array.array p_arr = array.array('d', penalty)
    cdef array.array ata_arr = array.clone(_DBL, n_cols * n_cols, zero=True)
    cdef array.array aty_arr = array.clone(_DBL, n_cols, zero=True)
    cdef double* xs = x_arr.data.as_doubles
    cdef double* ys = y_arr.data.as_doubles
    cdef double* pen = p_arr.data.as_doubles
    cdef double* ata = ata_arr.data.as_doubles
    cdef double* aty = aty_arr.data.as_doubles
    cdef int i, j, k, base, row
    cdef double xij, yi
    for i in range(n_rows):
        base = i * n_cols
        yi = ys[i]
        for j in range(n_cols):
            xij = xs[base + j]
            row = j * n_cols
            for k in range(j, n_cols):
                ata[row + k] += xij * xs[base + k]
            aty[j] += xij * yi
    for j in range(n_cols):
        for k in range(j + 1, n_cols):
            ata[k * n_cols + j] = ata[j * n_cols + k]
    for j in range(n_cols):
        ata[j * n_cols + j] += lam * pen[j]
    return lu_solve(n_cols, ata_arr, aty_arr)


cdef inline double _sigmoid(double z):
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def logistic_gd(int n_rows, int n_cols, x_flat, y, double lr, int iters):
    cdef array.array x_arr = array.array('d', x_flat)
    cdef array.array y_arr = array.array('d', y)
    cdef array.array w_arr = array.clone(_DBL, n_cols, zero=True)
    cdef array.array gw_arr = array.clone(_DBL, n_cols, zero=True)
    cdef double* xs = x_arr.data.as_doubles
    cdef double* ys = y_arr.data.as_doubles
    cdef double* w = w_arr.data.as_doubles
    cdef double* gw = gw_arr.data.as_doubles
    cdef double b = 0.0
    cdef double scale = lr / n_rows
    cdef double gb, z, d
    cdef int it, i, j, base
    for it in range(iters):
        for j in range(n_cols):
            gw[j] = 0.0
        gb = 0.0
        for i in range(n_rows):
            base = i * n_cols
            z = b
            for j in range(n_cols):
                z += w[j] * xs[base + j]
            d = _sigmoid(z) - ys[i]
            for j in range(n_cols):
                gw[j] += d * xs[base + j]
            gb += d
        for j in range(n_cols):
            w[j] -= scale * gw[j]
        b -= scale * gb
    return [w[j] for j in range(n_cols)], b


cdef double _cox_obj_grad(int n_rows, int n_cols, double* zs, long* order,
                          double* times, long* occurred, double lam,
                          double* beta, double* grad, double* xb,
                          double* ex, double* s1):
    cdef double obj = 0.0
    cdef double s, e, s0, t
    cdef int i, j, k, m, base, g_end
    for i in range(n_rows):
        base = i * n_cols
        s = 0.0
        for j in range(n_cols):
            s += beta[j] * zs[base + j]
        xb[i] = s
        ex[i] = exp(s)
    for j in range(n_cols):
        grad[j] = 0.0
        s1[j] = 0.0
    s0 = 0.0
    k = 0
    while k < n_rows:
        t = times[order[k]]
        g_end = k
        while g_end < n_rows and times[order[g_end]] == t:
            i = order[g_end]
            e = ex[i]
            s0 += e
            base = i * n_cols
            for j in range(n_cols):
                s1[j] += e * zs[base + j]
            g_end += 1
        for m in range(k, g_end):
            i = order[m]
            if occurred[i] != 0:
                obj += xb[i] - log(s0)
                base = i * n_cols
                for j in range(n_cols):
                    grad[j] += zs[base + j] - s1[j] / s0
        k = g_end
    for j in range(n_cols):
        obj -= lam * beta[j] * beta[j]
        grad[j] -= 2.0 * lam * beta[j]
    return obj


def cox_gd(int n_rows, int n_cols, z_flat, times, occurred,
           double step, int iters, double lam):
    order_py = sorted(range(n_rows), key=lambda i: times[i], reverse=True)
    cdef array.array z_arr = array.array('d', z_flat)
    cdef array.array t_arr = array.array('d', times)
    cdef array.array o_arr = array.array('l', occurred)
    cdef array.array ord_arr = array.array('l', order_py)
    cdef array.array b_arr = array.clone(_DBL, n_cols, zero=True)
    cdef array.array g_arr = array.clone(_DBL, n_cols, zero=True)
    cdef array.array xb_arr = array.clone(_DBL, n_rows, zero=True)
    cdef array.array ex_arr = array.clone(_DBL, n_rows, zero=True)
    cdef array.array s1_arr = array.clone(_DBL, n_cols, zero=True)
    cdef double* zs = z_arr.data.as_doubles
    cdef double* ts = t_arr.data.as_doubles
    cdef long* occ = o_arr.data.as_longs
    cdef long* order = ord_arr.data.as_longs
    cdef double* beta = b_arr.data.as_doubles
    cdef double* grad = g_arr.data.as_doubles
    cdef double* xb = xb_arr.data.as_doubles
    cdef double* ex = ex_arr.data.as_doubles
    cdef double* s1 = s1_arr.data.as_doubles
    cdef double obj, gnorm
    cdef int it, j
    trace = []
    for it in range(iters):
        obj = _cox_obj_grad(n_rows, n_cols, zs, order, ts, occ, lam,
                            beta, grad, xb, ex, s1)
        trace.append(obj)
        for j in range(n_cols):
            beta[j] += step * grad[j]
    obj = _cox_obj_grad(n_rows, n_cols, zs, order, ts, occ, lam,
                        beta, grad, xb, ex, s1)
    trace.append(obj)
    gnorm = 0.0
    for j in range(n_cols):
        gnorm += grad[j] * grad[j]
    return [beta[j] for j in range(n_cols)], trace, sqrt(gnorm)


def concordance_counts(int n, times, occurred, risks):
    cdef array.array t_arr = array.array('d', times)
    cdef array.array o_arr = array.array('l', occurred)
    cdef array.array r_arr = array.array('d', risks)
    cdef double* ts = t_arr.data.as_doubles
    cdef long* occ = o_arr.data.as_longs
    cdef double* rs = r_arr.data.as_doubles
    cdef long conc = 0
    cdef long tied = 0
    cdef long comp = 0
    cdef int i, j
    cdef double ti, ri
    for i in range(n):
        if occ[i] == 0:
            continue
        ti = ts[i]
        ri = rs[i]
        for j in range(n):
            if j == i:
                continue
            if ti < ts[j]:
                comp += 1
                if ri > rs[j]:
                    conc += 1
                elif ri == rs[j]:
                    tied += 1
    return conc, tied, comp
