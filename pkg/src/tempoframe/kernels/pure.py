"""Pure-Python numeric kernels.

These are the reference implementations of the fitting inner loops. The
compiled backend (`tempoframe.kernels._compiled`) is a statement-for-statement
transliteration; both must produce bit-identical doubles, so every loop here
fixes its iteration and accumulation order, and nothing may be rewritten in a
mathematically-equivalent-but-reassociated form without changing both files.

Matrices cross this boundary as flat row-major lists of floats plus explicit
dimensions, which keeps the two backends' call signatures identical.
"""

from __future__ import annotations

import math

BACKEND = "pure"

_INF = float("inf")


def _exp(v: float) -> float:
    # C's exp() returns inf on overflow; Python's raises. Match C.
    try:
        return math.exp(v)
    except OverflowError:
        return _INF


def lu_solve(n: int, a_flat: list, b: list) -> list:
    """Solve the n-by-n system A x = b by Gaussian elimination.

    Partial pivoting: largest absolute pivot, first occurrence wins.
    Inputs are copied, not mutated.
    """
    a = list(a_flat)
    x = list(b)
    for col in range(n):
        p = col
        best = abs(a[col * n + col])
        for r in range(col + 1, n):
            v = abs(a[r * n + col])
            if v > best:
                best = v
                p = r
        if best == 0.0:
            raise ValueError("singular matrix")
        if p != col:
            for c in range(n):
                a[col * n + c], a[p * n + c] = a[p * n + c], a[col * n + c]
            x[col], x[p] = x[p], x[col]
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
    return x


def ridge_normal_solve(n_rows: int, n_cols: int, x_flat: list, y: list,
                       lam: float, penalty: list) -> list:
    """Solve (XᵀX + λ·diag(penalty)) w = Xᵀy.

    `penalty` has one entry per column (1.0 = penalized, 0.0 = free), so the
    same kernel serves full-diagonal jitter and intercept-free ridge.
    Accumulation order: sample-major over the upper triangle, mirrored after.
    """
    ata = [0.0] * (n_cols * n_cols)
    aty = [0.0] * n_cols
    for i in range(n_rows):
        base = i * n_cols
        yi = y[i]
        for j in range(n_cols):
            xij = x_flat[base + j]
            row = j * n_cols
            for k in range(j, n_cols):
                ata[row + k] += xij * x_flat[base + k]
            aty[j] += xij * yi
    for j in range(n_cols):
        for k in range(j + 1, n_cols):
            ata[k * n_cols + j] = ata[j * n_cols + k]
    for j in range(n_cols):
        ata[j * n_cols + j] += lam * penalty[j]
    return lu_solve(n_cols, ata, aty)


def _sigmoid(z: float) -> float:
    # Branch keeps exp's argument non-positive; no overflow possible.
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_gd(n_rows: int, n_cols: int, x_flat: list, y: list,
                lr: float, iters: int) -> tuple:
    """Full-batch gradient descent on mean logistic log-loss, zero init.

    Returns (weights, bias).
    """
    w = [0.0] * n_cols
    b = 0.0
    scale = lr / n_rows
    for _ in range(iters):
        gw = [0.0] * n_cols
        gb = 0.0
        for i in range(n_rows):
            base = i * n_cols
            z = b
            for j in range(n_cols):
                z += w[j] * x_flat[base + j]
            d = _sigmoid(z) - y[i]
            for j in range(n_cols):
                gw[j] += d * x_flat[base + j]
            gb += d
        for j in range(n_cols):
            w[j] -= scale * gw[j]
        b -= scale * gb
    return w, b


def _cox_obj_grad(n_rows: int, n_cols: int, z_flat: list, y_order: list,
                  times: list, occurred: list, lam: float,
                  beta: list) -> tuple:
    """Breslow-tie log partial likelihood and its gradient at `beta`.

    `y_order` lists sample indices by descending event/censor time (ties in
    original index order), so risk-set sums build as suffix sums. Every
    member of a tied-time group enters the risk set before any event in the
    group is scored, because R(t) = {j : t_j >= t}.
    """
    xb = [0.0] * n_rows
    ex = [0.0] * n_rows
    for i in range(n_rows):
        base = i * n_cols
        s = 0.0
        for j in range(n_cols):
            s += beta[j] * z_flat[base + j]
        xb[i] = s
        ex[i] = _exp(s)
    obj = 0.0
    grad = [0.0] * n_cols
    s0 = 0.0
    s1 = [0.0] * n_cols
    k = 0
    while k < n_rows:
        t = times[y_order[k]]
        g_end = k
        while g_end < n_rows and times[y_order[g_end]] == t:
            i = y_order[g_end]
            e = ex[i]
            s0 += e
            base = i * n_cols
            for j in range(n_cols):
                s1[j] += e * z_flat[base + j]
            g_end += 1
        for m in range(k, g_end):
            i = y_order[m]
            if occurred[i]:
                obj += xb[i] - math.log(s0)
                base = i * n_cols
                for j in range(n_cols):
                    grad[j] += z_flat[base + j] - s1[j] / s0
        k = g_end
    for j in range(n_cols):
        obj -= lam * beta[j] * beta[j]
        grad[j] -= 2.0 * lam * beta[j]
    return obj, grad


def cox_gd(n_rows: int, n_cols: int, z_flat: list, times: list,
           occurred: list, step: float, iters: int, lam: float) -> tuple:
    """Gradient ascent on the ridged Breslow partial likelihood, zero init.

    Returns (beta, objective_trace, final_gradient_norm); the trace has
    iters+1 entries (value before each update, then at the final beta).
    """
    order = sorted(range(n_rows), key=lambda i: times[i], reverse=True)
    beta = [0.0] * n_cols
    trace = []
    grad = [0.0] * n_cols
    for _ in range(iters):
        obj, grad = _cox_obj_grad(n_rows, n_cols, z_flat, order, times,
                                  occurred, lam, beta)
        trace.append(obj)
        for j in range(n_cols):
            beta[j] += step * grad[j]
    obj, grad = _cox_obj_grad(n_rows, n_cols, z_flat, order, times,
                              occurred, lam, beta)
    trace.append(obj)
    gnorm = 0.0
    for j in range(n_cols):
        gnorm += grad[j] * grad[j]
    return beta, trace, math.sqrt(gnorm)


def concordance_counts(n: int, times: list, occurred: list,
                       risks: list) -> tuple:
    """Count (concordant, risk-tied, comparable) ordered pairs.

    Pair (i, j) is comparable when sample i's event occurred and
    t_i < t_j; concordant when risk_i > risk_j.
    """
    conc = 0
    tied = 0
    comp = 0
    for i in range(n):
        if not occurred[i]:
            continue
        ti = times[i]
        ri = risks[i]
        for j in range(n):
            if j == i:
                continue
            if ti < times[j]:
                comp += 1
                if ri > risks[j]:
                    conc += 1
                elif ri == risks[j]:
                    tied += 1
    return conc, tied, comp
