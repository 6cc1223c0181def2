"""Numba kernels for the solver hot path.

Everything here operates on raw CSR arrays (int64 indptr/indices, float64
data) so the outer-loop iteration count never pays Python overhead.  The
Python-facing modules wrap these with validated object APIs; the formulas are
mirrored there in plain numpy and the test suite cross-checks both paths.

All kernels are deterministic: fixed summation order, no fastmath, no
threading.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def csr_matvec(nrows, indptr, indices, data, x, out):
    for i in range(nrows):
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        out[i] = acc


@njit(cache=True)
def csr_matvec_t(nrows, ncols, indptr, indices, data, y, out):
    for j in range(ncols):
        out[j] = 0.0
    for i in range(nrows):
        yi = y[i]
        if yi != 0.0:
            for k in range(indptr[i], indptr[i + 1]):
                out[indices[k]] += data[k] * yi


@njit(cache=True)
def _xlogx(x, out):
    # convention 0*log(0) = 0
    for j in range(x.shape[0]):
        xj = x[j]
        out[j] = xj * math.log(xj) if xj > 0.0 else 0.0


@njit(cache=True)
def _entropy_step(g, out):
    """Exact argmax of g.y - sum(y log y) over the extended simplex.

    KKT gives y_i = exp(g_i - 1 - lam) with lam >= 0 and lam > 0 only when
    the coordinate sum saturates at 1; the e^{-1} factor therefore matters
    only in the unsaturated branch, where it is kept, and cancels under
    normalisation otherwise.  Exponents are shifted by the max before exp so
    the saturated branch never overflows.
    """
    k = g.shape[0]
    m = g[0] - 1.0
    for i in range(1, k):
        if g[i] - 1.0 > m:
            m = g[i] - 1.0
    if m > 0.0:
        s = 0.0
        for i in range(k):
            out[i] = math.exp(g[i] - 1.0 - m)
            s += out[i]
        for i in range(k):
            out[i] /= s
    else:
        s = 0.0
        for i in range(k):
            out[i] = math.exp(g[i] - 1.0)
            s += out[i]
        if s > 1.0:
            for i in range(k):
                out[i] /= s


@njit(cache=True)
def _neg_entropy(v):
    s = 0.0
    for i in range(v.shape[0]):
        vi = v[i]
        if vi > 0.0:
            s += vi * math.log(vi)
    return s


@njit(cache=True)
def oso_alternating(p_indptr, p_indices, p_data, c_indptr, c_indices, c_data,
                    n, p, c, pinf, cinf, scale,
                    ax, au, a1, a2, delta, kmax, x0,
                    x, y, z, objs, scratch_n, px, cx, dx):
    """Alternating maximization of a.w - scale*phi(w) over W, u fixed at 1.

    Inputs ax/au/a1/a2 are the raw (unscaled) linear term; the closed-form
    coordinate updates apply to the problem divided through by `scale`.
    Returns (rounds, matvecs); per-round scaled objectives in objs[:rounds].
    """
    kp = 2.0 * (pinf + 1.0)
    kc = 2.0 * (cinf + 1.0)
    inv = 1.0 / scale
    mv = 0

    for j in range(n):
        x[j] = x0[j]

    _xlogx(x, scratch_n)
    csr_matvec(p, p_indptr, p_indices, p_data, scratch_n, px)
    csr_matvec(c, c_indptr, c_indices, c_data, scratch_n, cx)
    mv += 2

    rounds = 0
    for k in range(kmax):
        # duals from the current primal point
        for i in range(p):
            px[i] = (a1[i] * inv - px[i]) / kp
        _entropy_step(px, y)
        for i in range(c):
            cx[i] = (a2[i] * inv - cx[i]) / kc
        _entropy_step(cx, z)

        # primal point from the new duals
        csr_matvec_t(p, n, p_indptr, p_indices, p_data, y, dx)
        csr_matvec_t(c, n, c_indptr, c_indices, c_data, z, scratch_n)
        mv += 2
        for j in range(n):
            dj = dx[j] + scratch_n[j]
            aj = ax[j] * inv
            if dj <= 0.0:
                x[j] = 1.0 if aj > 0.0 else 0.0
            else:
                t = aj / dj - 1.0
                x[j] = math.exp(t) if t < 0.0 else 1.0

        # objective at (x, 1, y, z); the matvecs double as next round's input
        _xlogx(x, scratch_n)
        csr_matvec(p, p_indptr, p_indices, p_data, scratch_n, px)
        csr_matvec(c, c_indptr, c_indices, c_data, scratch_n, cx)
        mv += 2
        phi = kp * _neg_entropy(y) + kc * _neg_entropy(z)
        for i in range(p):
            phi += y[i] * px[i]
        for i in range(c):
            phi += z[i] * cx[i]
        obj = au
        for j in range(n):
            obj += ax[j] * x[j]
        for i in range(p):
            obj += a1[i] * y[i]
        for i in range(c):
            obj += a2[i] * z[i]
        obj -= scale * phi
        objs[k] = obj
        rounds = k + 1
        if k >= 1 and objs[k] - objs[k - 1] < 0.25 * delta:
            break

    return rounds, mv


@njit(cache=True)
def dual_extrapolation_steps(p_indptr, p_indices, p_data, c_indptr, c_indices,
                             c_data, n, p, c, pinf, cinf, scale, delta, kmax,
                             sx, su, sy, sz, warm_x, nsteps):
    """Run `nsteps` outer iterations, accumulating oracle outputs into s.

    Each step evaluates g = J.s, a first oracle point v = Phi(g), then adds
    Phi(g + 2 J.v) into the accumulator.  s is updated in place (su gains 1
    per step so the running average keeps u = 1 exactly); warm_x carries the
    oracle warm start across steps.  Returns (oracle_rounds, matvecs).
    """
    gx = np.empty(n)
    gy = np.empty(p)
    gz = np.empty(c)
    g2x = np.empty(n)
    g2y = np.empty(p)
    g2z = np.empty(c)
    tn = np.empty(n)
    x1 = np.empty(n)
    y1 = np.empty(p)
    z1 = np.empty(c)
    x2 = np.empty(n)
    y2 = np.empty(p)
    z2 = np.empty(c)
    objs = np.empty(kmax)
    scratch_n = np.empty(n)
    px = np.empty(p)
    cx = np.empty(c)
    dx = np.empty(n)

    rounds_total = 0
    mv_total = 0

    for _ in range(nsteps):
        # g = J.s with s = (sx, su, sy, sz)
        csr_matvec_t(p, n, p_indptr, p_indices, p_data, sy, gx)
        csr_matvec_t(c, n, c_indptr, c_indices, c_data, sz, tn)
        for j in range(n):
            gx[j] = tn[j] - gx[j]
        gu = 0.0
        for i in range(p):
            gu += sy[i]
        for i in range(c):
            gu -= sz[i]
        csr_matvec(p, p_indptr, p_indices, p_data, sx, gy)
        for i in range(p):
            gy[i] -= su[0]
        csr_matvec(c, c_indptr, c_indices, c_data, sx, gz)
        for i in range(c):
            gz[i] = su[0] - gz[i]
        mv_total += 4

        r, mv = oso_alternating(p_indptr, p_indices, p_data, c_indptr,
                                c_indices, c_data, n, p, c, pinf, cinf, scale,
                                gx, gu, gy, gz, delta, kmax, warm_x,
                                x1, y1, z1, objs, scratch_n, px, cx, dx)
        rounds_total += r
        mv_total += mv

        # g2 = g + 2 J.v with v = (x1, 1, y1, z1)
        csr_matvec_t(p, n, p_indptr, p_indices, p_data, y1, g2x)
        csr_matvec_t(c, n, c_indptr, c_indices, c_data, z1, tn)
        for j in range(n):
            g2x[j] = gx[j] + 2.0 * (tn[j] - g2x[j])
        g2u = gu
        for i in range(p):
            g2u += 2.0 * y1[i]
        for i in range(c):
            g2u -= 2.0 * z1[i]
        csr_matvec(p, p_indptr, p_indices, p_data, x1, g2y)
        for i in range(p):
            g2y[i] = gy[i] + 2.0 * (g2y[i] - 1.0)
        csr_matvec(c, c_indptr, c_indices, c_data, x1, g2z)
        for i in range(c):
            g2z[i] = gz[i] + 2.0 * (1.0 - g2z[i])
        mv_total += 4

        r, mv = oso_alternating(p_indptr, p_indices, p_data, c_indptr,
                                c_indices, c_data, n, p, c, pinf, cinf, scale,
                                g2x, g2u, g2y, g2z, delta, kmax, x1,
                                x2, y2, z2, objs, scratch_n, px, cx, dx)
        rounds_total += r
        mv_total += mv

        for j in range(n):
            sx[j] += x2[j]
            warm_x[j] = x2[j]
        su[0] += 1.0
        for i in range(p):
            sy[i] += y2[i]
        for i in range(c):
            sz[i] += z2[i]

    return rounds_total, mv_total
