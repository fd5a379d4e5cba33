# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sliding-window Haralick kernel.

Computes, for every pixel whose window fits inside the quantized map, the
13 Haralick statistics of the symmetric co-occurrence matrix accumulated
over the four unit offsets (0,1), (1,0), (1,1), (1,-1) inside that window.

The window slides in a serpentine scan; pair counts and the running sums
that feed the nonlinear statistics are updated incrementally, so the cost
per pixel is O(window * offsets) instead of O(window^2 * offsets).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log2, sqrt
from libc.stdlib cimport calloc, free

cnp.import_array()

cdef double LN2 = 0.6931471805599453


cdef struct GState:
    int L
    int* t          # L*L symmetric pair counts
    int* m          # row-marginal counts (equals column marginal)
    int* sm         # sum-marginal counts, index i+j
    int* dm         # difference-marginal counts, index |i-j|
    long long sumsq       # sum of t^2
    long long contrast    # sum of (i-j)^2 * t
    long long prod        # sum of i*j * t
    double sumlog         # sum of t*log2(t)
    double* clog          # c -> c*log2(c) lookup


# The pair update helpers return the change in sum(t*log2 t) instead of
# accumulating it in place: callers fold the returned deltas through a few
# independent locals, which keeps the floating-point adds off one long
# serial dependency chain.

cdef inline double add_pair(GState* S, int i, int j) noexcept nogil:
    cdef int c
    if i == j:
        c = S.t[i * S.L + i]
        S.t[i * S.L + i] = c + 2
        S.sumsq += 4 * c + 4
        S.m[i] += 2
        S.sm[2 * i] += 2
        S.dm[0] += 2
        S.prod += 2 * i * i
        return S.clog[c + 2] - S.clog[c]
    else:
        c = S.t[i * S.L + j]
        S.t[i * S.L + j] = c + 1
        S.t[j * S.L + i] = c + 1
        S.sumsq += 2 * (2 * c + 1)
        S.m[i] += 1
        S.m[j] += 1
        S.sm[i + j] += 2
        S.dm[i - j if i > j else j - i] += 2
        S.contrast += 2 * (i - j) * (i - j)
        S.prod += 2 * i * j
        return 2.0 * (S.clog[c + 1] - S.clog[c])


cdef inline double sub_pair(GState* S, int i, int j) noexcept nogil:
    cdef int c
    if i == j:
        c = S.t[i * S.L + i]
        S.t[i * S.L + i] = c - 2
        S.sumsq -= 4 * c - 4
        S.m[i] -= 2
        S.sm[2 * i] -= 2
        S.dm[0] -= 2
        S.prod -= 2 * i * i
        return S.clog[c - 2] - S.clog[c]
    else:
        c = S.t[i * S.L + j]
        S.t[i * S.L + j] = c - 1
        S.t[j * S.L + i] = c - 1
        S.sumsq -= 2 * (2 * c - 1)
        S.m[i] -= 1
        S.m[j] -= 1
        S.sm[i + j] -= 2
        S.dm[i - j if i > j else j - i] -= 2
        S.contrast -= 2 * (i - j) * (i - j)
        S.prod -= 2 * i * j
        return 2.0 * (S.clog[c - 1] - S.clog[c])


cdef void add_full_window(GState* S, const unsigned char[:, :] q,
                          int r0, int c0, int W) noexcept nogil:
    cdef int r, c
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0
    for r in range(r0, r0 + W):
        for c in range(c0, c0 + W - 1):
            a0 += add_pair(S, q[r, c], q[r, c + 1])
    for r in range(r0, r0 + W - 1):
        for c in range(c0, c0 + W):
            a1 += add_pair(S, q[r, c], q[r + 1, c])
        for c in range(c0, c0 + W - 1):
            a2 += add_pair(S, q[r, c], q[r + 1, c + 1])
        for c in range(c0 + 1, c0 + W):
            a3 += add_pair(S, q[r, c], q[r + 1, c - 1])
    S.sumlog += (a0 + a1) + (a2 + a3)


cdef void shift_right(GState* S, const unsigned char[:, :] q,
                      int r0, int c0_old, int W) noexcept nogil:
    # Window top-left moves from c0_old to c0_old + 1.
    cdef int r
    cdef int cl = c0_old
    cdef int cr = c0_old + W  # new rightmost column
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0
    cdef double a4 = 0.0, a5 = 0.0
    for r in range(r0, r0 + W):
        a0 += sub_pair(S, q[r, cl], q[r, cl + 1])
        a1 += add_pair(S, q[r, cr - 1], q[r, cr])
    for r in range(r0, r0 + W - 1):
        a0 += sub_pair(S, q[r, cl], q[r + 1, cl])
        a1 += add_pair(S, q[r, cr], q[r + 1, cr])
        a2 += sub_pair(S, q[r, cl], q[r + 1, cl + 1])
        a3 += add_pair(S, q[r, cr - 1], q[r + 1, cr])
        a4 += sub_pair(S, q[r, cl + 1], q[r + 1, cl])
        a5 += add_pair(S, q[r, cr], q[r + 1, cr - 1])
    S.sumlog += ((a0 + a1) + (a2 + a3)) + (a4 + a5)


cdef void shift_left(GState* S, const unsigned char[:, :] q,
                     int r0, int c0_old, int W) noexcept nogil:
    # Window top-left moves from c0_old to c0_old - 1.
    cdef int r
    cdef int cl = c0_old - 1        # new leftmost column
    cdef int cr = c0_old + W - 1    # old rightmost column
    cdef double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0
    cdef double a4 = 0.0, a5 = 0.0
    for r in range(r0, r0 + W):
        a0 += add_pair(S, q[r, cl], q[r, cl + 1])
        a1 += sub_pair(S, q[r, cr - 1], q[r, cr])
    for r in range(r0, r0 + W - 1):
        a0 += add_pair(S, q[r, cl], q[r + 1, cl])
        a1 += sub_pair(S, q[r, cr], q[r + 1, cr])
        a2 += add_pair(S, q[r, cl], q[r + 1, cl + 1])
        a3 += sub_pair(S, q[r, cr - 1], q[r + 1, cr])
        a4 += add_pair(S, q[r, cl + 1], q[r + 1, cl])
        a5 += sub_pair(S, q[r, cr], q[r + 1, cr - 1])
    S.sumlog += ((a0 + a1) + (a2 + a3)) + (a4 + a5)


cdef void shift_down(GState* S, const unsigned char[:, :] q,
                     int r0_old, int c0, int W) noexcept nogil:
    # Window top-left moves from r0_old to r0_old + 1.
    cdef int c
    cdef int rt = r0_old
    cdef int rb = r0_old + W  # new bottom row
    cdef double a0 = 0.0, a1 = 0.0
    for c in range(c0, c0 + W - 1):
        a0 += sub_pair(S, q[rt, c], q[rt, c + 1])
        a1 += add_pair(S, q[rb, c], q[rb, c + 1])
    for c in range(c0, c0 + W):
        a0 += sub_pair(S, q[rt, c], q[rt + 1, c])
        a1 += add_pair(S, q[rb - 1, c], q[rb, c])
    for c in range(c0, c0 + W - 1):
        a0 += sub_pair(S, q[rt, c], q[rt + 1, c + 1])
        a1 += add_pair(S, q[rb - 1, c], q[rb, c + 1])
    for c in range(c0 + 1, c0 + W):
        a0 += sub_pair(S, q[rt, c], q[rt + 1, c - 1])
        a1 += add_pair(S, q[rb - 1, c], q[rb, c - 1])
    S.sumlog += a0 + a1


cdef void finish(GState* S, double T, double invT, double clogT,
                 double* idmw, double* out, long long stride,
                 long long pix) noexcept nogil:
    cdef int L = S.L
    cdef int i, k, ci
    cdef double energy, entropy, contrast, mu, var, corr
    cdef double sa, sv, se, da, dv, de, idm, hx, imc1, imc2, arg
    cdef double m1 = 0.0, m2 = 0.0, hxs = 0.0
    cdef double s1 = 0.0, s2 = 0.0, ses = 0.0
    cdef double d1 = 0.0, d2 = 0.0, des = 0.0, idms = 0.0

    energy = S.sumsq * invT * invT
    # Entropy as (T*log2(T) - sum t*log2(t)) / T: a single-entry window
    # cancels exactly to 0, and the value cannot go negative by more than
    # rounding (clamped). Same treatment for the marginal entropies.
    entropy = (clogT - S.sumlog) * invT
    if entropy < 0.0:
        entropy = 0.0
    contrast = S.contrast * invT

    # clog[0] = 0, so zero bins contribute nothing; keeping the loops
    # branch-free lets the compiler vectorize them.
    for i in range(L):
        ci = S.m[i]
        m1 += i * ci
        m2 += (<double> i) * i * ci
        hxs += S.clog[ci]
    mu = m1 * invT
    var = m2 * invT - mu * mu
    hx = (clogT - hxs) * invT
    if hx < 0.0:
        hx = 0.0
    if var > 0.0:
        corr = (S.prod * invT - mu * mu) / var
    else:
        corr = 0.0

    for k in range(2 * L - 1):
        ci = S.sm[k]
        s1 += k * ci
        s2 += (<double> k) * k * ci
        ses += S.clog[ci]
    sa = s1 * invT
    sv = s2 * invT - sa * sa
    se = (clogT - ses) * invT
    if se < 0.0:
        se = 0.0

    for k in range(L):
        ci = S.dm[k]
        d1 += k * ci
        d2 += (<double> k) * k * ci
        des += S.clog[ci]
        idms += ci * idmw[k]
    da = d1 * invT
    dv = d2 * invT - da * da
    de = (clogT - des) * invT
    if de < 0.0:
        de = 0.0
    idm = idms * invT

    # For a symmetric matrix HX = HY, and HXY1 = HXY2 = HX + HY.
    if hx > 0.0:
        imc1 = (entropy - 2.0 * hx) / hx
    else:
        imc1 = 0.0
    arg = 1.0 - exp(-2.0 * LN2 * (2.0 * hx - entropy))
    imc2 = sqrt(arg) if arg > 0.0 else 0.0

    out[0 * stride + pix] = energy
    out[1 * stride + pix] = contrast
    out[2 * stride + pix] = corr
    out[3 * stride + pix] = var
    out[4 * stride + pix] = idm
    out[5 * stride + pix] = sa
    out[6 * stride + pix] = sv
    out[7 * stride + pix] = se
    out[8 * stride + pix] = entropy
    out[9 * stride + pix] = dv
    out[10 * stride + pix] = de
    out[11 * stride + pix] = imc1
    out[12 * stride + pix] = imc2


def haralick_window_maps(const unsigned char[:, :] q, int levels, int window):
    """Per-pixel 13-feature Haralick maps over sliding windows.

    Returns an array of shape (13, H - window + 1, W - window + 1) in the
    fixed order: energy, contrast, correlation, variance, inverse difference
    moment, sum average, sum variance, sum entropy, entropy, difference
    variance, difference entropy, IMC1, IMC2. Entropies are base-2.
    """
    cdef int H = q.shape[0]
    cdef int Wi = q.shape[1]
    cdef int W = window
    cdef int L = levels
    cdef int sr = H - W + 1
    cdef int sc = Wi - W + 1
    if sr < 1 or sc < 1:
        raise ValueError("window larger than input map")
    if W < 2:
        raise ValueError("window must be at least 2")

    # Ordered pair count inside a full window (constant for every pixel).
    cdef long long Tll = 4 * (W - 1) * (2 * W - 1)
    cdef double T = <double> Tll
    cdef double invT = 1.0 / T

    out_arr = np.empty((13, sr, sc), dtype=np.float64)
    cdef double[:, :, :] outv = out_arr
    cdef double* out = &outv[0, 0, 0]
    cdef long long stride = <long long> sr * sc

    clog_arr = np.zeros(Tll + 3, dtype=np.float64)
    cdef double[:] clogv = clog_arr
    cdef long long ii
    for ii in range(1, Tll + 3):
        clogv[ii] = ii * log2(<double> ii)

    idmw_arr = np.empty(L, dtype=np.float64)
    cdef double[:] idmwv = idmw_arr
    cdef int k
    for k in range(L):
        idmwv[k] = 1.0 / (1.0 + (<double> k) * k)

    cdef GState S
    S.L = L
    S.t = <int*> calloc(L * L, sizeof(int))
    S.m = <int*> calloc(L, sizeof(int))
    S.sm = <int*> calloc(2 * L - 1, sizeof(int))
    S.dm = <int*> calloc(L, sizeof(int))
    S.sumsq = 0
    S.contrast = 0
    S.prod = 0
    S.sumlog = 0.0
    S.clog = &clogv[0]
    if S.t == NULL or S.m == NULL or S.sm == NULL or S.dm == NULL:
        free(S.t); free(S.m); free(S.sm); free(S.dm)
        raise MemoryError()

    cdef int r0, c0
    cdef long long pix
    with nogil:
        add_full_window(&S, q, 0, 0, W)
        for r0 in range(sr):
            if r0 > 0:
                # Previous (even) row ends at the right edge, odd rows at 0.
                shift_down(&S, q, r0 - 1, sc - 1 if r0 % 2 == 1 else 0, W)
            if r0 % 2 == 0:
                # left-to-right
                for c0 in range(sc):
                    if c0 > 0:
                        shift_right(&S, q, r0, c0 - 1, W)
                    pix = <long long> r0 * sc + c0
                    finish(&S, T, invT, clogv[Tll], &idmwv[0], out, stride, pix)
            else:
                # right-to-left
                for c0 in range(sc - 1, -1, -1):
                    if c0 < sc - 1:
                        shift_left(&S, q, r0, c0 + 1, W)
                    pix = <long long> r0 * sc + c0
                    finish(&S, T, invT, clogv[Tll], &idmwv[0], out, stride, pix)

    free(S.t); free(S.m); free(S.sm); free(S.dm)
    return out_arr
