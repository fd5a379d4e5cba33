"""Pure-numpy fallback for the sliding-window Haralick kernel.

Same contract as the compiled extension: for every pixel whose window fits
inside the quantized map, the 13 Haralick statistics of the symmetric
co-occurrence matrix accumulated over the offsets (0,1), (1,0), (1,1),
(1,-1). Vectorized over pixels via integral images of pair-code masks;
slower than the extension but dependency-free.
"""

from __future__ import annotations

import numpy as np

_LN2 = float(np.log(2.0))


def _box_valid(mask: np.ndarray, hr: int, hc: int) -> np.ndarray:
    """Sum of `mask` over all hr-by-hc boxes (valid positions only)."""
    ii = np.zeros((mask.shape[0] + 1, mask.shape[1] + 1), dtype=np.int64)
    np.cumsum(np.cumsum(mask, axis=0), axis=1, out=ii[1:, 1:])
    return ii[hr:, hc:] - ii[:-hr, hc:] - ii[hr:, :-hc] + ii[:-hr, :-hc]


def haralick_window_maps(q: np.ndarray, levels: int, window: int) -> np.ndarray:
    """Per-pixel 13-feature Haralick maps over sliding windows.

    Feature order: energy, contrast, correlation, variance, inverse
    difference moment, sum average, sum variance, sum entropy, entropy,
    difference variance, difference entropy, IMC1, IMC2 (base-2 entropies).
    """
    q = np.asarray(q, dtype=np.int64)
    H, Wi = q.shape
    W = window
    L = levels
    sr = H - W + 1
    sc = Wi - W + 1
    if sr < 1 or sc < 1:
        raise ValueError("window larger than input map")
    if W < 2:
        raise ValueError("window must be at least 2")

    T = 4 * (W - 1) * (2 * W - 1)
    invT = 1.0 / T
    clog = np.zeros(T + 1)
    idx = np.arange(1, T + 1)
    clog[1:] = idx * np.log2(idx)
    idmw = 1.0 / (1.0 + np.arange(L, dtype=np.float64) ** 2)

    # Ordered pair-code maps, one per forward offset; the negated offsets
    # are realised by also counting the mirrored code.
    code_maps = [
        (q[:, :-1] * L + q[:, 1:], W, W - 1),        # (0, 1)
        (q[:-1, :] * L + q[1:, :], W - 1, W),        # (1, 0)
        (q[:-1, :-1] * L + q[1:, 1:], W - 1, W - 1), # (1, 1)
        (q[:-1, 1:] * L + q[1:, :-1], W - 1, W - 1), # (1, -1)
    ]

    shape = (sr, sc)
    sumsq = np.zeros(shape)
    sumlog = np.zeros(shape)
    contrast = np.zeros(shape)
    prod = np.zeros(shape)
    m = np.zeros(shape + (L,))
    sm = np.zeros(shape + (2 * L - 1,))
    dm = np.zeros(shape + (L,))

    def fwd_count(code: int) -> np.ndarray:
        total = np.zeros(shape, dtype=np.int64)
        for cm, hr, hc in code_maps:
            total += _box_valid(cm == code, hr, hc)
        return total

    for i in range(L):
        for j in range(i, L):
            if i == j:
                sym = 2 * fwd_count(i * L + i)
            else:
                sym = fwd_count(i * L + j) + fwd_count(j * L + i)
            if not sym.any():
                continue
            symf = sym.astype(np.float64)
            mult = 1 if i == j else 2
            sumsq += mult * symf * symf
            sumlog += mult * clog[sym]
            m[:, :, i] += symf
            if i != j:
                m[:, :, j] += symf
                contrast += 2.0 * (i - j) ** 2 * symf
            sm[:, :, i + j] += mult * symf
            dm[:, :, j - i] += mult * symf
            prod += mult * i * j * symf

    energy = sumsq * invT * invT
    # Entropy as (T*log2(T) - sum t*log2(t)) / T: single-entry windows
    # cancel exactly to 0; rounding residue below zero is clamped.
    entropy = np.maximum((clog[T] - sumlog) * invT, 0.0)
    contrast *= invT

    lv = np.arange(L, dtype=np.float64)
    mu = m @ lv * invT
    var = m @ (lv * lv) * invT - mu * mu
    hx = np.maximum((clog[T] - clog[m.astype(np.int64)].sum(axis=2)) * invT, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(var > 0.0, (prod * invT - mu * mu) / np.where(var > 0, var, 1.0), 0.0)

    kv = np.arange(2 * L - 1, dtype=np.float64)
    sa = sm @ kv * invT
    sv = sm @ (kv * kv) * invT - sa * sa
    se = np.maximum((clog[T] - clog[sm.astype(np.int64)].sum(axis=2)) * invT, 0.0)

    da = dm @ lv * invT
    dv = dm @ (lv * lv) * invT - da * da
    de = np.maximum((clog[T] - clog[dm.astype(np.int64)].sum(axis=2)) * invT, 0.0)
    idm = dm @ idmw * invT

    # Symmetric matrix: HX = HY and HXY1 = HXY2 = 2 * HX.
    imc1 = np.where(hx > 0.0, (entropy - 2.0 * hx) / np.where(hx > 0, hx, 1.0), 0.0)
    arg = 1.0 - np.exp(-2.0 * _LN2 * (2.0 * hx - entropy))
    imc2 = np.sqrt(np.maximum(arg, 0.0))

    return np.stack(
        [energy, contrast, corr, var, idm, sa, sv, se, entropy, dv, de, imc1, imc2]
    )
