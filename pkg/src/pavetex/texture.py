"""Texture descriptors: Haralick V_H, gradient-orientation V_C, and the
alternate-representation block V_A, concatenated into the 94-dimensional
feature vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .errors import DegenerateInput
from .imaging import quantize

#: Default co-occurrence offsets: horizontal, vertical and both diagonals.
DEFAULT_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))

#: Names of the 13 Haralick statistics in output order.
HARALICK_NAMES = (
    "energy",
    "contrast",
    "correlation",
    "variance",
    "inverse_difference_moment",
    "sum_average",
    "sum_variance",
    "sum_entropy",
    "entropy",
    "difference_variance",
    "difference_entropy",
    "imc1",
    "imc2",
)

FEATURE_DIM = 94


@dataclass(frozen=True)
class FeatureParams:
    """Descriptor hyperparameters; defaults match the production pipeline."""

    glcm_levels: int = 16
    haralick_window: int = 11
    collage_window: int = 5
    collage_bins: int = 16
    peak_min_height: float = 200.0
    peak_min_separation: int = 60
    reference_patch_side: int = 500


@dataclass(frozen=True)
class FeatureVector:
    v_a: np.ndarray  # 16
    v_h: np.ndarray  # 13
    v_c: np.ndarray  # 65

    @property
    def fs(self) -> np.ndarray:
        return np.concatenate([self.v_a, self.v_h, self.v_c])


def feature_names() -> list[str]:
    """Names of the 94 features in concatenation order [V_A | V_H | V_C]."""
    names = [
        "peak_count",
        "mean_peak_spacing",
        "fourier_mean",
        "fourier_median",
        "fourier_skewness",
        "range_mean",
        "range_median",
        "range_std",
        "range_skewness",
        "range_kurtosis",
        "intensity_mean",
        "intensity_median",
        "intensity_std",
        "intensity_skewness",
        "intensity_kurtosis",
        "intensity_histogram_entropy",
    ]
    names += [f"haralick_{n}" for n in HARALICK_NAMES]
    for n in HARALICK_NAMES:
        for s in ("mean", "median", "std", "skewness", "kurtosis"):
            names.append(f"collage_{n}_{s}")
    return names


# ---------------------------------------------------------------------------
# first-order statistics helpers (population estimators, zero-variance -> 0)

def _central_moments(x: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, m2, m3, m4) population central moments in one sweep."""
    x = np.asarray(x, dtype=np.float64).ravel()
    mu = float(x.mean())
    d = x - mu
    d2 = d * d
    m2 = float(d2.mean())
    m3 = float((d2 * d).mean())
    m4 = float((d2 * d2).mean())
    return mu, m2, m3, m4


def _skewness(x: np.ndarray) -> float:
    _, m2, m3, _ = _central_moments(x)
    return m3 / m2**1.5 if m2**1.5 > 0.0 else 0.0


def _kurtosis_excess(x: np.ndarray) -> float:
    _, m2, _, m4 = _central_moments(x)
    return m4 / (m2 * m2) - 3.0 if m2 * m2 > 0.0 else 0.0


def five_stats(x: np.ndarray) -> np.ndarray:
    """[mean, median, std, skewness, excess kurtosis], population flavour."""
    mu, m2, m3, m4 = _central_moments(x)
    # the powers of m2 can underflow to 0 even when m2 > 0
    skew = m3 / m2**1.5 if m2**1.5 > 0.0 else 0.0
    kurt = m4 / (m2 * m2) - 3.0 if m2 * m2 > 0.0 else 0.0
    return np.array([mu, float(np.median(x)), math.sqrt(m2), skew, kurt])


def _xlog2x(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


# ---------------------------------------------------------------------------
# co-occurrence

def glcm(q: np.ndarray, offsets=DEFAULT_OFFSETS, levels: int | None = None) -> np.ndarray:
    """Symmetric normalized co-occurrence matrix of a quantized patch.

    Counts are accumulated over every offset and its negation, then
    normalized to sum 1.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 2 or min(q.shape) < 2:
        raise DegenerateInput("patch side must be at least 2")
    if not offsets:
        raise DegenerateInput("offsets must be non-empty")
    L = int(levels) if levels is not None else int(q.max()) + 1
    counts = np.zeros((L, L), dtype=np.int64)
    any_pairs = False
    for dr, dc in offsets:
        h, w = q.shape
        r0, r1 = max(0, -dr), min(h, h - dr)
        c0, c1 = max(0, -dc), min(w, w - dc)
        if r1 <= r0 or c1 <= c0:
            continue
        a = q[r0:r1, c0:c1].ravel()
        b = q[r0 + dr : r1 + dr, c0 + dc : c1 + dc].ravel()
        np.add.at(counts, (a, b), 1)
        np.add.at(counts, (b, a), 1)
        any_pairs = True
    if not any_pairs:
        raise DegenerateInput("patch too small for every offset")
    return counts / counts.sum()


def haralick13(m: np.ndarray) -> np.ndarray:
    """13 Haralick statistics of a normalized co-occurrence matrix.

    Order matches HARALICK_NAMES. Entropies are base-2 with 0*log 0 = 0;
    correlation-type features are 0 when a marginal variance vanishes.
    """
    p = np.asarray(m, dtype=np.float64)
    L = p.shape[0]
    i = np.arange(L, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mux, muy = i @ px, i @ py
    varx = (i * i) @ px - mux * mux
    vary = (i * i) @ py - muy * muy

    ii, jj = np.meshgrid(i, i, indexing="ij")
    energy = float((p * p).sum())
    contrast = float(((ii - jj) ** 2 * p).sum())
    if varx > 0.0 and vary > 0.0:
        correlation = float(((ii * jj * p).sum() - mux * muy) / np.sqrt(varx * vary))
    else:
        correlation = 0.0
    variance = float(varx)
    idm = float((p / (1.0 + (ii - jj) ** 2)).sum())

    k_sum = np.arange(2 * L - 1, dtype=np.float64)
    p_sum = np.zeros(2 * L - 1)
    np.add.at(p_sum, (np.arange(L)[:, None] + np.arange(L)[None, :]).ravel(), p.ravel())
    sum_average = float(k_sum @ p_sum)
    sum_variance = float((k_sum - sum_average) ** 2 @ p_sum)
    sum_entropy = float(-_xlog2x(p_sum).sum())

    k_diff = np.arange(L, dtype=np.float64)
    p_diff = np.zeros(L)
    np.add.at(p_diff, np.abs(np.arange(L)[:, None] - np.arange(L)[None, :]).ravel(), p.ravel())
    diff_average = float(k_diff @ p_diff)
    diff_variance = float((k_diff - diff_average) ** 2 @ p_diff)
    diff_entropy = float(-_xlog2x(p_diff).sum())

    entropy = float(-_xlog2x(p).sum())
    hx = float(-_xlog2x(px).sum())
    hy = float(-_xlog2x(py).sum())
    # HXY1 = -sum p log(px py) and HXY2 = -sum px py log(px py), both of
    # which reduce to HX + HY.
    hxy1 = hx + hy
    hxy2 = hx + hy
    denom = max(hx, hy)
    imc1 = (entropy - hxy1) / denom if denom > 0.0 else 0.0
    arg = 1.0 - np.exp(-2.0 * np.log(2.0) * (hxy2 - entropy))
    imc2 = float(np.sqrt(arg)) if arg > 0.0 else 0.0

    return np.array(
        [
            energy,
            contrast,
            correlation,
            variance,
            idm,
            sum_average,
            sum_variance,
            sum_entropy,
            entropy,
            diff_variance,
            diff_entropy,
            imc1,
            imc2,
        ]
    )


def haralick_maps(q: np.ndarray, levels: int, window: int) -> np.ndarray:
    """Sliding-window Haralick feature maps (13, s, s) via the active kernel."""
    q = np.ascontiguousarray(q, dtype=np.uint8)
    if window % 2 == 0:
        raise DegenerateInput("window must be odd")
    if window > min(q.shape):
        raise DegenerateInput(
            f"window {window} larger than map side {min(q.shape)}"
        )
    return backend.haralick_window_maps(q, levels, window)


def haralick_vh(p: np.ndarray, window: int = 11, levels: int = 16) -> np.ndarray:
    """Global Haralick descriptor V_H: per-pixel windowed haralick13, averaged.

    The per-pixel sums are divided by the pixel count so the descriptor is
    independent of patch side.
    """
    q = quantize(p, levels)
    maps = haralick_maps(q, levels, window)
    return maps.mean(axis=(1, 2))


# ---------------------------------------------------------------------------
# gradients and orientation

def gradient_field(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed intensity gradients (gx along columns/X, gy along rows/Y).

    Central differences in the interior, one-sided at borders.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or min(p.shape) < 3:
        raise DegenerateInput("gradient field needs side >= 3")
    gy, gx = np.gradient(p)
    return gx, gy


def _boxsum_valid(x: np.ndarray, window: int) -> np.ndarray:
    ii = np.zeros((x.shape[0] + 1, x.shape[1] + 1))
    np.cumsum(np.cumsum(x, axis=0), axis=1, out=ii[1:, 1:])
    w = window
    return ii[w:, w:] - ii[:-w, w:] - ii[w:, :-w] + ii[:-w, :-w]


def dominant_orientation_map(
    gx: np.ndarray, gy: np.ndarray, window: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel dominant orientation of the windowed gradient field.

    For each pixel whose window fits, the (gx, gy) pairs of the window are
    stacked into a matrix; theta is the orientation of its first principal
    axis (uncentered), folded into [0, pi). Returns (theta, degenerate)
    where `degenerate` flags all-zero-gradient windows (theta forced to 0).
    """
    if window < 3 or window % 2 == 0:
        raise DegenerateInput("orientation window must be odd and >= 3")
    gx = np.asarray(gx, dtype=np.float64)
    gy = np.asarray(gy, dtype=np.float64)
    if gx.shape != gy.shape:
        raise DegenerateInput("gx/gy shape mismatch")
    if min(gx.shape) < window:
        raise DegenerateInput("orientation window larger than field")
    sxx = _boxsum_valid(gx * gx, window)
    syy = _boxsum_valid(gy * gy, window)
    sxy = _boxsum_valid(gx * gy, window)
    theta = 0.5 * np.arctan2(2.0 * sxy, sxx - syy)
    theta = np.mod(theta, np.pi)
    degenerate = (sxx + syy) == 0.0
    theta[degenerate] = 0.0
    # fold values that land exactly on pi back to 0
    theta[theta >= np.pi] = 0.0
    return theta, degenerate


def quantize_orientations(theta: np.ndarray, bins: int) -> np.ndarray:
    """Uniformly bin orientations in [0, pi) into `bins` levels."""
    q = np.floor(theta / np.pi * bins).astype(np.int64)
    return np.clip(q, 0, bins - 1).astype(np.uint8)


def collage_vc(p: np.ndarray, window: int = 5, bins: int = 16) -> np.ndarray:
    """Gradient-orientation co-occurrence descriptor V_C (65 values).

    Pipeline: gradient field -> windowed dominant orientation -> orientation
    quantization -> per-pixel windowed haralick13 over the orientation map
    -> [mean, median, std, skewness, kurtosis] of each of the 13 feature
    maps, feature-major.
    """
    gx, gy = gradient_field(p)
    theta, _ = dominant_orientation_map(gx, gy, window)
    q = quantize_orientations(theta, bins)
    maps = haralick_maps(q, bins, window)
    return np.concatenate([five_stats(maps[k]) for k in range(13)])


# ---------------------------------------------------------------------------
# alternate representations

def histogram_peaks(
    p: np.ndarray,
    min_height: float = 200.0,
    min_separation: int = 60,
) -> list[tuple[int, int]]:
    """Prominent peaks of the 256-bin intensity histogram.

    Local maxima with height >= min_height are selected greedily in
    descending height (ties to the lower index); candidates closer than
    min_separation bins to an accepted peak are suppressed. Returns
    (bin index, height) pairs in bin order.
    """
    p = np.asarray(p)
    hist = np.bincount(p.ravel().astype(np.int64), minlength=256)[:256]
    left = np.empty(256, dtype=np.int64)
    right = np.empty(256, dtype=np.int64)
    left[0], right[-1] = -1, -1
    left[1:], right[:-1] = hist[:-1], hist[1:]
    candidates = np.flatnonzero((hist >= left) & (hist >= right) & (hist >= min_height) & (hist > 0))
    order = sorted(candidates, key=lambda i: (-hist[i], i))
    accepted: list[int] = []
    for i in order:
        if all(abs(i - a) >= min_separation for a in accepted):
            accepted.append(i)
    return [(int(i), int(hist[i])) for i in sorted(accepted)]


def fourier_stats(p: np.ndarray) -> np.ndarray:
    """[mean, median, skewness] of the 1/MN-normalized magnitude spectrum."""
    p = np.asarray(p, dtype=np.float64)
    if min(p.shape) < 2:
        raise DegenerateInput("fourier stats need side >= 2")
    m, n = p.shape
    # real-input transform; reconstruct the conjugate half's magnitudes
    half = np.abs(np.fft.rfft2(p)) / (m * n)
    # column v >= n_half of the full spectrum mirrors column n - v with the
    # row index negated mod m
    src = slice(n - half.shape[1], 0, -1)
    mirror = np.roll(half[::-1, src], 1, axis=0)
    mag = np.concatenate([half, mirror], axis=1)
    return np.array([mag.mean(), float(np.median(mag)), _skewness(mag)])


def range_filter(p: np.ndarray) -> np.ndarray:
    """Per-pixel max - min over the replicate-padded 3x3 neighborhood."""
    p = np.asarray(p, dtype=np.float64)
    if min(p.shape) < 3:
        raise DegenerateInput("range filter needs side >= 3")
    padded = np.pad(p, 1, mode="edge")
    h, w = p.shape
    hi = padded[0:h].copy()
    lo = padded[0:h].copy()
    # separable 3x3 max/min: rows then columns of the padded image
    np.maximum(hi, padded[1 : h + 1], out=hi)
    np.maximum(hi, padded[2 : h + 2], out=hi)
    np.minimum(lo, padded[1 : h + 1], out=lo)
    np.minimum(lo, padded[2 : h + 2], out=lo)
    out = hi[:, 0:w].copy()
    np.maximum(out, hi[:, 1 : w + 1], out=out)
    np.maximum(out, hi[:, 2 : w + 2], out=out)
    lo2 = lo[:, 0:w].copy()
    np.minimum(lo2, lo[:, 1 : w + 1], out=lo2)
    np.minimum(lo2, lo[:, 2 : w + 2], out=lo2)
    return out - lo2


def range_filter_stats(p: np.ndarray) -> np.ndarray:
    """Five first-order statistics of the 3x3 range map."""
    return five_stats(range_filter(p))


def _histogram_entropy(p: np.ndarray) -> float:
    hist = np.bincount(np.asarray(p).ravel().astype(np.int64), minlength=256)[:256]
    q = hist / hist.sum()
    return float(-_xlog2x(q).sum())


def _intensity_stats(hist: np.ndarray) -> np.ndarray:
    """five_stats of an 8-bit image, computed from its 256-bin histogram."""
    n = int(hist.sum())
    v = np.arange(256, dtype=np.float64)
    mu = float(v @ hist) / n
    d = v - mu
    d2 = d * d
    m2 = float(d2 @ hist) / n
    m3 = float((d2 * d) @ hist) / n
    m4 = float((d2 * d2) @ hist) / n
    cum = np.cumsum(hist)
    i1 = int(np.searchsorted(cum, (n - 1) // 2 + 1))
    i2 = int(np.searchsorted(cum, n // 2 + 1))
    median = 0.5 * (i1 + i2)
    skew = m3 / m2**1.5 if m2 > 0.0 else 0.0
    kurt = m4 / (m2 * m2) - 3.0 if m2 > 0.0 else 0.0
    return np.array([mu, median, math.sqrt(m2), skew, kurt])


def altrep_va(p: np.ndarray, params: FeatureParams = FeatureParams()) -> np.ndarray:
    """16-dimensional alternate-representation descriptor V_A.

    Composition: [peak_count, mean_peak_spacing] + fourier [mean, median,
    skewness] + range-filter five stats + raw-intensity [mean, median, std,
    skewness, kurtosis, histogram entropy].

    The peak height threshold assumes the reference patch side; for smaller
    patches it is scaled by (side / reference)^2 so the per-pixel density it
    expresses is preserved.
    """
    p = np.asarray(p)
    side = min(p.shape)
    min_height = params.peak_min_height
    if side < params.reference_patch_side:
        min_height *= (side / params.reference_patch_side) ** 2
    peaks = histogram_peaks(p, min_height, params.peak_min_separation)
    n_peaks = len(peaks)
    if n_peaks >= 2:
        idx = np.array([i for i, _ in peaks], dtype=np.float64)
        spacing = float(np.diff(idx).mean())
    else:
        spacing = 0.0
    hist = np.bincount(p.ravel().astype(np.int64), minlength=256)[:256].astype(np.float64)
    hist_entropy = float(-_xlog2x(hist / hist.sum()).sum())
    intensity = np.concatenate([_intensity_stats(hist), [hist_entropy]])
    return np.concatenate([[float(n_peaks), spacing], fourier_stats(p), range_filter_stats(p), intensity])


# ---------------------------------------------------------------------------
# full feature space

def extract_fs(p: np.ndarray, params: FeatureParams = FeatureParams()) -> FeatureVector:
    """Full 94-dimensional feature vector [V_A | V_H | V_C] of a patch."""
    v_a = altrep_va(p, params)
    v_h = haralick_vh(p, params.haralick_window, params.glcm_levels)
    v_c = collage_vc(p, params.collage_window, params.collage_bins)
    return FeatureVector(v_a=v_a, v_h=v_h, v_c=v_c)
