"""Frame decoding, grayscale conversion, patch extraction and quantization."""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import InvalidImage, InvalidQuantization, PatchTooLarge

# Rec. 601 luma weights.
_LUMA = (0.299, 0.587, 0.114)


def load_frame(path) -> np.ndarray:
    """Decode a PNG/JPEG file into an RGB uint8 array of shape (H, W, 3)."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, Image.DecompressionBombError) as exc:
        raise InvalidImage(f"cannot decode frame {path}: {exc}") from exc


def to_grayscale(frame: np.ndarray) -> np.ndarray:
    """Convert an RGB frame to 8-bit grayscale via Rec. 601 luma.

    A 2-D input is treated as already-gray and validated/copied.
    """
    frame = np.asarray(frame)
    if frame.size == 0:
        raise InvalidImage("empty frame")
    if frame.ndim == 2:
        if frame.dtype != np.uint8:
            raise InvalidImage("grayscale frames must be uint8")
        return frame.copy()
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise InvalidImage(f"expected (H, W, 3) RGB frame, got shape {frame.shape}")
    if frame.dtype != np.uint8:
        raise InvalidImage("frames must have 8-bit channels")
    r, g, b = frame[:, :, 0], frame[:, :, 1], frame[:, :, 2]
    luma = _LUMA[0] * r + _LUMA[1] * g + _LUMA[2] * b
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def extract_center_patch(img: np.ndarray, n: int) -> np.ndarray:
    """Extract the centered n-by-n analysis patch.

    Top-left corner is (floor((H - n) / 2), floor((W - n) / 2)). An image
    smaller than the patch is an error; padding would fabricate texture.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise InvalidImage(f"expected 2-D grayscale image, got shape {img.shape}")
    h, w = img.shape
    if n <= 0:
        raise PatchTooLarge(f"patch side must be positive, got {n}")
    if n > h or n > w:
        raise PatchTooLarge(f"patch side {n} exceeds image dimensions {h}x{w}")
    r0 = (h - n) // 2
    c0 = (w - n) // 2
    return img[r0 : r0 + n, c0 : c0 + n].copy()


def quantize(patch: np.ndarray, levels: int) -> np.ndarray:
    """Uniformly bin 8-bit intensities into `levels` bins over [0, 256).

    bin = floor(value * levels / 256); order preserving.
    """
    if not 2 <= levels <= 256:
        raise InvalidQuantization(f"levels must be in [2, 256], got {levels}")
    patch = np.asarray(patch)
    return (patch.astype(np.int64) * levels // 256).astype(np.uint8)
