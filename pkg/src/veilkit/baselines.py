"""Whole-frame obfuscation baselines: pixelation, Gaussian blur, mask fill.

All three operate on h x w x 3 float32 frames in [0, 1] and return the
same shape.  Block and mask means are accumulated in float64 so that
re-applying pixelate on block-aligned input reproduces it bit-exactly.
"""

from __future__ import annotations

import numpy as np
from PIL import Image
from scipy.ndimage import convolve1d

from .errors import ValidationError

BLUR_PRESETS = {"weak": (13, 10.0), "strong": (21, 10.0)}


def _as_frame(frame):
    arr = np.asarray(frame, dtype=np.float32)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise ValidationError(f"frame must be h x w x c, got shape {arr.shape}")
    return arr


def pixelate(frame, x):
    """Replace every x by x block with its per-channel mean.

    Edge blocks average over their actual extent, so output dims always
    equal input dims.
    """
    x = int(x)
    if x < 1:
        raise ValidationError(f"block size must be >= 1, got {x}")
    arr = _as_frame(frame)
    squeeze = np.asarray(frame).ndim == 2
    if x == 1:
        out = arr.copy()
        return out[:, :, 0] if squeeze else out
    h, w = arr.shape[:2]
    row_edges = np.arange(0, h, x)
    col_edges = np.arange(0, w, x)
    sums = np.add.reduceat(arr.astype(np.float64), row_edges, axis=0)
    sums = np.add.reduceat(sums, col_edges, axis=1)
    row_sizes = np.diff(np.append(row_edges, h))
    col_sizes = np.diff(np.append(col_edges, w))
    counts = np.outer(row_sizes, col_sizes)[:, :, None]
    means = (sums / counts).astype(np.float32)
    out = np.repeat(np.repeat(means, row_sizes, axis=0), col_sizes, axis=1)
    return out[:, :, 0] if squeeze else out


def gaussian_kernel(kappa, sigma):
    """Sampled truncated Gaussian of length kappa, normalized to sum 1."""
    kappa = int(kappa)
    if kappa < 1 or kappa % 2 == 0:
        raise ValidationError(f"kernel size must be odd and >= 1, got {kappa}")
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    offsets = np.arange(kappa, dtype=np.float64) - kappa // 2
    kernel = np.exp(-(offsets**2) / (2.0 * float(sigma) ** 2))
    return kernel / kernel.sum()


def gaussian_blur(frame, kappa, sigma):
    """Separable Gaussian smoothing with reflect padding at borders."""
    kernel = gaussian_kernel(kappa, sigma)
    arr = _as_frame(frame)
    squeeze = np.asarray(frame).ndim == 2
    if kappa == 1:
        out = arr.copy()
        return out[:, :, 0] if squeeze else out
    out = convolve1d(arr.astype(np.float64), kernel, axis=0, mode="reflect")
    out = convolve1d(out, kernel, axis=1, mode="reflect")
    out = out.astype(np.float32)
    return out[:, :, 0] if squeeze else out


def mask_fill(frame, mask):
    """Fill the masked region with its own per-channel mean intensity.

    mask is h x w, nonzero meaning masked; unmasked pixels pass through
    untouched and an empty mask returns the frame unchanged.
    """
    arr = _as_frame(frame)
    squeeze = np.asarray(frame).ndim == 2
    mask = np.asarray(mask)
    if mask.shape != arr.shape[:2]:
        raise ValidationError(
            f"mask shape {mask.shape} does not match frame {arr.shape[:2]}"
        )
    mask = mask != 0
    out = arr.copy()
    if mask.any():
        region = arr[mask].astype(np.float64)
        out[mask] = region.mean(axis=0).astype(np.float32)
    return out[:, :, 0] if squeeze else out


def resize_square(frame, size):
    """Bilinear-resize a float frame to size x size (per channel)."""
    size = int(size)
    if size < 1:
        raise ValidationError(f"resize target must be >= 1, got {size}")
    arr = _as_frame(frame)
    channels = []
    for c in range(arr.shape[2]):
        img = Image.fromarray(arr[:, :, c], mode="F")
        channels.append(
            np.asarray(img.resize((size, size), Image.BILINEAR), dtype=np.float32)
        )
    out = np.stack(channels, axis=2)
    return np.clip(out, 0.0, 1.0)
