"""Shared frame fixtures: textured scenes with controlled global motion."""

from pathlib import Path

import cv2
import numpy as np
from PIL import Image


def smooth_texture(h, w, seed, blur=2.0):
    """Random RGB texture with enough low-frequency structure for flow."""
    rng = np.random.default_rng(seed)
    noise = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    return cv2.GaussianBlur(noise, ksize=(0, 0), sigmaX=blur)


def write_frames(out_dir, arrays):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for t, arr in enumerate(arrays):
        path = out_dir / f"frame_{t:04d}.png"
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")
        paths.append(path)
    return paths


def translating_frames(out_dir, T, h, w, shift=(5, 0), seed=0):
    """T frames whose content moves by (sx, sy) pixels per frame.

    Each frame is a window into one big texture; the window origin moves
    against the shift so the content appears to move with it.
    """
    sx, sy = shift
    margin_x, margin_y = abs(sx) * T, abs(sy) * T
    texture = smooth_texture(h + 2 * margin_y + 1, w + 2 * margin_x + 1, seed)
    arrays = []
    for t in range(T):
        oy = margin_y - t * sy
        ox = margin_x - t * sx
        arrays.append(texture[oy:oy + h, ox:ox + w])
    return write_frames(out_dir, arrays)


def static_frames(out_dir, T, h, w, seed=0):
    texture = smooth_texture(h, w, seed)
    return write_frames(out_dir, [texture] * T)
