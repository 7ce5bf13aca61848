"""Frame discovery and loading."""

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ExtractorError

FRAME_SUFFIXES = (".png", ".jpg", ".jpeg")


def list_frames(frames_dir):
    """Sorted image paths in a directory; errors when there are none."""
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise ExtractorError(f"frames directory {frames_dir} does not exist")
    paths = sorted(
        p for p in frames_dir.iterdir()
        if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES
    )
    if not paths:
        raise ExtractorError(f"no frames found in {frames_dir}")
    return paths


def load_frame(path):
    """RGB frame as h x w x 3 float32 in [0, 1]."""
    try:
        with Image.open(path) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except OSError as exc:
        raise ExtractorError(f"cannot read frame {path}: {exc}") from exc
    return rgb.astype(np.float32) / 255.0


def to_gray_u8(frame):
    """Rec. 601 luma of a [0, 1] RGB frame, as uint8."""
    luma = frame[..., 0] * 0.299 + frame[..., 1] * 0.587 + frame[..., 2] * 0.114
    return np.clip(np.round(luma * 255.0), 0, 255).astype(np.uint8)
