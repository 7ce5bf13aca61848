"""Selective blending of source frames with noise under a saliency map.

The blend O = I + S*(N - I) is evaluated in lerp form
(1 - S)*I + S*N and clamped to [min(I, N), max(I, N)] per channel, so
S = 0 returns the source bit-exactly, S = 1 returns the noise
bit-exactly, and convexity holds at every pixel despite float rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import VeilkitError, ValidationError
from .motion_noise import MODES, synthesize
from .parallel import pmap
from .saliency import REASSEMBLY_MODES, SaliencyMap, saliency_for_clip
from .template_lib import select
from .tensor_store import read_image


@dataclass
class ObfuscationConfig:
    """Knobs for one obfuscation run.

    saliency_gain multiplies the map before blending (clamped back to
    [0, 1]); the default 1.0 leaves the matched saliency untouched.
    """

    template_names: list
    seed: int = 0
    noise_mode: str = "warp_iterative"
    reassembly_mode: str = "nearest"
    saliency_gain: float = 1.0
    flatten: bool = False

    def __post_init__(self):
        if not self.template_names:
            raise ValidationError("config needs at least one template name")
        if self.noise_mode not in MODES:
            raise ValidationError(f"unknown noise mode {self.noise_mode!r}")
        if self.reassembly_mode not in REASSEMBLY_MODES:
            raise ValidationError(
                f"unknown reassembly mode {self.reassembly_mode!r}"
            )
        if not (np.isfinite(self.saliency_gain) and self.saliency_gain >= 0):
            raise ValidationError(
                f"saliency gain must be >= 0, got {self.saliency_gain}"
            )


@dataclass
class ObfuscationResult:
    """Blended frames plus the stage outputs that produced them.

    saliency holds the raw matched maps; the gain is applied only at
    blend time, so re-feeding these maps reproduces the same frames.
    """

    frames: np.ndarray  # T x h x w x 3 float32
    saliency: list = field(default_factory=list)  # SaliencyMap per frame
    noise: object = None  # NoiseSequence


def _check_unit_range(name, arr):
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise ValidationError(f"{name} values outside [0, 1]")


def blend_frame(frame, saliency, noise):
    """O = I + S*(N - I) with S broadcast across channels."""
    image = np.asarray(frame, dtype=np.float32)
    noise_frame = np.asarray(noise, dtype=np.float32)
    weights = saliency.values if isinstance(saliency, SaliencyMap) else np.asarray(
        saliency, dtype=np.float32
    )
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValidationError(f"frame must be h x w x 3, got {image.shape}")
    if noise_frame.shape != image.shape:
        raise ValidationError(
            f"noise shape {noise_frame.shape} does not match frame {image.shape}"
        )
    if weights.shape != image.shape[:2]:
        raise ValidationError(
            f"saliency shape {weights.shape} does not match frame {image.shape[:2]}"
        )
    _check_unit_range("frame", image)
    _check_unit_range("noise", noise_frame)
    _check_unit_range("saliency", weights)

    s3 = weights[:, :, None].astype(np.float32)
    out = (np.float32(1.0) - s3) * image + s3 * noise_frame
    lo = np.minimum(image, noise_frame)
    hi = np.maximum(image, noise_frame)
    return np.clip(out, lo, hi)


def apply_gain(saliency_map, gain):
    """Scale a map by gain and clamp back to [0, 1]."""
    if gain == 1.0:
        return saliency_map
    values = np.clip(np.float32(gain) * saliency_map.values, 0.0, 1.0)
    return SaliencyMap(values.astype(np.float32), saliency_map.frame_index)


def _stage(name, fn):
    try:
        return fn()
    except VeilkitError as exc:
        raise type(exc)(f"{name} stage: {exc}") from exc


def obfuscate_clip(manifest, library, config, noise=None, saliency_maps=None):
    """Run matching, noise synthesis, and blending for a whole clip.

    Precomputed stage outputs may be passed in (noise, saliency_maps) to
    skip recomputation; they must match the clip's frame count.  The
    returned saliency maps are the raw matched maps; saliency_gain only
    affects the blend.
    """
    selected = _stage("selection", lambda: select(library, config.template_names))
    if saliency_maps is None:
        saliency_maps = _stage(
            "saliency",
            lambda: saliency_for_clip(
                manifest, selected, mode=config.reassembly_mode, flatten=config.flatten
            ),
        )
    if noise is None:
        noise = _stage(
            "noise", lambda: synthesize(manifest, config.seed, config.noise_mode)
        )
    T = manifest.num_frames
    if len(saliency_maps) != T or len(noise) != T:
        raise ValidationError(
            f"stage outputs disagree with frame count {T}: "
            f"{len(saliency_maps)} saliency maps, {len(noise)} noise frames"
        )
    gained = [apply_gain(m, config.saliency_gain) for m in saliency_maps]

    def one(t):
        image = read_image(manifest.resolve(manifest.frame_paths[t]))
        return _stage("blend", lambda: blend_frame(image, gained[t], noise[t]))

    frames = pmap(one, range(T))
    return ObfuscationResult(np.stack(frames), list(saliency_maps), noise)
