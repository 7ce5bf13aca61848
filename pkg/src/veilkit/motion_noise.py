"""Seeded noise frames and flow-driven warping.

Frame 1 is drawn i.i.d. uniform on [mean-std, mean+std] per channel
(clamped to [0, 1]); later frames are produced by backward-gathering
along per-frame flow fields with nearest-neighbor rounding, so every
warped value is a copy of some frame-1 value.  An iid mode redraws each
frame independently instead, destroying temporal coherence on purpose.

Randomness comes from the counter-based Philox generator keyed by the
seed, so output is identical across platforms and thread schedules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tensor_store import read_tensor

MODES = ("warp_iterative", "warp_composed", "iid")

_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


@dataclass
class FlowField:
    """h x w x 2 float32 displacement (u horizontal, v vertical, pixels)
    mapping points in frame t to their positions in frame t-1."""

    values: np.ndarray
    t: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 3 or self.values.shape[2] != 2:
            raise ValidationError(
                f"flow field must be h x w x 2, got {self.values.shape}"
            )
        if not np.isfinite(self.values).all():
            raise ValidationError(f"flow field t={self.t} has non-finite values")
        h, w = self.values.shape[:2]
        bound = float(max(h, w))
        if np.abs(self.values).max(initial=0.0) >= bound:
            raise ValidationError(
                f"flow field t={self.t} has displacements >= {bound} px"
            )


@dataclass
class NoiseSequence:
    """T x h x w x 3 float32 noise frames plus the config that made them."""

    frames: np.ndarray
    seed: int
    mode: str

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 4 or self.frames.shape[3] != 3:
            raise ValidationError(
                f"noise sequence must be T x h x w x 3, got {self.frames.shape}"
            )
        if self.mode not in MODES:
            raise ValidationError(f"unknown noise mode {self.mode!r}")

    def __len__(self):
        return self.frames.shape[0]

    def __getitem__(self, t):
        return self.frames[t]


def _subseed(seed, t):
    # per-frame stream for iid mode; golden-ratio multiplier decorrelates
    # consecutive t without colliding across frames
    return (seed ^ ((t * _GOLDEN64) & _MASK64)) & _MASK64


def _generator(seed):
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def init_noise(h, w, mean, std, seed):
    """Draw one h x w x 3 noise frame, uniform per channel on
    [mean_c - std_c, mean_c + std_c], clamped to [0, 1].

    Draw order is row-major with channel fastest; same seed gives the
    same frame on every platform.
    """
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    if mean.shape != (3,) or std.shape != (3,):
        raise ValidationError("mean and std must each hold 3 values")
    if not (np.isfinite(mean).all() and np.isfinite(std).all()):
        raise ValidationError("mean/std must be finite")
    if (std < 0).any():
        raise ValidationError(f"std must be >= 0, got {std.tolist()}")
    u = _generator(seed).random((h, w, 3))
    values = mean + std * (2.0 * u - 1.0)
    return np.clip(values, 0.0, 1.0).astype(np.float32)


def _round_half_away(x):
    return np.trunc(x + np.copysign(0.5, x))


def _gather_indices(flow, h, w):
    # integer source coordinates for next(p) = prev(clamp(round(p + flow)))
    rows = np.arange(h, dtype=np.float64)[:, None] + flow[..., 1]
    cols = np.arange(w, dtype=np.float64)[None, :] + flow[..., 0]
    r = np.clip(_round_half_away(rows), 0, h - 1).astype(np.int64)
    c = np.clip(_round_half_away(cols), 0, w - 1).astype(np.int64)
    return r, c


def warp_step(prev, flow):
    """Produce the next noise frame by backward-gathering along flow.

    next(p) = prev(clamp(round(p + flow(p)))), rounding half away from
    zero, per channel.  Border lookups clamp to the frame edge.
    """
    prev = np.asarray(prev, dtype=np.float32)
    values = flow.values if isinstance(flow, FlowField) else np.asarray(flow)
    if prev.ndim != 3:
        raise ValidationError(f"noise frame must be h x w x c, got {prev.shape}")
    if values.shape[:2] != prev.shape[:2] or values.shape[2] != 2:
        raise ValidationError(
            f"flow shape {values.shape} does not match frame {prev.shape}"
        )
    h, w = prev.shape[:2]
    r, c = _gather_indices(values.astype(np.float64), h, w)
    return prev[r, c]


def _load_flows(manifest):
    flows = []
    for i, rel in enumerate(manifest.flow_paths):
        arr = read_tensor(manifest.resolve(rel))
        flows.append(FlowField(arr, t=i + 2).values.astype(np.float64))
    return flows


def synthesize(manifest, seed, mode="warp_iterative"):
    """Build the full noise sequence for a clip.

    warp_iterative chains warp_step frame to frame; warp_composed
    accumulates the displacement field back to frame 1 and gathers from
    frame 1 directly; iid redraws every frame from a per-frame subseed.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown noise mode {mode!r}; expected one of {MODES}")
    T = manifest.num_frames
    h, w = manifest.frame_shape
    mean, std = manifest.dataset_mean, manifest.dataset_std

    if mode == "iid":
        frames = [init_noise(h, w, mean, std, _subseed(seed, t)) for t in range(1, T + 1)]
        return NoiseSequence(np.stack(frames), seed, mode)

    if T > 1 and manifest.flow_paths is None:
        raise ValidationError(
            f"clip {manifest.clip_id!r} lists no flow fields; mode {mode!r} "
            f"needs {T - 1}"
        )
    first = init_noise(h, w, mean, std, seed)
    frames = [first]
    if T > 1:
        flows = _load_flows(manifest)
        if mode == "warp_iterative":
            for flow in flows:
                frames.append(warp_step(frames[-1], flow))
        else:
            # accumulate p -> frame-1 displacement, rounding only when
            # sampling, then gather every frame straight from frame 1
            disp = np.zeros((h, w, 2), dtype=np.float64)
            for flow in flows:
                r, c = _gather_indices(flow, h, w)
                disp = flow + disp[r, c]
                rr, cc = _gather_indices(disp, h, w)
                frames.append(first[rr, cc])
    return NoiseSequence(np.stack(frames), seed, mode)
