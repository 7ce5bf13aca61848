"""Per-frame descriptor grids.

The default backend exports key vectors from the last attention layer of
a self-supervised ViT (loaded through torch.hub); a dependency-free
patch-statistics backend covers smoke tests and environments without
model weights.  Either way each frame becomes a gh x gw x d float32
grid with gh = floor((h - patch) / stride) + 1.
"""

import json
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ExtractorError
from .frames import list_frames, load_frame
from .tnsr import write_f32

# ImageNet channel statistics, the normalization ViT checkpoints expect
_VIT_MEAN = (0.485, 0.456, 0.406)
_VIT_STD = (0.229, 0.224, 0.225)


def grid_shape(h, w, patch, stride):
    if patch < 1 or stride < 1:
        raise ExtractorError(f"patch and stride must be >= 1, got {patch}/{stride}")
    if h < patch or w < patch:
        raise ExtractorError(f"frame {h}x{w} is smaller than patch {patch}")
    return (h - patch) // stride + 1, (w - patch) // stride + 1


class PatchStatsModel:
    """Deterministic local-statistics descriptors, 16 dims per patch.

    Channels: per-channel mean, per-channel spread, per-channel mean
    absolute horizontal and vertical differences, and the four grayscale
    quadrant means.  Purely a geometry-correct stand-in when no
    pretrained model is reachable.
    """

    name = "patch-stats"
    dim = 16

    def __call__(self, frame, patch, stride):
        if patch < 2:
            raise ExtractorError("patch-stats needs patch >= 2")
        gh, gw = grid_shape(frame.shape[0], frame.shape[1], patch, stride)
        win = sliding_window_view(frame.astype(np.float64), (patch, patch), axis=(0, 1))
        win = win[::stride, ::stride]  # gh x gw x 3 x patch x patch
        parts = [
            win.mean(axis=(3, 4)),
            win.std(axis=(3, 4)),
            np.abs(np.diff(win, axis=4)).mean(axis=(3, 4)),
            np.abs(np.diff(win, axis=3)).mean(axis=(3, 4)),
        ]
        gray = win.mean(axis=2)
        half = patch // 2
        parts.append(
            np.stack(
                [
                    gray[:, :, :half, :half].mean(axis=(2, 3)),
                    gray[:, :, :half, half:].mean(axis=(2, 3)),
                    gray[:, :, half:, :half].mean(axis=(2, 3)),
                    gray[:, :, half:, half:].mean(axis=(2, 3)),
                ],
                axis=-1,
            )
        )
        out = np.concatenate(parts, axis=-1).astype(np.float32)
        assert out.shape == (gh, gw, self.dim)
        return out


class DinoKeyModel:
    """Keys from the last attention layer of a DINO ViT."""

    name = "dino"

    def __init__(self, model, device="cpu"):
        self.model = model
        self.device = device
        patch = model.patch_embed.patch_size
        self.patch = patch if isinstance(patch, int) else int(patch[0])
        self.dim = int(model.embed_dim)
        self.num_heads = int(model.blocks[-1].attn.num_heads)

    def __call__(self, frame, patch, stride):
        import torch

        if patch != self.patch or stride != self.patch:
            raise ExtractorError(
                f"model tokenizes at {self.patch} px; pass "
                f"--patch {self.patch} --stride {self.patch}"
            )
        h, w = frame.shape[:2]
        if h % patch or w % patch:
            raise ExtractorError(
                f"frame {h}x{w} is not a multiple of the {patch} px patch size"
            )
        gh, gw = grid_shape(h, w, patch, stride)
        mean = torch.tensor(_VIT_MEAN).view(3, 1, 1)
        std = torch.tensor(_VIT_STD).view(3, 1, 1)
        tensor = torch.from_numpy(np.ascontiguousarray(frame)).permute(2, 0, 1)
        tensor = ((tensor - mean) / std)[None].to(self.device)

        captured = {}

        def hook(_module, _inputs, output):
            captured["qkv"] = output.detach()

        handle = self.model.blocks[-1].attn.qkv.register_forward_hook(hook)
        try:
            with torch.no_grad():
                self.model(tensor)
        finally:
            handle.remove()
        qkv = captured["qkv"][0]  # tokens x 3*dim
        head_dim = self.dim // self.num_heads
        k = qkv.reshape(qkv.shape[0], 3, self.num_heads, head_dim)[:, 1]
        keys = k.reshape(qkv.shape[0], self.dim)[1:]  # drop the CLS token
        if keys.shape[0] != gh * gw:
            raise ExtractorError(
                f"model produced {keys.shape[0]} patch tokens, expected {gh * gw}"
            )
        return keys.reshape(gh, gw, self.dim).cpu().numpy().astype(np.float32)


def load_dino(variant="dino_vits8", device="cpu"):
    """Fetch a pretrained DINO backbone via torch.hub."""
    try:
        import torch
    except ImportError as exc:
        raise ExtractorError("model unavailable: torch is not installed") from exc
    try:
        model = torch.hub.load("facebookresearch/dino:main", variant, verbose=False)
    except Exception as exc:
        raise ExtractorError(
            f"model unavailable: could not load {variant} ({exc})"
        ) from exc
    model.eval()
    model.to(device)
    return DinoKeyModel(model, device)


def extract_keys(frames_dir, out_dir, patch, stride, model):
    """Write one descriptor TNSR per frame plus a manifest fragment.

    model is a callable (frame, patch, stride) -> gh x gw x d float32.
    Returns the fragment path.
    """
    frame_paths = list_frames(frames_dir)
    out_dir = Path(out_dir)
    (out_dir / "keys").mkdir(parents=True, exist_ok=True)

    rel_paths = []
    dim = None
    shape = None
    for t, frame_path in enumerate(frame_paths):
        frame = load_frame(frame_path)
        grid = np.asarray(model(frame, patch, stride), dtype=np.float32)
        expected = grid_shape(frame.shape[0], frame.shape[1], patch, stride)
        if grid.ndim != 3 or grid.shape[:2] != expected:
            raise ExtractorError(
                f"backend produced grid {grid.shape}, expected {expected} + depth"
            )
        if dim is None:
            dim, shape = grid.shape[2], grid.shape
        elif grid.shape != shape:
            raise ExtractorError(
                f"frame {frame_path.name}: grid {grid.shape} differs from {shape}"
            )
        rel = f"keys/keys_{t:04d}.tnsr"
        write_f32(out_dir / rel, grid)
        rel_paths.append(rel)

    fragment = {
        "descriptor_paths": rel_paths,
        "patch_geometry": {"patch": int(patch), "stride": int(stride)},
        "descriptor_dim": int(dim),
        "backend": getattr(model, "name", type(model).__name__),
        "frame_count": len(frame_paths),
    }
    fragment_path = out_dir / "keys_fragment.json"
    fragment_path.write_text(json.dumps(fragment, indent=2, sort_keys=True) + "\n")
    return fragment_path
