"""Self-contained synthetic clips for exercising the whole pipeline.

Generated descriptor grids use an orthogonal basis: patches inside the
requested saliency pattern carry the first basis vector (cosine 1
against the first library template) and patches outside carry the last
basis vector (cosine 0 against every other template).  Expected
saliency is therefore analytically exact, not approximate.

Flows follow the requested pattern exactly; frames are seeded random
RGB noise; the whole tree is byte-identical for a given (spec, seed).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import StorageError, ValidationError
from .saliency import _nearest_cells
from .template_lib import Template, TemplateLibrary
from .tensor_store import (
    ClipManifest,
    PatchGeometry,
    compute_dataset_stats,
    load_manifest,
    write_image_png,
    write_tensor,
)

_MASK64 = (1 << 64) - 1

_REQUIRED_KEYS = ("T", "h", "w", "d", "patch", "stride", "flow_pattern",
                  "saliency_pattern", "seed")


def make_library(d, names):
    """Library of mutually orthogonal unit basis descriptors, one per name."""
    names = list(names)
    if not names:
        raise ValidationError("library needs at least one name")
    if len(names) > d:
        raise ValidationError(
            f"{len(names)} names need descriptor dimension >= {len(names)}, got d={d}"
        )
    basis = np.eye(d, dtype=np.float32)
    templates = {
        name: Template(name, basis[i][None, :], source_image="synthetic")
        for i, name in enumerate(names)
    }
    return TemplateLibrary(templates)


def _parse_flow_pattern(value):
    if value == "zero":
        return "zero", None
    if isinstance(value, dict) and list(value) == ["constant"]:
        dx, dy = value["constant"]
        return "constant", (float(dx), float(dy))
    if isinstance(value, dict) and list(value) == ["shear"]:
        return "shear", float(value["shear"])
    raise ValidationError(
        f"flow_pattern must be 'zero', {{'constant': [dx, dy]}}, or "
        f"{{'shear': k}}, got {value!r}"
    )


def _parse_saliency_pattern(value):
    if value in ("none", "full"):
        return value, None
    if isinstance(value, dict) and list(value) == ["blob"]:
        blob = value["blob"]
        (cr, cc), radius = blob["center"], blob["radius"]
        if radius < 0:
            raise ValidationError(f"blob radius must be >= 0, got {radius}")
        return "blob", (float(cr), float(cc), float(radius))
    raise ValidationError(
        f"saliency_pattern must be 'none', 'full', or "
        f"{{'blob': {{'center': [r, c], 'radius': r}}}}, got {value!r}"
    )


def membership_grid(geometry, gh, gw, pattern, detail):
    """Boolean gh x gw grid: which patch centers fall inside the pattern."""
    if pattern == "none":
        return np.zeros((gh, gw), dtype=bool)
    if pattern == "full":
        return np.ones((gh, gw), dtype=bool)
    cr, cc, radius = detail
    rows = geometry.centers(gh)[:, None]
    cols = geometry.centers(gw)[None, :]
    return (rows - cr) ** 2 + (cols - cc) ** 2 <= radius**2


def _flow_values(pattern, detail, h, w):
    flow = np.zeros((h, w, 2), dtype=np.float32)
    if pattern == "constant":
        flow[:, :, 0] = detail[0]
        flow[:, :, 1] = detail[1]
    elif pattern == "shear":
        k = detail
        flow[:, :, 0] = k * np.arange(h, dtype=np.float32)[:, None]
        flow[:, :, 1] = k * np.arange(w, dtype=np.float32)[None, :]
    return flow


def make_clip(spec, out_dir):
    """Write frames, key grids, flows, masks, and a manifest; return the
    validated manifest."""
    missing = [key for key in _REQUIRED_KEYS if key not in spec]
    if missing:
        raise ValidationError(f"clip spec missing keys {missing}")
    T, h, w, d = (int(spec[k]) for k in ("T", "h", "w", "d"))
    patch, stride = int(spec["patch"]), int(spec["stride"])
    seed = int(spec["seed"])
    clip_id = str(spec.get("clip_id", f"synth-{seed}"))
    if T < 1:
        raise ValidationError(f"T must be >= 1, got {T}")
    if d < 2:
        raise ValidationError(f"descriptor dimension must be >= 2, got {d}")
    geometry = PatchGeometry(patch, stride)
    gh, gw = geometry.grid_shape(h, w)
    flow_kind, flow_detail = _parse_flow_pattern(spec["flow_pattern"])
    sal_kind, sal_detail = _parse_saliency_pattern(spec["saliency_pattern"])

    out_dir = Path(out_dir)
    try:
        for sub in ("frames", "keys", "flow", "masks"):
            (out_dir / sub).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create output tree {out_dir}: {exc}") from exc

    rng = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    frame_paths = []
    for t in range(T):
        pixels = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
        rel = f"frames/frame_{t:04d}.png"
        write_image_png(out_dir / rel, pixels)
        frame_paths.append(rel)

    inside = membership_grid(geometry, gh, gw, sal_kind, sal_detail)
    grid = np.zeros((gh, gw, d), dtype=np.float32)
    grid[:, :, d - 1] = 1.0
    grid[inside] = 0.0
    grid[inside, 0] = 1.0
    descriptor_paths = []
    for t in range(T):
        rel = f"keys/keys_{t:04d}.tnsr"
        write_tensor(out_dir / rel, grid, dtype="f32")
        descriptor_paths.append(rel)

    flow_paths = []
    flow = _flow_values(flow_kind, flow_detail, h, w)
    if np.abs(flow).max(initial=0.0) >= max(h, w):
        raise ValidationError(
            f"flow pattern displaces by >= {max(h, w)} px; shrink it"
        )
    for t in range(2, T + 1):
        rel = f"flow/flow_{t:04d}.tnsr"
        write_tensor(out_dir / rel, flow, dtype="f32")
        flow_paths.append(rel)

    # pixel-level mask matching nearest-cell reassembly of the pattern
    rows = _nearest_cells(h, gh, patch, stride)
    cols = _nearest_cells(w, gw, patch, stride)
    pixel_mask = inside[np.ix_(rows, cols)]
    mask_bytes = np.where(pixel_mask, 255, 0).astype(np.uint8)
    mask_paths = []
    for t in range(T):
        rel = f"masks/mask_{t:04d}.png"
        Image.fromarray(mask_bytes, mode="L").save(out_dir / rel, format="PNG")
        mask_paths.append(rel)

    mean, std = compute_dataset_stats([out_dir / rel for rel in frame_paths])
    manifest = ClipManifest(
        clip_id=clip_id,
        frame_paths=frame_paths,
        descriptor_paths=descriptor_paths,
        flow_paths=flow_paths if flow_paths else None,
        mask_paths=mask_paths,
        dataset_mean=mean,
        dataset_std=std,
        patch_geometry=geometry,
        base_dir=out_dir,
    )
    manifest.write(out_dir / "manifest.json")
    return load_manifest(out_dir / "manifest.json")


def spec_from_json(path):
    """Load and lightly check a clip spec JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StorageError(f"cannot read spec {path}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise ValidationError(f"{path}: spec must be a JSON object")
    return spec
