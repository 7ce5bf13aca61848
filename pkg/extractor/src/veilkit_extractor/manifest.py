"""Merge extractor fragments into a full clip manifest.

The engine's manifest is a JSON object with frame, descriptor, flow,
and optional mask paths (relative to the manifest file), per-channel
dataset mean/std in [0, 1], and the patch geometry.  extract_keys and
extract_flow each emit a fragment; this stitches them together around
the frame list.
"""

import json
import os
from pathlib import Path

import numpy as np

from .errors import ExtractorError
from .frames import list_frames, load_frame


def dataset_stats(frame_paths):
    """Per-channel mean and standard deviation over all frame pixels."""
    total = np.zeros(3, dtype=np.float64)
    total_sq = np.zeros(3, dtype=np.float64)
    count = 0
    for path in frame_paths:
        frame = load_frame(path).astype(np.float64)
        total += frame.sum(axis=(0, 1))
        total_sq += (frame * frame).sum(axis=(0, 1))
        count += frame.shape[0] * frame.shape[1]
    mean = total / count
    var = np.maximum(total_sq / count - mean * mean, 0.0)
    return mean.tolist(), np.sqrt(var).tolist()


def _load_fragment(path, required_key):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ExtractorError(f"cannot read fragment {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ExtractorError(f"{path}: invalid JSON: {exc}") from exc
    if required_key not in doc:
        raise ExtractorError(f"{path} is not a {required_key} fragment")
    return doc


def merge_fragments(out_dir, frames_dir, keys_fragment=None, flow_fragment=None,
                    clip_id="clip", patch_geometry=None):
    """Write out_dir/manifest.json combining the frames and fragments.

    Fragment paths stay valid because both extractors write relative to
    the same out_dir the manifest lands in; the frame paths are
    re-expressed relative to that directory too.  The manifest schema
    always needs a patch geometry: it comes from the keys fragment, or
    from the patch_geometry (patch, stride) argument when no grids are
    being merged.
    """
    out_dir = Path(out_dir)
    frame_paths = list_frames(frames_dir)
    rel_frames = [
        Path(os.path.relpath(p, out_dir)).as_posix() for p in frame_paths
    ]
    mean, std = dataset_stats(frame_paths)
    manifest = {
        "clip_id": clip_id,
        "frame_paths": rel_frames,
        "dataset_mean": mean,
        "dataset_std": std,
    }
    if patch_geometry is not None:
        patch, stride = patch_geometry
        manifest["patch_geometry"] = {"patch": int(patch), "stride": int(stride)}

    if keys_fragment is not None:
        doc = _load_fragment(keys_fragment, "descriptor_paths")
        if doc.get("frame_count") not in (None, len(frame_paths)):
            raise ExtractorError(
                f"keys fragment covers {doc['frame_count']} frames, "
                f"directory holds {len(frame_paths)}"
            )
        if len(doc["descriptor_paths"]) != len(frame_paths):
            raise ExtractorError(
                f"{len(doc['descriptor_paths'])} descriptor grids for "
                f"{len(frame_paths)} frames"
            )
        manifest["descriptor_paths"] = doc["descriptor_paths"]
        manifest["patch_geometry"] = doc["patch_geometry"]

    if flow_fragment is not None:
        doc = _load_fragment(flow_fragment, "flow_paths")
        if doc.get("flow_convention") != "t->t-1":
            raise ExtractorError(
                f"flow fragment convention {doc.get('flow_convention')!r} "
                f"is not 't->t-1'"
            )
        if len(doc["flow_paths"]) != len(frame_paths) - 1:
            raise ExtractorError(
                f"{len(doc['flow_paths'])} flow fields for "
                f"{len(frame_paths)} frames; expected one per frame pair"
            )
        manifest["flow_paths"] = doc["flow_paths"]

    if "patch_geometry" not in manifest:
        raise ExtractorError(
            "manifest needs a patch geometry; pass patch_geometry=(patch, "
            "stride) or merge a keys fragment"
        )
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
