"""Shared fixtures: hand-rolled clip trees independent of the synth module."""

import json

import numpy as np
import pytest

from veilkit import PatchGeometry, write_image_png, write_tensor


def build_clip_tree(
    root,
    T=8,
    h=16,
    w=16,
    patch=4,
    stride=4,
    d=8,
    with_keys=True,
    with_flows=True,
    with_masks=False,
    seed=0,
    frame_format="png",
    mean=(0.5, 0.5, 0.5),
    std=(0.25, 0.25, 0.25),
):
    """Write a consistent clip tree and return the manifest path.

    Content is random but deterministic in seed; this builder is
    intentionally separate from the package's own fixture generator so
    manifest validation is tested against independent files.
    """
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    geometry = PatchGeometry(patch, stride)
    gh = (h - patch) // stride + 1
    gw = (w - patch) // stride + 1

    doc = {
        "clip_id": f"fixture-{seed}",
        "frame_paths": [],
        "dataset_mean": list(mean),
        "dataset_std": list(std),
        "patch_geometry": {"patch": patch, "stride": stride},
    }
    for t in range(T):
        if frame_format == "png":
            rel = f"frame_{t:04d}.png"
            pixels = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
            write_image_png(root / rel, pixels)
        else:
            rel = f"frame_{t:04d}.tnsr"
            write_tensor(root / rel, rng.random((h, w, 3)).astype(np.float32))
        doc["frame_paths"].append(rel)

    if with_keys:
        doc["descriptor_paths"] = []
        for t in range(T):
            rel = f"keys_{t:04d}.tnsr"
            write_tensor(root / rel, rng.standard_normal((gh, gw, d)).astype(np.float32))
            doc["descriptor_paths"].append(rel)

    if with_flows and T > 1:
        doc["flow_paths"] = []
        for t in range(2, T + 1):
            rel = f"flow_{t:04d}.tnsr"
            flow = rng.uniform(-1.5, 1.5, size=(h, w, 2)).astype(np.float32)
            write_tensor(root / rel, flow)
            doc["flow_paths"].append(rel)

    if with_masks:
        doc["mask_paths"] = []
        for t in range(T):
            rel = f"mask_{t:04d}.png"
            mask = (rng.random((h, w)) > 0.5).astype(np.uint8) * 255
            from PIL import Image

            Image.fromarray(mask, mode="L").save(root / rel)
            doc["mask_paths"].append(rel)

    path = root / "manifest.json"
    path.write_text(json.dumps(doc, indent=2))
    return path


@pytest.fixture
def clip_tree(tmp_path):
    def factory(**kwargs):
        name = kwargs.pop("name", "clip")
        return build_clip_tree(tmp_path / name, **kwargs)

    return factory
