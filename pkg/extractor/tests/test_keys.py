"""Descriptor grid extraction: geometry, determinism, fragments, errors."""

import json

import numpy as np
import pytest

from veilkit_extractor import (
    ExtractorError,
    PatchStatsModel,
    extract_keys,
    grid_shape,
    load_dino,
    load_frame,
    probe,
)

from conftest import static_frames, write_frames, smooth_texture


def test_grid_shape_formula():
    assert grid_shape(224, 224, 8, 8) == (28, 28)
    assert grid_shape(96, 128, 16, 8) == (11, 15)
    assert grid_shape(16, 16, 16, 16) == (1, 1)


def test_grid_shape_rejects_small_frames():
    with pytest.raises(ExtractorError, match="smaller than patch"):
        grid_shape(7, 16, 8, 8)
    with pytest.raises(ExtractorError, match=">= 1"):
        grid_shape(16, 16, 8, 0)


def test_patch_stats_shapes_and_dtype(tmp_path):
    static_frames(tmp_path / "frames", T=2, h=224, w=224, seed=1)
    fragment = extract_keys(
        tmp_path / "frames", tmp_path / "out", 8, 8, PatchStatsModel()
    )
    doc = json.loads(fragment.read_text())
    assert doc["descriptor_dim"] == 16
    assert doc["patch_geometry"] == {"patch": 8, "stride": 8}
    assert doc["backend"] == "patch-stats"
    assert doc["frame_count"] == 2
    assert doc["descriptor_paths"] == [
        "keys/keys_0000.tnsr", "keys/keys_0001.tnsr",
    ]
    for rel in doc["descriptor_paths"]:
        code, shape = probe(tmp_path / "out" / rel)
        assert code == 0  # float32
        assert shape == (28, 28, 16)


def test_identical_frames_identical_grids(tmp_path):
    static_frames(tmp_path / "frames", T=3, h=64, w=64, seed=2)
    extract_keys(tmp_path / "frames", tmp_path / "out", 8, 8, PatchStatsModel())
    grids = [
        (tmp_path / "out" / f"keys/keys_{t:04d}.tnsr").read_bytes()
        for t in range(3)
    ]
    assert grids[0] == grids[1] == grids[2]


def test_repeat_runs_are_deterministic(tmp_path):
    static_frames(tmp_path / "frames", T=2, h=48, w=40, seed=3)
    extract_keys(tmp_path / "frames", tmp_path / "a", 8, 4, PatchStatsModel())
    extract_keys(tmp_path / "frames", tmp_path / "b", 8, 4, PatchStatsModel())
    for t in range(2):
        rel = f"keys/keys_{t:04d}.tnsr"
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_patch_stats_mean_channels_match_loop(tmp_path):
    paths = write_frames(tmp_path, [smooth_texture(12, 10, seed=4)])
    frame = load_frame(paths[0])
    grid = PatchStatsModel()(frame, 4, 2)
    assert grid.shape == (5, 4, 16)
    for i in range(5):
        for j in range(4):
            window = frame[i * 2:i * 2 + 4, j * 2:j * 2 + 4]
            for c in range(3):
                assert abs(grid[i, j, c] - window[..., c].mean()) < 1e-6


def test_patch_stats_needs_patch_two(tmp_path):
    frame = load_frame(write_frames(tmp_path, [smooth_texture(8, 8, seed=5)])[0])
    with pytest.raises(ExtractorError, match="patch >= 2"):
        PatchStatsModel()(frame, 1, 1)


def test_wrong_backend_shape_rejected(tmp_path):
    static_frames(tmp_path / "frames", T=1, h=32, w=32, seed=6)
    with pytest.raises(ExtractorError, match="backend produced grid"):
        extract_keys(
            tmp_path / "frames", tmp_path / "out", 8, 8,
            lambda frame, patch, stride: np.zeros((3, 3, 4), dtype=np.float32),
        )


def test_inconsistent_depth_across_frames_rejected(tmp_path):
    static_frames(tmp_path / "frames", T=2, h=32, w=32, seed=7)
    calls = []

    def model(frame, patch, stride):
        calls.append(0)
        return np.zeros((4, 4, len(calls)), dtype=np.float32)

    with pytest.raises(ExtractorError, match="differs from"):
        extract_keys(tmp_path / "frames", tmp_path / "out", 8, 8, model)


def test_empty_frames_dir_rejected(tmp_path):
    (tmp_path / "frames").mkdir()
    with pytest.raises(ExtractorError, match="no frames found"):
        extract_keys(tmp_path / "frames", tmp_path / "out", 8, 8, PatchStatsModel())


def test_dino_load_failure_is_clean(monkeypatch):
    import torch.hub

    def refuse(*args, **kwargs):
        raise RuntimeError("no route to host")

    monkeypatch.setattr(torch.hub, "load", refuse)
    with pytest.raises(ExtractorError, match="model unavailable"):
        load_dino("dino_vits8")
