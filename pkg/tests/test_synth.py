"""Deterministic fixture generation: trees, membership, flows, libraries."""

import numpy as np
import pytest

from veilkit import (
    PatchGeometry,
    ValidationError,
    make_clip,
    make_library,
    read_mask,
    read_tensor,
    saliency_for_clip,
    select,
)
from veilkit.synth import membership_grid, spec_from_json


def base_spec(**overrides):
    spec = {
        "T": 4,
        "h": 24,
        "w": 24,
        "d": 4,
        "patch": 4,
        "stride": 4,
        "flow_pattern": {"constant": [1.0, 0.0]},
        "saliency_pattern": {"blob": {"center": [12.0, 12.0], "radius": 6.0}},
        "seed": 7,
    }
    spec.update(overrides)
    return spec


def tree_bytes(root):
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


# ---------------------------------------------------------------------------
# Clip trees
# ---------------------------------------------------------------------------

def test_same_spec_same_seed_byte_identical(tmp_path):
    make_clip(base_spec(), tmp_path / "a")
    make_clip(base_spec(), tmp_path / "b")
    assert tree_bytes(tmp_path / "a") == tree_bytes(tmp_path / "b")


def test_different_seed_different_frames(tmp_path):
    make_clip(base_spec(), tmp_path / "a")
    make_clip(base_spec(seed=8), tmp_path / "b")
    a = (tmp_path / "a" / "frames" / "frame_0000.png").read_bytes()
    b = (tmp_path / "b" / "frames" / "frame_0000.png").read_bytes()
    assert a != b


def test_manifest_counts_and_validation(tmp_path):
    manifest = make_clip(base_spec(), tmp_path / "clip")
    assert manifest.num_frames == 4
    assert len(manifest.descriptor_paths) == 4
    assert len(manifest.flow_paths) == 3
    assert len(manifest.mask_paths) == 4
    assert manifest.frame_shape == (24, 24)
    assert all(0.0 <= m <= 1.0 for m in manifest.dataset_mean)
    assert all(0.0 <= s <= 1.0 for s in manifest.dataset_std)


def test_descriptor_grids_use_basis_vectors(tmp_path):
    manifest = make_clip(base_spec(), tmp_path / "clip")
    grid = read_tensor(manifest.resolve(manifest.descriptor_paths[0]))
    geometry = PatchGeometry(4, 4)
    inside = membership_grid(geometry, 6, 6, "blob", (12.0, 12.0, 6.0))
    e_first = np.zeros(4, dtype=np.float32)
    e_first[0] = 1.0
    e_last = np.zeros(4, dtype=np.float32)
    e_last[3] = 1.0
    for r in range(6):
        for c in range(6):
            expected = e_first if inside[r, c] else e_last
            assert np.array_equal(grid[r, c], expected)


def test_blob_membership_matches_euclidean_rule():
    geometry = PatchGeometry(4, 4)
    got = membership_grid(geometry, 6, 6, "blob", (12.0, 12.0, 6.0))
    centers = geometry.centers(6)
    for r in range(6):
        for c in range(6):
            dist = np.hypot(centers[r] - 12.0, centers[c] - 12.0)
            assert got[r, c] == (dist <= 6.0)


def test_none_and_full_membership():
    geometry = PatchGeometry(4, 4)
    assert not membership_grid(geometry, 3, 5, "none", None).any()
    assert membership_grid(geometry, 3, 5, "full", None).all()


def test_none_pattern_yields_zero_saliency(tmp_path):
    manifest = make_clip(base_spec(saliency_pattern="none"), tmp_path / "clip")
    library = make_library(4, ["target", "background"])
    maps = saliency_for_clip(manifest, select(library, ["target"]))
    for m in maps:
        assert not m.values.any()


def test_full_pattern_yields_unit_saliency(tmp_path):
    manifest = make_clip(base_spec(saliency_pattern="full"), tmp_path / "clip")
    library = make_library(4, ["target", "background"])
    maps = saliency_for_clip(manifest, select(library, ["target"]))
    for m in maps:
        assert (m.values == 1.0).all()


def test_blob_pattern_yields_binary_saliency(tmp_path):
    manifest = make_clip(base_spec(), tmp_path / "clip")
    library = make_library(4, ["target", "background"])
    maps = saliency_for_clip(manifest, select(library, ["target"]))
    mask = read_mask(manifest.resolve(manifest.mask_paths[0]))
    for m in maps:
        assert set(np.unique(m.values)) <= {0.0, 1.0}
        assert np.array_equal(m.values == 1.0, mask)
    assert mask.any()
    assert not mask.all()


def test_flow_patterns(tmp_path):
    manifest = make_clip(base_spec(flow_pattern="zero"), tmp_path / "z")
    flow = read_tensor(manifest.resolve(manifest.flow_paths[0]))
    assert not flow.any()

    manifest = make_clip(
        base_spec(flow_pattern={"constant": [1.5, -0.5]}), tmp_path / "c"
    )
    flow = read_tensor(manifest.resolve(manifest.flow_paths[0]))
    assert (flow[..., 0] == np.float32(1.5)).all()
    assert (flow[..., 1] == np.float32(-0.5)).all()

    manifest = make_clip(base_spec(flow_pattern={"shear": 0.125}), tmp_path / "s")
    flow = read_tensor(manifest.resolve(manifest.flow_paths[0]))
    rows = 0.125 * np.arange(24, dtype=np.float32)
    assert np.array_equal(flow[..., 0], np.tile(rows[:, None], (1, 24)))
    assert np.array_equal(flow[..., 1], np.tile(rows[None, :], (24, 1)))


def test_single_frame_clip_has_no_flows(tmp_path):
    manifest = make_clip(base_spec(T=1), tmp_path / "one")
    assert manifest.flow_paths is None


def test_spec_validation(tmp_path):
    with pytest.raises(ValidationError, match="missing keys.*seed"):
        spec = base_spec()
        del spec["seed"]
        make_clip(spec, tmp_path / "x")
    with pytest.raises(ValidationError, match="dimension must be >= 2"):
        make_clip(base_spec(d=1), tmp_path / "x")
    with pytest.raises(ValidationError, match="T must be >= 1"):
        make_clip(base_spec(T=0), tmp_path / "x")
    with pytest.raises(ValidationError, match="radius must be >= 0"):
        make_clip(
            base_spec(saliency_pattern={"blob": {"center": [1, 1], "radius": -2}}),
            tmp_path / "x",
        )
    with pytest.raises(ValidationError, match="flow_pattern"):
        make_clip(base_spec(flow_pattern="sideways"), tmp_path / "x")
    with pytest.raises(ValidationError, match="shrink"):
        make_clip(base_spec(flow_pattern={"constant": [64.0, 0.0]}), tmp_path / "x")


def test_spec_from_json(tmp_path):
    import json

    path = tmp_path / "spec.json"
    path.write_text(json.dumps(base_spec()))
    assert spec_from_json(path) == base_spec()
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ValidationError, match="JSON object"):
        spec_from_json(bad)
    with pytest.raises(Exception, match="cannot read spec"):
        spec_from_json(tmp_path / "missing.json")


# ---------------------------------------------------------------------------
# Basis libraries
# ---------------------------------------------------------------------------

def test_library_vectors_orthonormal():
    lib = make_library(5, ["a", "b", "c"])
    vecs = [lib[n].descriptors[0].astype(np.float64) for n in ("a", "b", "c")]
    for i, vi in enumerate(vecs):
        for j, vj in enumerate(vecs):
            expected = 1.0 if i == j else 0.0
            assert float(vi @ vj) == expected


def test_library_name_capacity():
    with pytest.raises(ValidationError, match="need descriptor dimension >= 3"):
        make_library(2, ["a", "b", "c"])
    with pytest.raises(ValidationError, match="at least one name"):
        make_library(4, [])
    lib = make_library(2, ["a", "b"])
    assert lib.names == ["a", "b"]
