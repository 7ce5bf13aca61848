"""Blend identities, convexity, staged pipeline composition, gain."""

import numpy as np
import pytest

from veilkit import (
    ObfuscationConfig,
    ValidationError,
    blend_frame,
    init_noise,
    make_clip,
    make_library,
    obfuscate_clip,
    read_image,
    read_mask,
    saliency_for_clip,
    select,
    synthesize,
)
from veilkit.obfuscator import apply_gain
from veilkit.saliency import SaliencyMap


def random_pixels(seed, shape=(16, 16, 3)):
    return np.random.default_rng(seed).random(shape).astype(np.float32)


def blob_clip(tmp_path, T=4, h=32, w=32, seed=5, flow=None, name="clip"):
    spec = {
        "T": T,
        "h": h,
        "w": w,
        "d": 4,
        "patch": 4,
        "stride": 4,
        "flow_pattern": flow or {"constant": [1.0, 0.0]},
        "saliency_pattern": {"blob": {"center": [h / 2, w / 2], "radius": h / 4}},
        "seed": seed,
    }
    return make_clip(spec, tmp_path / name)


# ---------------------------------------------------------------------------
# blend_frame
# ---------------------------------------------------------------------------

def test_zero_saliency_returns_source_bit_exact():
    image = random_pixels(1)
    noise = random_pixels(2)
    out = blend_frame(image, np.zeros((16, 16), np.float32), noise)
    assert out.tobytes() == image.tobytes()


def test_full_saliency_returns_noise_bit_exact():
    image = random_pixels(3)
    noise = random_pixels(4)
    out = blend_frame(image, np.ones((16, 16), np.float32), noise)
    assert out.tobytes() == noise.tobytes()


def test_midpoint_blend():
    image = np.full((2, 2, 3), 0.2, dtype=np.float32)
    noise = np.full((2, 2, 3), 0.8, dtype=np.float32)
    out = blend_frame(image, np.full((2, 2), 0.5, np.float32), noise)
    assert np.array_equal(out, np.full((2, 2, 3), 0.5, dtype=np.float32))


def test_blend_convex_at_every_pixel():
    # 10^4 random pixels: output never leaves [min(I,N), max(I,N)]
    rng = np.random.default_rng(7)
    image = rng.random((100, 100, 3)).astype(np.float32)
    noise = rng.random((100, 100, 3)).astype(np.float32)
    weights = rng.random((100, 100)).astype(np.float32)
    out = blend_frame(image, weights, noise)
    lo = np.minimum(image, noise)
    hi = np.maximum(image, noise)
    assert (out >= lo).all()
    assert (out <= hi).all()
    assert out.dtype == np.float32


def test_blend_matches_float64_formula():
    rng = np.random.default_rng(8)
    image = rng.random((20, 20, 3)).astype(np.float32)
    noise = rng.random((20, 20, 3)).astype(np.float32)
    weights = rng.random((20, 20)).astype(np.float32)
    out = blend_frame(image, weights, noise).astype(np.float64)
    s = weights.astype(np.float64)[:, :, None]
    ref = (1.0 - s) * image.astype(np.float64) + s * noise.astype(np.float64)
    assert np.abs(out - ref).max() < 1e-6


def test_blend_monotone_in_saliency():
    rng = np.random.default_rng(9)
    image = rng.random((30, 30, 3)).astype(np.float32)
    noise = rng.random((30, 30, 3)).astype(np.float32)
    s1 = rng.random((30, 30)).astype(np.float32) * np.float32(0.5)
    s2 = s1 + np.float32(0.25)
    o1 = blend_frame(image, s1, noise)
    o2 = blend_frame(image, s2, noise)
    # moving weight toward the noise moves output toward the noise
    assert (((o2 - o1) * (noise - image)) >= 0).all()


def test_blend_accepts_saliency_map_wrapper():
    image = random_pixels(10)
    noise = random_pixels(11)
    weights = np.random.default_rng(12).random((16, 16)).astype(np.float32)
    a = blend_frame(image, weights, noise)
    b = blend_frame(image, SaliencyMap(weights), noise)
    assert np.array_equal(a, b)


def test_blend_validates_shapes_and_ranges():
    image = random_pixels(13)
    noise = random_pixels(14)
    with pytest.raises(ValidationError, match="does not match frame"):
        blend_frame(image, np.zeros((8, 8), np.float32), noise)
    with pytest.raises(ValidationError, match="noise shape"):
        blend_frame(image, np.zeros((16, 16), np.float32), noise[:8])
    with pytest.raises(ValidationError, match="saliency values outside"):
        blend_frame(image, np.full((16, 16), 1.5, np.float32), noise)
    with pytest.raises(ValidationError, match="frame values outside"):
        blend_frame(image + 2.0, np.zeros((16, 16), np.float32), noise)


# ---------------------------------------------------------------------------
# Gain
# ---------------------------------------------------------------------------

def test_gain_one_returns_same_object():
    m = SaliencyMap(np.full((4, 4), 0.5, np.float32))
    assert apply_gain(m, 1.0) is m


def test_gain_scales_and_clamps():
    m = SaliencyMap(np.array([[0.2, 0.6]], dtype=np.float32))
    doubled = apply_gain(m, 2.0)
    assert doubled.values[0, 0] == np.float32(0.4)
    assert doubled.values[0, 1] == 1.0
    halved = apply_gain(m, 0.5)
    assert halved.values[0, 0] == np.float32(0.1)


# ---------------------------------------------------------------------------
# Whole-clip runs
# ---------------------------------------------------------------------------

def test_pipeline_matches_stage_composition(tmp_path):
    manifest = blob_clip(tmp_path, T=8, h=64, w=64, seed=3)
    library = make_library(4, ["target", "background"])
    config = ObfuscationConfig(template_names=["target"], seed=17)
    result = obfuscate_clip(manifest, library, config)

    selected = select(library, ["target"])
    maps = saliency_for_clip(manifest, selected, mode="nearest")
    noise = synthesize(manifest, 17, "warp_iterative")
    for t in range(8):
        image = read_image(manifest.resolve(manifest.frame_paths[t])).astype(np.float64)
        s = maps[t].values.astype(np.float64)[:, :, None]
        ref = (1.0 - s) * image + s * noise[t].astype(np.float64)
        assert np.abs(result.frames[t].astype(np.float64) - ref).max() < 1e-6


def test_pipeline_zero_pattern_preserves_source(tmp_path):
    spec = {
        "T": 3, "h": 16, "w": 16, "d": 3, "patch": 4, "stride": 4,
        "flow_pattern": "zero", "saliency_pattern": "none", "seed": 2,
    }
    manifest = make_clip(spec, tmp_path / "none")
    library = make_library(3, ["target", "other"])
    result = obfuscate_clip(manifest, library, ObfuscationConfig(["target"]))
    for t in range(3):
        image = read_image(manifest.resolve(manifest.frame_paths[t]))
        assert result.frames[t].tobytes() == image.tobytes()


def test_pipeline_full_pattern_returns_noise(tmp_path):
    spec = {
        "T": 3, "h": 16, "w": 16, "d": 3, "patch": 4, "stride": 4,
        "flow_pattern": "zero", "saliency_pattern": "full", "seed": 2,
    }
    manifest = make_clip(spec, tmp_path / "full")
    library = make_library(3, ["target", "other"])
    result = obfuscate_clip(manifest, library, ObfuscationConfig(["target"], seed=5))
    noise = synthesize(manifest, 5, "warp_iterative")
    assert result.frames.tobytes() == noise.frames.tobytes()


def test_pipeline_blob_region_split(tmp_path):
    manifest = blob_clip(tmp_path, T=4, h=32, w=32, seed=6, name="blob")
    library = make_library(4, ["target", "background"])
    result = obfuscate_clip(manifest, library, ObfuscationConfig(["target"], seed=9))
    noise = synthesize(manifest, 9, "warp_iterative")
    for t in range(4):
        mask = read_mask(manifest.resolve(manifest.mask_paths[t]))
        image = read_image(manifest.resolve(manifest.frame_paths[t]))
        assert np.array_equal(result.frames[t][mask], noise[t][mask])
        assert np.array_equal(result.frames[t][~mask], image[~mask])


def test_precomputed_stages_are_honored(tmp_path):
    manifest = blob_clip(tmp_path, T=3, name="pre")
    library = make_library(4, ["target", "background"])
    config = ObfuscationConfig(["target"], seed=4)
    baseline = obfuscate_clip(manifest, library, config)
    again = obfuscate_clip(
        manifest, library, config, noise=baseline.noise, saliency_maps=baseline.saliency
    )
    assert again.frames.tobytes() == baseline.frames.tobytes()


def test_gain_applies_at_blend_time_only(tmp_path):
    manifest = blob_clip(tmp_path, T=2, name="gain")
    library = make_library(4, ["target", "background"])
    plain = obfuscate_clip(manifest, library, ObfuscationConfig(["target"], seed=1))
    gained = obfuscate_clip(
        manifest, library, ObfuscationConfig(["target"], seed=1, saliency_gain=0.5)
    )
    # result.saliency stays raw; only the blend sees the scaled map
    for a, b in zip(plain.saliency, gained.saliency):
        assert np.array_equal(a.values, b.values)
    noise = synthesize(manifest, 1, "warp_iterative")
    for t in range(2):
        image = read_image(manifest.resolve(manifest.frame_paths[t]))
        scaled = apply_gain(plain.saliency[t], 0.5)
        ref = blend_frame(image, scaled, noise[t])
        assert np.array_equal(gained.frames[t], ref)


def test_determinism_across_runs(tmp_path):
    manifest = blob_clip(tmp_path, T=4, name="det")
    library = make_library(4, ["target", "background"])
    config = ObfuscationConfig(["target"], seed=31)
    a = obfuscate_clip(manifest, library, config)
    b = obfuscate_clip(manifest, library, config)
    assert a.frames.tobytes() == b.frames.tobytes()


def test_stage_errors_name_the_stage(tmp_path):
    manifest = blob_clip(tmp_path, T=3, name="stages")
    library = make_library(4, ["target", "background"])
    with pytest.raises(ValidationError, match="^selection stage:"):
        obfuscate_clip(manifest, library, ObfuscationConfig(["missing"]))

    nokeys = blob_clip(tmp_path, T=3, name="nokeys")
    nokeys.descriptor_paths = None
    with pytest.raises(ValidationError, match="^saliency stage:"):
        obfuscate_clip(nokeys, library, ObfuscationConfig(["target"]))

    noflow = blob_clip(tmp_path, T=3, name="noflow")
    noflow.flow_paths = None
    with pytest.raises(ValidationError, match="^noise stage:"):
        obfuscate_clip(noflow, library, ObfuscationConfig(["target"]))


def test_stage_output_length_mismatch(tmp_path):
    manifest = blob_clip(tmp_path, T=3, name="len")
    library = make_library(4, ["target", "background"])
    config = ObfuscationConfig(["target"])
    short = [SaliencyMap(np.zeros((32, 32), np.float32))]
    with pytest.raises(ValidationError, match="disagree with frame count"):
        obfuscate_clip(manifest, library, config, saliency_maps=short)


def test_config_validation():
    with pytest.raises(ValidationError, match="at least one template"):
        ObfuscationConfig([])
    with pytest.raises(ValidationError, match="unknown noise mode"):
        ObfuscationConfig(["a"], noise_mode="x")
    with pytest.raises(ValidationError, match="unknown reassembly mode"):
        ObfuscationConfig(["a"], reassembly_mode="x")
    with pytest.raises(ValidationError, match="gain must be >= 0"):
        ObfuscationConfig(["a"], saliency_gain=-1.0)
