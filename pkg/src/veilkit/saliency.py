"""Per-frame saliency maps from descriptor grids and selected templates.

For each patch j the score is the average over selected templates of
the clipped cosine between the patch key and the template:

    s_j = (1/n) * sum_i max(0, cos(tau_i, key_j))

A template holding several descriptors contributes the mean of its
descriptors' clipped cosines; pass flatten=True to treat every
descriptor as its own template instead.  Patch scores are reassembled
to frame resolution by nearest-cell replication or bilinear
interpolation between patch centers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .parallel import pmap
from .tensor_store import load_descriptor_grid

REASSEMBLY_MODES = ("nearest", "bilinear")


@dataclass
class SaliencyMap:
    """h x w float32 map in [0, 1] for one frame."""

    values: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValidationError(f"saliency map must be h x w, got {self.values.shape}")
        if self.values.size and (
            self.values.min() < 0.0 or self.values.max() > 1.0
        ):
            raise ValidationError("saliency values outside [0, 1]")


def _unit_rows(matrix):
    """Rows scaled to unit norm; zero rows stay zero (cosine 0 by fiat)."""
    out = np.zeros_like(matrix)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    np.divide(matrix, norms, out=out, where=norms > 0)
    return out


def patch_saliency(grid, selected, flatten=False):
    """Score every grid cell against the selected templates.

    Returns a gh x gw float32 array with values in [0, 1].
    """
    if grid.dim != selected.dim:
        raise ValidationError(
            f"descriptor dimension mismatch: grid has {grid.dim}, "
            f"templates have {selected.dim}"
        )
    gh, gw, d = grid.vectors.shape
    keys = _unit_rows(grid.vectors.reshape(-1, d).astype(np.float64))

    if flatten:
        stacked = np.concatenate([t.descriptors for t in selected]).astype(np.float64)
        sims = np.clip(keys @ _unit_rows(stacked).T, 0.0, 1.0)
        scores = sims.mean(axis=1)
    else:
        per_template = np.empty((len(selected), keys.shape[0]))
        for i, tpl in enumerate(selected):
            refs = _unit_rows(tpl.descriptors.astype(np.float64))
            sims = np.clip(keys @ refs.T, 0.0, 1.0)
            per_template[i] = sims.mean(axis=1)
        scores = per_template.mean(axis=0)
    return scores.reshape(gh, gw).astype(np.float32)


def _nearest_cells(size, n, patch, stride):
    # pixel i -> index of the grid cell whose patch center is nearest;
    # centers sit at j*stride + patch/2, ties go to the higher index
    coords = np.arange(size, dtype=np.float64)
    q = (coords - patch / 2.0) / stride
    return np.clip(np.floor(q + 0.5).astype(np.int64), 0, n - 1)


def _axis_weights(size, n, patch, stride):
    # bilinear: continuous grid coordinate clamped to the center span
    coords = np.arange(size, dtype=np.float64)
    q = np.clip((coords - patch / 2.0) / stride, 0.0, float(n - 1))
    lo = np.floor(q).astype(np.int64)
    lo = np.minimum(lo, n - 1)
    hi = np.minimum(lo + 1, n - 1)
    frac = q - lo
    return lo, hi, frac


def reassemble(patch_vals, geometry, h, w, mode="nearest", frame_index=0):
    """Expand a gh x gw patch-score grid to an h x w SaliencyMap."""
    vals = np.asarray(patch_vals, dtype=np.float64)
    if vals.ndim != 2:
        raise ValidationError(f"patch grid must be 2-D, got shape {vals.shape}")
    if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
        raise ValidationError("patch values outside [0, 1]")
    expected = geometry.grid_shape(h, w)
    if vals.shape != expected:
        raise ValidationError(
            f"patch grid {vals.shape} inconsistent with frame {h}x{w}: "
            f"expected {expected}"
        )
    if mode not in REASSEMBLY_MODES:
        raise ValidationError(f"unknown reassembly mode {mode!r}")
    gh, gw = vals.shape
    patch, stride = geometry.patch, geometry.stride

    if mode == "nearest":
        rows = _nearest_cells(h, gh, patch, stride)
        cols = _nearest_cells(w, gw, patch, stride)
        out = vals[np.ix_(rows, cols)]
    else:
        rlo, rhi, rfrac = _axis_weights(h, gh, patch, stride)
        clo, chi, cfrac = _axis_weights(w, gw, patch, stride)
        top = vals[np.ix_(rlo, clo)] * (1 - cfrac) + vals[np.ix_(rlo, chi)] * cfrac
        bot = vals[np.ix_(rhi, clo)] * (1 - cfrac) + vals[np.ix_(rhi, chi)] * cfrac
        out = top * (1 - rfrac[:, None]) + bot * rfrac[:, None]
        out = np.clip(out, 0.0, 1.0)
    return SaliencyMap(out.astype(np.float32), frame_index)


def saliency_for_clip(manifest, selected, mode="nearest", flatten=False):
    """One SaliencyMap per frame; frame t depends only on frame t's grid."""
    if manifest.descriptor_paths is None:
        raise ValidationError(
            f"clip {manifest.clip_id!r} lists no descriptor grids"
        )
    h, w = manifest.frame_shape
    geometry = manifest.patch_geometry

    def one(item):
        index, rel = item
        grid = load_descriptor_grid(manifest.resolve(rel), geometry, (h, w))
        scores = patch_saliency(grid, selected, flatten=flatten)
        return reassemble(scores, geometry, h, w, mode=mode, frame_index=index)

    return pmap(one, enumerate(manifest.descriptor_paths))


def _map_values(obj):
    return obj.values if isinstance(obj, SaliencyMap) else np.asarray(obj)


def average_saliency(maps):
    """Pixel-wise arithmetic mean of equally shaped maps."""
    arrays = [_map_values(m) for m in maps]
    if not arrays:
        raise ValidationError("average_saliency needs at least one map")
    shape = arrays[0].shape
    for i, arr in enumerate(arrays):
        if arr.shape != shape:
            raise ValidationError(
                f"map {i} has shape {arr.shape}, expected {shape}"
            )
    total = np.zeros(shape, dtype=np.float64)
    for arr in arrays:
        total += arr.astype(np.float64)
    return (total / len(arrays)).astype(np.float32)


def template_similarity_matrix(avg_maps, normalized=False):
    """Pairwise L1 distance between named average maps.

    avg_maps is an ordered name -> map dict.  Entry (i, j) is the sum of
    absolute pixel differences between maps i and j (the mean when
    normalized=True).  Returns (names, matrix).
    """
    names = list(avg_maps)
    if len(names) < 2:
        raise ValidationError("similarity matrix needs at least two maps")
    arrays = [np.asarray(_map_values(avg_maps[n]), dtype=np.float64) for n in names]
    shape = arrays[0].shape
    for name, arr in zip(names, arrays):
        if arr.shape != shape:
            raise ValidationError(
                f"map {name!r} has shape {arr.shape}, expected {shape}"
            )
    n = len(names)
    matrix = np.zeros((n, n), dtype=np.float64)
    scale = arrays[0].size if normalized else 1
    for i in range(n):
        for j in range(i + 1, n):
            dist = float(np.abs(arrays[i] - arrays[j]).sum()) / scale
            matrix[i, j] = dist
            matrix[j, i] = dist
    return names, matrix
