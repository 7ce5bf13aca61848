"""Binary tensor container, clip manifests, and frame/array I/O.

TNSR container layout (all integers little-endian):

    offset  size        field
    0       4           magic "TNSR"
    4       1           format version (1)
    5       1           dtype code: 0 = float32, 1 = uint8
    6       1           ndim
    7       4 * ndim    dims, row-major, u32 each
    7+4n    ...         payload, values in row-major order, little-endian

Frames may be stored either as 8-bit RGB PNG or as TNSR float32; in
memory every image is float32 with values in [0, 1], channel-last
(u8 value x maps to x/255).  Reads are thread-safe; concurrent writes
to one path are the caller's responsibility.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import StorageError, TensorFormatError, ValidationError

MAGIC = b"TNSR"
VERSION = 1

_DTYPE_CODES = {"f32": 0, "u8": 1}
_CODE_DTYPES = {0: "f32", 1: "u8"}
_NP_DTYPES = {"f32": np.dtype("<f4"), "u8": np.dtype("u1")}

FRAME_SUFFIXES = (".png", ".tnsr")


def write_tensor(path, values, dtype=None, shape=None):
    """Write an array to a TNSR file.

    ``values`` may be any array-like; ``dtype`` is "f32" or "u8"
    (inferred from the array when omitted).  When ``shape`` is given,
    ``values`` is treated as a flat list and must contain exactly
    prod(shape) entries.
    """
    arr = np.asarray(values)
    if shape is not None:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if arr.size != count:
            raise ValidationError(
                f"shape {list(shape)} requires {count} values, got {arr.size}"
            )
        arr = arr.reshape(shape)
    if dtype is None:
        dtype = "u8" if arr.dtype == np.uint8 else "f32"
    if dtype not in _DTYPE_CODES:
        raise ValidationError(f"unsupported dtype {dtype!r}; expected f32 or u8")
    arr = np.ascontiguousarray(arr.astype(_NP_DTYPES[dtype], copy=False))

    header = struct.pack(
        f"<4sBBB{arr.ndim}I", MAGIC, VERSION, _DTYPE_CODES[dtype], arr.ndim, *arr.shape
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes())
    except OSError as exc:
        raise StorageError(f"cannot write tensor to {path}: {exc}") from exc


def _read_header(fh, path):
    head = fh.read(7)
    if len(head) < 4 or head[:4] != MAGIC:
        raise TensorFormatError(f"{path}: bad magic at offset 0")
    if len(head) < 7:
        raise TensorFormatError(f"{path}: truncated header at offset {len(head)}")
    version, code, ndim = head[4], head[5], head[6]
    if version != VERSION:
        raise TensorFormatError(f"{path}: unknown version {version} at offset 4")
    if code not in _CODE_DTYPES:
        raise TensorFormatError(f"{path}: unknown dtype code {code} at offset 5")
    dims_raw = fh.read(4 * ndim)
    if len(dims_raw) < 4 * ndim:
        raise TensorFormatError(f"{path}: truncated dims at offset {7 + len(dims_raw)}")
    shape = struct.unpack(f"<{ndim}I", dims_raw)
    return _CODE_DTYPES[code], shape, 7 + 4 * ndim


def read_tensor(path):
    """Read a TNSR file back into a numpy array (f32 or u8)."""
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise StorageError(f"cannot read tensor {path}: {exc}") from exc
    with fh:
        dtype, shape, offset = _read_header(fh, path)
        count = math.prod(shape)
        expected = count * _NP_DTYPES[dtype].itemsize
        payload = fh.read(expected)
        extra = fh.read(1)
    if len(payload) < expected:
        raise TensorFormatError(
            f"{path}: truncated payload at offset {offset}: expected {expected} bytes, "
            f"got {len(payload)}"
        )
    if extra:
        raise TensorFormatError(
            f"{path}: oversized payload at offset {offset}: expected {expected} bytes"
        )
    arr = np.frombuffer(payload, dtype=_NP_DTYPES[dtype], count=count)
    return arr.reshape(shape).copy()


def probe_tensor(path):
    """Return (dtype, shape) from a TNSR header without loading the payload."""
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise StorageError(f"cannot read tensor {path}: {exc}") from exc
    with fh:
        dtype, shape, _ = _read_header(fh, path)
    return dtype, shape


# ---------------------------------------------------------------------------
# Images: PNG or TNSR frames, unified to float32 [0, 1]
# ---------------------------------------------------------------------------

def read_image(path):
    """Load a frame (PNG or TNSR) as h x w x 3 float32 in [0, 1]."""
    path = Path(path)
    if path.suffix == ".tnsr":
        arr = read_tensor(path)
        if arr.dtype == np.uint8:
            arr = arr.astype(np.float32) / np.float32(255.0)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValidationError(f"{path}: expected h x w x 3 frame, got {arr.shape}")
        return np.ascontiguousarray(arr, dtype=np.float32)
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise StorageError(f"cannot read image {path}: {exc}") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: not a decodable image: {exc}") from exc
    return arr.astype(np.float32) / np.float32(255.0)


def write_image_png(path, frame):
    """Write an h x w x 3 float32 [0, 1] (or uint8) frame as 8-bit RGB PNG."""
    arr = np.asarray(frame)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(arr, mode="RGB").save(path, format="PNG")
    except OSError as exc:
        raise StorageError(f"cannot write image {path}: {exc}") from exc


def write_gray_png(path, values):
    """Write an h x w float32 [0, 1] map as an 8-bit grayscale PNG."""
    arr = np.clip(np.rint(np.asarray(values) * 255.0), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise StorageError(f"cannot write image {path}: {exc}") from exc


def read_mask(path):
    """Load a binary mask (PNG or TNSR u8); nonzero means masked."""
    path = Path(path)
    if path.suffix == ".tnsr":
        return read_tensor(path) != 0
    try:
        with Image.open(path) as img:
            arr = np.asarray(img.convert("L"))
    except FileNotFoundError as exc:
        raise StorageError(f"cannot read mask {path}: {exc}") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: not a decodable mask image: {exc}") from exc
    return arr != 0


def probe_image_shape(path):
    """Return the in-memory shape of a frame without decoding pixels.

    TNSR files report their stored shape.  PNG files report (h, w, 3)
    regardless of on-disk mode because read_image converts to RGB.
    """
    path = Path(path)
    if path.suffix == ".tnsr":
        _, shape = probe_tensor(path)
        return tuple(shape)
    try:
        with Image.open(path) as img:
            w, h = img.size
    except FileNotFoundError as exc:
        raise StorageError(f"cannot probe image {path}: {exc}") from exc
    except OSError as exc:
        raise ValidationError(f"{path}: not a decodable image: {exc}") from exc
    return (h, w, 3)


# ---------------------------------------------------------------------------
# Patch geometry and descriptor grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatchGeometry:
    """Square patch tiling: ``patch`` px patches laid out every ``stride`` px."""

    patch: int
    stride: int

    def __post_init__(self):
        if self.patch < 1 or self.stride < 1:
            raise ValidationError(
                f"patch and stride must be >= 1, got patch={self.patch} stride={self.stride}"
            )

    def grid_shape(self, h, w):
        """Number of patch rows/cols tiling an h x w frame."""
        if h < self.patch or w < self.patch:
            raise ValidationError(
                f"frame {h}x{w} smaller than patch size {self.patch}"
            )
        gh = (h - self.patch) // self.stride + 1
        gw = (w - self.patch) // self.stride + 1
        return gh, gw

    def centers(self, n):
        """Pixel coordinates of the first n patch centers along one axis."""
        return np.arange(n) * self.stride + self.patch / 2.0


@dataclass
class DescriptorGrid:
    """Per-frame grid of patch descriptors with the tiling that produced it."""

    vectors: np.ndarray  # gh x gw x d float32
    geometry: PatchGeometry
    frame_dims: tuple  # (h, w)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 3:
            raise ValidationError(
                f"descriptor grid must be gh x gw x d, got shape {self.vectors.shape}"
            )
        h, w = self.frame_dims
        expected = self.geometry.grid_shape(h, w)
        if self.vectors.shape[:2] != expected:
            raise ValidationError(
                f"descriptor grid {self.vectors.shape[:2]} does not match expected "
                f"{expected} for frame {h}x{w} with patch={self.geometry.patch} "
                f"stride={self.geometry.stride}"
            )
        if not np.isfinite(self.vectors).all():
            raise ValidationError("descriptor grid contains non-finite values")

    @property
    def gh(self):
        return self.vectors.shape[0]

    @property
    def gw(self):
        return self.vectors.shape[1]

    @property
    def dim(self):
        return self.vectors.shape[2]


def load_descriptor_grid(path, geometry, frame_dims):
    arr = read_tensor(path)
    if arr.dtype != np.float32:
        raise ValidationError(f"{path}: descriptor grid must be f32, got {arr.dtype}")
    return DescriptorGrid(arr, geometry, frame_dims)


# ---------------------------------------------------------------------------
# Clip manifests
# ---------------------------------------------------------------------------

_MANIFEST_KEYS = {
    "clip_id",
    "frame_paths",
    "descriptor_paths",
    "flow_paths",
    "mask_paths",
    "dataset_mean",
    "dataset_std",
    "patch_geometry",
}


@dataclass
class ClipManifest:
    """Validated description of one clip's on-disk artifacts.

    Paths are stored as written in the JSON and resolved against the
    manifest's directory.  Validation probes file headers only; no
    payload is loaded.
    """

    clip_id: str
    frame_paths: list
    dataset_mean: tuple
    dataset_std: tuple
    patch_geometry: PatchGeometry
    descriptor_paths: list | None = None
    flow_paths: list | None = None
    mask_paths: list | None = None
    base_dir: Path = field(default_factory=Path)

    @property
    def num_frames(self):
        return len(self.frame_paths)

    def resolve(self, rel):
        return self.base_dir / rel

    @property
    def frame_shape(self):
        """(h, w) of the clip's frames, probed from the first frame header."""
        if not hasattr(self, "_frame_shape"):
            shape = probe_image_shape(self.resolve(self.frame_paths[0]))
            self._frame_shape = (shape[0], shape[1])
        return self._frame_shape

    def validate(self):
        if not self.frame_paths:
            raise ValidationError(f"clip {self.clip_id!r}: no frames listed")
        mean = np.asarray(self.dataset_mean, dtype=np.float64)
        std = np.asarray(self.dataset_std, dtype=np.float64)
        if mean.shape != (3,) or std.shape != (3,):
            raise ValidationError("dataset_mean and dataset_std must each hold 3 floats")
        if (mean < 0).any() or (mean > 1).any():
            raise ValidationError(f"dataset_mean {mean.tolist()} outside [0,1]")
        if (std < 0).any() or (std > 1).any():
            raise ValidationError(f"dataset_std {std.tolist()} outside [0,1]")

        shape0 = probe_image_shape(self.resolve(self.frame_paths[0]))
        if len(shape0) != 3 or shape0[2] != 3:
            raise ValidationError(
                f"frame {self.frame_paths[0]!r}: expected h x w x 3, got {tuple(shape0)}"
            )
        for rel in self.frame_paths[1:]:
            shape = probe_image_shape(self.resolve(rel))
            if tuple(shape) != tuple(shape0):
                raise ValidationError(
                    f"frame {rel!r}: shape {tuple(shape)} differs from first frame "
                    f"{tuple(shape0)}"
                )
        h, w = shape0[0], shape0[1]
        self._frame_shape = (h, w)

        t = self.num_frames
        if self.flow_paths is not None:
            if len(self.flow_paths) != t - 1:
                raise ValidationError(
                    f"clip {self.clip_id!r}: expected {t - 1} flow fields, "
                    f"got {len(self.flow_paths)}"
                )
            for rel in self.flow_paths:
                dtype, shape = probe_tensor(self.resolve(rel))
                if dtype != "f32" or tuple(shape) != (h, w, 2):
                    raise ValidationError(
                        f"flow {rel!r}: expected f32 {h}x{w}x2, got {dtype} {tuple(shape)}"
                    )

        if self.descriptor_paths is not None:
            if len(self.descriptor_paths) != t:
                raise ValidationError(
                    f"clip {self.clip_id!r}: expected {t} descriptor grids, "
                    f"got {len(self.descriptor_paths)}"
                )
            gh, gw = self.patch_geometry.grid_shape(h, w)
            dim = None
            for rel in self.descriptor_paths:
                dtype, shape = probe_tensor(self.resolve(rel))
                if dtype != "f32" or len(shape) != 3 or tuple(shape[:2]) != (gh, gw):
                    raise ValidationError(
                        f"descriptor grid {rel!r}: expected f32 {gh}x{gw}xd, "
                        f"got {dtype} {tuple(shape)}"
                    )
                if dim is None:
                    dim = shape[2]
                elif shape[2] != dim:
                    raise ValidationError(
                        f"descriptor grid {rel!r}: dimension {shape[2]} differs "
                        f"from {dim}"
                    )

        if self.mask_paths is not None:
            if len(self.mask_paths) != t:
                raise ValidationError(
                    f"clip {self.clip_id!r}: expected {t} masks, got {len(self.mask_paths)}"
                )
            for rel in self.mask_paths:
                shape = probe_image_shape(self.resolve(rel))
                if tuple(shape[:2]) != (h, w):
                    raise ValidationError(
                        f"mask {rel!r}: expected {h}x{w}, got {tuple(shape)}"
                    )
        return self

    def to_json_dict(self):
        doc = {
            "clip_id": self.clip_id,
            "frame_paths": [str(p) for p in self.frame_paths],
            "dataset_mean": [float(x) for x in self.dataset_mean],
            "dataset_std": [float(x) for x in self.dataset_std],
            "patch_geometry": {
                "patch": self.patch_geometry.patch,
                "stride": self.patch_geometry.stride,
            },
        }
        if self.descriptor_paths is not None:
            doc["descriptor_paths"] = [str(p) for p in self.descriptor_paths]
        if self.flow_paths is not None:
            doc["flow_paths"] = [str(p) for p in self.flow_paths]
        if self.mask_paths is not None:
            doc["mask_paths"] = [str(p) for p in self.mask_paths]
        return doc

    def write(self, path):
        path = Path(path)
        try:
            path.write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")
        except OSError as exc:
            raise StorageError(f"cannot write manifest {path}: {exc}") from exc


def load_manifest(path):
    """Parse and eagerly validate a clip manifest JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise StorageError(f"cannot read manifest {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: manifest must be a JSON object")
    unknown = set(doc) - _MANIFEST_KEYS
    if unknown:
        raise ValidationError(f"{path}: unknown manifest keys {sorted(unknown)}")
    for key in ("clip_id", "frame_paths", "dataset_mean", "dataset_std", "patch_geometry"):
        if key not in doc:
            raise ValidationError(f"{path}: missing manifest key {key!r}")
    geo = doc["patch_geometry"]
    if not isinstance(geo, dict) or "patch" not in geo or "stride" not in geo:
        raise ValidationError(f"{path}: patch_geometry needs 'patch' and 'stride'")
    manifest = ClipManifest(
        clip_id=str(doc["clip_id"]),
        frame_paths=list(doc["frame_paths"]),
        descriptor_paths=list(doc["descriptor_paths"]) if "descriptor_paths" in doc else None,
        flow_paths=list(doc["flow_paths"]) if "flow_paths" in doc else None,
        mask_paths=list(doc["mask_paths"]) if "mask_paths" in doc else None,
        dataset_mean=tuple(doc["dataset_mean"]),
        dataset_std=tuple(doc["dataset_std"]),
        patch_geometry=PatchGeometry(int(geo["patch"]), int(geo["stride"])),
        base_dir=path.parent,
    )
    return manifest.validate()


# ---------------------------------------------------------------------------
# Dataset statistics
# ---------------------------------------------------------------------------

def compute_dataset_stats(frame_paths):
    """Per-channel mean and population std over all pixels of all frames.

    Accumulates per-frame sums in float64 and combines them with
    math.fsum, so the result does not depend on frame order.
    """
    frame_paths = list(frame_paths)
    if not frame_paths:
        raise ValidationError("compute_dataset_stats needs at least one frame")
    sums = [[] for _ in range(3)]
    sqsums = [[] for _ in range(3)]
    count = 0
    for path in frame_paths:
        frame = read_image(path).astype(np.float64)
        count += frame.shape[0] * frame.shape[1]
        for c in range(3):
            chan = frame[:, :, c]
            sums[c].append(float(chan.sum()))
            sqsums[c].append(float(np.square(chan).sum()))
    mean = [math.fsum(sums[c]) / count for c in range(3)]
    var = [max(math.fsum(sqsums[c]) / count - mean[c] ** 2, 0.0) for c in range(3)]
    std = [math.sqrt(v) for v in var]
    return tuple(mean), tuple(std)
