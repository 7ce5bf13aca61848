"""Export real ViT key grids and dense optical flow into the TNSR
interchange format, with manifest fragments for merging into clip
manifests."""

from .errors import ExtractorError
from .frames import list_frames, load_frame, to_gray_u8
from .keys import DinoKeyModel, PatchStatsModel, extract_keys, grid_shape, load_dino
from .manifest import dataset_stats, merge_fragments
from .optical_flow import (
    FLOW_CONVENTION,
    extract_flow,
    farneback_pair,
    load_raft,
)
from .tnsr import probe, write_f32

__version__ = "0.1.0"

__all__ = [
    "DinoKeyModel",
    "ExtractorError",
    "FLOW_CONVENTION",
    "PatchStatsModel",
    "dataset_stats",
    "extract_flow",
    "extract_keys",
    "farneback_pair",
    "grid_shape",
    "list_frames",
    "load_dino",
    "load_frame",
    "load_raft",
    "merge_fragments",
    "probe",
    "to_gray_u8",
    "write_f32",
]
