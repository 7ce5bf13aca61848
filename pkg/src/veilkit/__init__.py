"""Selective video obfuscation: template-matched saliency, motion-consistent
noise, naive baselines, and trade-off metrics, tied together by a binary
tensor container and clip manifests."""

from .baselines import gaussian_blur, gaussian_kernel, mask_fill, pixelate, resize_square
from .errors import (
    StorageError,
    TensorFormatError,
    ValidationError,
    VeilkitError,
    VeilkitWarning,
)
from .metrics import (
    MetricRecord,
    TemplateRecord,
    f_lambda,
    ingest_results,
    ingest_template_results,
    rank,
    round_score,
    select_templates,
    sweep,
)
from .motion_noise import FlowField, NoiseSequence, init_noise, synthesize, warp_step
from .obfuscator import (
    ObfuscationConfig,
    ObfuscationResult,
    blend_frame,
    obfuscate_clip,
)
from .saliency import (
    SaliencyMap,
    average_saliency,
    patch_saliency,
    reassemble,
    saliency_for_clip,
    template_similarity_matrix,
)
from .synth import make_clip, make_library
from .template_lib import (
    SelectedTemplates,
    Template,
    TemplateLibrary,
    build_template,
    load_library,
    save_library,
    select,
)
from .tensor_store import (
    ClipManifest,
    DescriptorGrid,
    PatchGeometry,
    compute_dataset_stats,
    load_descriptor_grid,
    load_manifest,
    probe_image_shape,
    probe_tensor,
    read_image,
    read_mask,
    read_tensor,
    write_gray_png,
    write_image_png,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "ClipManifest",
    "DescriptorGrid",
    "FlowField",
    "MetricRecord",
    "NoiseSequence",
    "ObfuscationConfig",
    "ObfuscationResult",
    "PatchGeometry",
    "SaliencyMap",
    "SelectedTemplates",
    "StorageError",
    "Template",
    "TemplateLibrary",
    "TemplateRecord",
    "TensorFormatError",
    "ValidationError",
    "VeilkitError",
    "VeilkitWarning",
    "average_saliency",
    "blend_frame",
    "build_template",
    "compute_dataset_stats",
    "f_lambda",
    "gaussian_blur",
    "gaussian_kernel",
    "ingest_results",
    "ingest_template_results",
    "init_noise",
    "load_descriptor_grid",
    "load_library",
    "load_manifest",
    "make_clip",
    "make_library",
    "mask_fill",
    "obfuscate_clip",
    "patch_saliency",
    "pixelate",
    "probe_image_shape",
    "probe_tensor",
    "rank",
    "read_image",
    "read_mask",
    "read_tensor",
    "reassemble",
    "resize_square",
    "round_score",
    "saliency_for_clip",
    "save_library",
    "select",
    "select_templates",
    "sweep",
    "synthesize",
    "template_similarity_matrix",
    "warp_step",
    "write_gray_png",
    "write_image_png",
    "write_tensor",
]
