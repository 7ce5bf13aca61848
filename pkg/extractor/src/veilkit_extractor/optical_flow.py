"""Dense optical flow in the engine's t -> t-1 convention.

Flow for frame t answers "where did this pixel come from in frame
t-1": frame_t(p) ~ frame_{t-1}(p + flow_t(p)), components (u, v) in
pixels.  Farneback already estimates displacement from its first
argument into its second, so passing (frame_t, frame_{t-1}) yields the
wanted direction with no sign flip.
"""

import json
from pathlib import Path

import cv2
import numpy as np

from .errors import ExtractorError
from .frames import list_frames, load_frame, to_gray_u8
from .tnsr import write_f32

FLOW_CONVENTION = "t->t-1"


def farneback_pair(frame_t, frame_prev):
    """h x w x 2 float32 flow mapping frame_t pixels into frame_prev."""
    if frame_t.shape != frame_prev.shape:
        raise ExtractorError(
            f"frame shapes differ: {frame_t.shape} vs {frame_prev.shape}"
        )
    flow = cv2.calcOpticalFlowFarneback(
        to_gray_u8(frame_t),
        to_gray_u8(frame_prev),
        None,
        pyr_scale=0.5,
        levels=3,
        winsize=15,
        iterations=3,
        poly_n=5,
        poly_sigma=1.2,
        flags=0,
    )
    return np.asarray(flow, dtype=np.float32)


farneback_pair.name = "farneback"


def load_raft(device="cpu"):
    """Pretrained RAFT through torchvision; needs downloadable weights."""
    try:
        import torch
        from torchvision.models.optical_flow import Raft_Small_Weights, raft_small
    except ImportError as exc:
        raise ExtractorError(
            "model unavailable: torch/torchvision is not installed"
        ) from exc
    try:
        model = raft_small(weights=Raft_Small_Weights.DEFAULT)
    except Exception as exc:
        raise ExtractorError(
            f"model unavailable: could not load RAFT weights ({exc})"
        ) from exc
    model.eval()
    model.to(device)

    def pair(frame_t, frame_prev):
        # RAFT maps image1 -> image2; feed (t, t-1) for the t -> t-1 convention
        def prep(frame):
            t = torch.from_numpy(np.ascontiguousarray(frame)).permute(2, 0, 1)
            return (t[None] * 2.0 - 1.0).to(device)

        with torch.no_grad():
            flows = model(prep(frame_t), prep(frame_prev))
        uv = flows[-1][0].permute(1, 2, 0).cpu().numpy()
        return np.asarray(uv, dtype=np.float32)

    pair.name = "raft"
    return pair


def extract_flow(frames_dir, out_dir, pair_fn=farneback_pair):
    """Write T-1 flow TNSRs (one per frame after the first) plus a fragment.

    Files are numbered flow_0002 .. flow_000T to name the frame each
    field belongs to, matching the engine's manifest ordering.
    """
    frame_paths = list_frames(frames_dir)
    if len(frame_paths) < 2:
        raise ExtractorError(
            f"optical flow needs at least 2 frames, found {len(frame_paths)}"
        )
    out_dir = Path(out_dir)
    (out_dir / "flow").mkdir(parents=True, exist_ok=True)

    prev = load_frame(frame_paths[0])
    rel_paths = []
    for t in range(1, len(frame_paths)):
        current = load_frame(frame_paths[t])
        flow = pair_fn(current, prev)
        if flow.shape != current.shape[:2] + (2,):
            raise ExtractorError(
                f"backend produced flow {flow.shape}, expected "
                f"{current.shape[:2] + (2,)}"
            )
        rel = f"flow/flow_{t + 1:04d}.tnsr"
        write_f32(out_dir / rel, flow)
        rel_paths.append(rel)
        prev = current

    fragment = {
        "flow_paths": rel_paths,
        "flow_convention": FLOW_CONVENTION,
        "backend": getattr(pair_fn, "name", getattr(pair_fn, "__name__", "custom")),
        "frame_count": len(frame_paths),
    }
    fragment_path = out_dir / "flow_fragment.json"
    fragment_path.write_text(json.dumps(fragment, indent=2, sort_keys=True) + "\n")
    return fragment_path
