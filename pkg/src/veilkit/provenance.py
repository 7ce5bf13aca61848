"""Run provenance: config hashing and run.json emission.

Every producing command records what it ran with: the subcommand, the
resolved configuration and its hash, the seed when one applies, digests
of every input file, and library versions.  Nothing time-dependent goes
in, so identical runs yield identical run.json bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import PIL
import scipy

from .errors import StorageError

RUN_FILENAME = "run.json"


def config_hash(config):
    """sha256 over the canonical JSON form of a flat config dict."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def file_digest(path):
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    except OSError as exc:
        raise StorageError(f"cannot digest {path}: {exc}") from exc
    return digest.hexdigest()


def manifest_input_digests(manifest):
    """Digest every file a clip manifest references, keyed by relative path."""
    rels = list(manifest.frame_paths)
    for group in (manifest.descriptor_paths, manifest.flow_paths, manifest.mask_paths):
        if group:
            rels.extend(group)
    return {str(rel): file_digest(manifest.resolve(rel)) for rel in rels}


def write_run_json(out_dir, command, config, inputs, seed=None):
    """Write run.json describing one producing command invocation."""
    doc = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "inputs": dict(sorted(inputs.items())),
        "versions": {
            "veilkit": _package_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pillow": PIL.__version__,
        },
    }
    if seed is not None:
        doc["seed"] = int(seed)
    path = Path(out_dir) / RUN_FILENAME
    try:
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc
    return path


def _package_version():
    from . import __version__

    return __version__
