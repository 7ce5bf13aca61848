"""Named descriptor templates and the library that stores them.

A template names an interpretable image attribute (hair, hand, torso)
and holds one or more patch descriptors picked from a descriptor grid.
A library is a name-keyed set of templates sharing one descriptor
dimension; users select an ordered subset of names to drive matching.

On disk a library is a directory with `library.json` (names, dims,
provenance, relative paths) plus one TNSR file per template holding a
k x d f32 matrix of descriptors.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StorageError, ValidationError
from .tensor_store import read_tensor, write_tensor

LIBRARY_MANIFEST = "library.json"


@dataclass
class Template:
    """One named attribute: k descriptors of dimension d plus provenance."""

    name: str
    descriptors: np.ndarray  # k x d float32
    source_image: str = ""
    patch_coords: list = field(default_factory=list)  # [(grid_row, grid_col), ...]

    def __post_init__(self):
        arr = np.asarray(self.descriptors, dtype=np.float32)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValidationError(
                f"template {self.name!r}: descriptors must be k x d with k >= 1, "
                f"got shape {arr.shape}"
            )
        norms = np.linalg.norm(arr.astype(np.float64), axis=1)
        if (norms <= 1e-12).any():
            idx = int(np.argmin(norms))
            raise ValidationError(
                f"template {self.name!r}: descriptor {idx} has zero norm"
            )
        if not np.isfinite(arr).all():
            raise ValidationError(f"template {self.name!r}: non-finite descriptor")
        self.descriptors = arr

    @property
    def dim(self):
        return self.descriptors.shape[1]

    @property
    def count(self):
        return self.descriptors.shape[0]


@dataclass
class TemplateLibrary:
    """Immutable name -> Template map with a single shared dimension."""

    templates: dict

    def __post_init__(self):
        if not self.templates:
            raise ValidationError("library must hold at least one template")
        dims = {t.dim for t in self.templates.values()}
        if len(dims) > 1:
            raise ValidationError(
                f"templates disagree on descriptor dimension: {sorted(dims)}"
            )
        for name, tpl in self.templates.items():
            if name != tpl.name:
                raise ValidationError(
                    f"library key {name!r} does not match template name {tpl.name!r}"
                )

    @property
    def descriptor_dim(self):
        return next(iter(self.templates.values())).dim

    @property
    def names(self):
        return list(self.templates)

    def __contains__(self, name):
        return name in self.templates

    def __getitem__(self, name):
        return self.templates[name]


def build_template(grid, coords, name, source_image=""):
    """Copy the grid vectors at (row, col) coords into a new template.

    Vectors are taken verbatim, in the order given, with no
    normalization.
    """
    coords = [(int(r), int(c)) for r, c in coords]
    if not coords:
        raise ValidationError(f"template {name!r}: no patch coordinates given")
    gh, gw = grid.gh, grid.gw
    for r, c in coords:
        if not (0 <= r < gh and 0 <= c < gw):
            raise ValidationError(
                f"template {name!r}: coordinate ({r}, {c}) outside {gh}x{gw} grid"
            )
    vectors = np.stack([grid.vectors[r, c] for r, c in coords])
    return Template(name, vectors, source_image=source_image, patch_coords=coords)


def save_library(lib, dir_path):
    """Write `library.json` plus one `<name>.tnsr` per template."""
    dir_path = Path(dir_path)
    try:
        dir_path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create library dir {dir_path}: {exc}") from exc
    entries = []
    for name in lib.names:
        tpl = lib[name]
        rel = f"{name}.tnsr"
        write_tensor(dir_path / rel, tpl.descriptors, dtype="f32")
        entries.append(
            {
                "name": name,
                "path": rel,
                "count": tpl.count,
                "source_image": tpl.source_image,
                "patch_coords": [list(rc) for rc in tpl.patch_coords],
            }
        )
    doc = {"descriptor_dim": lib.descriptor_dim, "templates": entries}
    try:
        (dir_path / LIBRARY_MANIFEST).write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as exc:
        raise StorageError(f"cannot write library manifest: {exc}") from exc


def load_library(dir_path):
    """Load a library directory written by save_library."""
    dir_path = Path(dir_path)
    manifest = dir_path / LIBRARY_MANIFEST
    if not manifest.is_file():
        raise ValidationError(f"no library manifest at {manifest}")
    try:
        doc = json.loads(manifest.read_text())
    except OSError as exc:
        raise StorageError(f"cannot read library manifest: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{manifest}: invalid JSON: {exc}") from exc
    if "templates" not in doc or not isinstance(doc["templates"], list):
        raise ValidationError(f"{manifest}: missing 'templates' list")
    templates = {}
    dim = doc.get("descriptor_dim")
    for entry in doc["templates"]:
        name = entry["name"]
        if name in templates:
            raise ValidationError(f"{manifest}: duplicate template name {name!r}")
        vectors = read_tensor(dir_path / entry["path"])
        if vectors.dtype != np.float32 or vectors.ndim != 2:
            raise ValidationError(
                f"template file {entry['path']!r}: expected k x d f32, "
                f"got {vectors.dtype} {vectors.shape}"
            )
        if dim is not None and vectors.shape[1] != dim:
            raise ValidationError(
                f"template {name!r}: dimension {vectors.shape[1]} does not match "
                f"library dimension {dim}"
            )
        templates[name] = Template(
            name,
            vectors,
            source_image=entry.get("source_image", ""),
            patch_coords=[tuple(rc) for rc in entry.get("patch_coords", [])],
        )
    return TemplateLibrary(templates)


def _closest_name(query, names):
    # Prefer shared-prefix length over raw edit similarity so that e.g.
    # a truncated form resolves to the name it abbreviates.
    def score(name):
        prefix = 0
        for a, b in zip(query, name):
            if a != b:
                break
            prefix += 1
        ratio = difflib.SequenceMatcher(None, query, name).ratio()
        return (prefix, ratio)

    return max(names, key=score)


@dataclass
class SelectedTemplates:
    """Ordered user-chosen subset of a library's templates."""

    templates: list  # [Template, ...] in selection order

    def __post_init__(self):
        if not self.templates:
            raise ValidationError("selection must contain at least one template")
        dims = {t.dim for t in self.templates}
        if len(dims) > 1:
            raise ValidationError(
                f"selected templates disagree on dimension: {sorted(dims)}"
            )

    @property
    def names(self):
        return [t.name for t in self.templates]

    @property
    def dim(self):
        return self.templates[0].dim

    def __len__(self):
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)


def select(lib, names):
    """Pick templates by name, preserving the requested order."""
    names = list(names)
    if not names:
        raise ValidationError("empty template selection")
    chosen = []
    for name in names:
        if name not in lib:
            hint = _closest_name(name, lib.names)
            raise ValidationError(
                f"unknown template {name!r}; closest match is {hint!r}"
            )
        chosen.append(lib[name])
    return SelectedTemplates(chosen)
