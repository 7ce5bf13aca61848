"""Command-line entry point.

One binary, eight subcommands: obfuscate, saliency, noise, baseline,
template, eval, synth, stats.  Exit codes: 0 success, 1 validation or
usage error, 2 I/O error.  --verbose streams per-stage timing to
stderr; every command that writes into an --out directory also writes
run.json there (config hash, seed, input digests, library versions).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .baselines import gaussian_blur, mask_fill, pixelate, resize_square
from .errors import StorageError, ValidationError, VeilkitError
from .metrics import (
    f_lambda,
    ingest_results,
    ingest_template_results,
    rank,
    round_score,
    select_templates,
    sniff_results_kind,
    sweep,
)
from .motion_noise import NoiseSequence, synthesize
from .obfuscator import ObfuscationConfig, obfuscate_clip
from .provenance import (
    RUN_FILENAME,
    config_hash,
    file_digest,
    manifest_input_digests,
    write_run_json,
)
from .saliency import SaliencyMap, saliency_for_clip
from .synth import make_clip, spec_from_json
from .template_lib import (
    LIBRARY_MANIFEST,
    TemplateLibrary,
    build_template,
    load_library,
    save_library,
    select,
)
from .tensor_store import (
    FRAME_SUFFIXES,
    compute_dataset_stats,
    load_descriptor_grid,
    load_manifest,
    read_mask,
    read_image,
    read_tensor,
    write_gray_png,
    write_image_png,
    write_tensor,
)

NOISE_MODE_FLAGS = {"warp": "warp_iterative", "composed": "warp_composed", "iid": "iid"}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@contextmanager
def _timed(stage, frames, verbose):
    start = time.perf_counter()
    yield
    if verbose:
        elapsed = max(time.perf_counter() - start, 1e-9)
        print(
            f"[{stage}] {frames} frames in {elapsed:.3f}s "
            f"({frames / elapsed:.1f} frames/s)",
            file=sys.stderr,
        )


def _load_config_file(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StorageError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(
                f"{path}: line {line_no}: expected key=value, got {raw!r}"
            )
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _merge_config(args, converters):
    """Fill options the user left unset from --config; flags win."""
    if getattr(args, "config", None) is None:
        return
    values = _load_config_file(args.config)
    unknown = set(values) - set(converters)
    if unknown:
        raise ValidationError(
            f"config keys not recognized for this command: {sorted(unknown)}"
        )
    for key, convert in converters.items():
        if key in values and getattr(args, key) is None:
            try:
                setattr(args, key, convert(values[key]))
            except ValueError as exc:
                raise ValidationError(
                    f"config key {key}: bad value {values[key]!r}: {exc}"
                )


def _require(args, flag):
    value = getattr(args, flag.lstrip("-").replace("-", "_"))
    if value is None:
        raise ValidationError(f"missing required flag {flag}")
    return value


def _resolve_noise_mode(flag_value):
    if flag_value in NOISE_MODE_FLAGS:
        return NOISE_MODE_FLAGS[flag_value]
    raise ValidationError(
        f"unknown noise mode {flag_value!r}; expected one of "
        f"{'|'.join(NOISE_MODE_FLAGS)}"
    )


def _parse_select(text):
    names = [name.strip() for name in text.split(",") if name.strip()]
    if not names:
        raise ValidationError(f"empty template selection {text!r}")
    return names


def _out_dir(args):
    out = Path(_require(args, "--out"))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create output dir {out}: {exc}") from exc
    return out


def _library_digests(lib_dir):
    lib_dir = Path(lib_dir)
    digests = {}
    for path in sorted(lib_dir.iterdir()):
        if path.is_file():
            digests[f"library/{path.name}"] = file_digest(path)
    return digests


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args):
    spec = spec_from_json(args.spec)
    out = _out_dir(args)
    manifest = make_clip(spec, out)
    write_run_json(
        out,
        "synth",
        {"spec": spec, "out": str(out)},
        {"spec": file_digest(args.spec)},
        seed=spec.get("seed"),
    )
    print(out / "manifest.json")
    return 0


def cmd_noise(args):
    _merge_config(args, {"seed": int, "mode": str})
    seed = args.seed if args.seed is not None else 0
    mode = _resolve_noise_mode(args.mode if args.mode is not None else "warp")
    manifest = load_manifest(args.manifest)
    out = _out_dir(args)
    with _timed("noise", manifest.num_frames, args.verbose):
        sequence = synthesize(manifest, seed, mode)
    with _timed("write", manifest.num_frames, args.verbose):
        for t in range(len(sequence)):
            write_tensor(out / f"noise_{t:04d}.tnsr", sequence[t], dtype="f32")
            if args.png:
                write_image_png(out / f"noise_{t:04d}.png", sequence[t])
    config = {
        "manifest": str(args.manifest),
        "seed": seed,
        "mode": mode,
        "png": bool(args.png),
    }
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    write_run_json(out, "noise", config, inputs, seed=seed)
    return 0


def cmd_saliency(args):
    _merge_config(args, {"library": str, "select": str, "reassembly": str})
    library_dir = _require(args, "--library")
    names = _parse_select(_require(args, "--select"))
    mode = args.reassembly if args.reassembly is not None else "nearest"
    manifest = load_manifest(args.manifest)
    library = load_library(library_dir)
    selected = select(library, names)
    out = _out_dir(args)
    with _timed("saliency", manifest.num_frames, args.verbose):
        maps = saliency_for_clip(manifest, selected, mode=mode, flatten=args.flatten)
    with _timed("write", manifest.num_frames, args.verbose):
        for smap in maps:
            write_tensor(
                out / f"saliency_{smap.frame_index:04d}.tnsr", smap.values, dtype="f32"
            )
            if args.png:
                write_gray_png(out / f"saliency_{smap.frame_index:04d}.png", smap.values)
    config = {
        "manifest": str(args.manifest),
        "library": str(library_dir),
        "select": names,
        "reassembly": mode,
        "flatten": bool(args.flatten),
        "png": bool(args.png),
    }
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    inputs.update(_library_digests(library_dir))
    write_run_json(out, "saliency", config, inputs)
    return 0


def _load_cached_stages(out, expected_hash, expected_inputs, manifest, seed, mode):
    """Reload emitted saliency/noise from a previous identical run."""
    run_path = out / RUN_FILENAME
    if not run_path.is_file():
        return None, None
    try:
        doc = json.loads(run_path.read_text())
    except (OSError, json.JSONDecodeError):
        return None, None
    if doc.get("config_hash") != expected_hash or doc.get("inputs") != expected_inputs:
        return None, None
    T = manifest.num_frames
    maps = None
    sal_paths = [out / "saliency" / f"saliency_{t:04d}.tnsr" for t in range(T)]
    if all(p.is_file() for p in sal_paths):
        maps = [SaliencyMap(read_tensor(p), t) for t, p in enumerate(sal_paths)]
    noise = None
    noise_paths = [out / "noise" / f"noise_{t:04d}.tnsr" for t in range(T)]
    if all(p.is_file() for p in noise_paths):
        frames = np.stack([read_tensor(p) for p in noise_paths])
        noise = NoiseSequence(frames, seed, mode)
    return maps, noise


def cmd_obfuscate(args):
    _merge_config(
        args,
        {
            "library": str,
            "select": str,
            "seed": int,
            "mode": str,
            "reassembly": str,
            "gain": float,
        },
    )
    library_dir = _require(args, "--library")
    names = _parse_select(_require(args, "--select"))
    seed = args.seed if args.seed is not None else 0
    mode = _resolve_noise_mode(args.mode if args.mode is not None else "warp")
    reassembly = args.reassembly if args.reassembly is not None else "nearest"
    gain = args.gain if args.gain is not None else 1.0
    config_obj = ObfuscationConfig(
        template_names=names,
        seed=seed,
        noise_mode=mode,
        reassembly_mode=reassembly,
        saliency_gain=gain,
        flatten=args.flatten,
    )
    manifest = load_manifest(args.manifest)
    library = load_library(library_dir)
    selected = select(library, names)
    out = _out_dir(args)

    config = {
        "manifest": str(args.manifest),
        "library": str(library_dir),
        "select": names,
        "seed": seed,
        "noise_mode": mode,
        "reassembly": reassembly,
        "gain": gain,
        "flatten": bool(args.flatten),
        "emit_saliency": bool(args.emit_saliency),
        "emit_noise": bool(args.emit_noise),
    }
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    inputs.update(_library_digests(library_dir))
    expected_hash = config_hash(config)

    maps = noise = None
    if args.reuse:
        maps, noise = _load_cached_stages(
            out, expected_hash, dict(sorted(inputs.items())), manifest, seed, mode
        )
        if args.verbose and (maps is not None or noise is not None):
            reused = [k for k, v in (("saliency", maps), ("noise", noise)) if v is not None]
            print(f"[reuse] loaded cached {', '.join(reused)}", file=sys.stderr)

    T = manifest.num_frames
    if maps is None:
        with _timed("saliency", T, args.verbose):
            maps = saliency_for_clip(
                manifest, selected, mode=reassembly, flatten=args.flatten
            )
    if noise is None:
        with _timed("noise", T, args.verbose):
            noise = synthesize(manifest, seed, mode)
    with _timed("blend", T, args.verbose):
        result = obfuscate_clip(
            manifest, library, config_obj, noise=noise, saliency_maps=maps
        )
    with _timed("write", T, args.verbose):
        for t in range(T):
            write_image_png(out / f"frame_{t:04d}.png", result.frames[t])
        if args.emit_saliency:
            (out / "saliency").mkdir(exist_ok=True)
            for smap in result.saliency:
                write_tensor(
                    out / "saliency" / f"saliency_{smap.frame_index:04d}.tnsr",
                    smap.values,
                    dtype="f32",
                )
        if args.emit_noise:
            (out / "noise").mkdir(exist_ok=True)
            for t in range(T):
                write_tensor(
                    out / "noise" / f"noise_{t:04d}.tnsr", result.noise[t], dtype="f32"
                )
    write_run_json(out, "obfuscate", config, inputs, seed=seed)
    return 0


def _baseline_common(args):
    manifest = load_manifest(args.manifest)
    out = _out_dir(args)
    frames = [
        read_image(manifest.resolve(rel)) for rel in manifest.frame_paths
    ]
    return manifest, out, frames


def _write_baseline(out, frames, verbose):
    with _timed("write", len(frames), verbose):
        for t, frame in enumerate(frames):
            write_image_png(out / f"frame_{t:04d}.png", frame)


def cmd_baseline_pixelate(args):
    _merge_config(args, {"block": int})
    block = _require(args, "--block")
    manifest, out, frames = _baseline_common(args)
    with _timed("pixelate", len(frames), args.verbose):
        processed = [pixelate(frame, block) for frame in frames]
    _write_baseline(out, processed, args.verbose)
    config = {"manifest": str(args.manifest), "baseline": "pixelate", "block": block}
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    write_run_json(out, "baseline pixelate", config, inputs)
    return 0


def cmd_baseline_blur(args):
    _merge_config(args, {"kappa": int, "sigma": float, "resize": int})
    kappa = args.kappa if args.kappa is not None else 13
    sigma = args.sigma if args.sigma is not None else 10.0
    manifest, out, frames = _baseline_common(args)
    if args.resize is not None:
        frames = [resize_square(frame, args.resize) for frame in frames]
    with _timed("blur", len(frames), args.verbose):
        processed = [gaussian_blur(frame, kappa, sigma) for frame in frames]
    _write_baseline(out, processed, args.verbose)
    config = {
        "manifest": str(args.manifest),
        "baseline": "blur",
        "kappa": kappa,
        "sigma": sigma,
        "resize": args.resize,
    }
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    write_run_json(out, "baseline blur", config, inputs)
    return 0


def cmd_baseline_mask(args):
    manifest, out, frames = _baseline_common(args)
    if args.masks is not None:
        mask_dir = Path(args.masks)
        mask_files = sorted(
            p for p in mask_dir.iterdir()
            if p.suffix in (".png", ".tnsr") and p.is_file()
        )
        if len(mask_files) != len(frames):
            raise ValidationError(
                f"{mask_dir} holds {len(mask_files)} masks for {len(frames)} frames"
            )
        masks = [read_mask(p) for p in mask_files]
    elif manifest.mask_paths is not None:
        masks = [read_mask(manifest.resolve(rel)) for rel in manifest.mask_paths]
    else:
        raise ValidationError(
            "no masks: manifest lists none and --masks was not given"
        )
    with _timed("mask", len(frames), args.verbose):
        processed = [mask_fill(frame, mask) for frame, mask in zip(frames, masks)]
    _write_baseline(out, processed, args.verbose)
    config = {
        "manifest": str(args.manifest),
        "baseline": "mask",
        "masks": args.masks,
    }
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    write_run_json(out, "baseline mask", config, inputs)
    return 0


def _parse_coords(text):
    coords = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        pieces = part.split(",")
        if len(pieces) != 2:
            raise ValidationError(f"bad coordinate {part!r}; expected row,col")
        try:
            coords.append((int(pieces[0]), int(pieces[1])))
        except ValueError:
            raise ValidationError(f"bad coordinate {part!r}; expected integers")
    if not coords:
        raise ValidationError(f"no coordinates in {text!r}")
    return coords


def cmd_template_build(args):
    manifest = load_manifest(args.manifest)
    if manifest.descriptor_paths is None:
        raise ValidationError(f"clip {manifest.clip_id!r} lists no descriptor grids")
    if not (0 <= args.frame < manifest.num_frames):
        raise ValidationError(
            f"frame {args.frame} outside clip of {manifest.num_frames} frames"
        )
    grid = load_descriptor_grid(
        manifest.resolve(manifest.descriptor_paths[args.frame]),
        manifest.patch_geometry,
        manifest.frame_shape,
    )
    coords = _parse_coords(args.coords)
    source = args.source if args.source else str(manifest.frame_paths[args.frame])
    template = build_template(grid, coords, args.name, source_image=source)
    out = Path(args.out)
    if (out / LIBRARY_MANIFEST).is_file():
        library = load_library(out)
        if args.name in library:
            raise ValidationError(f"library already holds a template named {args.name!r}")
        if template.dim != library.descriptor_dim:
            raise ValidationError(
                f"template dimension {template.dim} does not match library "
                f"dimension {library.descriptor_dim}"
            )
        templates = dict(library.templates)
        templates[args.name] = template
        library = TemplateLibrary(templates)
    else:
        library = TemplateLibrary({args.name: template})
    save_library(library, out)
    inputs = {"manifest": file_digest(args.manifest)}
    inputs.update(manifest_input_digests(manifest))
    write_run_json(
        out,
        "template build",
        {
            "manifest": str(args.manifest),
            "frame": args.frame,
            "coords": [list(rc) for rc in coords],
            "name": args.name,
        },
        inputs,
    )
    print(f"added {args.name!r}: {template.count} descriptors, d={template.dim}")
    return 0


def cmd_template_list(args):
    library = load_library(args.library)
    print(f"descriptor_dim: {library.descriptor_dim}")
    for name in library.names:
        tpl = library[name]
        origin = f" from {tpl.source_image}" if tpl.source_image else ""
        print(f"{name}: {tpl.count} descriptor(s){origin}")
    return 0


def _parse_sweep(text):
    pieces = text.split(":")
    if len(pieces) != 3:
        raise ValidationError(f"sweep must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in pieces)
    except ValueError:
        raise ValidationError(f"sweep must be numeric start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise ValidationError(f"bad sweep range {text!r}")
    count = int(round((stop - start) / step))
    grid = [start + i * step for i in range(count + 1)]
    return [min(max(lam, 0.0), 1.0) for lam in grid if lam <= stop + 1e-9]


def cmd_eval(args):
    results = _require(args, "--results")
    lam = args.lam if args.lam is not None else 0.5
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        kind = sniff_results_kind(results)
        if kind == "templates":
            records = ingest_template_results(results)
            if args.select_k is None:
                raise ValidationError(
                    "template results need --select-k to pick a subset"
                )
            published = _parse_select(args.published) if args.published else None
            names = select_templates(records, args.select_k, published=published)
            for warning in caught:
                print(f"warning: {warning.message}", file=sys.stderr)
            print("selected: " + ",".join(names))
            return 0
        if args.select_k is not None:
            raise ValidationError(
                "--select-k needs a template,action_acc,privacy_acc results file"
            )
        records = ingest_results(results)
        for warning in caught:
            print(f"warning: {warning.message}", file=sys.stderr)
    if not records:
        return 0
    if args.sweep is not None:
        grid = _parse_sweep(args.sweep)
        print("method,dataset,lambda,f")
        for method, dataset, lam_value, score in sweep(records, grid):
            print(f"{method},{dataset},{lam_value:g},{score:.6f}")
        return 0
    datasets = []
    for record in records:
        if record.dataset not in datasets:
            datasets.append(record.dataset)
    name_width = max(len(r.method) for r in records)
    for dataset in datasets:
        rows = rank([r for r in records if r.dataset == dataset], lam)
        print(f"# {dataset} (lambda={lam:g})")
        for record in rows:
            score = round_score(f_lambda(record, lam))
            print(
                f"{record.method:<{name_width}}  "
                f"action={record.action_acc:6.2f}  privacy={record.privacy_acc:6.2f}  "
                f"f={score:.2f}"
            )
    return 0


def cmd_stats(args):
    path = Path(args.path)
    if path.is_dir():
        frames = sorted(
            p for p in path.iterdir() if p.suffix in FRAME_SUFFIXES and p.is_file()
        )
        if not frames:
            raise ValidationError(f"no frames found in {path}")
    elif path.suffix == ".json":
        manifest = load_manifest(path)
        frames = [manifest.resolve(rel) for rel in manifest.frame_paths]
    else:
        frames = [path]
    mean, std = compute_dataset_stats(frames)
    print(json.dumps({"mean": list(mean), "std": list(std)}))
    return 0


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------

def _add_common(parser, *, out=True, config=True):
    if out:
        parser.add_argument("--out", help="output directory")
    if config:
        parser.add_argument("--config", help="key=value config file; flags win")
    parser.add_argument(
        "--verbose", action="store_true", help="stream per-stage timing to stderr"
    )


def build_parser():
    parser = _Parser(prog="veilkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("obfuscate", help="blend noise into salient regions")
    p.add_argument("manifest")
    p.add_argument("--library", help="template library directory")
    p.add_argument("--select", help="comma-separated template names")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", help="noise mode: warp|composed|iid (default warp)")
    p.add_argument("--reassembly", choices=("nearest", "bilinear"))
    p.add_argument("--gain", type=float, help="saliency gain (default 1.0)")
    p.add_argument("--flatten", action="store_true",
                   help="treat every descriptor as its own template")
    p.add_argument("--emit-saliency", action="store_true")
    p.add_argument("--emit-noise", action="store_true")
    p.add_argument("--reuse", action="store_true",
                   help="reload emitted stage outputs from a matching previous run")
    _add_common(p)
    p.set_defaults(fn=cmd_obfuscate)

    p = sub.add_parser("saliency", help="write per-frame saliency maps")
    p.add_argument("manifest")
    p.add_argument("--library")
    p.add_argument("--select")
    p.add_argument("--reassembly", choices=("nearest", "bilinear"))
    p.add_argument("--flatten", action="store_true")
    p.add_argument("--png", action="store_true", help="also write grayscale previews")
    _add_common(p)
    p.set_defaults(fn=cmd_saliency)

    p = sub.add_parser("noise", help="synthesize the noise sequence")
    p.add_argument("manifest")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", help="warp|composed|iid (default warp)")
    p.add_argument("--png", action="store_true", help="also write PNG previews")
    _add_common(p)
    p.set_defaults(fn=cmd_noise)

    p = sub.add_parser("baseline", help="run a naive obfuscation baseline")
    bsub = p.add_subparsers(dest="baseline", required=True, parser_class=_Parser)

    bp = bsub.add_parser("pixelate", help="block-average pooling")
    bp.add_argument("manifest")
    bp.add_argument("--block", type=int, help="block size in px")
    _add_common(bp)
    bp.set_defaults(fn=cmd_baseline_pixelate)

    bp = bsub.add_parser("blur", help="separable Gaussian blur")
    bp.add_argument("manifest")
    bp.add_argument("--kappa", type=int, help="kernel size, odd (default 13)")
    bp.add_argument("--sigma", type=float, help="Gaussian sigma (default 10)")
    bp.add_argument("--resize", type=int, help="square-resize frames first")
    _add_common(bp)
    bp.set_defaults(fn=cmd_baseline_blur)

    bp = bsub.add_parser("mask", help="fill masked regions with their mean")
    bp.add_argument("manifest")
    bp.add_argument("--masks", help="directory of mask files (else manifest masks)")
    _add_common(bp)
    bp.set_defaults(fn=cmd_baseline_mask)

    p = sub.add_parser("template", help="build or inspect template libraries")
    tsub = p.add_subparsers(dest="action", required=True, parser_class=_Parser)

    tp = tsub.add_parser("build", help="add a template from grid coordinates")
    tp.add_argument("manifest")
    tp.add_argument("--frame", type=int, default=0, help="frame index (default 0)")
    tp.add_argument("--coords", required=True, help='patch coords "r,c;r,c"')
    tp.add_argument("--name", required=True)
    tp.add_argument("--source", help="source image label for provenance")
    _add_common(tp, config=False)
    tp.set_defaults(fn=cmd_template_build)

    tp = tsub.add_parser("list", help="list a library's templates")
    tp.add_argument("library")
    tp.set_defaults(fn=cmd_template_list)

    p = sub.add_parser("eval", help="score and rank accuracy records")
    p.add_argument("--results", help="CSV of records")
    p.add_argument("--lambda", dest="lam", type=float, help="trade-off weight (default 0.5)")
    p.add_argument("--sweep", help="lambda grid start:stop:step, prints CSV")
    p.add_argument("--select-k", type=int, help="pick the k lowest-privacy templates")
    p.add_argument("--published", help="reference selection to compare against")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic clip")
    p.add_argument("--spec", required=True, help="clip spec JSON")
    _add_common(p, config=False)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("stats", help="per-channel mean/std of frames")
    p.add_argument("path", help="manifest JSON, frame file, or directory of frames")
    p.set_defaults(fn=cmd_stats)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StorageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except VeilkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
