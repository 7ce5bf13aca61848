"""Command entry points for the two exporter scripts."""

import argparse
import sys

from .errors import ExtractorError
from .keys import PatchStatsModel, extract_keys, load_dino
from .optical_flow import extract_flow, farneback_pair, load_raft


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dispatch(parser, argv, run):
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        print(run(args))
        return 0
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def keys_main(argv=None):
    parser = _Parser(
        prog="extract.py",
        description="Export per-frame ViT key grids as TNSR files.",
    )
    parser.add_argument("--frames", required=True, help="directory of frames")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--patch", type=int, default=8)
    parser.add_argument("--stride", type=int, default=8)
    parser.add_argument(
        "--backend", choices=("dino", "patch-stats"), default="dino",
        help="dino needs torch and downloadable weights; "
        "patch-stats is a weight-free stand-in",
    )
    parser.add_argument("--variant", default="dino_vits8",
                        help="torch.hub model name for the dino backend")
    parser.add_argument("--device", default="cpu")

    def run(args):
        if args.backend == "dino":
            model = load_dino(args.variant, args.device)
        else:
            model = PatchStatsModel()
        return extract_keys(args.frames, args.out, args.patch, args.stride, model)

    return _dispatch(parser, argv, run)


def flow_main(argv=None):
    parser = _Parser(
        prog="flow.py",
        description="Export dense optical flow (t to t-1) as TNSR files.",
    )
    parser.add_argument("--frames", required=True, help="directory of frames")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--backend", choices=("farneback", "raft"), default="farneback",
        help="raft needs torchvision and downloadable weights",
    )
    parser.add_argument("--device", default="cpu")

    def run(args):
        if args.backend == "raft":
            pair_fn = load_raft(args.device)
        else:
            pair_fn = farneback_pair
        return extract_flow(args.frames, args.out, pair_fn)

    return _dispatch(parser, argv, run)
