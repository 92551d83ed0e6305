"""Command-line entry point."""

from __future__ import annotations

import argparse
import logging

from . import __version__
from .dump import DEFAULT_FRAME_PERIOD_S, DEFAULT_LAYERS, DumpJob, dump
from .encoder import DEFAULT_MODEL, TAP_POINTS

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syltok-dump",
        description="Extract framewise embeddings from a frozen pretrained "
                    "speech encoder and write them as feature files.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--audio-manifest", required=True,
                        help="TSV: utterance_id<TAB>audio_path (paths relative to the manifest)")
    parser.add_argument("--out-dir", required=True,
                        help="one layer<L>/ directory with features and a manifest is created inside")
    parser.add_argument("--layers", type=int, nargs="+", default=list(DEFAULT_LAYERS),
                        help="1-based transformer block numbers (default: %(default)s)")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="pretrained checkpoint name or local directory (default: %(default)s)")
    parser.add_argument("--tap", choices=TAP_POINTS, default="block",
                        help="read layer L at the block output, or at the stream entering it")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--frame-period", type=float, default=DEFAULT_FRAME_PERIOD_S,
                        help="seconds per frame written to the headers (default: %(default)s)")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    job = DumpJob(
        audio_manifest=args.audio_manifest,
        output_dir=args.out_dir,
        layers=tuple(args.layers),
        model=args.model,
        device=args.device,
        tap=args.tap,
        frame_period_s=args.frame_period,
    )
    try:
        result = dump(job)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}")
        return 1
    if result.skipped:
        logger.error("%d of %d utterances failed; feature set is incomplete",
                     len(result.skipped), len(result.skipped) + result.n_written)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
