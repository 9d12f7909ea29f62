"""Client command line: batch extraction and the live typing loop."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .extract import ExtractionJob, extract_dataset
from .live import ClientConfig, run_live


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingerspell-client",
        description="Webcam typing client and dataset extractor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_extract = sub.add_parser("extract", help="labeled image folders -> landmark CSV")
    p_extract.add_argument("--images", required=True, help="directory with one folder per label")
    p_extract.add_argument("--out", required=True, help="CSV path to write")
    p_extract.add_argument("--min-confidence", type=float, default=0.5)

    p_live = sub.add_parser("live", help="stream the webcam to a fingerspell server")
    p_live.add_argument("--server", default="127.0.0.1:9571", help="host:port of fingerspell serve")
    p_live.add_argument("--camera", type=int, default=0)
    p_live.add_argument("--fps", type=float, default=15.0)
    p_live.add_argument("--no-mirror", action="store_true", help="do not mirror the preview")

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        if args.command == "extract":
            from .detectors import MediaPipeDetector

            detector = MediaPipeDetector(
                static_images=True, detection_confidence=args.min_confidence
            )
            extract_dataset(
                ExtractionJob(input_dir=Path(args.images), output_csv=Path(args.out)),
                detector=detector,
            )
            return 0
        config = ClientConfig(
            server=args.server,
            camera_index=args.camera,
            target_fps=args.fps,
            mirror_preview=not args.no_mirror,
        )
        run_live(config)
        return 0
    except (FileNotFoundError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
