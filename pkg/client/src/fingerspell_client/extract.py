"""Batch extraction: labeled image folders to the landmark dataset CSV.

Input layout is one subdirectory per label token with images inside.
Images where the detector finds no hand produce no row; they are counted
per class, mirroring how such samples are excluded from training and
scoring. A hand-free class like `nothing/` therefore yields zero rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import cv2

from .detectors import HandDetector, MediaPipeDetector
from .interface import DATASET_HEADER, LABEL_TOKENS

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}


@dataclass
class ExtractionJob:
    input_dir: Path
    output_csv: Path


@dataclass
class ExtractionSummary:
    extracted: dict[str, int] = field(default_factory=dict)
    skipped: dict[str, int] = field(default_factory=dict)  # no hand detected
    unreadable: int = 0

    @property
    def total_extracted(self) -> int:
        return sum(self.extracted.values())

    @property
    def total_skipped(self) -> int:
        return sum(self.skipped.values())

    def skip_rate(self, include_nothing: bool = True) -> float:
        """Fraction of readable images with no detected hand."""
        extracted, skipped = 0, 0
        for token in self.extracted:
            if not include_nothing and token == "nothing":
                continue
            extracted += self.extracted[token]
            skipped += self.skipped[token]
        seen = extracted + skipped
        return skipped / seen if seen else 0.0


def extract_dataset(
    job: ExtractionJob,
    detector: HandDetector | None = None,
    log=print,
) -> ExtractionSummary:
    """Walk the labeled folders, detect hands, and write the dataset CSV."""
    input_dir = Path(job.input_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory not found: {input_dir}")
    class_dirs = sorted(p for p in input_dir.iterdir() if p.is_dir())
    for class_dir in class_dirs:
        if class_dir.name not in LABEL_TOKENS:
            raise ValueError(
                f"directory {class_dir.name!r} is not a label token; "
                f"expected one of A-Z, del, nothing, space"
            )
    if detector is None:
        detector = MediaPipeDetector(static_images=True)

    summary = ExtractionSummary()
    with open(job.output_csv, "w", encoding="utf-8", newline="") as out:
        out.write(DATASET_HEADER + "\n")
        for class_dir in class_dirs:
            token = class_dir.name
            summary.extracted.setdefault(token, 0)
            summary.skipped.setdefault(token, 0)
            images = sorted(
                p for p in class_dir.iterdir()
                if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
            )
            for image_path in images:
                image = cv2.imread(str(image_path))
                if image is None:
                    summary.unreadable += 1
                    log(f"warning: unreadable image skipped: {image_path}")
                    continue
                detected = detector.detect(image)
                if detected is None:
                    summary.skipped[token] += 1
                    continue
                coords = ",".join(
                    repr(float(v)) for joint in detected.joints for v in joint
                )
                out.write(f"{token},{detected.handedness},{coords}\n")
                summary.extracted[token] += 1

    log(f"extracted {summary.total_extracted} rows, skipped {summary.total_skipped} (no hand)")
    log(f"overall skip rate: {summary.skip_rate():.2%}")
    non_nothing = summary.skip_rate(include_nothing=False)
    log(f"skip rate excluding 'nothing': {non_nothing:.2%}")
    return summary
