"""Test doubles: a brightness-keyed fake detector and synthetic corpora."""

from __future__ import annotations

from pathlib import Path

import cv2
import numpy as np

from fingerspell_client.detectors import DetectedHand

BRIGHTNESS_THRESHOLD = 40.0


class FakeDetector:
    """Deterministic detector: a hand exists iff the image is bright enough.

    Joint coordinates are derived from the mean channel values, so equal
    images yield equal landmarks and different colors yield different ones.
    """

    def detect(self, image_bgr) -> DetectedHand | None:
        blue, green, red = (float(c) / 255.0 for c in image_bgr.mean(axis=(0, 1)))
        if (blue + green + red) / 3.0 * 255.0 <= BRIGHTNESS_THRESHOLD:
            return None
        joints = tuple(
            (
                round((blue + i / 21.0) % 1.0, 6),
                round((green + i / 42.0) % 1.0, 6),
                round((red - 0.5) * 0.1, 6),
            )
            for i in range(21)
        )
        return DetectedHand(joints=joints, handedness=1 if green > 0.5 else 0)


def write_image(path: Path, color: tuple[int, int, int], size: int = 24) -> Path:
    image = np.full((size, size, 3), color, dtype=np.uint8)
    assert cv2.imwrite(str(path), image)
    return path


def build_corpus(root: Path, hand_classes: dict[str, int], nothing_images: int = 2) -> Path:
    """One folder per label: colored (bright) images for hand classes,
    near-black images under nothing/."""
    palette = [(200, 90, 160), (90, 200, 120), (150, 150, 60), (220, 40, 70)]
    for index, (token, count) in enumerate(sorted(hand_classes.items())):
        class_dir = root / token
        class_dir.mkdir(parents=True)
        for i in range(count):
            color = palette[index % len(palette)]
            shade = tuple(min(255, c + 3 * i) for c in color)
            write_image(class_dir / f"img{i:03d}.png", shade)
    nothing_dir = root / "nothing"
    nothing_dir.mkdir(parents=True)
    for i in range(nothing_images):
        write_image(nothing_dir / f"img{i:03d}.png", (6, 6, 6))
    return root
