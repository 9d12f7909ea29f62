"""Shared test helpers: frame builders and synthetic cluster data."""

from __future__ import annotations

import numpy as np


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    status = "PASS" if report.passed else "FAIL"
    print(f"\nacceptance: {status} {report.nodeid.split('::')[-1]}")

from fingerspell.landmarks import NUM_CLASSES, LandmarkFrame
from fingerspell.training import Dataset


def make_frame(joints=None, handedness: int = 1, fill=(0.0, 0.0, 0.0)) -> LandmarkFrame:
    """Build a valid frame, defaulting every joint to `fill`."""
    if joints is None:
        joints = [fill] * 21
    return LandmarkFrame(joints=tuple(tuple(j) for j in joints), handedness=handedness)


def random_frame(rng: np.random.Generator) -> LandmarkFrame:
    coords = rng.random((21, 3))
    return make_frame(joints=coords.tolist(), handedness=int(rng.integers(0, 2)))


def frame_from_vector(values: np.ndarray, handedness: int) -> LandmarkFrame:
    """Interpret 63 values as the 21 joint triples of a frame."""
    joints = np.asarray(values, dtype=np.float64).reshape(21, 3)
    return make_frame(joints=joints.tolist(), handedness=handedness)


def write_dataset_csv(path, dataset: Dataset, nohand_labels=()) -> None:
    """Write a dataset in the 65-column CSV format.

    Labels in nohand_labels are appended as extra no-hand rows (empty hand
    and coordinate cells), which only the lenient eval loader accepts.
    """
    from fingerspell.landmarks import DATASET_HEADER, featurize, label_token

    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(DATASET_HEADER + "\n")
        for frame, label in dataset.rows:
            values = featurize(frame)
            coords = ",".join(repr(float(v)) for v in values[:63])
            f.write(f"{label_token(label)},{frame.handedness},{coords}\n")
        for label in nohand_labels:
            f.write(label_token(label) + "," + "," * 63 + "\n")


def cluster_dataset(
    seed: int,
    per_class_train: int = 100,
    per_class_test: int = 50,
    sigma: float = 0.02,
    min_center_distance: float = 1.0,
) -> tuple[Dataset, Dataset]:
    """29 well-separated Gaussian clusters in the 64-dim feature space.

    Centers are drawn uniformly in [0,1]^64 with the minimum pairwise
    distance enforced by rejection; per-coordinate noise sigma applies to
    the 63 joint coordinates. The 64th center coordinate fixes the class's
    handedness (>= 0.5 means right hand). Returns (train, test) datasets.
    """
    rng = np.random.default_rng(seed)
    centers: list[np.ndarray] = []
    while len(centers) < NUM_CLASSES:
        candidate = rng.random(64)
        if all(np.linalg.norm(candidate - c) >= min_center_distance for c in centers):
            centers.append(candidate)

    def sample(per_class: int) -> Dataset:
        rows = []
        for label, center in enumerate(centers):
            handedness = int(center[63] >= 0.5)
            noise = rng.normal(0.0, sigma, size=(per_class, 63))
            for point in center[:63] + noise:
                rows.append((frame_from_vector(point, handedness), label))
        return Dataset(rows=rows)

    return sample(per_class_train), sample(per_class_test)
