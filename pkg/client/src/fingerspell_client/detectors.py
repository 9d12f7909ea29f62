"""Hand detector abstraction plus the MediaPipe-backed implementation.

Detectors take a BGR image and return 21 normalized joints with a
handedness flag, or None when no hand is found (including detections
below the confidence threshold).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol


@dataclass(frozen=True)
class DetectedHand:
    joints: tuple[tuple[float, float, float], ...]  # 21 normalized (x, y, z)
    handedness: int  # 0 = left, 1 = right


class HandDetector(Protocol):
    def detect(self, image_bgr) -> DetectedHand | None: ...


class MediaPipeDetector:
    """Google MediaPipe Hands. Imported lazily so the rest of the package
    (extraction with another detector, tests) works without it installed."""

    def __init__(self, static_images: bool = False, detection_confidence: float = 0.5):
        try:
            import mediapipe as mp
        except ImportError:
            raise RuntimeError(
                "mediapipe is not installed; pip install 'fingerspell-client[mediapipe]'"
            ) from None
        import cv2

        self._cv2 = cv2
        self._hands = mp.solutions.hands.Hands(
            static_image_mode=static_images,
            max_num_hands=1,
            min_detection_confidence=detection_confidence,
        )

    def detect(self, image_bgr) -> DetectedHand | None:
        rgb = self._cv2.cvtColor(image_bgr, self._cv2.COLOR_BGR2RGB)
        result = self._hands.process(rgb)
        if not result.multi_hand_landmarks:
            return None
        landmarks = result.multi_hand_landmarks[0].landmark
        joints = tuple((lm.x, lm.y, lm.z) for lm in landmarks)
        label = result.multi_handedness[0].classification[0].label
        return DetectedHand(joints=joints, handedness=1 if label == "Right" else 0)

    def close(self):
        self._hands.close()
