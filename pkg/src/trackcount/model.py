"""Domain types: boxes, detections, tracks and per-sequence track sets.

All types are frozen dataclasses. Boxes are kept in pixel units, the same
units used on disk, and normalized coordinates are derived on demand.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import ValidationError

#: Container classes, in class_id order (1-based on disk and in memory).
CONTAINER_CLASSES: tuple[str, ...] = (
    "default",
    "green",
    "blue",
    "yellow",
    "biodegradable",
    "oil",
    "battery",
)
CLASS_IDS: tuple[int, ...] = tuple(range(1, len(CONTAINER_CLASSES) + 1))

DEFAULT_IMAGE_WIDTH = 1920
DEFAULT_IMAGE_HEIGHT = 1080
DEFAULT_FPS = 10.0


def class_name(class_id: int) -> str:
    if class_id not in CLASS_IDS:
        raise ValidationError(f"unknown container class id {class_id}")
    return CONTAINER_CLASSES[class_id - 1]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box given by its top-left corner and size, in pixels."""

    x_left: float
    y_top: float
    width: float
    height: float

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValidationError(
                f"box width and height must be positive, got {self.width}x{self.height}"
            )

    def center(self) -> tuple[float, float]:
        return (self.x_left + self.width / 2, self.y_top + self.height / 2)

    @property
    def x_right(self) -> float:
        return self.x_left + self.width

    @property
    def y_bottom(self) -> float:
        return self.y_top + self.height

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Detection:
    frame: int
    box: BoundingBox
    confidence: float = 1.0
    class_id: int = 1
    visibility: float = 1.0

    def __post_init__(self) -> None:
        if self.frame < 0:
            raise ValidationError(f"frame index must be non-negative, got {self.frame}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence must lie in [0, 1], got {self.confidence}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValidationError(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.class_id not in CLASS_IDS:
            raise ValidationError(f"unknown container class id {self.class_id}")


def majority_class(detections: Iterable[Detection]) -> int:
    """Most frequent per-detection class; ties go to the lowest class id."""
    counts = Counter(d.class_id for d in detections)
    if not counts:
        raise ValidationError("cannot take the majority class of no detections")
    best = max(counts.values())
    return min(c for c, n in counts.items() if n == best)


@dataclass(frozen=True)
class Track:
    """One identity: a time-ordered run of detections with a single class label."""

    track_id: int
    class_id: int
    detections: tuple[Detection, ...]

    def __post_init__(self) -> None:
        if self.track_id <= 0:
            raise ValidationError(f"track id must be positive, got {self.track_id}")
        if self.class_id not in CLASS_IDS:
            raise ValidationError(f"unknown container class id {self.class_id}")
        if not self.detections:
            raise ValidationError(f"track {self.track_id} has no detections")
        object.__setattr__(self, "detections", tuple(self.detections))
        frames = [d.frame for d in self.detections]
        for prev, cur in zip(frames, frames[1:]):
            if cur <= prev:
                raise ValidationError(
                    f"track {self.track_id}: frames must be strictly increasing "
                    f"({prev} followed by {cur})"
                )

    @classmethod
    def from_detections(
        cls, track_id: int, detections: Iterable[Detection], class_id: int | None = None
    ) -> "Track":
        """Build a track from detections in any order.

        Detections are sorted by frame; two detections on the same frame are
        rejected. When ``class_id`` is omitted the majority class is used.
        """
        dets = sorted(detections, key=lambda d: d.frame)
        for a, b in zip(dets, dets[1:]):
            if a.frame == b.frame:
                raise ValidationError(
                    f"track {track_id} has two detections on frame {a.frame}"
                )
        if class_id is None:
            class_id = majority_class(dets)
        return cls(track_id, class_id, tuple(dets))

    def start_frame(self) -> int:
        return self.detections[0].frame

    def end_frame(self) -> int:
        return self.detections[-1].frame

    def duration_frames(self) -> int:
        return len(self.detections)

    def frames(self) -> list[int]:
        return [d.frame for d in self.detections]

    def with_id(self, track_id: int) -> "Track":
        return replace(self, track_id=track_id)


@dataclass(frozen=True)
class SequenceTracks:
    """All tracks of one recording, ground truth or tracker output."""

    sequence_id: str = "seq"
    image_width: int = DEFAULT_IMAGE_WIDTH
    image_height: int = DEFAULT_IMAGE_HEIGHT
    fps: float = DEFAULT_FPS
    tracks: tuple[Track, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValidationError(
                f"image size must be positive, got {self.image_width}x{self.image_height}"
            )
        if self.fps <= 0:
            raise ValidationError(f"fps must be positive, got {self.fps}")
        object.__setattr__(self, "tracks", tuple(self.tracks))
        seen: set[int] = set()
        x_lo, x_hi = -0.5 * self.image_width, 1.5 * self.image_width
        y_lo, y_hi = -0.5 * self.image_height, 1.5 * self.image_height
        for t in self.tracks:
            if t.track_id in seen:
                raise ValidationError(
                    f"sequence {self.sequence_id!r}: duplicate track id {t.track_id}"
                )
            seen.add(t.track_id)
            for d in t.detections:
                b = d.box
                if b.x_left < x_lo or b.x_right > x_hi or b.y_top < y_lo or b.y_bottom > y_hi:
                    raise ValidationError(
                        f"sequence {self.sequence_id!r}: track {t.track_id} box on frame "
                        f"{d.frame} lies outside the admissible image margin"
                    )

    def with_tracks(self, tracks: Sequence[Track]) -> "SequenceTracks":
        return replace(self, tracks=tuple(tracks))

    def track_ids(self) -> list[int]:
        return [t.track_id for t in self.tracks]

    def num_detections(self) -> int:
        return sum(t.duration_frames() for t in self.tracks)

    def num_frames(self) -> int:
        """One past the last annotated frame (0 for an empty sequence)."""
        return max((t.end_frame() + 1 for t in self.tracks), default=0)

    def classes(self) -> set[int]:
        return {t.class_id for t in self.tracks}


def normalized_center(box: BoundingBox, image_width: float, image_height: float) -> tuple[float, float]:
    """Box center divided by image width (x) and height (y)."""
    if image_width <= 0 or image_height <= 0:
        raise ValidationError(
            f"image size must be positive, got {image_width}x{image_height}"
        )
    cx, cy = box.center()
    return (cx / image_width, cy / image_height)
