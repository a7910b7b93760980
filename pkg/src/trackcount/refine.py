"""Post-processing heuristics for static-asset track refinement.

Three rules run on a tracker's output:

* minimum duration: tracks with fewer than ``min_duration`` detections are
  dropped;
* temporal merging: two tracks of the same class merge when the later one
  starts at most ``max_gap`` frames after the earlier one ends;
* spatial constraint: a temporal merge additionally needs the last center of
  the earlier track and the first center of the later track to lie within
  ``max_center_dist`` in normalized image coordinates.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import ValidationError
from .model import SequenceTracks, Track, normalized_center

# Slack on the center-distance comparison; absorbs float error in the
# normalization only, far below any meaningful threshold step.
DIST_EPS = 1e-9


@dataclass(frozen=True)
class HeuristicConfig:
    min_duration: int = 15
    max_gap: int = 20
    max_center_dist: float = 0.10
    enable_h1: bool = True
    enable_h2: bool = True
    enable_h3: bool = True

    def __post_init__(self) -> None:
        if self.min_duration < 1:
            raise ValidationError(f"min_duration must be >= 1, got {self.min_duration}")
        if self.max_gap < 0:
            raise ValidationError(f"max_gap must be >= 0, got {self.max_gap}")
        if not self.max_center_dist >= 0:
            raise ValidationError(
                f"max_center_dist must be >= 0, got {self.max_center_dist}"
            )
        if self.enable_h3 and not self.enable_h2:
            raise ValidationError("enable_h3 requires enable_h2 (the spatial rule extends merging)")

    @classmethod
    def regime(cls, name: str, **overrides) -> "HeuristicConfig":
        """Named flag sets: ``baseline``, ``h1``, ``h1+h2``, ``h1+h2+h3``."""
        flags = {
            "baseline": (False, False, False),
            "h1": (True, False, False),
            "h1+h2": (True, True, False),
            "h1+h2+h3": (True, True, True),
        }
        try:
            h1, h2, h3 = flags[name.lower()]
        except KeyError:
            raise ValidationError(
                f"unknown regime {name!r}; expected one of {', '.join(flags)}"
            ) from None
        return cls(enable_h1=h1, enable_h2=h2, enable_h3=h3, **overrides)

    def label(self) -> str:
        parts = [n for n, on in (("H1", self.enable_h1), ("H2", self.enable_h2), ("H3", self.enable_h3)) if on]
        return " + ".join(parts) if parts else "Baseline"

    def to_dict(self) -> dict:
        return {"schema": "trackcount.heuristics/1", **asdict(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "HeuristicConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known - {"schema"}
        if unknown:
            raise ValidationError(f"unknown heuristic config field(s): {', '.join(sorted(unknown))}")
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def load(cls, path: str | os.PathLike) -> "HeuristicConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def dump(self, path: str | os.PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class RefineStats:
    tracks_in: int
    tracks_removed: int
    merges_performed: int
    tracks_out: int


def apply_h1(seq: SequenceTracks, min_duration: int = 15) -> SequenceTracks:
    """Keep only tracks with at least ``min_duration`` detections."""
    return seq.with_tracks([t for t in seq.tracks if t.duration_frames() >= min_duration])


def center_distance(a: Track, b: Track, image_width: float, image_height: float) -> float:
    """Normalized distance from the last center of ``a`` to the first center of ``b``."""
    ax, ay = normalized_center(a.detections[-1].box, image_width, image_height)
    bx, by = normalized_center(b.detections[0].box, image_width, image_height)
    return math.hypot(bx - ax, by - ay)


def can_merge(a: Track, b: Track, cfg: HeuristicConfig, image_width: float, image_height: float) -> bool:
    """Whether ``b`` may be appended to ``a`` under the merge rules."""
    if a.class_id != b.class_id:
        return False
    gap = b.start_frame() - a.end_frame()
    if not 1 <= gap <= cfg.max_gap:
        return False
    if cfg.enable_h3:
        return center_distance(a, b, image_width, image_height) <= cfg.max_center_dist + DIST_EPS
    return True


def _merge_class(tracks: list[Track], cfg: HeuristicConfig, w: float, h: float) -> tuple[list[Track], int]:
    pending = sorted(tracks, key=lambda t: (t.start_frame(), t.track_id))
    out: list[Track] = []
    merges = 0
    while pending:
        head = pending.pop(0)
        while True:
            # pending stays sorted by (start, id): the first match is the
            # earliest-starting candidate, ties to the smallest id.
            idx = next(
                (i for i, cand in enumerate(pending) if can_merge(head, cand, cfg, w, h)),
                None,
            )
            if idx is None:
                break
            tail = pending.pop(idx)
            head = Track(head.track_id, head.class_id, head.detections + tail.detections)
            merges += 1
        out.append(head)
    return out, merges


def merge_tracks_with_count(seq: SequenceTracks, cfg: HeuristicConfig) -> tuple[SequenceTracks, int]:
    by_class: dict[int, list[Track]] = {}
    for t in seq.tracks:
        by_class.setdefault(t.class_id, []).append(t)
    merged: dict[int, Track] = {}
    total = 0
    for class_id in sorted(by_class):
        tracks, n = _merge_class(by_class[class_id], cfg, seq.image_width, seq.image_height)
        total += n
        merged.update((t.track_id, t) for t in tracks)
    # Survivors keep their original relative order.
    kept = [merged[t.track_id] for t in seq.tracks if t.track_id in merged]
    return seq.with_tracks(kept), total


def merge_tracks(seq: SequenceTracks, cfg: HeuristicConfig) -> SequenceTracks:
    """Greedy left-to-right chain merging of same-class fragments.

    Within each class, tracks are visited in order of start frame. The
    current track absorbs the earliest-starting later track that passes
    :func:`can_merge`, then keeps looking with its extended end. The merged
    track keeps the earlier track's id and class; gaps are not filled in.
    """
    if not cfg.enable_h2:
        raise ValidationError("merge_tracks requires enable_h2")
    return merge_tracks_with_count(seq, cfg)[0]


def refine_with_stats(seq: SequenceTracks, cfg: HeuristicConfig) -> tuple[SequenceTracks, RefineStats]:
    out = seq
    if cfg.enable_h1:
        out = apply_h1(out, cfg.min_duration)
    removed = len(seq.tracks) - len(out.tracks)
    merges = 0
    if cfg.enable_h2:
        out, merges = merge_tracks_with_count(out, cfg)
    return out, RefineStats(len(seq.tracks), removed, merges, len(out.tracks))


def refine_pipeline(seq: SequenceTracks, cfg: HeuristicConfig) -> SequenceTracks:
    """Duration filter first (if enabled), then merging (if enabled).

    The duration filter is not re-applied to merged tracks.
    """
    return refine_with_stats(seq, cfg)[0]
