"""Synthetic street passes: ground-truth tracks and corrupted tracker output.

A vehicle drives along a street at constant speed past static containers.
Each container is visible while it lies within ``visibility_window`` meters
of the camera, and its box sweeps from the left image edge to the right one,
growing toward both edges. No lens model is applied.

Randomness comes from numpy's PCG64 generator, seeded explicitly, so equal
(config, seed) pairs give bit-identical output on every platform.

The ``corrupt`` step reproduces typical tracker failures, in this order:
per-frame dropout, fragmentation of a track into two ids around a deleted
stretch of frames, injection of short clutter tracks, and center jitter.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .model import (
    CLASS_IDS,
    DEFAULT_FPS,
    DEFAULT_IMAGE_HEIGHT,
    DEFAULT_IMAGE_WIDTH,
    BoundingBox,
    Detection,
    SequenceTracks,
    Track,
)

SIM_SCHEMA = "trackcount.sim/1"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class NoiseModel:
    """Tracker corruption parameters.

    ``fragment_gap`` is the inclusive range of detections deleted at a split,
    so the temporal gap between the two fragments is one more than that.
    ``min_fragment`` is the minimum number of detections each fragment keeps;
    tracks too short to honor it are not split.
    """

    dropout_p: float = 0.0
    fragment_p: float = 0.0
    fragment_gap: tuple[int, int] = (3, 15)
    min_fragment: int = 1
    clutter_rate: float = 0.0
    clutter_duration: tuple[int, int] = (2, 10)
    jitter_sigma: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "fragment_gap", tuple(int(x) for x in self.fragment_gap))
        object.__setattr__(self, "clutter_duration", tuple(int(x) for x in self.clutter_duration))
        for name in ("dropout_p", "fragment_p"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"noise.{name} must lie in [0, 1], got {v}")
        for name, low in (("fragment_gap", 0), ("clutter_duration", 1)):
            bounds = getattr(self, name)
            if len(bounds) != 2 or bounds[0] < low or bounds[0] > bounds[1]:
                raise ValidationError(
                    f"noise.{name} must be a (low, high) pair with {low} <= low <= high, got {bounds}"
                )
        if self.min_fragment < 1:
            raise ValidationError(f"noise.min_fragment must be >= 1, got {self.min_fragment}")
        if not self.clutter_rate >= 0:
            raise ValidationError(f"noise.clutter_rate must be >= 0, got {self.clutter_rate}")
        if not self.jitter_sigma >= 0:
            raise ValidationError(f"noise.jitter_sigma must be >= 0, got {self.jitter_sigma}")


@dataclass(frozen=True)
class ContainerSpec:
    """A container, or a run of ``same_class_cluster`` same-class containers
    spaced ``SimConfig.cluster_spacing`` meters apart."""

    class_id: int
    street_position: float
    same_class_cluster: int = 1

    def __post_init__(self) -> None:
        if self.class_id not in CLASS_IDS:
            raise ValidationError(f"containers: unknown class id {self.class_id}")
        if self.same_class_cluster < 1:
            raise ValidationError(
                f"containers: same_class_cluster must be >= 1, got {self.same_class_cluster}"
            )


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    sequence_id: str = "sim"
    image_width: int = DEFAULT_IMAGE_WIDTH
    image_height: int = DEFAULT_IMAGE_HEIGHT
    fps: float = DEFAULT_FPS
    containers: tuple[ContainerSpec, ...] = ()
    cluster_spacing: float = 22.0  # meters between containers of one cluster
    vehicle_speed: float = 2.0  # m/s
    visibility_window: float = 20.0  # meters
    box_width: float = 90.0  # px, at the image center
    box_height: float = 140.0
    size_growth: float = 0.6  # relative growth at the image edges
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "containers",
            tuple(c if isinstance(c, ContainerSpec) else ContainerSpec(*c) for c in self.containers),
        )
        checks = {
            "vehicle_speed": self.vehicle_speed,
            "visibility_window": self.visibility_window,
            "fps": self.fps,
            "image_width": self.image_width,
            "image_height": self.image_height,
            "box_width": self.box_width,
            "box_height": self.box_height,
        }
        for name, value in checks.items():
            if not value > 0:
                raise ValidationError(f"{name} must be positive, got {value}")
        if self.size_growth < 0:
            raise ValidationError(f"size_growth must be >= 0, got {self.size_growth}")
        if self.cluster_spacing < 0:
            raise ValidationError(f"cluster_spacing must be >= 0, got {self.cluster_spacing}")

    @property
    def frames_per_meter(self) -> float:
        return self.fps / self.vehicle_speed

    def to_dict(self) -> dict:
        d = asdict(self)
        d["containers"] = [list(asdict(c).values()) for c in self.containers]
        d["noise"]["fragment_gap"] = list(self.noise.fragment_gap)
        d["noise"]["clutter_duration"] = list(self.noise.clutter_duration)
        return {"schema": SIM_SCHEMA, **d}

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        data = dict(data)
        schema = data.pop("schema", SIM_SCHEMA)
        if schema != SIM_SCHEMA:
            raise ValidationError(f"schema: expected {SIM_SCHEMA!r}, got {schema!r}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config field(s): {', '.join(unknown)}")
        noise = data.pop("noise", {}) or {}
        noise_known = {f.name for f in fields(NoiseModel)}
        bad = sorted(set(noise) - noise_known)
        if bad:
            raise ValidationError(f"unknown config field(s): {', '.join('noise.' + b for b in bad)}")
        containers = []
        for i, c in enumerate(data.pop("containers", [])):
            try:
                containers.append(ContainerSpec(**c) if isinstance(c, dict) else ContainerSpec(*c))
            except (TypeError, ValidationError) as exc:
                raise ValidationError(f"containers[{i}]: {exc}") from None
        try:
            return cls(containers=tuple(containers), noise=NoiseModel(**noise), **data)
        except TypeError as exc:
            raise ValidationError(str(exc)) from None

    @classmethod
    def load(cls, path: str | os.PathLike) -> "SimConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(data)

    def dump(self, path: str | os.PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def container_positions(cfg: SimConfig) -> list[tuple[int, float]]:
    """(class_id, street position) of every container, sorted by position."""
    out = [
        (c.class_id, c.street_position + k * cfg.cluster_spacing)
        for c in cfg.containers
        for k in range(c.same_class_cluster)
    ]
    return sorted(out, key=lambda x: x[1])


def visible_frames(cfg: SimConfig, position: float) -> range:
    """Frames during which a container at ``position`` is inside the window."""
    half = cfg.visibility_window / 2
    start = math.ceil(round((position - half) * cfg.frames_per_meter, 9))
    stop = math.ceil(round((position + half) * cfg.frames_per_meter, 9))
    return range(max(0, start), max(0, stop))


def generate_scene(cfg: SimConfig) -> SequenceTracks:
    """Ground-truth tracks, one per container, for a single street pass."""
    rng = _rng(cfg.seed)
    tracks = []
    for track_id, (class_id, pos) in enumerate(container_positions(cfg), start=1):
        cy = rng.uniform(0.55, 0.70) * cfg.image_height
        dets = []
        for t in visible_frames(cfg, pos):
            offset = pos - t / cfg.frames_per_meter
            progress = (cfg.visibility_window / 2 - offset) / cfg.visibility_window
            cx = progress * cfg.image_width
            scale = 1.0 + cfg.size_growth * abs(2.0 * progress - 1.0)
            w = round(cfg.box_width * scale, 2)
            h = round(cfg.box_height * scale, 2)
            box = BoundingBox(round(cx - w / 2, 2), round(cy - h / 2, 2), w, h)
            dets.append(Detection(t, box, 1.0, class_id))
        if dets:
            tracks.append(Track(track_id, class_id, tuple(dets)))
    return SequenceTracks(cfg.sequence_id, cfg.image_width, cfg.image_height, cfg.fps, tuple(tracks))


@dataclass(frozen=True)
class CorruptionLog:
    n_splits: int
    clutter_ids: tuple[int, ...]
    dropped_detections: int


def _jittered(box: BoundingBox, dx: float, dy: float, width: int, height: int) -> BoundingBox:
    left = min(max(box.x_left + dx, -0.5 * width), 1.5 * width - box.width)
    top = min(max(box.y_top + dy, -0.5 * height), 1.5 * height - box.height)
    return BoundingBox(round(left, 2), round(top, 2), box.width, box.height)


def corrupt(gt: SequenceTracks, noise: NoiseModel, seed: int, return_log: bool = False):
    """Simulated tracker output for ``gt``.

    Args:
        gt: Ground-truth sequence.
        noise: Corruption parameters.
        seed: Seed of the PCG64 generator driving every random choice.
        return_log: Also return a :class:`CorruptionLog` with the number of
            splits and the ids given to clutter tracks.

    Returns:
        The corrupted sequence; ids are renumbered 1..N by start frame. With
        ``return_log`` a ``(sequence, log)`` tuple.
    """
    rng = _rng(seed)
    pieces: list[tuple[list[Detection], bool]] = []
    dropped = 0
    n_splits = 0
    for track in gt.tracks:
        keep = rng.random(len(track.detections)) >= noise.dropout_p
        dets = [d for d, k in zip(track.detections, keep) if k]
        dropped += len(track.detections) - len(dets)
        if not dets:
            continue
        split = rng.random() < noise.fragment_p
        gap = int(rng.integers(noise.fragment_gap[0], noise.fragment_gap[1] + 1))
        lo = noise.min_fragment
        hi = len(dets) - gap - noise.min_fragment
        if split and lo <= hi:
            i = int(rng.integers(lo, hi + 1))
            pieces.append((dets[:i], False))
            pieces.append((dets[i + gap:], False))
            dropped += gap
            n_splits += 1
        else:
            pieces.append((dets, False))

    whole, frac = divmod(noise.clutter_rate, 1.0)
    n_clutter = int(whole) + int(rng.random() < frac)
    horizon = max(gt.num_frames(), 1)
    for _ in range(n_clutter):
        duration = int(rng.integers(noise.clutter_duration[0], noise.clutter_duration[1] + 1))
        start = int(rng.integers(0, max(horizon - duration, 0) + 1))
        class_id = int(rng.integers(1, len(CLASS_IDS) + 1))
        w = round(float(rng.uniform(20.0, 50.0)), 2)
        h = round(w * float(rng.uniform(1.0, 1.6)), 2)
        x = round(float(rng.uniform(0.0, gt.image_width - w)), 2)
        y = round(float(rng.uniform(0.0, gt.image_height - h)), 2)
        conf = round(float(rng.uniform(0.1, 0.5)), 4)
        box = BoundingBox(x, y, w, h)
        pieces.append(([Detection(start + k, box, conf, class_id) for k in range(duration)], True))

    if noise.jitter_sigma > 0:
        jittered = []
        for dets, is_clutter in pieces:
            shifts = rng.normal(0.0, noise.jitter_sigma, size=(len(dets), 2))
            jittered.append(
                (
                    [
                        replace(d, box=_jittered(d.box, dx, dy, gt.image_width, gt.image_height))
                        for d, (dx, dy) in zip(dets, shifts)
                    ],
                    is_clutter,
                )
            )
        pieces = jittered

    order = sorted(range(len(pieces)), key=lambda i: (pieces[i][0][0].frame, i))
    tracks = []
    clutter_ids = []
    for new_id, i in enumerate(order, start=1):
        dets, is_clutter = pieces[i]
        tracks.append(Track(new_id, dets[0].class_id, tuple(dets)))
        if is_clutter:
            clutter_ids.append(new_id)
    out = gt.with_tracks(tracks)
    if return_log:
        return out, CorruptionLog(n_splits, tuple(clutter_ids), dropped)
    return out


# --------------------------------------------------------------------------
# Presets

_ISOLATED = (
    ContainerSpec(1, 10.0),
    ContainerSpec(2, 40.0),
    ContainerSpec(3, 70.0),
    ContainerSpec(1, 100.0),
    ContainerSpec(4, 130.0),
    ContainerSpec(1, 160.0),
    ContainerSpec(5, 190.0),
    ContainerSpec(3, 220.0),
)


def _preset_fragmentation() -> SimConfig:
    # Windows are 20 m long and 10 m (50 frames) apart: no two containers of
    # a class come within the 20-frame merge gap, while fragments always do.
    noise = NoiseModel(fragment_p=1.0, fragment_gap=(3, 15), min_fragment=15, jitter_sigma=1.0)
    return SimConfig(sequence_id="fragmentation", containers=_ISOLATED, noise=noise)


def _preset_sequential_same_class() -> SimConfig:
    # Clusters of three same-class containers 22 m apart: each track ends 11
    # frames before the next begins, at the opposite image edge. Fragment
    # gaps of at most 6 frames move the box by at most 0.06 image widths.
    containers = (ContainerSpec(1, 10.0, 3), ContainerSpec(3, 120.0, 3), ContainerSpec(2, 230.0, 2))
    noise = NoiseModel(fragment_p=1.0, fragment_gap=(2, 5), min_fragment=15, jitter_sigma=1.0)
    return SimConfig(
        sequence_id="sequential_same_class",
        containers=containers,
        cluster_spacing=22.0,
        noise=noise,
    )


def _preset_clutter() -> SimConfig:
    noise = NoiseModel(clutter_rate=8.0, clutter_duration=(2, 10), jitter_sigma=1.0)
    return SimConfig(sequence_id="clutter", containers=_ISOLATED, noise=noise)


PRESETS = {
    "fragmentation": _preset_fragmentation,
    "sequential_same_class": _preset_sequential_same_class,
    "clutter": _preset_clutter,
}


def preset_scenario(name: str, seed: int | None = None) -> SimConfig:
    """Named scenario configs: ``fragmentation``, ``sequential_same_class``, ``clutter``."""
    try:
        cfg = PRESETS[name]()
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}"
        ) from None
    return cfg if seed is None else replace(cfg, seed=seed)


def simulate(cfg: SimConfig, seed: int | None = None, return_log: bool = False):
    """Ground truth plus corrupted prediction for one config.

    The scene and the corruption draw from two independent streams derived
    from ``seed`` (default ``cfg.seed``).
    """
    seed = cfg.seed if seed is None else seed
    scene_seed, noise_seed = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
    gt = generate_scene(replace(cfg, seed=scene_seed))
    result = corrupt(gt, cfg.noise, noise_seed, return_log=return_log)
    if return_log:
        pred, log = result
        return gt, pred, log
    return gt, result
