"""Reading and writing MOT Challenge style track files and sequence metadata.

Each line of a track file is one record::

    frame,id,bb_left,bb_top,bb_width,bb_height[,conf[,class[,visibility]]]

Frames are 1-based on disk and 0-based in memory. Written files use a fixed
decimal layout (coordinates and visibility with 2 decimals, confidence with
4, half-even rounding) so that canonical files round-trip byte for byte.

Sequence metadata lives in a small INI file with a ``[sequence]`` section::

    [sequence]
    sequence_id = street_01
    image_width = 1920
    image_height = 1080
    fps = 10

The MOT Challenge ``seqinfo.ini`` keys (``[Sequence]`` with ``name``,
``imWidth``, ``imHeight``, ``frameRate``) are accepted as well.
"""

from __future__ import annotations

import configparser
import io
import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import IO, Iterable

from .errors import DuplicateRecordError, ParseError, ValidationError
from .model import (
    DEFAULT_FPS,
    DEFAULT_IMAGE_HEIGHT,
    DEFAULT_IMAGE_WIDTH,
    BoundingBox,
    Detection,
    SequenceTracks,
    Track,
)

logger = logging.getLogger(__name__)

DEFAULT_CLASS_ID = 1

_META_KEYS = {
    "sequence_id": ("sequence_id", "name"),
    "image_width": ("image_width", "imwidth"),
    "image_height": ("image_height", "imheight"),
    "fps": ("fps", "framerate"),
}


@dataclass(frozen=True)
class SequenceMeta:
    sequence_id: str = "seq"
    image_width: int = DEFAULT_IMAGE_WIDTH
    image_height: int = DEFAULT_IMAGE_HEIGHT
    fps: float = DEFAULT_FPS


@dataclass(frozen=True)
class MotRecord:
    frame: int
    id: int
    bb_left: float
    bb_top: float
    bb_width: float
    bb_height: float
    conf: float = 1.0
    class_id: int = DEFAULT_CLASS_ID
    visibility: float = 1.0

    def __post_init__(self) -> None:
        if not (self.bb_width > 0 and self.bb_height > 0):
            raise ValidationError(
                f"record (frame={self.frame}, id={self.id}) has non-positive size "
                f"{self.bb_width}x{self.bb_height}"
            )


def _fmt(value: float, places: int) -> str:
    quantum = Decimal(1).scaleb(-places)
    d = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_EVEN)
    if d.is_zero():
        d = abs(d)
    return f"{d:.{places}f}"


def format_record(rec: MotRecord) -> str:
    return ",".join(
        [
            str(rec.frame),
            str(rec.id),
            _fmt(rec.bb_left, 2),
            _fmt(rec.bb_top, 2),
            _fmt(rec.bb_width, 2),
            _fmt(rec.bb_height, 2),
            _fmt(rec.conf, 4),
            str(rec.class_id),
            _fmt(rec.visibility, 2),
        ]
    )


def _parse_int(token: str, name: str, lineno: int, source: str | None) -> int:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"field {name!r} is not numeric: {token!r}", lineno, source) from None
    if not value.is_integer():
        raise ParseError(f"field {name!r} must be an integer: {token!r}", lineno, source)
    return int(value)


def _parse_float(token: str, name: str, lineno: int, source: str | None) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"field {name!r} is not numeric: {token!r}", lineno, source) from None
    if value != value or value in (float("inf"), float("-inf")):
        raise ParseError(f"field {name!r} is not finite: {token!r}", lineno, source)
    return value


def parse_record(line: str, lineno: int = 0, source: str | None = None) -> MotRecord:
    """Parse one comma separated record, raising :class:`ParseError` on bad input."""
    fields = [f.strip() for f in line.split(",")]
    if not 6 <= len(fields) <= 9:
        raise ParseError(f"expected 6 to 9 fields, found {len(fields)}", lineno, source)
    frame = _parse_int(fields[0], "frame", lineno, source)
    track_id = _parse_int(fields[1], "id", lineno, source)
    left, top, width, height = (
        _parse_float(tok, name, lineno, source)
        for tok, name in zip(fields[2:6], ("bb_left", "bb_top", "bb_width", "bb_height"))
    )
    conf = _parse_float(fields[6], "conf", lineno, source) if len(fields) > 6 else 1.0
    if len(fields) > 7:
        class_id = _parse_int(fields[7], "class", lineno, source)
    else:
        class_id = DEFAULT_CLASS_ID
    visibility = _parse_float(fields[8], "visibility", lineno, source) if len(fields) > 8 else 1.0
    if frame < 1:
        raise ParseError(f"frame must be >= 1, got {frame}", lineno, source)
    if track_id < 1:
        raise ParseError(f"id must be >= 1, got {track_id}", lineno, source)
    try:
        return MotRecord(frame, track_id, left, top, width, height, conf, class_id, visibility)
    except ValidationError as exc:
        raise ParseError(str(exc), lineno, source) from None


def records_to_sequence(
    records: Iterable[MotRecord],
    meta: SequenceMeta | None = None,
) -> SequenceTracks:
    meta = meta or SequenceMeta()
    by_id: dict[int, list[Detection]] = defaultdict(list)
    for rec in records:
        box = BoundingBox(rec.bb_left, rec.bb_top, rec.bb_width, rec.bb_height)
        by_id[rec.id].append(
            Detection(rec.frame - 1, box, rec.conf, rec.class_id, rec.visibility)
        )
    tracks = [Track.from_detections(tid, dets) for tid, dets in by_id.items()]
    tracks.sort(key=lambda t: (t.start_frame(), t.track_id))
    return SequenceTracks(meta.sequence_id, meta.image_width, meta.image_height, meta.fps, tuple(tracks))


def parse_mot_file(
    stream: IO[str] | str | os.PathLike,
    meta: SequenceMeta | None = None,
    *,
    source: str | None = None,
) -> SequenceTracks:
    """Parse a MOT text file into a :class:`SequenceTracks`.

    Args:
        stream: An open text stream, or a path to one.
        meta: Image size, frame rate and sequence id. Defaults to 1920x1080 at
            10 fps.
        source: Name used in error messages; defaults to the path when one
            is given.

    Raises:
        ParseError: A line has the wrong number of fields or a non-numeric
            value. The message carries the 1-based line number.
        DuplicateRecordError: Two lines describe the same (frame, id).
        ValidationError: A record or the resulting sequence breaks an
            invariant (non-positive box size, box far outside the image).
    """
    if isinstance(stream, (str, os.PathLike)):
        path = Path(stream)
        with path.open("r", encoding="utf-8") as fh:
            return parse_mot_file(fh, meta, source=source or str(path))

    records: list[MotRecord] = []
    seen: dict[tuple[int, int], int] = {}
    missing_class = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        rec = parse_record(line, lineno, source)
        key = (rec.frame, rec.id)
        if key in seen:
            raise DuplicateRecordError(
                f"duplicate record for frame {rec.frame}, id {rec.id} "
                f"(first seen on line {seen[key]})",
                lineno,
                source,
            )
        seen[key] = lineno
        if line.count(",") < 7:
            missing_class += 1
        records.append(rec)
    if missing_class:
        logger.warning(
            "%s: %d record(s) without a class field, using class %d",
            source or "<stream>",
            missing_class,
            DEFAULT_CLASS_ID,
        )
    try:
        return records_to_sequence(records, meta)
    except ValidationError as exc:
        raise ValidationError(f"{source or '<stream>'}: {exc}") from None


def sequence_to_records(seq: SequenceTracks) -> list[MotRecord]:
    recs = [
        MotRecord(
            d.frame + 1,
            t.track_id,
            d.box.x_left,
            d.box.y_top,
            d.box.width,
            d.box.height,
            d.confidence,
            d.class_id,
            d.visibility,
        )
        for t in seq.tracks
        for d in t.detections
    ]
    recs.sort(key=lambda r: (r.frame, r.id))
    return recs


def write_mot_file(seq: SequenceTracks, stream: IO[str] | str | os.PathLike | None = None) -> str:
    """Serialize ``seq`` in canonical MOT layout, sorted by (frame, id).

    Returns the text; when ``stream`` is given it is also written there.
    """
    text = "".join(format_record(r) + "\n" for r in sequence_to_records(seq))
    if isinstance(stream, (str, os.PathLike)):
        Path(stream).write_text(text, encoding="utf-8", newline="\n")
    elif stream is not None:
        stream.write(text)
    return text


def parse_mot_text(text: str, meta: SequenceMeta | None = None) -> SequenceTracks:
    return parse_mot_file(io.StringIO(text), meta)


def read_meta(path: str | os.PathLike) -> SequenceMeta:
    """Load sequence metadata from an INI file; missing keys take defaults."""
    parser = configparser.ConfigParser()
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ParseError(f"malformed metadata file: {exc}", source=str(path)) from None
    section = next(
        (s for s in parser.sections() if s.lower() == "sequence"), None
    )
    if section is None:
        raise ParseError("metadata file lacks a [sequence] section", source=str(path))
    values = {k.lower(): v for k, v in parser.items(section)}

    def lookup(key: str) -> str | None:
        for alias in _META_KEYS[key]:
            if alias in values:
                return values[alias]
        return None

    seq_id = lookup("sequence_id") or path.stem
    try:
        width = int(lookup("image_width") or DEFAULT_IMAGE_WIDTH)
        height = int(lookup("image_height") or DEFAULT_IMAGE_HEIGHT)
        fps = float(lookup("fps") or DEFAULT_FPS)
    except ValueError as exc:
        raise ParseError(f"bad metadata value: {exc}", source=str(path)) from None
    if width <= 0 or height <= 0 or fps <= 0:
        raise ValidationError(f"{path}: image size and fps must be positive")
    return SequenceMeta(seq_id, width, height, fps)


def format_meta(meta: SequenceMeta) -> str:
    fps = int(meta.fps) if float(meta.fps).is_integer() else meta.fps
    return (
        "[sequence]\n"
        f"sequence_id = {meta.sequence_id}\n"
        f"image_width = {meta.image_width}\n"
        f"image_height = {meta.image_height}\n"
        f"fps = {fps}\n"
    )


def write_meta(meta: SequenceMeta, path: str | os.PathLike) -> None:
    Path(path).write_text(format_meta(meta), encoding="utf-8", newline="\n")


def meta_of(seq: SequenceTracks) -> SequenceMeta:
    return SequenceMeta(seq.sequence_id, seq.image_width, seq.image_height, seq.fps)
