import io
import logging

import numpy as np
import pytest

from trackcount.errors import DuplicateRecordError, ParseError, ValidationError
from trackcount.model import BoundingBox, Detection, SequenceTracks, Track
from trackcount.motio import (
    SequenceMeta,
    format_meta,
    parse_mot_text,
    read_meta,
    write_meta,
    write_mot_file,
)


def test_single_line():
    seq = parse_mot_text("1,7,100,200,50,80,0.9,1,1.0\n")
    assert len(seq.tracks) == 1
    t = seq.tracks[0]
    assert t.track_id == 7
    assert t.frames() == [0]
    assert t.detections[0].box == BoundingBox(100, 200, 50, 80)
    assert t.detections[0].confidence == 0.9


def test_grouping_by_id():
    seq = parse_mot_text("1,7,100,200,50,80,0.9,1,1.0\n2,7,101,200,50,80,0.9,1,1.0\n")
    assert len(seq.tracks) == 1
    assert seq.tracks[0].duration_frames() == 2


def test_duplicate_record():
    text = "3,5,0,0,10,10,1,1,1\n3,5,1,1,10,10,1,1,1\n"
    with pytest.raises(DuplicateRecordError) as exc:
        parse_mot_text(text)
    assert exc.value.line == 2


@pytest.mark.parametrize(
    "line",
    ["1,2,3,4,5", "1,2,3,4,5,6,7,8,9,10", "1,a,3,4,5,6", "1.5,2,3,4,5,6", "0,1,0,0,5,5", "1,0,0,0,5,5"],
)
def test_malformed_lines(line):
    with pytest.raises(ParseError) as exc:
        parse_mot_text("1,9,0,0,10,10\n" + line + "\n")
    assert exc.value.line == 2
    assert "2:" in str(exc.value)


def test_non_positive_size_is_validation_error():
    with pytest.raises(ParseError, match="non-positive"):
        parse_mot_text("1,1,0,0,0,10\n")


def test_out_of_range_confidence_rejected():
    with pytest.raises(ValidationError):
        parse_mot_text("1,1,0,0,10,10,-1,1,1\n")


def test_missing_class_defaults_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        seq = parse_mot_text("1,1,0,0,10,10\n2,1,0,0,10,10,0.5\n")
    assert seq.tracks[0].class_id == 1
    assert "without a class field" in caplog.text


def test_tracks_sorted_by_start_and_frames_zero_based():
    seq = parse_mot_text("5,1,0,0,10,10,1,1,1\n2,9,0,0,10,10,1,2,1\n")
    assert [t.track_id for t in seq.tracks] == [9, 1]
    assert seq.tracks[0].start_frame() == 1


def test_blank_lines_ignored():
    assert len(parse_mot_text("\n1,1,0,0,10,10,1,1,1\n\n").tracks) == 1


def test_empty_sequence_writes_empty_file():
    assert write_mot_file(SequenceTracks()) == ""


def test_half_even_formatting():
    seq = SequenceTracks(tracks=(Track(3, 1, (Detection(0, BoundingBox(1.005, 2, 10, 10)),)),))
    assert write_mot_file(seq) == "1,3,1.00,2.00,10.00,10.00,1.0000,1,1.00\n"


def test_half_even_on_decimal_value():
    seq = SequenceTracks(tracks=(Track(1, 1, (Detection(0, BoundingBox(1.015, 2.125, 10, 10)),)),))
    assert write_mot_file(seq).startswith("1,1,1.02,2.12,")


def test_records_sorted_by_frame_then_id():
    text = "2,1,0,0,10,10,1.0000,1,1.00\n1,2,0,0,10,10,1.0000,1,1.00\n1,1,0,0,10,10,1.0000,1,1.00\n"
    lines = write_mot_file(parse_mot_text(text)).splitlines()
    assert [l.split(",")[:2] for l in lines] == [["1", "1"], ["1", "2"], ["2", "1"]]


def test_write_to_stream_and_path(tmp_path):
    seq = parse_mot_text("1,1,0,0,10,10,1,1,1\n")
    buf = io.StringIO()
    write_mot_file(seq, buf)
    write_mot_file(seq, tmp_path / "x.txt")
    assert buf.getvalue() == (tmp_path / "x.txt").read_text()


def random_canonical_file(rng):
    lines = []
    n_ids = int(rng.integers(0, 6))
    for tid in range(1, n_ids + 1):
        frames = sorted(rng.choice(np.arange(1, 40), size=int(rng.integers(1, 12)), replace=False))
        cls = int(rng.integers(1, 8))
        for f in frames:
            x = rng.integers(-5000, 150000) / 100
            y = rng.integers(-5000, 120000) / 100
            w, h = rng.integers(100, 30000, 2) / 100
            conf = rng.integers(0, 10001) / 10000
            vis = rng.integers(0, 101) / 100
            lines.append((f, tid, f"{f},{tid},{x:.2f},{y:.2f},{w:.2f},{h:.2f},{conf:.4f},{cls},{vis:.2f}"))
    lines.sort()
    return "".join(l + "\n" for *_, l in lines)


def test_round_trip_byte_exact():
    rng = np.random.default_rng(7)
    for _ in range(50):
        text = random_canonical_file(rng)
        seq = parse_mot_text(text)
        assert write_mot_file(seq) == text
        assert parse_mot_text(write_mot_file(seq)) == seq


def test_meta_round_trip(tmp_path):
    meta = SequenceMeta("street_01", 1280, 720, 12.5)
    write_meta(meta, tmp_path / "m.ini")
    assert read_meta(tmp_path / "m.ini") == meta
    assert "fps = 10\n" in format_meta(SequenceMeta())


def test_meta_accepts_mot_seqinfo_keys(tmp_path):
    p = tmp_path / "seqinfo.ini"
    p.write_text("[Sequence]\nname=MOT-02\nimWidth=640\nimHeight=480\nframeRate=30\n")
    assert read_meta(p) == SequenceMeta("MOT-02", 640, 480, 30.0)


def test_meta_errors(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[other]\nx=1\n")
    with pytest.raises(ParseError):
        read_meta(p)
    p.write_text("[sequence]\nimage_width=wide\n")
    with pytest.raises(ParseError):
        read_meta(p)


def test_parse_path_uses_meta(tmp_path):
    p = tmp_path / "a.txt"
    p.write_text("1,1,0,0,10,10,1,1,1\n")
    from trackcount.motio import parse_mot_file

    seq = parse_mot_file(p, SequenceMeta("a", 640, 480, 5))
    assert (seq.sequence_id, seq.image_width, seq.image_height, seq.fps) == ("a", 640, 480, 5)
    p.write_text("1,1,0,0,10,10,1,1,1\nbroken\n")
    with pytest.raises(ParseError, match=r"a\.txt:2"):
        parse_mot_file(p)
