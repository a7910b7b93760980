import pytest

from trackcount.model import BoundingBox, Detection, SequenceTracks, Track


def make_track(track_id, frames, box=(100, 100, 50, 80), class_id=1, step=(0.0, 0.0)):
    """Track with one detection per frame; the box moves by ``step`` pixels per frame."""
    x, y, w, h = box
    dets = tuple(
        Detection(f, BoundingBox(x + step[0] * k, y + step[1] * k, w, h), 1.0, class_id)
        for k, f in enumerate(frames)
    )
    return Track(track_id, class_id, dets)


def make_seq(*tracks, sequence_id="seq", width=1920, height=1080):
    return SequenceTracks(sequence_id, width, height, 10.0, tuple(tracks))


@pytest.fixture
def track_factory():
    return make_track


@pytest.fixture
def seq_factory():
    return make_seq


# Acceptance reporting: one pass/fail line per criterion in the terminal summary.

_CRITERIA: dict[str, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    key = f"{number:02d}"
    prev = _CRITERIA.get(key, (title, "PASS"))[1]
    if rep.when == "call" or rep.failed:
        status = "PASS" if rep.passed and prev == "PASS" else "FAIL"
        if rep.skipped:
            status = "SKIP"
        _CRITERIA[key] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        title, status = _CRITERIA[key]
        terminalreporter.write_line(f"[{status}] criterion {int(key)}: {title}")
