import math

import numpy as np
import pytest

from conftest import make_seq, make_track
from oracles import oracle_clear_mot, oracle_hota, oracle_idf1, random_instance
from trackcount.errors import UndefinedMetricError, ValidationError
from trackcount.metrics import (
    HOTA_ALPHAS,
    ClearMotResult,
    HotaResult,
    IdentityResult,
    bootstrap_summary,
    clear_mot,
    clear_mot_counts,
    hota,
    idf1,
)
from trackcount.model import SequenceTracks, Track


def relabel(seq, mapping):
    return seq.with_tracks([t.with_id(mapping[t.track_id]) for t in seq.tracks])


@pytest.fixture
def gt10():
    return make_seq(make_track(1, range(10)))


def test_perfect_prediction(gt10):
    pred = relabel(gt10, {1: 42})
    m = clear_mot(gt10, pred)
    assert (m.mota, m.fp, m.fn, m.idsw) == (1.0, 0, 0, 0)
    assert idf1(gt10, pred).idf1 == 1.0
    h = hota(gt10, pred)
    assert (h.hota, h.deta, h.assa) == pytest.approx((1.0, 1.0, 1.0))


def test_mota_missed_frames(gt10):
    pred = make_seq(make_track(5, range(8)))
    m = clear_mot(gt10, pred)
    assert (m.fn, m.fp, m.idsw) == (2, 0, 0)
    assert m.mota == pytest.approx(0.8)


def test_mota_identity_switch(gt10):
    pred = make_seq(make_track(11, range(0, 5)), make_track(12, range(5, 10)))
    m = clear_mot(gt10, pred)
    assert (m.fn, m.fp, m.idsw) == (0, 0, 1)
    assert m.mota == pytest.approx(0.9)


def test_idf1_split_prediction(gt10):
    pred = make_seq(make_track(11, range(0, 5)), make_track(12, range(5, 10)))
    r = idf1(gt10, pred)
    assert (r.idtp, r.idfn, r.idfp) == (5, 5, 5)
    assert r.idf1 == pytest.approx(0.5)


def test_idf1_no_predictions(gt10):
    r = idf1(gt10, make_seq())
    assert (r.idtp, r.idf1) == (0, 0.0)


def test_hota_missing_frames(gt10):
    pred = make_seq(make_track(3, [f for f in range(10) if f not in (4, 7)]))
    h = hota(gt10, pred)
    for _, hota_a, deta_a, assa_a in h.per_alpha:
        assert deta_a == pytest.approx(0.8)
        assert assa_a == pytest.approx(0.8)
        assert hota_a == pytest.approx(0.8)
    assert h.hota == pytest.approx(0.8)


def test_hota_per_alpha_geometric_mean():
    rng = np.random.default_rng(11)
    for _ in range(20):
        gt, pred = random_instance(rng)
        if not gt.tracks:
            continue
        h = hota(gt, pred)
        assert [a for a, *_ in h.per_alpha] == list(HOTA_ALPHAS)
        for _, ha, da, aa in h.per_alpha:
            assert ha == math.sqrt(da * aa)
        assert h.hota == pytest.approx(np.mean([x[1] for x in h.per_alpha]))


def test_undefined_cases(gt10):
    empty = make_seq()
    with pytest.raises(UndefinedMetricError):
        clear_mot(empty, gt10)
    with pytest.raises(UndefinedMetricError):
        idf1(empty, gt10)
    with pytest.raises(UndefinedMetricError):
        hota(empty, empty)
    h = hota(empty, gt10)
    assert h.deta == 0.0 and h.hota == 0.0
    assert clear_mot_counts(empty, gt10).fp == 10


def test_threshold_and_size_validation(gt10):
    with pytest.raises(ValidationError):
        clear_mot(gt10, gt10, iou_threshold=1.0)
    other = SequenceTracks("seq", 640, 480, 10.0, gt10.tracks)
    with pytest.raises(ValidationError):
        idf1(gt10, other)


def test_cross_class_never_matches(gt10):
    pred = make_seq(make_track(1, range(10), class_id=2))
    assert clear_mot(gt10, pred).fn == 10
    assert idf1(gt10, pred).idtp == 0
    assert hota(gt10, pred).deta == 0.0


def test_carry_over_keeps_previous_match():
    # Two predictions overlap the GT; the one matched first stays matched while
    # it remains above threshold, even when the other overlaps slightly more.
    gt = make_seq(make_track(1, range(3), box=(100, 100, 100, 100)))
    p1 = make_track(1, range(3), box=(100, 100, 100, 100), step=(10, 0))
    p2 = make_track(2, [1, 2], box=(100, 100, 100, 100))
    m = clear_mot(gt, make_seq(p1, p2))
    assert (m.idsw, m.fp) == (0, 2)


def test_pooling_sums_counts():
    a = ClearMotResult(1, 2, 3, 10)
    b = ClearMotResult(0, 1, 0, 20)
    assert ClearMotResult.pool([a, b]).mota == pytest.approx(1 - 7 / 30)
    i = IdentityResult.pool([IdentityResult(5, 1, 2), IdentityResult(3, 0, 0)])
    assert i.idf1 == pytest.approx(16 / 19)


def test_hota_pooling_matches_joint_sequence():
    rng = np.random.default_rng(5)
    gt1, pr1 = random_instance(rng)
    gt2, pr2 = random_instance(rng)
    while not (gt1.tracks and gt2.tracks):
        gt1, pr1 = gt2, pr2
        gt2, pr2 = random_instance(rng)
    pooled = HotaResult.pool([hota(gt1, pr1), hota(gt2, pr2)])

    def shift(seq, offset, id_offset):
        return [
            Track(t.track_id + id_offset, t.class_id, tuple(d.__class__(d.frame + offset, d.box, d.confidence, d.class_id) for d in t.detections))
            for t in seq.tracks
        ]

    joint_gt = SequenceTracks("j", 200, 200, 10.0, tuple(shift(gt1, 0, 0) + shift(gt2, 100, 10)))
    joint_pr = SequenceTracks("j", 200, 200, 10.0, tuple(shift(pr1, 0, 0) + shift(pr2, 100, 10)))
    joint = hota(joint_gt, joint_pr)
    assert pooled.tp == joint.tp and pooled.fp == joint.fp and pooled.fn == joint.fn
    assert pooled.deta == pytest.approx(joint.deta)


def test_oracles_agree_on_micro_instances():
    rng = np.random.default_rng(123)
    checked = 0
    for _ in range(80):
        gt, pred = random_instance(rng)
        if gt.num_detections() == 0:
            continue
        checked += 1
        m, om = clear_mot(gt, pred), oracle_clear_mot(gt, pred, 0.5)
        assert (m.fp, m.fn, m.idsw) == (om["fp"], om["fn"], om["idsw"])
        assert idf1(gt, pred).idf1 == pytest.approx(oracle_idf1(gt, pred, 0.5)["idf1"], abs=1e-9)
        h, oh = hota(gt, pred), oracle_hota(gt, pred)
        assert (h.hota, h.deta, h.assa) == pytest.approx((oh["hota"], oh["deta"], oh["assa"]), abs=1e-9)
    assert checked > 50


def test_relabeling_invariance():
    rng = np.random.default_rng(9)
    for _ in range(30):
        gt, pred = random_instance(rng)
        if not gt.tracks or not pred.tracks:
            continue
        ids = pred.track_ids()
        perm = dict(zip(ids, rng.permutation(ids) + 100))
        other = relabel(pred, {k: int(v) for k, v in perm.items()})
        assert clear_mot(gt, other).mota == pytest.approx(clear_mot(gt, pred).mota)
        assert idf1(gt, other).idf1 == pytest.approx(idf1(gt, pred).idf1)
        assert hota(gt, other).hota == pytest.approx(hota(gt, pred).hota)


def test_inconsistent_relabeling_lowers_idf1_only():
    gt = make_seq(make_track(1, range(10)), make_track(2, range(10), box=(600, 100, 50, 80)))
    # Same boxes, but the predicted identity of each object flips at frame 5.
    a = make_track(7, range(5))
    b = make_track(8, range(5), box=(600, 100, 50, 80))
    c = make_track(9, range(5, 10))
    d = make_track(10, range(5, 10), box=(600, 100, 50, 80))
    pred = make_seq(a, b, c, d)
    assert clear_mot(gt, pred).fn + clear_mot(gt, pred).fp == 0
    assert idf1(gt, pred).idf1 < 1.0
    assert hota(gt, pred).deta == pytest.approx(1.0)


def test_removing_spurious_track_never_hurts():
    rng = np.random.default_rng(21)
    for _ in range(30):
        gt, pred = random_instance(rng)
        if not gt.tracks:
            continue
        # Outside the image, disjoint from every generated box.
        spurious = make_track(99, [0, 1], box=(-90, -90, 10, 10), class_id=gt.tracks[0].class_id)
        with_spur = pred.with_tracks(list(pred.tracks) + [spurious])
        assert clear_mot(gt, pred).mota >= clear_mot(gt, with_spur).mota
        assert idf1(gt, pred).idf1 >= idf1(gt, with_spur).idf1
        assert hota(gt, pred).deta >= hota(gt, with_spur).deta


def test_bootstrap_examples():
    assert bootstrap_summary([0.7, 0.7, 0.7], seed=3) == (0.7, 0.0)
    assert bootstrap_summary([4.25], seed=0) == (4.25, 0.0)
    # Golden value for PCG64 seeded with 42.
    assert bootstrap_summary([1, 2, 3], 10, 42) == (2.2, 0.33993463423951903)
    assert bootstrap_summary([1, 2, 3], 10, 42) == bootstrap_summary([1, 2, 3], 10, 42)
    assert bootstrap_summary([1, 2, 3], 10, 43) != bootstrap_summary([1, 2, 3], 10, 42)
    with pytest.raises(ValidationError):
        bootstrap_summary([])
