"""Tracking metrics: CLEAR-MOT (MOTA), identity F1 and HOTA, plus bootstrap summaries.

Matching is always restricted to same-class pairs: a predicted box never
matches a ground-truth box of another class. Every result type stores raw
counts so that several sequences can be pooled by summation.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .assignment import iou, solve_assignment
from .errors import UndefinedMetricError, ValidationError
from .model import BoundingBox, SequenceTracks

DEFAULT_IOU_THRESHOLD = 0.5
HOTA_ALPHAS: tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 20))
# Similarity >= alpha is tested as sim >= alpha - ALPHA_TOL.
ALPHA_TOL = 1e-12
# Weight of IoU relative to association quality in HOTA's per-frame matching.
HOTA_IOU_EPS = 1e-6


@dataclass(frozen=True)
class _Frame:
    gt_ids: list[int]
    pred_ids: list[int]
    sim: np.ndarray  # IoU, zeroed across classes


def _frames(gt: SequenceTracks, pred: SequenceTracks) -> dict[int, _Frame]:
    per_gt: dict[int, list[tuple[int, BoundingBox, int]]] = {}
    per_pred: dict[int, list[tuple[int, BoundingBox, int]]] = {}
    for t in gt.tracks:
        for d in t.detections:
            per_gt.setdefault(d.frame, []).append((t.track_id, d.box, t.class_id))
    for t in pred.tracks:
        for d in t.detections:
            per_pred.setdefault(d.frame, []).append((t.track_id, d.box, t.class_id))
    out = {}
    for f in sorted(set(per_gt) | set(per_pred)):
        g = sorted(per_gt.get(f, []), key=lambda x: x[0])
        p = sorted(per_pred.get(f, []), key=lambda x: x[0])
        sim = np.zeros((len(g), len(p)))
        for i, (_, gb, gc) in enumerate(g):
            for j, (_, pb, pc) in enumerate(p):
                if gc == pc:
                    sim[i, j] = iou(gb, pb)
        out[f] = _Frame([x[0] for x in g], [x[0] for x in p], sim)
    return out


def _check_threshold(iou_threshold: float) -> None:
    if not 0.0 < iou_threshold < 1.0:
        raise ValidationError(f"iou_threshold must lie in (0, 1), got {iou_threshold}")


def _check_dims(gt: SequenceTracks, pred: SequenceTracks) -> None:
    if (gt.image_width, gt.image_height) != (pred.image_width, pred.image_height):
        raise ValidationError(
            f"image size mismatch: gt {gt.image_width}x{gt.image_height}, "
            f"pred {pred.image_width}x{pred.image_height}"
        )


def _ratio(num: float, den: float, what: str) -> float:
    if den <= 0:
        raise UndefinedMetricError(f"{what} is undefined for empty input")
    return num / den


# --------------------------------------------------------------------------
# CLEAR-MOT

@dataclass(frozen=True)
class ClearMotResult:
    fp: int
    fn: int
    idsw: int
    gt_total: int
    matches: int = 0

    @property
    def mota(self) -> float:
        return 1.0 - _ratio(self.fn + self.fp + self.idsw, self.gt_total, "MOTA")

    @classmethod
    def pool(cls, results: Iterable["ClearMotResult"]) -> "ClearMotResult":
        rs = list(results)
        return cls(
            sum(r.fp for r in rs),
            sum(r.fn for r in rs),
            sum(r.idsw for r in rs),
            sum(r.gt_total for r in rs),
            sum(r.matches for r in rs),
        )


def clear_mot_counts(
    gt: SequenceTracks, pred: SequenceTracks, iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> ClearMotResult:
    """CLEAR-MOT error counts without evaluating MOTA (so empty GT is allowed)."""
    _check_threshold(iou_threshold)
    _check_dims(gt, pred)
    fp = fn = idsw = matches = 0
    prev_frame = None
    prev_pairs: dict[int, int] = {}
    last_match: dict[int, int] = {}
    for f, fr in _frames(gt, pred).items():
        g_idx = {g: i for i, g in enumerate(fr.gt_ids)}
        p_idx = {p: j for j, p in enumerate(fr.pred_ids)}
        matched: dict[int, int] = {}
        if prev_frame == f - 1:
            for g, p in prev_pairs.items():
                if g in g_idx and p in p_idx and fr.sim[g_idx[g], p_idx[p]] >= iou_threshold:
                    matched[g] = p
        rows = [i for i, g in enumerate(fr.gt_ids) if g not in matched]
        taken = set(matched.values())
        cols = [j for j, p in enumerate(fr.pred_ids) if p not in taken]
        if rows and cols:
            sub = fr.sim[np.ix_(rows, cols)]
            weights = np.where(sub >= iou_threshold, sub, 0.0)
            if weights.any():
                for r, c in solve_assignment(weights, "maximize"):
                    if sub[r, c] >= iou_threshold:
                        matched[fr.gt_ids[rows[r]]] = fr.pred_ids[cols[c]]
        for g, p in matched.items():
            if g in last_match and last_match[g] != p:
                idsw += 1
            last_match[g] = p
        matches += len(matched)
        fn += len(fr.gt_ids) - len(matched)
        fp += len(fr.pred_ids) - len(matched)
        prev_pairs = matched
        prev_frame = f
    return ClearMotResult(fp, fn, idsw, gt.num_detections(), matches)


def clear_mot(
    gt: SequenceTracks, pred: SequenceTracks, iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> ClearMotResult:
    """Frame-by-frame CLEAR-MOT matching.

    In each frame, pairs matched on the previous frame are kept while their
    IoU stays at or above ``iou_threshold``; remaining boxes are matched by
    an optimal assignment maximizing IoU over admissible pairs. A ground
    truth whose matched prediction id differs from its last one counts as an
    identity switch.

    Raises:
        UndefinedMetricError: ``gt`` has no detections.
    """
    res = clear_mot_counts(gt, pred, iou_threshold)
    if res.gt_total == 0:
        raise UndefinedMetricError("MOTA is undefined without ground-truth detections")
    return res


# --------------------------------------------------------------------------
# Identity metrics

@dataclass(frozen=True)
class IdentityResult:
    idtp: int
    idfp: int
    idfn: int

    @property
    def idf1(self) -> float:
        return _ratio(2 * self.idtp, 2 * self.idtp + self.idfp + self.idfn, "IDF1")

    @classmethod
    def pool(cls, results: Iterable["IdentityResult"]) -> "IdentityResult":
        rs = list(results)
        return cls(sum(r.idtp for r in rs), sum(r.idfp for r in rs), sum(r.idfn for r in rs))


def idf1_counts(
    gt: SequenceTracks, pred: SequenceTracks, iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> IdentityResult:
    _check_threshold(iou_threshold)
    _check_dims(gt, pred)
    gt_ids = sorted(gt.track_ids())
    pred_ids = sorted(pred.track_ids())
    gi = {g: i for i, g in enumerate(gt_ids)}
    pj = {p: j for j, p in enumerate(pred_ids)}
    weight = np.zeros((len(gt_ids), len(pred_ids)))
    for fr in _frames(gt, pred).values():
        for i, j in zip(*np.nonzero(fr.sim >= iou_threshold)):
            weight[gi[fr.gt_ids[i]], pj[fr.pred_ids[j]]] += 1
    idtp = 0
    if weight.any():
        idtp = int(sum(weight[r, c] for r, c in solve_assignment(weight, "maximize")))
    return IdentityResult(idtp, pred.num_detections() - idtp, gt.num_detections() - idtp)


def idf1(
    gt: SequenceTracks, pred: SequenceTracks, iou_threshold: float = DEFAULT_IOU_THRESHOLD
) -> IdentityResult:
    """Identity F1 from an optimal one-to-one matching of whole trajectories.

    The weight of a (ground truth, prediction) identity pair is the number of
    frames in which their boxes overlap with IoU >= ``iou_threshold``.

    Raises:
        UndefinedMetricError: ``gt`` has no detections.
    """
    res = idf1_counts(gt, pred, iou_threshold)
    if gt.num_detections() == 0:
        raise UndefinedMetricError("IDF1 is undefined without ground-truth detections")
    return res


# --------------------------------------------------------------------------
# HOTA

@dataclass(frozen=True)
class HotaResult:
    """Per-alpha counts; summary scores are derived properties."""

    alphas: tuple[float, ...]
    tp: tuple[int, ...]
    fn: tuple[int, ...]
    fp: tuple[int, ...]
    assoc_sum: tuple[float, ...]  # sum over TPs of TPA / (TPA + FNA + FPA)

    def _check(self) -> None:
        if all(t + n + p == 0 for t, n, p in zip(self.tp, self.fn, self.fp)):
            raise UndefinedMetricError("HOTA is undefined with no ground truth and no predictions")

    def deta_alpha(self) -> list[float]:
        self._check()
        return [t / (t + n + p) for t, n, p in zip(self.tp, self.fn, self.fp)]

    def assa_alpha(self) -> list[float]:
        self._check()
        return [s / t if t else 0.0 for s, t in zip(self.assoc_sum, self.tp)]

    def hota_alpha(self) -> list[float]:
        return [float(np.sqrt(d * a)) for d, a in zip(self.deta_alpha(), self.assa_alpha())]

    @property
    def per_alpha(self) -> list[tuple[float, float, float, float]]:
        return list(zip(self.alphas, self.hota_alpha(), self.deta_alpha(), self.assa_alpha()))

    @property
    def deta(self) -> float:
        return float(np.mean(self.deta_alpha()))

    @property
    def assa(self) -> float:
        return float(np.mean(self.assa_alpha()))

    @property
    def hota(self) -> float:
        return float(np.mean(self.hota_alpha()))

    @classmethod
    def pool(cls, results: Iterable["HotaResult"]) -> "HotaResult":
        rs = list(results)
        if not rs:
            raise UndefinedMetricError("cannot pool zero HOTA results")
        alphas = rs[0].alphas
        if any(r.alphas != alphas for r in rs):
            raise ValidationError("cannot pool HOTA results over different alpha grids")

        def col(name):
            return tuple(sum(vals) for vals in zip(*(getattr(r, name) for r in rs)))

        return cls(alphas, col("tp"), col("fn"), col("fp"), col("assoc_sum"))


def hota_counts(
    gt: SequenceTracks, pred: SequenceTracks, alphas: Sequence[float] = HOTA_ALPHAS
) -> HotaResult:
    _check_dims(gt, pred)
    alphas = tuple(alphas)
    gt_ids = sorted(gt.track_ids())
    pred_ids = sorted(pred.track_ids())
    gi = {g: i for i, g in enumerate(gt_ids)}
    pj = {p: j for j, p in enumerate(pred_ids)}
    frames = _frames(gt, pred)

    # Global alignment between identities, accumulated from soft per-frame IoU.
    potential = np.zeros((len(gt_ids), len(pred_ids)))
    gt_count = np.zeros(len(gt_ids))
    pred_count = np.zeros(len(pred_ids))
    index: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for f, fr in frames.items():
        rows = np.array([gi[g] for g in fr.gt_ids], dtype=int)
        cols = np.array([pj[p] for p in fr.pred_ids], dtype=int)
        index[f] = (rows, cols)
        gt_count[rows] += 1
        pred_count[cols] += 1
        if fr.sim.size:
            denom = fr.sim.sum(0)[None, :] + fr.sim.sum(1)[:, None] - fr.sim
            soft = np.divide(fr.sim, denom, out=np.zeros_like(fr.sim), where=denom > 0)
            potential[np.ix_(rows, cols)] += soft
    denom = gt_count[:, None] + pred_count[None, :] - potential
    align = np.divide(potential, denom, out=np.zeros_like(potential), where=denom > 0)

    n_gt = int(gt_count.sum())
    n_pred = int(pred_count.sum())
    tp, fn, fp, assoc = [], [], [], []
    for alpha in alphas:
        pair_count = np.zeros_like(potential)
        n_tp = 0
        for f, fr in frames.items():
            if not fr.sim.size:
                continue
            allowed = fr.sim >= alpha - ALPHA_TOL
            if not allowed.any():
                continue
            rows, cols = index[f]
            if (allowed.sum(0) <= 1).all() and (allowed.sum(1) <= 1).all():
                # No two admissible pairs compete: the matching is forced.
                for r, c in zip(*np.nonzero(allowed)):
                    pair_count[rows[r], cols[c]] += 1
                    n_tp += 1
                continue
            r_sel = np.nonzero(allowed.any(1))[0]
            c_sel = np.nonzero(allowed.any(0))[0]
            sub_allowed = allowed[np.ix_(r_sel, c_sel)]
            quality = align[np.ix_(rows[r_sel], cols[c_sel])] + HOTA_IOU_EPS * fr.sim[np.ix_(r_sel, c_sel)]
            # A constant above any achievable quality sum makes the matcher
            # maximize the number of matches first.
            big = min(len(r_sel), len(c_sel)) + 1.0
            weights = np.where(sub_allowed, big + quality, 0.0)
            for r, c in solve_assignment(weights, "maximize"):
                if sub_allowed[r, c]:
                    pair_count[rows[r_sel[r]], cols[c_sel[c]]] += 1
                    n_tp += 1
        denom = gt_count[:, None] + pred_count[None, :] - pair_count
        ratio = np.divide(pair_count, denom, out=np.zeros_like(pair_count), where=denom > 0)
        tp.append(n_tp)
        fn.append(n_gt - n_tp)
        fp.append(n_pred - n_tp)
        assoc.append(float((pair_count * ratio).sum()))
    return HotaResult(alphas, tuple(tp), tuple(fn), tuple(fp), tuple(assoc))


def hota(gt: SequenceTracks, pred: SequenceTracks, alphas: Sequence[float] = HOTA_ALPHAS) -> HotaResult:
    """Higher order tracking accuracy over a grid of IoU thresholds.

    For every alpha, each frame is matched independently over pairs with IoU
    >= alpha. The matching maximizes the number of matches, then the summed
    global alignment score of the matched identities, then (weighted by
    1e-6) their IoU. Detection accuracy is ``TP / (TP + FN + FP)``; association
    accuracy averages ``TPA / (TPA + FNA + FPA)`` over the true positives.

    Raises:
        UndefinedMetricError: both sequences are empty.
    """
    res = hota_counts(gt, pred, alphas)
    res._check()
    return res


# --------------------------------------------------------------------------
# Bootstrap

def bootstrap_summary(
    per_sequence_values: Sequence[float], n_resamples: int = 10, seed: int = 0
) -> tuple[float, float]:
    """Mean and population standard deviation of bootstrap resample means.

    Resampling draws ``len(values)`` items with replacement, using numpy's
    PCG64 generator seeded with ``seed``.
    """
    values = np.asarray(per_sequence_values, dtype=float)
    if values.size == 0:
        raise ValidationError("bootstrap_summary needs at least one value")
    if n_resamples < 1:
        raise ValidationError(f"n_resamples must be >= 1, got {n_resamples}")
    rng = np.random.Generator(np.random.PCG64(seed))
    # statistics.* sum exactly, so identical values give a std of exactly 0.
    means = [
        statistics.mean(values[rng.integers(0, values.size, values.size)].tolist())
        for _ in range(n_resamples)
    ]
    return statistics.mean(means), statistics.pstdev(means)
