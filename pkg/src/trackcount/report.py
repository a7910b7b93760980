"""Evaluation reports: metric computation over sequence pairs and rendering.

A report is a plain dict (JSON-serializable) tagged with ``schema``; the same
dict renders to CSV or to markdown tables laid out like the usual tracking
and counting benchmark tables.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import __version__
from .counting import CountVector, count_tracks, counting_errors, relative_reduction
from .errors import UndefinedMetricError, ValidationError
from .metrics import (
    DEFAULT_IOU_THRESHOLD,
    HOTA_ALPHAS,
    ClearMotResult,
    HotaResult,
    IdentityResult,
    bootstrap_summary,
    clear_mot_counts,
    hota_counts,
    idf1_counts,
)
from .model import SequenceTracks
from .refine import HeuristicConfig

REPORT_SCHEMA = "trackcount.eval/1"
COMPARE_SCHEMA = "trackcount.compare/1"

TRACKING_KEYS = ("mota", "idf1", "hota", "deta", "assa")
COUNTING_KEYS = ("mae", "sad", "rmse", "mape")
METRIC_KEYS = TRACKING_KEYS + COUNTING_KEYS
COUNTING_MODES = ("per_class", "aggregated")


def _pct(value: float) -> float:
    return 100.0 * value


def _safe(fn):
    try:
        return fn()
    except UndefinedMetricError:
        return None


def _counts(seq: SequenceTracks, mode: str) -> CountVector:
    cv = count_tracks(seq)
    return cv.aggregate_classes() if mode == "aggregated" else cv


def _evaluate_pair(args) -> dict:
    gt, pred, iou_threshold, mode, diag_cfg = args
    mot = clear_mot_counts(gt, pred, iou_threshold)
    ident = idf1_counts(gt, pred, iou_threshold)
    hot = hota_counts(gt, pred)
    gt_counts = _counts(gt, mode)
    pred_counts = _counts(pred, mode)
    errs = _safe(lambda: counting_errors(gt_counts, pred_counts))
    return {
        "mot": mot,
        "ident": ident,
        "hota": hot,
        "gt_counts": gt_counts,
        "pred_counts": pred_counts,
        "errors": errs,
        "diagnostics": diagnostics(pred, diag_cfg),
    }


def diagnostics(pred: SequenceTracks, cfg: HeuristicConfig) -> dict:
    """How much work each heuristic would find in ``pred``."""
    short = sum(1 for t in pred.tracks if t.duration_frames() < cfg.min_duration)
    mergeable = 0
    tracks = sorted(pred.tracks, key=lambda t: t.start_frame())
    for i, a in enumerate(tracks):
        for b in tracks[i + 1:]:
            gap = b.start_frame() - a.end_frame()
            if a.class_id == b.class_id and 1 <= gap <= cfg.max_gap:
                mergeable += 1
    return {
        "short_tracks": short,
        "h1_applicable": short > 0,
        "mergeable_pairs": mergeable,
        "h2_applicable": mergeable > 0,
    }


def _tracking_values(mot: ClearMotResult, ident: IdentityResult, hot: HotaResult) -> dict:
    return {
        "mota": _safe(lambda: _pct(mot.mota)),
        "idf1": _safe(lambda: _pct(ident.idf1)) if mot.gt_total else None,
        "hota": _safe(lambda: _pct(hot.hota)),
        "deta": _safe(lambda: _pct(hot.deta)),
        "assa": _safe(lambda: _pct(hot.assa)),
    }


def _counting_values(errs) -> dict:
    if errs is None:
        return {k: None for k in COUNTING_KEYS}
    return {"mae": errs.mae, "sad": errs.sad, "rmse": errs.rmse, "mape": errs.mape}


def evaluate(
    pairs: Sequence[tuple[SequenceTracks, SequenceTracks]],
    *,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    n_resamples: int = 10,
    seed: int = 0,
    counting_mode: str = "per_class",
    label: str | None = None,
    heuristics: HeuristicConfig | None = None,
    jobs: int = 1,
) -> dict:
    """Compute every tracking and counting metric over (gt, pred) pairs.

    Tracking metrics are percentages. Pooled values sum the underlying counts
    across sequences; bootstrap summaries resample per-sequence values.
    Metrics with no defined value are reported as ``None`` and listed under
    ``"undefined"``.
    """
    if counting_mode not in COUNTING_MODES:
        raise ValidationError(f"counting mode must be one of {COUNTING_MODES}, got {counting_mode!r}")
    if not pairs:
        raise ValidationError("nothing to evaluate: no sequence pairs")
    pairs = sorted(pairs, key=lambda p: p[0].sequence_id)
    ids = [g.sequence_id for g, _ in pairs]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate sequence ids among evaluated pairs")
    diag_cfg = heuristics or HeuristicConfig()
    work = [(g, p, iou_threshold, counting_mode, diag_cfg) for g, p in pairs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_pair, work))
    else:
        results = [_evaluate_pair(w) for w in work]

    sequences = []
    for (gt, _), res in zip(pairs, results):
        row = {"sequence_id": gt.sequence_id}
        row.update(_tracking_values(res["mot"], res["ident"], res["hota"]))
        row.update(_counting_values(res["errors"]))
        row.update(
            {
                "fp": res["mot"].fp,
                "fn": res["mot"].fn,
                "idsw": res["mot"].idsw,
                "gt_detections": res["mot"].gt_total,
                "gt_tracks": len(gt.tracks),
                "pred_tracks": sum(res["pred_counts"].counts.values()),
            }
        )
        sequences.append(row)

    mot = ClearMotResult.pool(r["mot"] for r in results)
    ident = IdentityResult.pool(r["ident"] for r in results)
    hot = HotaResult.pool(r["hota"] for r in results)
    gt_counts = CountVector()
    pred_counts = CountVector()
    for r in results:
        gt_counts = gt_counts.merge(r["gt_counts"])
        pred_counts = pred_counts.merge(r["pred_counts"])
    errs = _safe(lambda: counting_errors(gt_counts, pred_counts))
    pooled = _tracking_values(mot, ident, hot)
    pooled.update(_counting_values(errs))
    pooled.update(
        {
            "fp": mot.fp,
            "fn": mot.fn,
            "idsw": mot.idsw,
            "gt_detections": mot.gt_total,
            "idtp": ident.idtp,
            "idfp": ident.idfp,
            "idfn": ident.idfn,
            "count_pairs": errs.n_pairs if errs else 0,
            "mape_excluded": errs.mape_excluded if errs else 0,
        }
    )

    boot = {}
    for key in METRIC_KEYS:
        values = [row[key] for row in sequences if row[key] is not None]
        if values:
            mean, std = bootstrap_summary(values, n_resamples, seed)
            boot[key] = {"mean": mean, "std": std}
        else:
            boot[key] = None

    diag = {
        k: sum(r["diagnostics"][k] for r in results)
        for k in ("short_tracks", "mergeable_pairs")
    }
    diag["h1_applicable"] = diag["short_tracks"] > 0
    diag["h2_applicable"] = diag["mergeable_pairs"] > 0

    return {
        "schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "label": label or (heuristics.label() if heuristics else "Baseline"),
        "config": {
            "iou_threshold": iou_threshold,
            "hota_alphas": list(HOTA_ALPHAS),
            "counting_mode": counting_mode,
            "bootstrap": {"n_resamples": n_resamples, "seed": seed},
            "heuristics": heuristics.to_dict() if heuristics else None,
            "diagnostic_thresholds": {
                "min_duration": diag_cfg.min_duration,
                "max_gap": diag_cfg.max_gap,
            },
        },
        "sequences": sequences,
        "pooled": pooled,
        "bootstrap": boot,
        "diagnostics": diag,
        "undefined": [k for k in METRIC_KEYS if pooled[k] is None],
    }


# --------------------------------------------------------------------------
# Rendering

def _num(value, places: int = 2, pct: bool = False) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, int) and not pct:
        return str(value)
    return f"{value:.{places}f}" + ("%" if pct else "")


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ["sequence_id", *METRIC_KEYS, "fp", "fn", "idsw"]
    writer.writerow(["label", "iou_threshold", *cols])
    rows = report["sequences"] + [{**report["pooled"], "sequence_id": "POOLED"}]
    for row in rows:
        writer.writerow(
            [report["label"], report["config"]["iou_threshold"]]
            + ["" if row.get(c) is None else row[c] for c in cols]
        )
    return buf.getvalue()


def to_markdown(report: dict) -> str:
    cfg = report["config"]
    p = report["pooled"]
    b = report["bootstrap"]
    label = report["label"]

    def pm(key, places=2, pct=False):
        if b.get(key) is None:
            return "n/a"
        return f"{b[key]['mean']:.{places}f}±{b[key]['std']:.{places}f}" + ("%" if pct else "")

    lines = [
        f"### Tracking ({label}, IoU threshold {cfg['iou_threshold']})",
        "",
        "| Experiment | MOTA↑ | IDF1↑ | HOTA↑ | DetA↑ | AssA↑ |",
        "|---|---|---|---|---|---|",
        f"| {label} | " + " | ".join(_num(p[k], pct=True) for k in TRACKING_KEYS) + " |",
        f"| {label} (bootstrap) | " + " | ".join(pm(k, pct=True) for k in TRACKING_KEYS) + " |",
        "",
        f"### Counting ({label}, {cfg['counting_mode']})",
        "",
        "| Experiment | MAE↓ | SAD↓ | RMSE↓ | MAPE↓ |",
        "|---|---|---|---|---|",
        f"| {label} | {_num(p['mae'])} | {_num(p['sad'])} | {_num(p['rmse'])} | {_num(p['mape'], pct=True)} |",
        f"| {label} (bootstrap) | {pm('mae')} | {pm('sad')} | {pm('rmse')} | {pm('mape', pct=True)} |",
        "",
    ]
    d = report.get("diagnostics") or {}
    if d:
        lines.append(
            f"Diagnostics: {d['short_tracks']} short track(s) (H1 applicable: "
            f"{'yes' if d['h1_applicable'] else 'no'}), {d['mergeable_pairs']} mergeable "
            f"pair(s) (H2 applicable: {'yes' if d['h2_applicable'] else 'no'})."
        )
        lines.append("")
    return "\n".join(lines)


def render(report: dict, fmt: str) -> str:
    try:
        return {"json": to_json, "csv": to_csv, "markdown": to_markdown}[fmt](report)
    except KeyError:
        raise ValidationError(f"unknown output format {fmt!r}") from None


def load_report(path: str | os.PathLike) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict) or data.get("schema") != REPORT_SCHEMA:
        raise ValidationError(f"{path}: not a {REPORT_SCHEMA} report")
    if "pooled" not in data:
        raise ValidationError(f"{path}: report has no pooled metrics")
    data.setdefault("label", Path(path).stem)
    return data


def _reduction(before, after) -> str:
    if before is None or after is None or not before > 0:
        return "n/a"
    return f"{relative_reduction(before, after):.1f}%"


def compare(reports: Sequence[dict], compare_reductions: bool = True, fmt: str = "markdown") -> str:
    """Side-by-side table of several reports.

    With ``compare_reductions`` and at least two reports, relative MAE and SAD
    reductions against the first report are added as columns.
    """
    if not reports:
        raise ValidationError("compare needs at least one report")
    with_red = compare_reductions and len(reports) > 1
    base = reports[0]["pooled"]
    header = ["Experiment", "MOTA", "IDF1", "HOTA", "DetA", "AssA", "MAE", "SAD", "RMSE", "MAPE"]
    if with_red:
        header += ["MAE reduction", "SAD reduction"]
    rows = []
    for rep in reports:
        p = rep["pooled"]
        row = [rep["label"]]
        row += [_num(p.get(k), pct=True) for k in TRACKING_KEYS]
        row += [_num(p.get("mae")), _num(p.get("sad")), _num(p.get("rmse")), _num(p.get("mape"), pct=True)]
        if with_red:
            row += [_reduction(base.get("mae"), p.get("mae")), _reduction(base.get("sad"), p.get("sad"))]
        rows.append(row)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt != "markdown":
        raise ValidationError(f"unknown output format {fmt!r}")
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines) + "\n"
