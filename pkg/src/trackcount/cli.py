"""Command-line front end: ``trackcount {evaluate,refine,simulate,sweep,report}``.

Exit codes: 0 on success, 1 on validation or parse errors, 2 when a
requested metric is undefined for the input (e.g. empty ground truth).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .counting import count_tracks, counting_errors
from .errors import TrackCountError, UndefinedMetricError, ValidationError
from .model import SequenceTracks
from .motio import SequenceMeta, meta_of, parse_mot_file, read_meta, write_meta, write_mot_file
from .refine import HeuristicConfig, refine_pipeline, refine_with_stats
from .report import compare, evaluate, load_report, render
from .simulate import PRESETS, SimConfig, preset_scenario, simulate

logger = logging.getLogger("trackcount")

META_SUFFIX = ".ini"


def _write(path: Path, text: str) -> None:
    """Write ``text`` and a sidecar ``.log`` carrying the timestamp and argv."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    Path(str(path) + ".log").write_text(
        f"written {stamp} by trackcount {__version__}: {' '.join(sys.argv)}\n", encoding="utf-8"
    )


def _emit(text: str, output: str | None) -> None:
    if output:
        _write(Path(output), text)
    else:
        sys.stdout.write(text)


def _meta_for(seq_path: Path, meta_arg: str | None) -> SequenceMeta:
    if meta_arg:
        m = Path(meta_arg)
        if m.is_dir():
            candidate = m / (seq_path.stem + META_SUFFIX)
            return read_meta(candidate) if candidate.exists() else SequenceMeta(seq_path.stem)
        return read_meta(m)
    candidate = seq_path.with_suffix(META_SUFFIX)
    if candidate.exists():
        return read_meta(candidate)
    return SequenceMeta(seq_path.stem)


def load_sequences(path: str, meta: str | None) -> dict[str, SequenceTracks]:
    """Track files keyed by sequence id. ``path`` is one file or a directory of ``*.txt``."""
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.txt"))
        if not files:
            raise ValidationError(f"{p}: no *.txt track files")
    elif p.exists():
        files = [p]
    else:
        raise ValidationError(f"{p}: no such file or directory")
    out = {}
    for f in files:
        m = _meta_for(f, meta)
        if p.is_dir():
            m = replace(m, sequence_id=f.stem)
        seq = parse_mot_file(f, m)
        if seq.sequence_id in out:
            raise ValidationError(f"duplicate sequence id {seq.sequence_id!r} in {p}")
        out[seq.sequence_id] = seq
    return out


def load_pairs(gt_path: str, pred_path: str, meta: str | None):
    gts = load_sequences(gt_path, meta)
    preds = load_sequences(pred_path, meta)
    if Path(gt_path).is_file() and Path(pred_path).is_file():
        (gid, g), (_, p) = next(iter(gts.items())), next(iter(preds.items()))
        return [(g, replace(p, sequence_id=gid))]
    missing_pred = sorted(set(gts) - set(preds))
    missing_gt = sorted(set(preds) - set(gts))
    if missing_pred or missing_gt:
        parts = []
        if missing_pred:
            parts.append(f"no prediction for: {', '.join(missing_pred)}")
        if missing_gt:
            parts.append(f"no ground truth for: {', '.join(missing_gt)}")
        raise ValidationError("unmatched sequences; " + "; ".join(parts))
    return [(gts[k], preds[k]) for k in sorted(gts)]


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# Subcommands

def cmd_evaluate(args) -> int:
    pairs = load_pairs(args.gt, args.pred, args.meta)
    report = evaluate(
        pairs,
        iou_threshold=args.iou_threshold,
        n_resamples=args.bootstrap_resamples,
        seed=args.seed,
        counting_mode=args.counting_mode.replace("-", "_"),
        label=args.label,
        jobs=args.jobs,
    )
    _emit(render(report, args.format), args.output)
    if report["undefined"]:
        print(f"error: undefined metric(s): {', '.join(report['undefined'])}", file=sys.stderr)
        return 2
    return 0


def heuristic_config_from_args(args, fps: float) -> HeuristicConfig:
    base = HeuristicConfig.load(args.config) if getattr(args, "config", None) else HeuristicConfig()
    changes = {}
    if args.h1_min_duration is not None:
        changes["min_duration"] = args.h1_min_duration
    if args.h1_min_seconds is not None:
        changes["min_duration"] = max(1, round(args.h1_min_seconds * fps))
    if args.h2_max_gap is not None:
        changes["max_gap"] = args.h2_max_gap
    if args.h2_max_gap_seconds is not None:
        changes["max_gap"] = round(args.h2_max_gap_seconds * fps)
    if args.h3_max_dist is not None:
        changes["max_center_dist"] = args.h3_max_dist
    if args.disable_h1:
        changes["enable_h1"] = False
    if args.disable_h2:
        # The spatial rule only exists on top of merging.
        changes["enable_h2"] = False
        changes["enable_h3"] = False
    if args.disable_h3:
        changes["enable_h3"] = False
    return replace(base, **changes)


def cmd_refine(args) -> int:
    seqs = load_sequences(args.pred, args.meta)
    out = Path(args.out)
    if len(seqs) > 1 or out.is_dir():
        out.mkdir(parents=True, exist_ok=True)
    removed = merges = 0
    for sid, seq in seqs.items():
        cfg = heuristic_config_from_args(args, seq.fps)
        refined, stats = refine_with_stats(seq, cfg)
        removed += stats.tracks_removed
        merges += stats.merges_performed
        target = out / f"{sid}.txt" if out.is_dir() else out
        _write(target, write_mot_file(refined))
    print(f"config: {cfg.label()} (min_duration={cfg.min_duration}, max_gap={cfg.max_gap}, "
          f"max_center_dist={cfg.max_center_dist})")
    print(f"tracks-removed: {removed}")
    print(f"merges-performed: {merges}")
    return 0


def cmd_simulate(args) -> int:
    if args.preset and args.config:
        raise ValidationError("give either --preset or --config, not both")
    if args.preset:
        cfg = preset_scenario(args.preset)
    elif args.config:
        cfg = SimConfig.load(args.config)
    else:
        raise ValidationError("one of --preset or --config is required")
    seed = cfg.seed if args.seed is None else args.seed
    cfg = replace(cfg, seed=seed)
    gt, pred, log = simulate(cfg, return_log=True)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "gt.txt").write_text(write_mot_file(gt), encoding="utf-8", newline="\n")
    (out / "pred.txt").write_text(write_mot_file(pred), encoding="utf-8", newline="\n")
    write_meta(meta_of(gt), out / "seqinfo.ini")
    cfg.dump(out / "sim_config.json")
    (out / "corruption.json").write_text(
        json.dumps(
            {
                "schema": "trackcount.corruption/1",
                "n_splits": log.n_splits,
                "clutter_ids": list(log.clutter_ids),
                "dropped_detections": log.dropped_detections,
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    (out / "run.log").write_text(f"simulated {stamp} seed={seed}\n", encoding="utf-8")
    print(f"wrote {len(gt.tracks)} ground-truth and {len(pred.tracks)} predicted tracks to {out}")
    return 0


def sweep(pairs, min_durations, max_gaps, max_dists) -> list[dict]:
    """Counting MAE for every threshold combination, all three heuristics on.

    Rows are ranked by MAE; ties prefer the smaller gap, then the longer
    minimum duration, then the smaller center distance.
    """
    if not (min_durations and max_gaps and max_dists):
        raise ValidationError("sweep grid is empty")
    gt_counts = None
    for g, _ in pairs:
        gt_counts = count_tracks(g) if gt_counts is None else gt_counts.merge(count_tracks(g))
    rows = []
    for md in min_durations:
        for mg in max_gaps:
            for dist in max_dists:
                cfg = HeuristicConfig(min_duration=md, max_gap=mg, max_center_dist=dist)
                pred_counts = None
                for _, p in pairs:
                    c = count_tracks(refine_pipeline(p, cfg))
                    pred_counts = c if pred_counts is None else pred_counts.merge(c)
                errs = counting_errors(gt_counts, pred_counts)
                rows.append(
                    {
                        "min_duration": md,
                        "max_gap": mg,
                        "max_center_dist": dist,
                        "mae": errs.mae,
                        "sad": errs.sad,
                        "rmse": errs.rmse,
                        "mape": errs.mape,
                    }
                )
    rows.sort(key=lambda r: (r["mae"], r["max_gap"], -r["min_duration"], r["max_center_dist"]))
    for rank, r in enumerate(rows, start=1):
        r["rank"] = rank
    return rows


def cmd_sweep(args) -> int:
    pairs = load_pairs(args.gt, args.pred, args.meta)
    rows = sweep(pairs, args.min_durations, args.max_gaps, args.max_dists)
    buf = io.StringIO()
    cols = ["rank", "min_duration", "max_gap", "max_center_dist", "mae", "sad", "rmse", "mape"]
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: ("" if r[k] is None else r[k]) for k in cols})
    _emit(buf.getvalue(), args.output)
    best = rows[0]
    print(
        f"argmin: min_duration={best['min_duration']} max_gap={best['max_gap']} "
        f"max_center_dist={best['max_center_dist']} mae={best['mae']:.4f}",
        file=sys.stderr if not args.output else sys.stdout,
    )
    return 0


def cmd_report(args) -> int:
    reports = [load_report(p) for p in args.reports]
    _emit(compare(reports, compare_reductions=args.compare, fmt=args.format), args.output)
    return 0


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trackcount", description="Evaluate and refine multi-object tracks for container counting."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def io_args(p, pred_only=False):
        if not pred_only:
            p.add_argument("gt", help="ground-truth MOT file or directory of <sequence>.txt")
        p.add_argument("pred", help="predicted MOT file or directory of <sequence>.txt")
        p.add_argument(
            "--meta",
            help="sequence metadata INI file (or directory of <sequence>.ini); "
            "defaults to a sibling <name>.ini, else 1920x1080 at 10 fps",
        )

    p = sub.add_parser("evaluate", help="compute tracking and counting metrics")
    io_args(p)
    p.add_argument("--iou-threshold", type=float, default=0.5)
    p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    p.add_argument("--output", "-o")
    p.add_argument("--label")
    p.add_argument("--bootstrap-resamples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--counting-mode", choices=("per-class", "aggregated"), default="per-class")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("refine", help="apply the post-processing heuristics to a track file")
    io_args(p, pred_only=True)
    p.add_argument("--out", "-o", required=True, help="output file (or directory for many sequences)")
    p.add_argument("--config", help="heuristic config JSON")
    p.add_argument("--h1-min-duration", type=int)
    p.add_argument("--h1-min-seconds", type=float, help="minimum duration in seconds (uses fps)")
    p.add_argument("--h2-max-gap", type=int)
    p.add_argument("--h2-max-gap-seconds", type=float, help="maximum gap in seconds (uses fps)")
    p.add_argument("--h3-max-dist", type=float)
    p.add_argument("--disable-h1", action="store_true")
    p.add_argument("--disable-h2", action="store_true", help="also disables H3")
    p.add_argument("--disable-h3", action="store_true")
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("simulate", help="generate a synthetic street pass")
    p.add_argument("--config", help="SimConfig JSON")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out-dir", "-o", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="grid search of heuristic thresholds by counting MAE")
    io_args(p)
    p.add_argument("--min-durations", type=_int_list, default=[5, 10, 15, 20, 25])
    p.add_argument("--max-gaps", type=_int_list, default=[0, 5, 10, 15, 20, 25, 30])
    p.add_argument("--max-dists", type=_float_list, default=[0.05, 0.10, 0.15, 0.20])
    p.add_argument("--output", "-o", help="ranked CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="compare evaluation reports side by side")
    p.add_argument("reports", nargs="+", help="evaluation JSON reports; the first is the baseline")
    p.add_argument("--compare", action="store_true", help="add relative MAE/SAD reduction columns")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (TrackCountError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
