"""Object counts from track sets and the counting-error metrics.

Counts are kept per ``(sequence_id, class_id)``. Errors are computed over
every pair where the ground truth or the prediction is non-zero; the
percentage error skips pairs with a zero ground-truth count and reports how
many it skipped.
"""

from __future__ import annotations

import csv
import io
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, UndefinedMetricError, ValidationError
from .model import CLASS_IDS, SequenceTracks

#: Class id used for class-aggregated counts.
ALL_CLASSES = 0

Key = tuple[str, int]


@dataclass(frozen=True)
class CountVector:
    counts: Mapping[Key, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for key, n in self.counts.items():
            if n < 0 or int(n) != n:
                raise ValidationError(f"count for {key} must be a non-negative integer, got {n}")
            clean[(str(key[0]), int(key[1]))] = int(n)
        object.__setattr__(self, "counts", dict(sorted(clean.items())))

    def __getitem__(self, key: Key) -> int:
        return self.counts.get(key, 0)

    def keys(self) -> set[Key]:
        return set(self.counts)

    def total(self) -> int:
        return sum(self.counts.values())

    def for_sequence(self, sequence_id: str) -> "CountVector":
        return CountVector({k: v for k, v in self.counts.items() if k[0] == sequence_id})

    def sequences(self) -> list[str]:
        return sorted({k[0] for k in self.counts})

    def merge(self, other: "CountVector") -> "CountVector":
        overlap = self.keys() & other.keys()
        if overlap:
            raise ValidationError(f"count vectors overlap on {sorted(overlap)[:3]}")
        return CountVector({**self.counts, **other.counts})

    def aggregate_classes(self) -> "CountVector":
        """Sum the classes of each sequence into a single ``ALL_CLASSES`` entry."""
        totals: Counter = Counter()
        for (seq, _), n in self.counts.items():
            totals[(seq, ALL_CLASSES)] += n
        return CountVector(dict(totals))

    def to_csv(self, stream=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["sequence_id", "class_id", "count"])
        for (seq, cls), n in self.counts.items():
            writer.writerow([seq, cls, n])
        text = buf.getvalue()
        if isinstance(stream, (str, os.PathLike)):
            Path(stream).write_text(text, encoding="utf-8", newline="\n")
        elif stream is not None:
            stream.write(text)
        return text

    @classmethod
    def from_csv(cls, stream) -> "CountVector":
        if isinstance(stream, (str, os.PathLike)):
            with open(stream, newline="", encoding="utf-8") as fh:
                return cls.from_csv(fh)
        reader = csv.DictReader(stream)
        counts = {}
        for lineno, row in enumerate(reader, start=2):
            try:
                counts[(row["sequence_id"], int(row["class_id"]))] = int(row["count"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad count row: {exc}", lineno) from None
        return cls(counts)


def count_tracks(seq: SequenceTracks) -> CountVector:
    """Distinct track ids per class; every container class gets an entry."""
    counts = {(seq.sequence_id, c): 0 for c in CLASS_IDS}
    for t in seq.tracks:
        counts[(seq.sequence_id, t.class_id)] += 1
    return CountVector(counts)


def count_many(seqs: Iterable[SequenceTracks]) -> CountVector:
    out = CountVector()
    for s in seqs:
        out = out.merge(count_tracks(s))
    return out


@dataclass(frozen=True)
class CountingErrors:
    mae: float
    sad: int
    rmse: float
    mape: float | None  # percent; None when every in-scope pair has gt == 0
    n_pairs: int
    mape_excluded: int

    def to_dict(self) -> dict:
        return {
            "mae": self.mae,
            "sad": self.sad,
            "rmse": self.rmse,
            "mape": self.mape,
            "n_pairs": self.n_pairs,
            "mape_excluded": self.mape_excluded,
        }


def counting_errors(gt: CountVector, pred: CountVector) -> CountingErrors:
    """Counting errors over the union of keys, missing keys read as 0.

    Raises:
        UndefinedMetricError: no pair has a non-zero count on either side.
    """
    pairs = [(gt[k], pred[k]) for k in sorted(gt.keys() | pred.keys())]
    pairs = [(g, p) for g, p in pairs if g > 0 or p > 0]
    if not pairs:
        raise UndefinedMetricError("counting errors are undefined: no non-zero counts in scope")
    abs_err = [abs(p - g) for g, p in pairs]
    sad = sum(abs_err)
    mae = sad / len(pairs)
    rmse = math.sqrt(sum(e * e for e in abs_err) / len(pairs))
    pct = [100.0 * abs(p - g) / g for g, p in pairs if g > 0]
    mape = sum(pct) / len(pct) if pct else None
    return CountingErrors(mae, sad, rmse, mape, len(pairs), len(pairs) - len(pct))


def relative_reduction(before: float, after: float) -> float:
    """Percentage reduction from ``before`` to ``after``."""
    if not before > 0:
        raise ValidationError(f"relative reduction needs before > 0, got {before}")
    return 100.0 * (before - after) / before
