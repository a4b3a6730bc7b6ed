"""Pixel-level precision, recall and F1 with text pixels as positives."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float


def _binary_values(mask) -> np.ndarray:
    values = np.asarray(getattr(mask, "values", mask), dtype=np.float64).ravel()
    if not np.all((values == 0.0) | (values == 1.0)):
        raise ValueError("masks must be binary")
    return values.astype(bool)


def confusion(predicted, truth) -> ConfusionCounts:
    p, t = _binary_values(predicted), _binary_values(truth)
    if p.shape != t.shape:
        raise ValueError(f"mask lengths differ: {p.shape[0]} vs {t.shape[0]}")
    return ConfusionCounts(
        tp=int(np.sum(p & t)),
        fp=int(np.sum(p & ~t)),
        fn=int(np.sum(~p & t)),
        tn=int(np.sum(~p & ~t)),
    )


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def metrics(counts: ConfusionCounts) -> Metrics:
    """Precision, recall and F1; every 0/0 evaluates to 0."""
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = _ratio(2 * precision * recall, precision + recall)
    return Metrics(precision, recall, f1)


def aggregate(per_block: Sequence[Metrics]) -> Metrics:
    """Macro average: the unweighted mean of each metric over blocks."""
    if not per_block:
        raise ValueError("cannot aggregate an empty sequence")
    arr = np.array([[m.precision, m.recall, m.f1] for m in per_block])
    return Metrics(*(float(v) for v in arr.mean(axis=0)))


def micro(per_block: Sequence[ConfusionCounts]) -> Metrics:
    """Pool pixel counts over blocks before computing metrics."""
    if not per_block:
        raise ValueError("cannot aggregate an empty sequence")
    total = per_block[0]
    for c in per_block[1:]:
        total = total + c
    return metrics(total)


CSV_HEADER = ["block_id", "tp", "fp", "fn", "tn", "precision", "recall", "f1"]


def write_report(
    rows: Sequence[tuple[str, ConfusionCounts]], csv_path: str | Path, json_path: str | Path
) -> dict:
    """Write the per-block CSV and the summary JSON; return the summary."""
    per_metrics = [metrics(c) for _, c in rows]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for (block_id, c), m in zip(rows, per_metrics):
            writer.writerow([block_id, c.tp, c.fp, c.fn, c.tn, repr(m.precision), repr(m.recall), repr(m.f1)])
    summary = {
        "blocks": len(rows),
        "macro": asdict(aggregate(per_metrics)),
        "micro": asdict(micro([c for _, c in rows])),
    }
    Path(json_path).write_text(json.dumps(summary, indent=2) + "\n")
    return summary
