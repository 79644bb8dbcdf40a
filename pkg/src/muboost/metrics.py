"""Binary F1 at a probability threshold, and the threshold sweep.

The decision rule is ``predicted positive iff probability >= threshold``,
consistently here, in training-time early stopping, and in prediction output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class SweepResult:
    thresholds: tuple[float, ...]
    f1_scores: tuple[float, ...]
    best_threshold: float  # smallest grid point attaining best_f1
    best_f1: float


def _validate(labels, probs) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(labels)
    p = np.asarray(probs, dtype=np.float64)
    if y.shape != p.shape or y.ndim != 1:
        raise ValueError(f"labels shape {y.shape} does not match probs shape {p.shape}")
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    return y.astype(np.int64), p


def f1_at_threshold(labels, probs, threshold: float) -> tuple[float, ConfusionCounts]:
    """F1 of the positive class with predictions ``probs >= threshold``.

    F1 is 0 when there are no true positives (no division errors).
    """
    y, p = _validate(labels, probs)
    predicted = p >= threshold
    actual = y == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    tn = int(y.size - tp - fp - fn)
    counts = ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)
    if tp == 0:
        return 0.0, counts
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall), counts


def threshold_grid(t_min: float, t_max: float, step: float) -> list[float]:
    """Grid {t_min + k*step : k >= 0, value <= t_max + 1e-12}."""
    if step <= 0:
        raise ValueError("step must be positive")
    if t_min > t_max:
        raise ValueError("t_min must not exceed t_max")
    grid = []
    k = 0
    while True:
        t = t_min + k * step
        if t > t_max + 1e-12:
            break
        grid.append(t)
        k += 1
    return grid


def sweep_threshold(labels, probs, t_min: float = 0.45, t_max: float = 0.55,
                    step: float = 0.01) -> SweepResult:
    """Evaluate F1 over the threshold grid; ties go to the smallest threshold."""
    grid = threshold_grid(t_min, t_max, step)
    scores = [f1_at_threshold(labels, probs, t)[0] for t in grid]
    best_index = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best_index]:
            best_index = i
    return SweepResult(
        thresholds=tuple(grid),
        f1_scores=tuple(scores),
        best_threshold=grid[best_index],
        best_f1=scores[best_index],
    )


def write_sweep_csv(result: SweepResult, path) -> None:
    """threshold,f1 rows plus a trailing '#'-prefixed summary line."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "f1"])
        for t, f1 in zip(result.thresholds, result.f1_scores):
            writer.writerow([f"{t:.10g}", repr(f1)])
        fh.write(f"# best threshold={result.best_threshold:.10g} f1={result.best_f1!r}\n")
