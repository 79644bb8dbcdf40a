"""Ordered target encoding of high-cardinality categorical columns.

Training-time encoding walks the rows in a seed-derived permutation and
replaces each categorical value with a smoothed target statistic computed only
from rows of that category seen *earlier* in the permutation::

    encoded = (prior_label_sum + a * prior) / (prior_count + a)

so no row's encoding depends on its own label or on later rows (leakage-free).
Inference-time encoding uses the unrestricted full-pass statistics: ordering
exists only to protect training; at inference every training label is fair
game.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import shuffled_indices

GLOBAL_MEAN = "global-mean"


@dataclass(frozen=True)
class OrderedEncodingConfig:
    a: float = 1.0
    prior: float | str = GLOBAL_MEAN  # explicit value in [0, 1] or the sentinel
    permutation_seed: int = 0

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("a must be positive")
        if isinstance(self.prior, str):
            if self.prior != GLOBAL_MEAN:
                raise ValueError(f"prior must be a number or {GLOBAL_MEAN!r}")
        elif not 0.0 <= float(self.prior) <= 1.0:
            raise ValueError("explicit prior must lie in [0, 1]")


@dataclass(frozen=True)
class OrderedEncodingModel:
    """Full-pass per-category label statistics plus the smoothing parameters."""

    a: float
    prior: float  # resolved value (global mean already substituted)
    permutation_seed: int
    stats: dict[str, tuple[int, int]] = field(default_factory=dict)  # value -> (total, positive)

    def encode(self, category: str) -> float:
        total, positive = self.stats.get(category, (0, 0))
        return (positive + self.a * self.prior) / (total + self.a)


def _validate_labels(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("labels must be binary (0/1)")
    return arr.astype(np.int64)


def fit_transform_ordered(column, labels, cfg: OrderedEncodingConfig
                          ) -> tuple[np.ndarray, OrderedEncodingModel]:
    """Encode a training column leakage-free and fit the inference model.

    The permutation comes from :func:`muboost.rng.shuffled_indices` on
    ``(len(column), cfg.permutation_seed)``; position p of that list is the
    p'th row processed. Each row is encoded from the running statistics of its
    category, then its own label is added to them. The returned model carries
    the final (full-pass) statistics.
    """
    values = list(column)
    y = _validate_labels(labels)
    if len(values) != y.size:
        raise ValueError(f"column has {len(values)} rows but labels has {y.size}")
    prior = float(y.mean()) if cfg.prior == GLOBAL_MEAN else float(cfg.prior)
    a = cfg.a

    order = shuffled_indices(len(values), cfg.permutation_seed)
    running: dict[str, list[int]] = {}
    encoded = np.empty(len(values), dtype=np.float64)
    for row in order:
        category = values[row]
        stats = running.get(category)
        if stats is None:
            stats = running[category] = [0, 0]
        encoded[row] = (stats[1] + a * prior) / (stats[0] + a)
        stats[0] += 1
        stats[1] += int(y[row])

    model = OrderedEncodingModel(
        a=a,
        prior=prior,
        permutation_seed=cfg.permutation_seed,
        stats={cat: (s[0], s[1]) for cat, s in running.items()},
    )
    return encoded, model


def encode_for_inference(category: str, model: OrderedEncodingModel) -> float:
    """Smoothed full-pass statistic for one category; unseen categories get the prior."""
    return model.encode(category)
