"""Seed-varied model ensembles and probability fusion.

K members share one dictionary and one set of hyperparameters; each member's
seed drives its encoding permutations and is recorded in its params. Final
predictions average the member probabilities; fusion extends the same mean to
externally supplied probability vectors (one weight per individual vector, so
the default is a uniform mean over all K + 1 sources).
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import gbdt
from .dataset import Dataset
from .errors import DataError
from .pipeline import FeatureConfig, FittedFeatures, PipelineModel, fit_features, transform_features
from .text_features import build_dictionary, tokenize


@dataclass(frozen=True)
class EnsembleSpec:
    member_seeds: tuple[int, ...]
    params: gbdt.GbdtParams
    features: FeatureConfig = field(default_factory=FeatureConfig)

    def __post_init__(self):
        object.__setattr__(self, "member_seeds", tuple(self.member_seeds))
        if len(self.member_seeds) < 1:
            raise ValueError("ensemble needs at least one member seed")
        if len(set(self.member_seeds)) != len(self.member_seeds):
            raise ValueError(f"member seeds must be distinct, got {self.member_seeds}")


@dataclass
class BoostedEnsembleModel:
    members: list[PipelineModel]

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble has no members")
        spaces = {m.fitted.space for m in self.members}
        if len(spaces) != 1:
            raise ValueError("ensemble members disagree on feature space")

    @property
    def space(self):
        return self.members[0].fitted.space


@dataclass
class ExternalScores:
    """Per-row probabilities produced outside this package, aligned by row index."""

    probabilities: np.ndarray
    source: str


def train_ensemble(train: Dataset, dev: Dataset | None, spec: EnsembleSpec,
                   threads: int = 1, parallel_members: bool = False
                   ) -> tuple[BoostedEnsembleModel, list[gbdt.TrainLog]]:
    """Train one member per seed; identical configuration otherwise.

    Members are data-independent given their seeds, so sequential and parallel
    member training produce identical models.
    """
    if not train.has_labels:
        raise ValueError("training dataset must be labeled")
    if dev is not None and not dev.has_labels:
        raise ValueError("dev dataset must be labeled")
    corpus = [tokenize(text, spec.features.tokenizer) for text in train.comment_text]
    dictionary = build_dictionary(corpus, spec.features.dictionary, spec.features.tokenizer)

    def train_member(seed: int) -> tuple[PipelineModel, gbdt.TrainLog]:
        fitted, matrix = fit_features(train, spec.features, seed, dictionary=dictionary)
        dev_pair = None
        if dev is not None:
            dev_pair = (transform_features(dev, fitted), dev.labels)
        model, log = gbdt.train(matrix, train.labels, replace(spec.params, seed=seed),
                                dev=dev_pair, threads=threads)
        return PipelineModel(fitted=fitted, model=model), log

    if parallel_members and len(spec.member_seeds) > 1:
        with ThreadPoolExecutor(max_workers=len(spec.member_seeds)) as pool:
            results = list(pool.map(train_member, spec.member_seeds))
    else:
        results = [train_member(seed) for seed in spec.member_seeds]
    return BoostedEnsembleModel([m for m, _ in results]), [log for _, log in results]


def predict_ensemble(model: BoostedEnsembleModel, data: Dataset) -> np.ndarray:
    """Arithmetic mean of member probabilities, per row."""
    return fuse_scores([member.predict_proba(data) for member in model.members])


def fuse_scores(sources, weights=None) -> np.ndarray:
    """Per-row weighted mean of probability vectors (uniform by default)."""
    arrays = [np.asarray(s, dtype=np.float64) for s in sources]
    if not arrays:
        raise ValueError("no probability sources given")
    n = arrays[0].shape
    for i, arr in enumerate(arrays):
        if arr.ndim != 1 or arr.shape != n:
            raise ValueError(f"source {i} has shape {arr.shape}, expected {n}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError(f"source {i} has probabilities outside [0, 1]")
    if weights is None:
        weights = [1.0] * len(arrays)
    weights = [float(w) for w in weights]
    if len(weights) != len(arrays):
        raise ValueError(f"{len(weights)} weights for {len(arrays)} sources")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    total = sum(weights)
    if total <= 0:
        raise ValueError("weights must not all be zero")
    fused = np.zeros_like(arrays[0])
    for w, arr in zip(weights, arrays):
        fused += (w / total) * arr
    return fused


def load_external_scores(path, target: Dataset, source: str | None = None) -> ExternalScores:
    """Read a `row_index,probability` (or `id,probability`) CSV covering the
    target dataset exactly once per row."""
    n = target.row_count
    probabilities = np.full(n, np.nan, dtype=np.float64)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) != 2 or header[0] not in ("row_index", "id") \
                or header[1] != "probability":
            raise DataError(
                "external scores header must be 'row_index,probability' or 'id,probability'")
        for line_num, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DataError(f"line {line_num}: expected 2 fields, got {len(row)}")
            try:
                index = int(row[0])
                prob = float(row[1])
            except ValueError:
                raise DataError(f"line {line_num}: unparseable row {row!r}") from None
            if not 0 <= index < n:
                raise DataError(f"line {line_num}: row index {index} outside 0..{n - 1}")
            if not 0.0 <= prob <= 1.0:
                raise DataError(f"line {line_num}: probability {prob} outside [0, 1]")
            if not np.isnan(probabilities[index]):
                raise DataError(f"line {line_num}: duplicate entry for row {index}")
            probabilities[index] = prob
    missing = np.nonzero(np.isnan(probabilities))[0]
    if missing.size:
        raise DataError(f"external scores missing row {int(missing[0])} "
                        f"({missing.size} rows uncovered)")
    if source is None:
        source = str(path)
    return ExternalScores(probabilities=probabilities, source=source)


def write_scores_csv(path, probabilities, threshold: float | None = None) -> None:
    """`row_index,probability[,label_at_threshold]` with 0-based row indices."""
    probabilities = np.asarray(probabilities, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if threshold is None:
            writer.writerow(["row_index", "probability"])
            for i, p in enumerate(probabilities):
                writer.writerow([i, repr(float(p))])
        else:
            writer.writerow(["row_index", "probability", "label_at_threshold"])
            for i, p in enumerate(probabilities):
                writer.writerow([i, repr(float(p)), int(p >= threshold)])
