"""Gradient-boosted oblivious trees for binary classification, from scratch.

Logistic loss, second-order (Newton) leaf values, histogram split search over
quantile-binned numeric features and 2-bin bag-of-words presence features.
Trees are oblivious: every node at a level shares one (feature, threshold bin)
test, so a tree of depth d is d level tests plus 2**d leaf values, and a row's
leaf index is the level bits read root-first (level 0 = most significant bit).

Determinism contract: histograms are accumulated in row order per feature,
features are reduced in ascending id order, and score ties keep the lowest
(feature, bin). Results are therefore identical for any worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .features import BowBlock, FeatureMatrix
from .metrics import f1_at_threshold

_BASE_SCORE_CLAMP = 1e-6
_PROB_CLIP = 1e-15
# cap on nleaves * bow_width histogram cells held at once during split search
_BOW_CELL_BUDGET = 1 << 23


@dataclass(frozen=True)
class GbdtParams:
    iterations: int = 15000
    learning_rate: float = 0.35
    depth: int = 12
    od_wait: int = 2000
    l2_leaf_reg: float = 3.0
    max_bins: int = 255
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.od_wait < 0:
            raise ValueError("od_wait must be non-negative")
        if self.l2_leaf_reg < 0:
            raise ValueError("l2_leaf_reg must be non-negative")
        if not 2 <= self.max_bins <= 255:
            raise ValueError("max_bins must lie in [2, 255]")


@dataclass(frozen=True)
class ObliviousTree:
    """Per-level (feature, threshold bin) tests plus 2**depth leaf deltas."""

    features: tuple[int, ...]
    thresholds: tuple[int, ...]
    leaf_values: np.ndarray = field(compare=False)

    def __post_init__(self):
        if len(self.features) != len(self.thresholds):
            raise ValueError("level arrays disagree")
        if len(self.leaf_values) != 1 << len(self.features):
            raise ValueError("leaf count must be 2**depth")

    @property
    def depth(self) -> int:
        return len(self.features)

    def __eq__(self, other):
        if not isinstance(other, ObliviousTree):
            return NotImplemented
        return (self.features == other.features
                and self.thresholds == other.thresholds
                and np.array_equal(self.leaf_values, other.leaf_values))


@dataclass
class TrainLog:
    train_logloss: list[float]
    dev_f1: list[float] | None
    stopping_reason: str  # "completed" | "early_stopped" | "no_splits"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "train_logloss", "dev_f1"])
            for i, loss in enumerate(self.train_logloss):
                f1 = "" if self.dev_f1 is None else repr(self.dev_f1[i])
                writer.writerow([i, repr(loss), f1])


@dataclass
class GbdtModel:
    base_score: float
    trees: list[ObliviousTree]
    params: GbdtParams
    n_numeric: int
    n_bow: int
    boundaries: list[np.ndarray]  # quantile bin boundaries per numeric feature
    best_iteration: int  # prediction uses trees [0, best_iteration]; -1 = none

    @property
    def width(self) -> int:
        return self.n_numeric + self.n_bow


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_gradient_hessian(raw, labels) -> tuple[np.ndarray, np.ndarray]:
    """Per-row first and second derivatives of the logistic loss w.r.t. raw score."""
    p = sigmoid(raw)
    return p - labels, p * (1.0 - p)


def log_loss(raw, labels) -> float:
    p = np.clip(sigmoid(raw), _PROB_CLIP, 1.0 - _PROB_CLIP)
    y = labels
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def compute_bin_boundaries(values, max_bins: int) -> np.ndarray:
    """Up to max_bins - 1 boundaries for one numeric column.

    With at most max_bins distinct values, boundaries are the midpoints
    between consecutive distinct values; otherwise they are midpoint-method
    percentiles of the distinct values, deduplicated. bin(x) counts boundaries
    strictly below x.
    """
    distinct = np.unique(np.asarray(values, dtype=np.float64))
    if len(distinct) <= 1:
        return np.empty(0, dtype=np.float64)
    if len(distinct) <= max_bins:
        return (distinct[:-1] + distinct[1:]) / 2.0
    q = np.arange(1, max_bins) * (100.0 / max_bins)
    return np.unique(np.percentile(distinct, q, method="midpoint"))


def _bin_numeric(numeric: np.ndarray, boundaries: list[np.ndarray]) -> np.ndarray:
    n, m = numeric.shape
    binned = np.zeros((n, m), dtype=np.int64)
    for j in range(m):
        if len(boundaries[j]):
            binned[:, j] = np.searchsorted(boundaries[j], numeric[:, j], side="left")
    return binned


def _leaf_scores(gl, hl, gr, hr, lam):
    out = np.zeros_like(gl)
    dl = hl + lam
    dr = hr + lam
    np.divide(gl * gl, dl, out=out, where=dl > 0)
    right = np.zeros_like(gr)
    np.divide(gr * gr, dr, out=right, where=dr > 0)
    return out + right


def _numeric_feature_best(binned_col, g, h, leaf, nleaves, g_leaf, h_leaf, lam, valid):
    """Best (score, bin) for one numeric feature at the current level."""
    nb = len(valid) + 1
    comb = leaf * nb + binned_col
    gh = np.bincount(comb, weights=g, minlength=nleaves * nb).reshape(nleaves, nb)
    hh = np.bincount(comb, weights=h, minlength=nleaves * nb).reshape(nleaves, nb)
    gl = np.cumsum(gh, axis=1)[:, :-1]
    hl = np.cumsum(hh, axis=1)[:, :-1]
    scores = _leaf_scores(gl, hl, g_leaf[:, None] - gl, h_leaf[:, None] - hl, lam).sum(axis=0)
    scores[~valid] = -np.inf
    b = int(np.argmax(scores))
    return float(scores[b]), b


def _bow_best(bow, row_of_entry, g_exp, h_exp, leaf, nleaves, g_leaf, h_leaf, lam, valid):
    """Best (score, feature) over all bag-of-words features at the current level."""
    m = bow.n_features
    leaf_exp = leaf[row_of_entry]
    chunk = max(1, _BOW_CELL_BUDGET // max(m, 1))
    scores = np.zeros(m, dtype=np.float64)
    for lo in range(0, nleaves, chunk):
        hi = min(lo + chunk, nleaves)
        if lo == 0 and hi == nleaves:
            sel = slice(None)
            local = leaf_exp
        else:
            sel = (leaf_exp >= lo) & (leaf_exp < hi)
            local = leaf_exp[sel] - lo
        width = hi - lo
        flat = local * m + bow.indices[sel]
        g1 = np.bincount(flat, weights=g_exp[sel], minlength=width * m).reshape(width, m)
        h1 = np.bincount(flat, weights=h_exp[sel], minlength=width * m).reshape(width, m)
        gl = g_leaf[lo:hi, None] - g1
        hl = h_leaf[lo:hi, None] - h1
        scores += _leaf_scores(gl, hl, g1, h1, lam).sum(axis=0)
    scores[~valid] = -np.inf
    f = int(np.argmax(scores))
    return float(scores[f]), f


def _choose_level_split(binned, bow, row_of_entry, g, h, g_exp, h_exp, leaf, nleaves,
                        lam, numeric_valid, bow_valid, executor):
    """Deterministic argmax over all candidate (feature, threshold bin) pairs.

    Ties keep the lowest feature id, then the lowest bin: numeric features are
    reduced in ascending order before the bag-of-words block, and comparisons
    are strict.
    """
    g_leaf = np.bincount(leaf, weights=g, minlength=nleaves)
    h_leaf = np.bincount(leaf, weights=h, minlength=nleaves)

    best_score, best_feature, best_bin = -np.inf, -1, -1
    candidates = [j for j in range(binned.shape[1]) if numeric_valid[j] is not None]

    def evaluate(j):
        return _numeric_feature_best(binned[:, j], g, h, leaf, nleaves,
                                     g_leaf, h_leaf, lam, numeric_valid[j])

    results = executor.map(evaluate, candidates) if executor is not None \
        else map(evaluate, candidates)
    for j, (score, b) in zip(candidates, results):
        if score > best_score:
            best_score, best_feature, best_bin = score, j, b

    if bow_valid is not None and bow_valid.any():
        score, f = _bow_best(bow, row_of_entry, g_exp, h_exp, leaf, nleaves,
                             g_leaf, h_leaf, lam, bow_valid)
        if score > best_score:
            best_score, best_feature, best_bin = score, binned.shape[1] + f, 0

    return best_feature, best_bin


def _route_bit(binned, bow, feature, threshold_bin, n_numeric):
    if feature < n_numeric:
        return binned[:, feature] > threshold_bin
    return bow.presence(feature - n_numeric)


def _validate_binary(labels, what) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{what} must be binary (0/1)")
    return arr.astype(np.float64)


def train(features: FeatureMatrix, labels, params: GbdtParams,
          dev: tuple[FeatureMatrix, object] | None = None,
          threads: int = 1) -> tuple[GbdtModel, TrainLog]:
    """Fit a boosted oblivious-tree model.

    Each iteration fits one depth-``params.depth`` tree to the logistic
    gradients, with leaf value ``-learning_rate * G / (H + l2_leaf_reg)``.
    When ``dev`` is given, dev F1 at threshold 0.5 is evaluated every
    iteration and training stops after ``od_wait`` consecutive iterations
    without strict improvement; ``best_iteration`` marks the earliest best.
    """
    y = _validate_binary(labels, "labels")
    n = features.n_rows
    if n == 0:
        raise ValueError("training data must contain at least one row")
    if y.size != n:
        raise ValueError(f"features have {n} rows but labels has {y.size}")
    if np.isnan(features.numeric).any():
        raise ValueError("NaN in numeric features")

    boundaries = [compute_bin_boundaries(features.numeric[:, j], params.max_bins)
                  for j in range(features.n_numeric)]
    binned = _bin_numeric(features.numeric, boundaries)
    bow = features.bow

    dev_state = None
    if dev is not None:
        dev_features, dev_labels = dev
        if dev_features.n_numeric != features.n_numeric \
                or dev_features.bow.n_features != bow.n_features:
            raise ValueError("dev feature space does not match training feature space")
        if np.isnan(dev_features.numeric).any():
            raise ValueError("NaN in dev numeric features")
        y_dev = _validate_binary(dev_labels, "dev labels")
        if y_dev.size != dev_features.n_rows:
            raise ValueError("dev features and labels disagree on row count")
        dev_state = (_bin_numeric(dev_features.numeric, boundaries), dev_features.bow, y_dev)

    p_bar = min(max(float(y.mean()), _BASE_SCORE_CLAMP), 1.0 - _BASE_SCORE_CLAMP)
    base_score = math.log(p_bar / (1.0 - p_bar))

    # root-level structural validity: a candidate must separate the full
    # training data; features that never can are dropped outright
    numeric_valid: list[np.ndarray | None] = []
    for j in range(features.n_numeric):
        nb = len(boundaries[j]) + 1
        if nb < 2:
            numeric_valid.append(None)
            continue
        cum = np.cumsum(np.bincount(binned[:, j], minlength=nb))[:-1]
        valid = (cum > 0) & (cum < n)
        numeric_valid.append(valid if valid.any() else None)
    bow_valid = None
    if bow.n_features:
        col_counts = np.bincount(bow.indices, minlength=bow.n_features)
        bow_valid = (col_counts > 0) & (col_counts < n)

    any_candidate = any(v is not None for v in numeric_valid) \
        or (bow_valid is not None and bow_valid.any())

    model = GbdtModel(
        base_score=base_score,
        trees=[],
        params=params,
        n_numeric=features.n_numeric,
        n_bow=bow.n_features,
        boundaries=boundaries,
        best_iteration=-1,
    )
    if not any_candidate:
        return model, TrainLog([], [] if dev_state is not None else None, "no_splits")

    row_of_entry = np.repeat(np.arange(n, dtype=np.int64), bow.row_counts())
    lam = params.l2_leaf_reg
    raw = np.full(n, base_score, dtype=np.float64)
    dev_raw = np.full(dev_state[2].size, base_score) if dev_state is not None else None

    train_losses: list[float] = []
    dev_scores: list[float] | None = [] if dev_state is not None else None
    best_f1 = -np.inf
    best_iteration = -1
    since_best = 0
    reason = "completed"

    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for iteration in range(params.iterations):
            g, h = logistic_gradient_hessian(raw, y)
            g_exp = g[row_of_entry]
            h_exp = h[row_of_entry]

            leaf = np.zeros(n, dtype=np.int64)
            level_features: list[int] = []
            level_thresholds: list[int] = []
            for level in range(params.depth):
                feature, threshold_bin = _choose_level_split(
                    binned, bow, row_of_entry, g, h, g_exp, h_exp, leaf,
                    1 << level, lam, numeric_valid, bow_valid, executor)
                level_features.append(feature)
                level_thresholds.append(threshold_bin)
                bit = _route_bit(binned, bow, feature, threshold_bin, features.n_numeric)
                leaf = leaf * 2 + bit

            n_leaves = 1 << params.depth
            g_sum = np.bincount(leaf, weights=g, minlength=n_leaves)
            h_sum = np.bincount(leaf, weights=h, minlength=n_leaves)
            values = np.zeros(n_leaves, dtype=np.float64)
            denom = h_sum + lam
            np.divide(g_sum, denom, out=values, where=denom > 0)
            values *= -params.learning_rate

            raw += values[leaf]
            model.trees.append(ObliviousTree(
                features=tuple(level_features),
                thresholds=tuple(level_thresholds),
                leaf_values=values,
            ))
            train_losses.append(log_loss(raw, y))

            if dev_state is not None:
                dev_binned, dev_bow, y_dev = dev_state
                dev_leaf = np.zeros(y_dev.size, dtype=np.int64)
                for feature, threshold_bin in zip(level_features, level_thresholds):
                    bit = _route_bit(dev_binned, dev_bow, feature, threshold_bin,
                                     features.n_numeric)
                    dev_leaf = dev_leaf * 2 + bit
                dev_raw += values[dev_leaf]
                f1, _ = f1_at_threshold(y_dev.astype(np.int64), sigmoid(dev_raw), 0.5)
                dev_scores.append(f1)
                if f1 > best_f1:
                    best_f1 = f1
                    best_iteration = iteration
                    since_best = 0
                else:
                    since_best += 1
                    if since_best >= params.od_wait:
                        reason = "early_stopped"
                        break
    finally:
        if executor is not None:
            executor.shutdown()

    model.best_iteration = best_iteration if dev_state is not None else len(model.trees) - 1
    return model, TrainLog(train_losses, dev_scores, reason)


def _bin_value(value: float, bounds: np.ndarray) -> int:
    return int(np.searchsorted(bounds, value, side="left"))


def predict_raw(model: GbdtModel, row) -> float:
    """Raw score for one full-width feature vector."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (model.width,):
        raise ValueError(f"expected feature vector of width {model.width}, got {row.shape}")
    score = model.base_score
    for tree in model.trees[:model.best_iteration + 1]:
        index = 0
        for feature, threshold_bin in zip(tree.features, tree.thresholds):
            if feature < model.n_numeric:
                bin_id = _bin_value(row[feature], model.boundaries[feature])
            else:
                bin_id = 1 if row[feature] != 0 else 0
            index = index * 2 + (1 if bin_id > threshold_bin else 0)
        score += tree.leaf_values[index]
    return float(score)


def predict_proba(model: GbdtModel, row) -> float:
    """Probability of the positive class for one feature vector."""
    return float(sigmoid(np.float64(predict_raw(model, row))))


def predict_raw_batch(model: GbdtModel, features: FeatureMatrix) -> np.ndarray:
    if features.n_numeric != model.n_numeric or features.bow.n_features != model.n_bow:
        raise ValueError("feature space does not match the model")
    binned = _bin_numeric(features.numeric, model.boundaries)
    raw = np.full(features.n_rows, model.base_score, dtype=np.float64)
    for tree in model.trees[:model.best_iteration + 1]:
        index = np.zeros(features.n_rows, dtype=np.int64)
        for feature, threshold_bin in zip(tree.features, tree.thresholds):
            bit = _route_bit(binned, features.bow, feature, threshold_bin, model.n_numeric)
            index = index * 2 + bit
        raw += tree.leaf_values[index]
    return raw


def predict_proba_batch(model: GbdtModel, features: FeatureMatrix) -> np.ndarray:
    return sigmoid(predict_raw_batch(model, features))
