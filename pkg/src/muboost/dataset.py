"""Competition-format comment dataset: ingestion, train/dev splitting, summary stats.

The input CSV is RFC-4180 (UTF-8, header required, minimal quoting). Expected
header columns, order-insensitive::

    language, post_index, commentText, report_count_comment,
    report_count_post, like_count_comment, like_count_post[, label]

Error messages reference data rows 1-based, counting from the first row after
the header.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .rng import shuffled_indices

LANGUAGE_COLUMN = "language"
POST_COLUMN = "post_index"
TEXT_COLUMN = "commentText"
COUNT_COLUMNS = (
    "report_count_comment",
    "report_count_post",
    "like_count_comment",
    "like_count_post",
)
LABEL_COLUMN = "label"
REQUIRED_COLUMNS = (LANGUAGE_COLUMN, POST_COLUMN, TEXT_COLUMN) + COUNT_COLUMNS


@dataclass(frozen=True, slots=True)
class CommentRecord:
    """One labeled (or unlabeled) comment row."""

    language: str
    post_index: str
    comment_text: str
    report_count_comment: int
    report_count_post: int
    like_count_comment: int
    like_count_post: int
    label: int | None = None


@dataclass
class Dataset:
    """Ordered collection of comment rows; row index = ingestion order.

    Storage is columnar; ``dataset[i]`` materialises a CommentRecord view of
    row ``i``. Instances are treated as immutable after construction and are
    safe for concurrent reads.
    """

    language: list[str]
    post_index: list[str]
    comment_text: list[str]
    counts: np.ndarray  # (n, 4) int64, columns in COUNT_COLUMNS order
    labels: np.ndarray | None  # (n,) int8, or None for prediction-only data

    def __post_init__(self):
        n = len(self.language)
        if not (len(self.post_index) == len(self.comment_text) == n):
            raise ValueError("column lengths differ")
        self.counts = np.asarray(self.counts, dtype=np.int64).reshape(n, 4)
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int8).reshape(n)

    @property
    def row_count(self) -> int:
        return len(self.language)

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def __len__(self) -> int:
        return self.row_count

    def __getitem__(self, i: int) -> CommentRecord:
        return CommentRecord(
            language=self.language[i],
            post_index=self.post_index[i],
            comment_text=self.comment_text[i],
            report_count_comment=int(self.counts[i, 0]),
            report_count_post=int(self.counts[i, 1]),
            like_count_comment=int(self.counts[i, 2]),
            like_count_post=int(self.counts[i, 3]),
            label=int(self.labels[i]) if self.labels is not None else None,
        )

    def records(self):
        for i in range(self.row_count):
            yield self[i]

    def subset(self, indices) -> "Dataset":
        """New Dataset holding the given rows, re-indexed in the given order."""
        idx = list(indices)
        return Dataset(
            language=[self.language[i] for i in idx],
            post_index=[self.post_index[i] for i in idx],
            comment_text=[self.comment_text[i] for i in idx],
            counts=self.counts[idx] if idx else np.zeros((0, 4), dtype=np.int64),
            labels=self.labels[idx] if self.labels is not None else None,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        if self.has_labels != other.has_labels:
            return False
        if self.labels is not None and not np.array_equal(self.labels, other.labels):
            return False
        return (
            self.language == other.language
            and self.post_index == other.post_index
            and self.comment_text == other.comment_text
            and np.array_equal(self.counts, other.counts)
        )


@dataclass(frozen=True)
class EdaReport:
    """Descriptive statistics of a Dataset (std is population, divide by N)."""

    row_count: int
    language_shares: dict[str, float]  # keyed by language, sorted ascending
    class_fractions: dict[int, float] | None  # {0: ..., 1: ...} when labeled
    mean_word_count: float  # words = maximal runs of non-ASCII-space chars
    numeric_summaries: dict[str, tuple[float, float, int]]  # col -> (mean, std, max)
    unique_post_count: int

    def lines(self) -> list[tuple[str, object]]:
        out: list[tuple[str, object]] = [
            ("row_count", self.row_count),
            ("unique_post_index_count", self.unique_post_count),
            ("mean_comment_word_count", self.mean_word_count),
        ]
        for lang, share in self.language_shares.items():
            out.append((f"language_share[{lang}]", share))
        if self.class_fractions is not None:
            for cls in sorted(self.class_fractions):
                out.append((f"class_fraction[{cls}]", self.class_fractions[cls]))
        for col, (mean, std, mx) in self.numeric_summaries.items():
            out.append((f"{col}_mean", mean))
            out.append((f"{col}_std", std))
            out.append((f"{col}_max", mx))
        return out

    def to_text(self) -> str:
        return "".join(f"{key} = {value!r}\n" if isinstance(value, float)
                       else f"{key} = {value}\n"
                       for key, value in self.lines())

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["metric", "value"])
            for key, value in self.lines():
                writer.writerow([key, repr(value) if isinstance(value, float) else value])


def _parse_count(value: str, column: str, row: int) -> int:
    try:
        count = int(value)
    except ValueError:
        raise DataError(
            f"data row {row}: column {column!r} must be a non-negative integer, got {value!r}"
        ) from None
    if count < 0:
        raise DataError(f"data row {row}: column {column!r} is negative ({count})")
    return count


def load_dataset(path, expect_labels: bool) -> Dataset:
    """Load a competition-format CSV.

    The label column is required when ``expect_labels`` is true and loaded
    whenever present. Raises DataError for schema or value problems, naming
    the offending column and data row.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, strict=True)
        try:
            try:
                header = next(reader)
            except StopIteration:
                raise DataError("empty file: missing header row") from None
            positions = {name: i for i, name in enumerate(header)}
            if len(positions) != len(header):
                raise DataError("duplicate column names in header")
            missing = [c for c in REQUIRED_COLUMNS if c not in positions]
            if expect_labels and LABEL_COLUMN not in positions:
                missing.append(LABEL_COLUMN)
            if missing:
                raise DataError("missing required column(s): " + ", ".join(missing))
            known = set(REQUIRED_COLUMNS) | {LABEL_COLUMN}
            unknown = [c for c in header if c not in known]
            if unknown:
                raise DataError("unknown column(s): " + ", ".join(unknown))
            has_label_col = LABEL_COLUMN in positions

            language: list[str] = []
            post_index: list[str] = []
            comment_text: list[str] = []
            counts: list[tuple[int, int, int, int]] = []
            labels: list[int] = []
            for row_num, row in enumerate(reader, start=1):
                if len(row) != len(header):
                    raise DataError(
                        f"data row {row_num}: expected {len(header)} fields, got {len(row)}"
                    )
                language.append(row[positions[LANGUAGE_COLUMN]])
                post_index.append(row[positions[POST_COLUMN]])
                comment_text.append(row[positions[TEXT_COLUMN]])
                counts.append(tuple(
                    _parse_count(row[positions[col]], col, row_num) for col in COUNT_COLUMNS
                ))
                if has_label_col:
                    raw = row[positions[LABEL_COLUMN]]
                    if raw not in ("0", "1"):
                        raise DataError(
                            f"data row {row_num}: label must be 0 or 1, got {raw!r}"
                        )
                    labels.append(int(raw))
        except csv.Error as exc:
            raise DataError(f"malformed CSV near data row {reader.line_num}: {exc}") from exc

    n = len(language)
    return Dataset(
        language=language,
        post_index=post_index,
        comment_text=comment_text,
        counts=np.array(counts, dtype=np.int64).reshape(n, 4),
        labels=np.array(labels, dtype=np.int8) if has_label_col else None,
    )


def save_dataset(dataset: Dataset, path) -> None:
    """Write a Dataset back to competition-format CSV (RFC-4180, UTF-8)."""
    header = list(REQUIRED_COLUMNS)
    if dataset.has_labels:
        header.append(LABEL_COLUMN)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(dataset.row_count):
            row = [
                dataset.language[i],
                dataset.post_index[i],
                dataset.comment_text[i],
                int(dataset.counts[i, 0]),
                int(dataset.counts[i, 1]),
                int(dataset.counts[i, 2]),
                int(dataset.counts[i, 3]),
            ]
            if dataset.has_labels:
                row.append(int(dataset.labels[i]))
            writer.writerow(row)


def split_train_dev(dataset: Dataset, dev_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic disjoint (train, dev) partition.

    The shuffled order comes from :func:`muboost.rng.shuffled_indices` on
    ``(row_count, seed)``; dev takes the first ``floor(dev_fraction * n + 0.5)``
    shuffled indices. Both parts keep the original relative row order.
    """
    n = dataset.row_count
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    if not dataset.has_labels:
        raise ValueError("split requires a labeled dataset")
    if not (0.0 < dev_fraction < 1.0):
        raise ValueError(f"dev_fraction must be in (0, 1), got {dev_fraction}")
    dev_size = int(math.floor(dev_fraction * n + 0.5))
    if dev_size < 1:
        raise ValueError(f"dev_fraction {dev_fraction} selects no rows out of {n}")
    if dev_size >= n:
        raise ValueError(f"dev_fraction {dev_fraction} leaves no training rows out of {n}")
    order = shuffled_indices(n, seed)
    dev_idx = sorted(order[:dev_size])
    train_idx = sorted(order[dev_size:])
    return dataset.subset(train_idx), dataset.subset(dev_idx)


def count_words(text: str) -> int:
    """Number of maximal runs of non-space characters (ASCII space only)."""
    return sum(1 for part in text.split(" ") if part)


def compute_stats(dataset: Dataset) -> EdaReport:
    """Descriptive statistics: language shares, class balance, word counts, count-column summaries."""
    n = dataset.row_count
    if n == 0:
        raise ValueError("cannot summarise an empty dataset")
    lang_counts: dict[str, int] = {}
    for lang in dataset.language:
        lang_counts[lang] = lang_counts.get(lang, 0) + 1
    shares = {lang: lang_counts[lang] / n for lang in sorted(lang_counts)}

    fractions = None
    if dataset.has_labels:
        pos = int(np.sum(dataset.labels == 1))
        fractions = {0: (n - pos) / n, 1: pos / n}

    mean_words = sum(count_words(t) for t in dataset.comment_text) / n

    summaries = {}
    for j, col in enumerate(COUNT_COLUMNS):
        values = dataset.counts[:, j].astype(np.float64)
        summaries[col] = (float(values.mean()), float(values.std()), int(values.max()))

    return EdaReport(
        row_count=n,
        language_shares=shares,
        class_fractions=fractions,
        mean_word_count=mean_words,
        numeric_summaries=summaries,
        unique_post_count=len(set(dataset.post_index)),
    )
