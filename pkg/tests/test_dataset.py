import numpy as np
import pytest

from muboost.dataset import (
    Dataset,
    compute_stats,
    count_words,
    load_dataset,
    save_dataset,
    split_train_dev,
)
from muboost.errors import DataError

HEADER = ("language,post_index,commentText,report_count_comment,"
          "report_count_post,like_count_comment,like_count_post,label")


def write_csv(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def reference_shuffle(n, seed):
    """Independent transcription of the documented split recipe (LCG + Fisher-Yates)."""
    mask = (1 << 64) - 1
    state = seed & mask
    indices = list(range(n))
    for i in range(n - 1, 0, -1):
        state = (state * 6364136223846793005 + 1442695040888963407) & mask
        j = state % (i + 1)
        indices[i], indices[j] = indices[j], indices[i]
    return indices


def make_dataset(n, seed=0, labeled=True):
    rng = np.random.RandomState(seed)
    langs = ["Hindi", "Telugu", "Marathi", "Odia"]
    return Dataset(
        language=[langs[i] for i in rng.randint(0, len(langs), n)],
        post_index=[str(p) for p in rng.randint(0, max(2, n // 3), n)],
        comment_text=[" ".join(["tok%d" % t for t in rng.randint(0, 50, rng.randint(0, 8))])
                      for _ in range(n)],
        counts=rng.randint(0, 20, (n, 4)),
        labels=rng.randint(0, 2, n) if labeled else None,
    )


def test_load_well_formed(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [
        HEADER,
        "Hindi,p1,some comment,0,1,2,3,1",
        "Telugu,p2,another one,1,0,0,5,0",
        "Hindi,p1,,0,0,0,0,1",
    ])
    d = load_dataset(path, expect_labels=True)
    assert d.row_count == 3
    assert d.has_labels
    assert d[0] .language == "Hindi"
    assert d[1].like_count_post == 5
    assert d[2].comment_text == ""
    assert list(d.labels) == [1, 0, 1]


def test_load_header_order_insensitive(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [
        "label,commentText,language,post_index,report_count_comment,"
        "report_count_post,like_count_comment,like_count_post",
        "1,hello there,Hindi,p9,0,0,0,0",
    ])
    d = load_dataset(path, expect_labels=True)
    assert d[0].comment_text == "hello there"
    assert d[0].label == 1


def test_load_missing_column(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [HEADER.replace("commentText", "comment_text"), "x,y,z,0,0,0,0,1"])
    with pytest.raises(DataError, match="commentText"):
        load_dataset(path, expect_labels=True)


def test_load_label_out_of_domain(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [HEADER, "Hindi,p1,a,0,0,0,0,1", "Hindi,p2,b,0,0,0,0,2"])
    with pytest.raises(DataError, match="data row 2"):
        load_dataset(path, expect_labels=True)


def test_load_non_integer_count(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [HEADER, "Hindi,p1,a,zero,0,0,0,1"])
    with pytest.raises(DataError, match="report_count_comment"):
        load_dataset(path, expect_labels=True)


def test_load_negative_count(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [HEADER, "Hindi,p1,a,0,-3,0,0,1"])
    with pytest.raises(DataError, match="negative"):
        load_dataset(path, expect_labels=True)


def test_load_malformed_quoting(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(HEADER + '\nHindi,p1,"bad"quote,0,0,0,0,1\n', encoding="utf-8")
    with pytest.raises(DataError, match="malformed CSV"):
        load_dataset(path, expect_labels=True)


def test_load_unlabeled_without_expectation(tmp_path):
    path = tmp_path / "d.csv"
    write_csv(path, [HEADER.rsplit(",", 1)[0], "Hindi,p1,a,0,0,0,0"])
    d = load_dataset(path, expect_labels=False)
    assert not d.has_labels
    with pytest.raises(DataError, match="label"):
        load_dataset(path, expect_labels=True)


def test_roundtrip_identical(tmp_path):
    d = make_dataset(60, seed=3)
    d.comment_text[0] = 'comma, "quote" and\nnewline'
    d.comment_text[1] = "है ना "
    path = tmp_path / "rt.csv"
    save_dataset(d, path)
    assert load_dataset(path, expect_labels=True) == d


def test_split_sizes_99_1():
    d = make_dataset(100, seed=1)
    train, dev = split_train_dev(d, 0.01, seed=42)
    assert (train.row_count, dev.row_count) == (99, 1)


def test_split_deterministic_and_disjoint():
    d = make_dataset(200, seed=2)
    a_train, a_dev = split_train_dev(d, 0.25, seed=7)
    b_train, b_dev = split_train_dev(d, 0.25, seed=7)
    assert a_train == b_train and a_dev == b_dev
    for frac in (0.1, 0.33, 0.5):
        for seed in (0, 1, 99):
            train, dev = split_train_dev(d, frac, seed)
            train_keys = {(r.post_index, r.comment_text, r.like_count_post)
                          for r in train.records()}
            assert train.row_count + dev.row_count == d.row_count


def test_split_preserves_relative_order():
    d = make_dataset(50, seed=5)
    d.comment_text[:] = [f"text {i}" for i in range(50)]
    train, dev = split_train_dev(d, 0.3, seed=11)
    order = [int(t.split()[1]) for t in train.comment_text]
    assert order == sorted(order)
    order = [int(t.split()[1]) for t in dev.comment_text]
    assert order == sorted(order)


def test_split_matches_reference_shuffle():
    n, frac, seed = 1000, 0.2, 7
    d = make_dataset(n, seed=8)
    d.comment_text[:] = [str(i) for i in range(n)]
    _, dev = split_train_dev(d, frac, seed)
    expected_dev = sorted(reference_shuffle(n, seed)[:200])
    assert [int(t) for t in dev.comment_text] == expected_dev


def test_split_argument_errors():
    d = make_dataset(10, seed=0)
    with pytest.raises(ValueError):
        split_train_dev(d, 0.0, seed=1)
    with pytest.raises(ValueError):
        split_train_dev(d, 1.0, seed=1)
    with pytest.raises(ValueError):
        split_train_dev(d, 0.01, seed=1)  # selects no rows
    empty = make_dataset(0, seed=0)
    with pytest.raises(ValueError):
        split_train_dev(empty, 0.5, seed=1)
    unlabeled = make_dataset(10, seed=0, labeled=False)
    with pytest.raises(ValueError):
        split_train_dev(unlabeled, 0.5, seed=1)


def test_stats_class_fractions():
    d = make_dataset(2, seed=4)
    d.labels[:] = [0, 1]
    report = compute_stats(d)
    assert report.class_fractions == {0: 0.5, 1: 0.5}


def test_stats_mean_word_count():
    d = make_dataset(2, seed=4)
    d.comment_text[:] = ["a b", "a b c d"]
    assert compute_stats(d).mean_word_count == 3.0
    assert count_words("") == 0
    assert count_words("  a   b ") == 2
    assert count_words("a\tb") == 1  # ASCII space only


def test_stats_numeric_summary():
    d = make_dataset(2, seed=4)
    d.counts[:, 3] = [0, 10]
    mean, std, mx = compute_stats(d).numeric_summaries["like_count_post"]
    assert (mean, std, mx) == (5.0, 5.0, 10)


def test_stats_language_shares_sum_to_one():
    for seed in range(5):
        report = compute_stats(make_dataset(137, seed=seed))
        assert abs(sum(report.language_shares.values()) - 1.0) < 1e-9
        assert abs(sum(report.class_fractions.values()) - 1.0) < 1e-9


def test_stats_unlabeled_omits_fractions():
    report = compute_stats(make_dataset(10, seed=1, labeled=False))
    assert report.class_fractions is None
    text = report.to_text()
    assert "class_fraction" not in text
    assert "language_share[Hindi]" in text


def test_stats_csv_export(tmp_path):
    report = compute_stats(make_dataset(10, seed=1))
    out = tmp_path / "eda.csv"
    report.write_csv(out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "metric,value"
    assert any(line.startswith("row_count,10") for line in lines)
