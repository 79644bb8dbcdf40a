"""Tokenization and bag-of-words features.

Texts are tokenized (word or letter mode, optional n-gram shingles), a
frequency-ranked dictionary is fitted on the training corpus, and each text is
represented by the set of dictionary tokens it contains (boolean presence, no
term counts).

Dictionary ranking uses document frequency: a token counts once per document,
however often it repeats inside it. Ties are broken by ascending lexicographic
byte order so fitted dictionaries are reproducible across runs and platforms.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

import regex

from .errors import ModelFormatError

# Reserved shingle separator. The tokenizer treats it as whitespace on input,
# so no emitted token can contain it and n-gram keys cannot collide.
NGRAM_SEPARATOR = "\x1f"

SPLIT_WORDS = "words"
SPLIT_LETTERS = "letters"

_GRAPHEME = regex.compile(r"\X")

# Sorted feature-id tuple: which dictionary tokens occur in one text.
BowVector = tuple[int, ...]


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    split_mode: str = SPLIT_WORDS
    ngram_order: int = 1

    def __post_init__(self):
        if self.split_mode not in (SPLIT_WORDS, SPLIT_LETTERS):
            raise ValueError(f"split_mode must be 'words' or 'letters', got {self.split_mode!r}")
        if self.ngram_order < 1:
            raise ValueError("ngram_order must be >= 1")


@dataclass(frozen=True)
class DictionaryConfig:
    max_dictionary_size: int
    top_tokens_count: int
    min_token_occurrence: int = 1

    def __post_init__(self):
        if self.max_dictionary_size < 1:
            raise ValueError("max_dictionary_size must be positive")
        if self.top_tokens_count < 1:
            raise ValueError("top_tokens_count must be positive")
        if self.top_tokens_count > self.max_dictionary_size:
            raise ValueError("top_tokens_count must not exceed max_dictionary_size")
        if self.min_token_occurrence < 1:
            raise ValueError("min_token_occurrence must be >= 1")


def tokenize(text: str, cfg: TokenizerConfig) -> list[str]:
    """Token sequence for one text.

    Lowercasing happens first. Word mode splits on maximal runs of Unicode
    whitespace; letter mode yields one token per extended grapheme cluster,
    skipping whitespace clusters. With ngram_order n > 1 the base tokens are
    followed by every contiguous n-token shingle, joined by the reserved
    separator.
    """
    if cfg.lowercase:
        text = text.lower()
    if cfg.split_mode == SPLIT_WORDS:
        base = text.replace(NGRAM_SEPARATOR, " ").split()
    else:
        base = [g for g in _GRAPHEME.findall(text)
                if not g.isspace() and NGRAM_SEPARATOR not in g]
    n = cfg.ngram_order
    if n <= 1 or len(base) < n:
        return base
    return base + [NGRAM_SEPARATOR.join(base[i:i + n]) for i in range(len(base) - n + 1)]


@dataclass(frozen=True)
class TokenDictionary:
    """Fitted vocabulary: tokens in canonical order (frequency desc, then byte asc).

    Token index = feature id. Immutable; safe for concurrent featurize calls.
    """

    tokens: tuple[str, ...]
    frequencies: tuple[int, ...]
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    config: DictionaryConfig = field(default_factory=lambda: DictionaryConfig(800000, 16000))

    def __post_init__(self):
        if len(self.tokens) != len(self.frequencies):
            raise ValueError("tokens and frequencies lengths differ")

    def __len__(self) -> int:
        return len(self.tokens)

    @cached_property
    def token_index(self) -> dict[str, int]:
        return {tok: i for i, tok in enumerate(self.tokens)}


def build_dictionary(corpus, cfg: DictionaryConfig,
                     tokenizer: TokenizerConfig | None = None) -> TokenDictionary:
    """Fit a TokenDictionary on a corpus of token sequences.

    Document-level frequencies are counted (a token at most once per
    document), tokens below min_token_occurrence are dropped, the
    max_dictionary_size most frequent survive as the candidate pool, and the
    top_tokens_count most frequent of the pool are emitted in canonical order.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus is empty")
    counts: Counter[str] = Counter()
    for doc in corpus:
        counts.update(set(doc))
    ranked = sorted(
        ((tok, freq) for tok, freq in counts.items() if freq >= cfg.min_token_occurrence),
        key=lambda item: (-item[1], item[0]),
    )
    kept = ranked[:cfg.max_dictionary_size][:cfg.top_tokens_count]
    return TokenDictionary(
        tokens=tuple(tok for tok, _ in kept),
        frequencies=tuple(freq for _, freq in kept),
        tokenizer=tokenizer if tokenizer is not None else TokenizerConfig(),
        config=cfg,
    )


def featurize(tokens, dictionary: TokenDictionary) -> BowVector:
    """Sorted ids of dictionary tokens present in the token sequence (OOV ignored)."""
    index = dictionary.token_index
    return tuple(sorted({index[t] for t in tokens if t in index}))


_FORMAT_NAME = "muboost-dictionary"
_FORMAT_VERSION = 1


def _escape(token: str) -> str:
    return (token.replace("\\", "\\\\").replace("\t", "\\t")
            .replace("\n", "\\n").replace("\r", "\\r"))


def _unescape(token: str) -> str:
    out = []
    i = 0
    while i < len(token):
        ch = token[i]
        if ch == "\\" and i + 1 < len(token):
            nxt = token[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def write_dictionary(dictionary: TokenDictionary, path) -> None:
    """Versioned text serialization: header line, then token<TAB>frequency lines."""
    tok = dictionary.tokenizer
    cfg = dictionary.config
    header = "\t".join([
        _FORMAT_NAME,
        str(_FORMAT_VERSION),
        f"lowercase={str(tok.lowercase).lower()}",
        f"split_mode={tok.split_mode}",
        f"ngram_order={tok.ngram_order}",
        f"max_dictionary_size={cfg.max_dictionary_size}",
        f"top_tokens_count={cfg.top_tokens_count}",
        f"min_token_occurrence={cfg.min_token_occurrence}",
    ])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for token, freq in zip(dictionary.tokens, dictionary.frequencies):
            fh.write(f"{_escape(token)}\t{freq}\n")


def read_dictionary(path) -> TokenDictionary:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split("\t")
        if len(parts) != 8 or parts[0] != _FORMAT_NAME:
            raise ModelFormatError("not a muboost dictionary file")
        if parts[1] != str(_FORMAT_VERSION):
            raise ModelFormatError(f"unsupported dictionary format version {parts[1]!r}")
        fields = dict(p.split("=", 1) for p in parts[2:])
        tokenizer = TokenizerConfig(
            lowercase=fields["lowercase"] == "true",
            split_mode=fields["split_mode"],
            ngram_order=int(fields["ngram_order"]),
        )
        config = DictionaryConfig(
            max_dictionary_size=int(fields["max_dictionary_size"]),
            top_tokens_count=int(fields["top_tokens_count"]),
            min_token_occurrence=int(fields["min_token_occurrence"]),
        )
        tokens: list[str] = []
        frequencies: list[int] = []
        for line_num, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                token_raw, freq_raw = line.split("\t")
                tokens.append(_unescape(token_raw))
                frequencies.append(int(freq_raw))
            except ValueError:
                raise ModelFormatError(f"bad dictionary line {line_num}") from None
    for i in range(1, len(tokens)):
        prev, cur = (frequencies[i - 1], tokens[i - 1]), (frequencies[i], tokens[i])
        if cur[0] > prev[0] or (cur[0] == prev[0] and cur[1] <= prev[1]):
            raise ModelFormatError(f"dictionary entries out of canonical order at line {i + 2}")
    return TokenDictionary(tuple(tokens), tuple(frequencies), tokenizer, config)
