"""Feature assembly shared by all ensemble members.

Layout (feature ids ascending): encoded language, encoded post_index, the four
count columns (when enabled), then one boolean presence feature per dictionary
token. The dictionary is fitted on training texts only and is seed-free; the
two ordered encoders take sub-seeds derived from the member seed, so members
differ only through their encoding permutations and recorded seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cat_encoding import (
    GLOBAL_MEAN,
    OrderedEncodingConfig,
    OrderedEncodingModel,
    fit_transform_ordered,
)
from .dataset import COUNT_COLUMNS, Dataset
from .features import BowBlock, FeatureMatrix
from .gbdt import GbdtModel, predict_proba_batch, predict_raw_batch
from .rng import derive_seed
from .text_features import (
    DictionaryConfig,
    TokenDictionary,
    TokenizerConfig,
    build_dictionary,
    featurize,
    tokenize,
)

_LANGUAGE_SALT = 0
_POST_SALT = 1


@dataclass(frozen=True)
class FeatureSpace:
    """Fixed column layout of the assembled matrix."""

    include_counts: bool
    bow_width: int

    @property
    def n_numeric(self) -> int:
        return 2 + (4 if self.include_counts else 0)

    @property
    def width(self) -> int:
        return self.n_numeric + self.bow_width

    @property
    def numeric_names(self) -> tuple[str, ...]:
        names = ("language_encoded", "post_index_encoded")
        return names + COUNT_COLUMNS if self.include_counts else names


@dataclass(frozen=True)
class FeatureConfig:
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    dictionary: DictionaryConfig = field(
        default_factory=lambda: DictionaryConfig(800000, 16000))
    encoding_a: float = 1.0
    encoding_prior: float | str = GLOBAL_MEAN
    include_count_features: bool = True


@dataclass
class FittedFeatures:
    """Everything needed to transform new rows: layout, encoders, dictionary."""

    space: FeatureSpace
    language_encoder: OrderedEncodingModel
    post_encoder: OrderedEncodingModel
    dictionary: TokenDictionary
    config: FeatureConfig


def _assemble(encoded_language, encoded_post, data: Dataset, space: FeatureSpace,
              bow_vectors) -> FeatureMatrix:
    columns = [encoded_language, encoded_post]
    if space.include_counts:
        columns.extend(data.counts[:, j].astype(np.float64) for j in range(4))
    numeric = np.column_stack(columns) if data.row_count else \
        np.zeros((0, space.n_numeric))
    return FeatureMatrix(numeric=numeric,
                         bow=BowBlock.from_vectors(bow_vectors, space.bow_width))


def fit_features(train: Dataset, config: FeatureConfig, seed: int,
                 dictionary: TokenDictionary | None = None
                 ) -> tuple[FittedFeatures, FeatureMatrix]:
    """Fit encoders and dictionary on training rows; return them with the
    leakage-free training matrix (matrix row r = dataset row r).

    A pre-fitted dictionary may be supplied so ensemble members share one;
    dictionary fitting does not depend on the seed either way.
    """
    if not train.has_labels:
        raise ValueError("feature fitting requires a labeled dataset")
    labels = train.labels
    corpus = [tokenize(text, config.tokenizer) for text in train.comment_text]
    if dictionary is None:
        dictionary = build_dictionary(corpus, config.dictionary, config.tokenizer)

    encoding = dict(a=config.encoding_a, prior=config.encoding_prior)
    encoded_language, language_encoder = fit_transform_ordered(
        train.language, labels,
        OrderedEncodingConfig(**encoding, permutation_seed=derive_seed(seed, _LANGUAGE_SALT)))
    encoded_post, post_encoder = fit_transform_ordered(
        train.post_index, labels,
        OrderedEncodingConfig(**encoding, permutation_seed=derive_seed(seed, _POST_SALT)))

    space = FeatureSpace(include_counts=config.include_count_features,
                         bow_width=len(dictionary))
    fitted = FittedFeatures(space=space, language_encoder=language_encoder,
                            post_encoder=post_encoder, dictionary=dictionary,
                            config=config)
    matrix = _assemble(encoded_language, encoded_post, train, space,
                       [featurize(doc, dictionary) for doc in corpus])
    return fitted, matrix


def transform_features(data: Dataset, fitted: FittedFeatures) -> FeatureMatrix:
    """Inference-time matrix: full-pass categorical statistics, fitted dictionary.

    A training row transformed here generally differs from its train-time
    encoding: fitting uses prefix statistics, inference the full pass.
    """
    lang_map = {v: fitted.language_encoder.encode(v) for v in set(data.language)}
    post_map = {v: fitted.post_encoder.encode(v) for v in set(data.post_index)}
    encoded_language = np.array([lang_map[v] for v in data.language], dtype=np.float64)
    encoded_post = np.array([post_map[v] for v in data.post_index], dtype=np.float64)
    vectors = [featurize(tokenize(text, fitted.config.tokenizer), fitted.dictionary)
               for text in data.comment_text]
    return _assemble(encoded_language, encoded_post, data, fitted.space, vectors)


@dataclass
class PipelineModel:
    """One trained member: fitted feature artifacts plus its boosted trees."""

    fitted: FittedFeatures
    model: GbdtModel

    def predict_raw(self, data: Dataset) -> np.ndarray:
        return predict_raw_batch(self.model, transform_features(data, self.fitted))

    def predict_proba(self, data: Dataset) -> np.ndarray:
        return predict_proba_batch(self.model, transform_features(data, self.fitted))
