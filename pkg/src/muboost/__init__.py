"""muboost: abusive-comment classification with boosted oblivious trees.

Pipeline: ordered target encoding of the categorical columns, bag-of-words
text features, a from-scratch histogram GBDT over oblivious trees, seed-varied
ensembling, fusion with externally supplied probabilities, and F1 threshold
tuning. See the README for the CLI and file formats.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, ModelFormatError, MuboostError

__all__ = [
    "ConfigError",
    "DataError",
    "ModelFormatError",
    "MuboostError",
    "__version__",
]
