"""Reference-aware objective metrics for generated speech.

Three metric families over a generated/reference utterance pair:

- a greedy-max cosine matching score on frame-level feature matrices
  (precision / recall / F1 variants, optional df/idf weighting),
- clipped n-gram precision (BLEU-style) on discrete token sequences,
- token-level string similarities (Levenshtein, Jaro-Winkler),

plus a k-means quantizer mapping features to tokens, BPE subword merges on
token sequences, and a harness correlating any score report against human
ratings at utterance or system level.
"""

from .bertscore import BertScoreConfig, df_idf_weights, similarity_matrix, speech_bert_score
from .bleu import BleuConfig, modified_precision, speech_bleu
from .bpe import BPEModel, bpe_decode, bpe_encode, load_bpe_model, save_bpe_model, train_bpe
from .core import (
    EvalPair,
    FeatureMatrix,
    ScoreReport,
    TokenSequence,
    parse_manifest,
    read_feature_file,
    read_report,
    read_token_file,
    write_feature_file,
    write_manifest,
    write_report,
    write_token_file,
)
from .errors import (
    DataError,
    DegenerateInputError,
    DegenerateWeightError,
    DimensionError,
    FormatError,
    JoinError,
    SpeechEvalError,
)
from .harness import (
    CorrelationResult,
    aggregate_system,
    correlate,
    make_unaligned_manifest,
    pearson,
    spearman,
)
from .kmeans import (
    KMeansModel,
    assign_tokens,
    collapse_repeats,
    load_kmeans_model,
    save_kmeans_model,
    train_kmeans,
)
from .tokdist import (
    DistanceConfig,
    jaro,
    jaro_winkler,
    levenshtein_distance,
    levenshtein_similarity,
    speech_token_distance,
)

__version__ = "0.1.0"

__all__ = [
    "BertScoreConfig",
    "BleuConfig",
    "BPEModel",
    "CorrelationResult",
    "DataError",
    "DegenerateInputError",
    "DegenerateWeightError",
    "DimensionError",
    "DistanceConfig",
    "EvalPair",
    "FeatureMatrix",
    "FormatError",
    "JoinError",
    "KMeansModel",
    "ScoreReport",
    "SpeechEvalError",
    "TokenSequence",
    "aggregate_system",
    "assign_tokens",
    "bpe_decode",
    "bpe_encode",
    "collapse_repeats",
    "correlate",
    "df_idf_weights",
    "jaro",
    "jaro_winkler",
    "levenshtein_distance",
    "levenshtein_similarity",
    "load_bpe_model",
    "load_kmeans_model",
    "make_unaligned_manifest",
    "modified_precision",
    "parse_manifest",
    "pearson",
    "read_feature_file",
    "read_report",
    "read_token_file",
    "save_bpe_model",
    "save_kmeans_model",
    "similarity_matrix",
    "spearman",
    "speech_bert_score",
    "speech_bleu",
    "speech_token_distance",
    "train_bpe",
    "train_kmeans",
    "write_feature_file",
    "write_manifest",
    "write_report",
    "write_token_file",
]
