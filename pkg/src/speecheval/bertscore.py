"""Greedy-max cosine matching between generated and reference feature frames.

The score is the mean over generated frames of each frame's best cosine
similarity against all reference frames (precision), the mirrored mean over
reference frames (recall), or their harmonic mean (F1). Optional document
frequency / inverse document frequency weighting replaces the plain mean by
a weight-normalized sum over frame-aligned discrete tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import FeatureMatrix, TokenSequence
from .errors import DataError, DegenerateWeightError, DimensionError

VARIANTS = ("precision", "recall", "f1")
WEIGHTINGS = ("none", "df", "idf")


@dataclass(frozen=True)
class BertScoreConfig:
    """Variant and weighting choices for the frame-matching score.

    ``weight_table`` must be present exactly when ``weighting`` is not
    ``"none"``; it maps token ids to weights and is looked up on the
    frame-aligned (non-deduplicated) token sequence. Zero-norm frames get
    similarity 0 unless ``strict_zero_norm`` raises instead.
    """

    variant: str = "precision"
    weighting: str = "none"
    weight_table: Mapping[int, float] | None = None
    strict_zero_norm: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DataError(f"unknown variant {self.variant!r}")
        if self.weighting not in WEIGHTINGS:
            raise DataError(f"unknown weighting {self.weighting!r}")
        if (self.weight_table is not None) != (self.weighting != "none"):
            raise DataError("weight_table must be given iff weighting != 'none'")


class TokenWeightTable(dict):
    """Token-id -> weight map with a default for ids never seen in training."""

    def __init__(self, weights: Mapping[int, float], default: float):
        super().__init__(weights)
        self.default = float(default)

    def __missing__(self, key):
        return self.default


def similarity_matrix(
    gen: FeatureMatrix, ref: FeatureMatrix, strict_zero_norm: bool = False
) -> np.ndarray:
    """Pairwise cosine similarities, shape (n_gen, n_ref), clipped to [-1, 1].

    Frames with exactly zero norm contribute similarity 0 everywhere (or
    raise DataError when ``strict_zero_norm``).
    """
    if gen.dim != ref.dim:
        raise DimensionError(f"feature dims differ: {gen.dim} vs {ref.dim}")
    g = gen.data.astype(np.float64)
    r = ref.data.astype(np.float64)
    g_norm = np.linalg.norm(g, axis=1)
    r_norm = np.linalg.norm(r, axis=1)
    if strict_zero_norm and (np.any(g_norm == 0.0) or np.any(r_norm == 0.0)):
        raise DataError("zero-norm frame encountered with strict_zero_norm")
    # zero-norm rows become zero vectors, so their similarities are exactly 0
    g = np.where(g_norm[:, None] > 0.0, g / np.where(g_norm == 0.0, 1.0, g_norm)[:, None], 0.0)
    r = np.where(r_norm[:, None] > 0.0, r / np.where(r_norm == 0.0, 1.0, r_norm)[:, None], 0.0)
    sim = g @ r.T
    np.clip(sim, -1.0, 1.0, out=sim)
    return sim


def _frame_weights(
    table: Mapping[int, float], tokens: TokenSequence | None, n_frames: int, side: str
) -> np.ndarray:
    if tokens is None:
        raise DataError(f"weighting requires frame-aligned {side} tokens")
    if len(tokens.tokens) != n_frames:
        raise DataError(
            f"{tokens.utt_id}: {side} tokens ({len(tokens.tokens)}) are not "
            f"frame-aligned to {n_frames} frames"
        )
    try:
        return np.array([table[t] for t in tokens.tokens], dtype=np.float64)
    except KeyError as e:
        raise DataError(f"{tokens.utt_id}: no weight for token {e.args[0]}") from None


def _weighted_mean(values: np.ndarray, weights: np.ndarray) -> float:
    denom = float(weights.sum())
    if denom == 0.0:
        raise DegenerateWeightError("weight denominator is exactly 0")
    return float(np.dot(weights, values) / denom)


def speech_bert_score(
    gen: FeatureMatrix,
    ref: FeatureMatrix,
    cfg: BertScoreConfig = BertScoreConfig(),
    gen_tokens: TokenSequence | None = None,
    ref_tokens: TokenSequence | None = None,
) -> float:
    """Score ``gen`` against ``ref`` under ``cfg``; result lies in [-1, 1]."""
    sim = similarity_matrix(gen, ref, strict_zero_norm=cfg.strict_zero_norm)
    row_max = sim.max(axis=1)  # best reference match per generated frame
    col_max = sim.max(axis=0)  # best generated match per reference frame

    if cfg.weighting == "none":
        precision = float(row_max.mean())
        recall = float(col_max.mean())
    else:
        table = cfg.weight_table
        precision = recall = 0.0
        if cfg.variant in ("precision", "f1"):
            w = _frame_weights(table, gen_tokens, gen.n_frames, "generated")
            precision = _weighted_mean(row_max, w)
        if cfg.variant in ("recall", "f1"):
            w = _frame_weights(table, ref_tokens, ref.n_frames, "reference")
            recall = _weighted_mean(col_max, w)

    if cfg.variant == "precision":
        return precision
    if cfg.variant == "recall":
        return recall
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def df_idf_weights(corpus: Sequence[TokenSequence], mode: str) -> TokenWeightTable:
    """Document-frequency weights over a token corpus.

    ``df`` returns raw per-token document counts; ``idf`` returns
    ln(N / (df + 1)), the +1 guarding division by zero. Tokens absent from
    the corpus default to df 0 / idf ln(N). Negative idf values (tokens in
    every document) are kept as-is.
    """
    if mode not in ("df", "idf"):
        raise DataError(f"unknown weighting mode {mode!r}")
    if not corpus:
        raise DataError("empty weighting corpus")
    n_docs = len(corpus)
    df: dict[int, int] = {}
    for seq in corpus:
        for tok in set(seq.tokens):
            df[tok] = df.get(tok, 0) + 1
    if mode == "df":
        return TokenWeightTable({t: float(c) for t, c in df.items()}, default=0.0)
    return TokenWeightTable(
        {t: math.log(n_docs / (c + 1)) for t, c in df.items()},
        default=math.log(n_docs),
    )
