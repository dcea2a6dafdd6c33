"""Clipped n-gram precision score between two token sequences.

Per-order precisions are aggregated with uniform 1/G weights in log space
and multiplied by an optional brevity penalty. The default configuration
collapses token repetitions on both sides and applies add-one smoothing to
orders >= 2 so a single degenerate utterance cannot produce log(0).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .core import TokenSequence
from .errors import DataError
from .kmeans import collapse_repeats

SMOOTHINGS = ("none", "add_one_higher_order")


@dataclass(frozen=True)
class BleuConfig:
    max_order: int = 2
    dedup: bool = True
    smoothing: str = "add_one_higher_order"
    brevity_penalty: bool = True

    def __post_init__(self):
        if self.max_order < 1:
            raise DataError(f"max_order must be >= 1, got {self.max_order}")
        if self.smoothing not in SMOOTHINGS:
            raise DataError(f"unknown smoothing {self.smoothing!r}")


def _ngram_counts(tokens: tuple[int, ...], n: int) -> Counter:
    return Counter(tokens[i:i + n] for i in range(len(tokens) - n + 1))


def modified_precision(gen: TokenSequence, ref: TokenSequence, n: int) -> tuple[int, int]:
    """Clipped n-gram match count and candidate n-gram total for order n."""
    if n < 1:
        raise DataError(f"n-gram order must be >= 1, got {n}")
    total = max(len(gen.tokens) - n + 1, 0)
    if total == 0:
        return 0, 0
    gen_counts = _ngram_counts(gen.tokens, n)
    ref_counts = _ngram_counts(ref.tokens, n)
    matches = sum(min(c, ref_counts[g]) for g, c in gen_counts.items())
    return matches, total


def speech_bleu(gen: TokenSequence, ref: TokenSequence, cfg: BleuConfig = BleuConfig()) -> float:
    """Geometric mean of clipped n-gram precisions up to ``cfg.max_order``.

    Returns exactly 0.0 when any per-order precision is zero and exactly 1.0
    for identical sequences (dedup applied consistently to both sides).
    """
    if cfg.dedup:
        gen = collapse_repeats(gen)
        ref = collapse_repeats(ref)
    log_sum = 0.0
    for n in range(1, cfg.max_order + 1):
        matches, total = modified_precision(gen, ref, n)
        smooth = 1 if (cfg.smoothing == "add_one_higher_order" and n >= 2) else 0
        num = matches + smooth
        den = total + smooth
        if num == 0 or den == 0:
            return 0.0
        log_sum += math.log(num / den)
    score = math.exp(log_sum / cfg.max_order)
    if cfg.brevity_penalty:
        score *= min(1.0, math.exp(1.0 - len(ref.tokens) / len(gen.tokens)))
    return score
