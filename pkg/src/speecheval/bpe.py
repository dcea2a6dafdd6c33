"""Byte-pair-encoding merges over discrete speech tokens.

Training greedily merges the most frequent adjacent symbol pair; frequency
ties break toward the lexicographically smallest (left, right) pair and no
pair occurring fewer than twice is merged. Merge i creates the new symbol id
``base_vocab + i``, so applying merges in training order is deterministic
and fully reversible.

Model files are JSON: ``{"base_vocab": K, "merges": [[left, right], ...]}``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .core import TokenSequence
from .errors import DataError, FormatError

MIN_MERGE_FREQ = 2


@dataclass(frozen=True)
class BPEModel:
    base_vocab: int
    merges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.base_vocab < 1:
            raise DataError(f"base_vocab must be >= 1, got {self.base_vocab}")
        object.__setattr__(
            self, "merges", tuple((int(l), int(r)) for l, r in self.merges)
        )

    @property
    def vocab_size(self) -> int:
        return self.base_vocab + len(self.merges)


def _apply_merge(seq: list[int], left: int, right: int, new_id: int) -> list[int]:
    # single left-to-right pass; a replacement cannot create a new (left,
    # right) adjacency because new_id differs from both halves
    out: list[int] = []
    i = 0
    n = len(seq)
    while i < n:
        if i + 1 < n and seq[i] == left and seq[i + 1] == right:
            out.append(new_id)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def train_bpe(
    corpus: Sequence[TokenSequence], vocab_size: int, base_vocab: int | None = None
) -> BPEModel:
    """Learn merges until ``vocab_size`` symbols exist or no pair repeats.

    ``base_vocab`` defaults to max(token) + 1 over the corpus; pass the
    quantizer's codebook size explicitly to keep models comparable across
    corpora that miss some codewords.
    """
    if not corpus:
        raise DataError("empty BPE training corpus")
    max_tok = max(max(seq.tokens) for seq in corpus)
    if base_vocab is None:
        base_vocab = max_tok + 1
    elif max_tok >= base_vocab:
        raise DataError(f"corpus token {max_tok} >= base_vocab {base_vocab}")
    if vocab_size < base_vocab:
        raise DataError(f"vocab_size {vocab_size} < base_vocab {base_vocab}")

    seqs = [list(seq.tokens) for seq in corpus]
    merges: list[tuple[int, int]] = []
    next_id = base_vocab
    while next_id < vocab_size:
        counts: Counter = Counter()
        for s in seqs:
            counts.update(zip(s, s[1:]))
        if not counts:
            break
        best_count = max(counts.values())
        if best_count < MIN_MERGE_FREQ:
            break
        pair = min(p for p, c in counts.items() if c == best_count)
        seqs = [_apply_merge(s, pair[0], pair[1], next_id) for s in seqs]
        merges.append(pair)
        next_id += 1
    return BPEModel(base_vocab=base_vocab, merges=tuple(merges))


def bpe_encode(model: BPEModel, seq: TokenSequence) -> TokenSequence:
    """Apply the model's merges in training order; output ids < vocab_size."""
    bad = [t for t in seq.tokens if t >= model.base_vocab]
    if bad:
        raise DataError(f"{seq.utt_id}: token {bad[0]} outside base vocabulary")
    out = list(seq.tokens)
    for offset, (left, right) in enumerate(model.merges):
        out = _apply_merge(out, left, right, model.base_vocab + offset)
    return TokenSequence(utt_id=seq.utt_id, tokens=tuple(out))


def bpe_decode(model: BPEModel, seq: TokenSequence) -> TokenSequence:
    """Expand merge symbols back to base tokens; exact inverse of encode."""
    out: list[int] = []
    for tok in seq.tokens:
        if tok >= model.vocab_size:
            raise DataError(f"{seq.utt_id}: token {tok} outside model vocabulary")
        stack = [tok]
        while stack:
            t = stack.pop()
            if t < model.base_vocab:
                out.append(t)
            else:
                left, right = model.merges[t - model.base_vocab]
                stack.append(right)
                stack.append(left)
    return TokenSequence(utt_id=seq.utt_id, tokens=tuple(out))


def save_bpe_model(model: BPEModel, path) -> None:
    doc = {"base_vocab": model.base_vocab, "merges": [list(p) for p in model.merges]}
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def load_bpe_model(path) -> BPEModel:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: invalid JSON: {e}") from None
    for key in ("base_vocab", "merges"):
        if key not in doc:
            raise FormatError(f"{path}: missing key {key!r}")
    return BPEModel(
        base_vocab=int(doc["base_vocab"]),
        merges=tuple((int(l), int(r)) for l, r in doc["merges"]),
    )
