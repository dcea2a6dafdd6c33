"""Token-level string similarities: Levenshtein and Jaro / Jaro-Winkler.

Levenshtein is reported as ``1 - d / max(len)`` so every metric in this
package reads higher-is-better; the raw edit count is available separately.
Jaro uses the standard match window ``max(len)//2 - 1`` (floored at 0) and
half-transposition counting; the Winkler extension adds an unconditional
common-prefix bonus ``l * p * (1 - jaro)`` with ``l`` capped at
``winkler_max_prefix``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TokenSequence
from .errors import DataError
from .kmeans import collapse_repeats

MEASURES = ("levenshtein", "jaro_winkler")


@dataclass(frozen=True)
class DistanceConfig:
    measure: str = "jaro_winkler"
    dedup: bool = False
    winkler_prefix_scale: float = 0.1
    winkler_max_prefix: int = 4

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise DataError(f"unknown measure {self.measure!r}")
        if not (0.0 < self.winkler_prefix_scale <= 0.25):
            raise DataError(
                f"winkler_prefix_scale must be in (0, 0.25], got {self.winkler_prefix_scale}"
            )
        if self.winkler_max_prefix < 0:
            raise DataError("winkler_max_prefix must be >= 0")
        if self.winkler_prefix_scale * self.winkler_max_prefix > 1.0:
            raise DataError("winkler_prefix_scale * winkler_max_prefix must be <= 1")


def levenshtein_distance(gen: TokenSequence, ref: TokenSequence) -> int:
    """Minimum number of single-token edits turning ``gen`` into ``ref``."""
    a, b = gen.tokens, ref.tokens
    if len(b) < len(a):
        a, b = b, a  # keep the DP row on the shorter sequence
    a_arr = np.asarray(a, dtype=np.int64)
    n = len(a_arr)
    prev = np.arange(n + 1, dtype=np.int64)
    offsets = np.arange(n, dtype=np.int64)
    for i, tok in enumerate(b, start=1):
        sub = prev[:-1] + (a_arr != tok)
        dele = prev[1:] + 1
        cur = np.minimum(sub, dele)
        np.minimum(cur, i + 1 + offsets, out=cur)
        # propagate insertions left-to-right: cur[j] = min(cur[j], cur[j-1]+1)
        cur = np.minimum.accumulate(cur - offsets) + offsets
        prev = np.concatenate(([i], cur))
    return int(prev[-1])


def levenshtein_similarity(gen: TokenSequence, ref: TokenSequence) -> float:
    """1 - edit_distance / max(len); 1.0 for identical sequences."""
    d = levenshtein_distance(gen, ref)
    return 1.0 - d / max(len(gen.tokens), len(ref.tokens))


def _jaro_match_stats(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, float]:
    """Matched-token count m and half-transposition count t.

    A token of ``a`` at position i may match an unmatched equal token of
    ``b`` within the window max(len)//2 - 1, lowest position first. Runs in
    O(n) by keeping, per token value, a cursor into its positions in ``b``:
    the window's lower bound only moves right, and matched positions never
    unmatch, so cursors never need to back up.
    """
    window = max(max(len(a), len(b)) // 2 - 1, 0)
    positions: dict[int, list[int]] = {}
    for j, tok in enumerate(b):
        positions.setdefault(tok, []).append(j)
    cursors = {tok: 0 for tok in positions}
    b_matched = np.zeros(len(b), dtype=bool)
    a_matched_tokens: list[int] = []
    for i, tok in enumerate(a):
        plist = positions.get(tok)
        if plist is None:
            continue
        lo, hi = i - window, i + window
        p = cursors[tok]
        while p < len(plist) and (plist[p] < lo or b_matched[plist[p]]):
            p += 1
        cursors[tok] = p
        if p < len(plist) and plist[p] <= hi:
            b_matched[plist[p]] = True
            cursors[tok] = p + 1
            a_matched_tokens.append(tok)
    m = len(a_matched_tokens)
    if m == 0:
        return 0, 0.0
    b_matched_tokens = [b[j] for j in np.flatnonzero(b_matched)]
    transposed = sum(x != y for x, y in zip(a_matched_tokens, b_matched_tokens))
    return m, transposed / 2.0


def jaro(gen: TokenSequence, ref: TokenSequence) -> float:
    """Canonical Jaro similarity in [0, 1]; 0 when no tokens match."""
    a, b = gen.tokens, ref.tokens
    m, t = _jaro_match_stats(a, b)
    if m == 0:
        return 0.0
    return (m / len(a) + m / len(b) + (m - t) / m) / 3.0


def jaro_winkler(
    gen: TokenSequence, ref: TokenSequence, cfg: DistanceConfig = DistanceConfig()
) -> float:
    """Jaro plus the prefix bonus l * p * (1 - jaro), l capped at the config max."""
    j = jaro(gen, ref)
    prefix = 0
    for x, y in zip(gen.tokens, ref.tokens):
        if x != y or prefix >= cfg.winkler_max_prefix:
            break
        prefix += 1
    return j + prefix * cfg.winkler_prefix_scale * (1.0 - j)


def speech_token_distance(
    gen: TokenSequence, ref: TokenSequence, cfg: DistanceConfig = DistanceConfig()
) -> float:
    """Dispatch on ``cfg.measure`` after optional repetition collapsing."""
    if cfg.dedup:
        gen = collapse_repeats(gen)
        ref = collapse_repeats(ref)
    if cfg.measure == "levenshtein":
        return levenshtein_similarity(gen, ref)
    return jaro_winkler(gen, ref, cfg)
