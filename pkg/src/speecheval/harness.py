"""Correlation of metric scores against human ratings.

Reports absolute Pearson (LCC) and Spearman (SRCC) coefficients at utterance
or system level; absolute values let lower-is-better and higher-is-better
metrics share one leaderboard, while signed values stay available for
orientation checks. Also provides the unaligned-reference protocol that
replaces every reference with a randomly drawn natural utterance.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EvalPair, ScoreReport
from .errors import DataError, DegenerateInputError, JoinError

MIN_POINTS = 3  # correlating fewer points is refused, 2 points give +/-1


@dataclass(frozen=True)
class CorrelationResult:
    level: str
    lcc: float
    srcc: float
    lcc_abs: float
    srcc_abs: float
    n: int


def _as_vector(x: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-D")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation; refuses short or constant input."""
    a = _as_vector(x, "x")
    b = _as_vector(y, "y")
    if a.size != b.size:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < MIN_POINTS:
        raise DegenerateInputError(f"need at least {MIN_POINTS} points, got {a.size}")
    a = a - a.mean()
    b = b - b.mean()
    ssa = float(np.dot(a, a))
    ssb = float(np.dot(b, b))
    if ssa == 0.0 or ssb == 0.0:
        raise DegenerateInputError("constant input has no defined correlation")
    return float(np.dot(a, b) / math.sqrt(ssa * ssb))


def average_ranks(x: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their positions."""
    a = _as_vector(x, "x")
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.size, dtype=np.float64)
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-tied ranks."""
    a = _as_vector(x, "x")
    b = _as_vector(y, "y")
    if a.size != b.size:
        raise DataError(f"length mismatch: {a.size} vs {b.size}")
    return pearson(average_ranks(a), average_ranks(b))


def _join(report: ScoreReport, manifest: Sequence[EvalPair]) -> list[tuple[EvalPair, float]]:
    by_id = {p.utt_id: p for p in manifest}
    missing = [utt for utt in report.scores if utt not in by_id]
    if missing:
        raise JoinError(f"scored utt_id(s) missing from manifest: {', '.join(sorted(missing))}")
    # manifest order, restricted to scored utterances
    return [(p, report.scores[p.utt_id]) for p in manifest if p.utt_id in report.scores]


def aggregate_system(
    report: ScoreReport, manifest: Sequence[EvalPair]
) -> tuple[list[float], list[float]]:
    """Per-system mean score and mean rating, in sorted system_id order."""
    joined = _join(report, manifest)
    groups: dict[str, list[tuple[float, float]]] = {}
    for pair, score in joined:
        groups.setdefault(pair.system_id, []).append((score, pair.rating))
    mean_scores: list[float] = []
    mean_ratings: list[float] = []
    for system_id in sorted(groups):
        rows = groups[system_id]
        mean_scores.append(sum(s for s, _ in rows) / len(rows))
        mean_ratings.append(sum(r for _, r in rows) / len(rows))
    return mean_scores, mean_ratings


def correlate(
    report: ScoreReport, manifest: Sequence[EvalPair], level: str
) -> CorrelationResult:
    """Correlate a report against manifest ratings at the requested level."""
    if level not in ("utterance", "system"):
        raise DataError(f"unknown level {level!r}")
    if level == "utterance":
        joined = _join(report, manifest)
        scores = [s for _, s in joined]
        ratings = [p.rating for p, _ in joined]
    else:
        scores, ratings = aggregate_system(report, manifest)
    lcc = pearson(scores, ratings)
    srcc = spearman(scores, ratings)
    return CorrelationResult(
        level=level,
        lcc=lcc,
        srcc=srcc,
        lcc_abs=abs(lcc),
        srcc_abs=abs(srcc),
        n=len(scores),
    )


def make_unaligned_manifest(
    manifest: Sequence[EvalPair],
    reference_pool: Sequence[str],
    seed: int,
    pool_mode: str = "single",
) -> list[EvalPair]:
    """Replace every ref_path with a draw from ``reference_pool``.

    ``single`` (the default protocol) draws one reference shared by all
    pairs; ``per_pair`` draws independently per pair. Deterministic given
    the seed; ratings and generated paths are untouched.
    """
    if not reference_pool:
        raise DataError("empty reference pool")
    if pool_mode not in ("single", "per_pair"):
        raise DataError(f"unknown pool_mode {pool_mode!r}")
    rnd = random.Random(seed)
    if pool_mode == "single":
        ref = reference_pool[rnd.randrange(len(reference_pool))]
        picks = [ref] * len(manifest)
    else:
        picks = [reference_pool[rnd.randrange(len(reference_pool))] for _ in manifest]
    return [
        EvalPair(
            utt_id=p.utt_id,
            system_id=p.system_id,
            gen_path=p.gen_path,
            ref_path=str(ref_path),
            rating=p.rating,
        )
        for p, ref_path in zip(manifest, picks)
    ]


def write_correlation_summary(result: CorrelationResult, report: ScoreReport, path) -> None:
    """Emit the JSON summary: both signed and absolute coefficients plus config."""
    doc = {
        "level": result.level,
        "n": result.n,
        "lcc": result.lcc,
        "srcc": result.srcc,
        "lcc_abs": result.lcc_abs,
        "srcc_abs": result.srcc_abs,
        "metric": report.metric,
        "config": report.config,
    }
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
