"""K-means codebook training and frame-to-token assignment.

Training is plain Lloyd iteration with k-means++ initialization driven by a
seeded PCG64 generator, so identical inputs and seed give bitwise-identical
models. Centroids are stored as float32 (matching the feature payload
precision) so token assignments reproduce across machines.

Model files (``.spkm``, binary, little-endian):
    magic ``SPKM``, version 1 (u32), k (u32), dim (u32), seed (i64),
    then k * dim float32 centroid values, row-major.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path

import numpy as np

from .core import FeatureMatrix, TokenSequence
from .errors import DataError, DimensionError, FormatError

KMEANS_MAGIC = b"SPKM"
KMEANS_VERSION = 1
_KMEANS_HEADER = struct.Struct("<4sIIIq")


@dataclass(frozen=True, eq=False)
class KMeansModel:
    """A trained codebook: k centroids of dimension dim, float32.

    ``iters_run``, ``final_sse`` and ``sse_history`` describe the training
    run; they are not persisted in the model file and default to zeros on a
    loaded model.
    """

    k: int
    dim: int
    centroids: np.ndarray
    seed: int
    iters_run: int = 0
    final_sse: float = 0.0
    sse_history: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.centroids, dtype=np.float32)
        if arr.shape != (self.k, self.dim):
            raise DataError(f"centroid shape {arr.shape} != ({self.k}, {self.dim})")
        if self.k < 1 or self.dim < 1:
            raise DataError("k and dim must be >= 1")
        if not np.all(np.isfinite(arr)):
            raise DataError("centroids contain non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "centroids", arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KMeansModel):
            return NotImplemented
        return (
            self.k == other.k
            and self.dim == other.dim
            and self.seed == other.seed
            and self.centroids.tobytes() == other.centroids.tobytes()
        )

    def fingerprint_source(self) -> bytes:
        """Bytes that determine every token this model can ever emit."""
        return self.centroids.tobytes()


def _squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # ||x||^2 - 2 x.c + ||c||^2; float64 throughout, negatives from rounding
    # clamped so argmin ties stay exact on symmetric inputs.
    d2 = (
        np.einsum("ij,ij->i", x, x)[:, None]
        - 2.0 * (x @ centroids.T)
        + np.einsum("ij,ij->i", centroids, centroids)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = x[first]
    if k == 1:
        return centroids
    d2 = _squared_distances(x, centroids[:1])[:, 0]
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            # inverse-CDF draw keeps the sampling rule explicit and seeded
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(d2), r, side="right"))
            idx = min(idx, n - 1)
        centroids[j] = x[idx]
        d2 = np.minimum(d2, _squared_distances(x, centroids[j:j + 1])[:, 0])
    return centroids


def train_kmeans(
    frames: list[FeatureMatrix],
    k: int,
    seed: int,
    max_iters: int = 100,
    rel_tol: float = 1e-6,
    max_train_frames: int | None = None,
) -> KMeansModel:
    """Train a k-means codebook on the pooled frames of ``frames``.

    Deterministic given (inputs, k, seed, max_iters, rel_tol,
    max_train_frames). Stops when the relative SSE improvement drops below
    ``rel_tol`` or after ``max_iters`` Lloyd iterations; the recorded SSE
    sequence is non-increasing.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if not frames:
        raise DataError("no feature matrices supplied")
    dim = frames[0].dim
    for m in frames:
        if m.dim != dim:
            raise DimensionError(f"{m.utt_id}: dim {m.dim} != {dim}")
    x = np.concatenate([m.data for m in frames]).astype(np.float64)

    rng = np.random.default_rng(seed)
    if max_train_frames is not None and x.shape[0] > max_train_frames:
        keep = rng.choice(x.shape[0], size=max_train_frames, replace=False)
        keep.sort()
        x = x[keep]
    n = x.shape[0]
    if n < k:
        raise DataError(f"need at least k={k} frames, got {n}")

    centroids = _kmeanspp_init(x, k, rng)

    sse_history: list[float] = []
    prev_sse: float | None = None
    iters_run = 0
    for _ in range(max_iters):
        d2 = _squared_distances(x, centroids)
        labels = np.argmin(d2, axis=1)
        sse = float(d2[np.arange(n), labels].sum())
        sse_history.append(sse)
        iters_run += 1
        if prev_sse is not None:
            if prev_sse == 0.0 or (prev_sse - sse) < rel_tol * prev_sse:
                break
        prev_sse = sse

        sums = np.zeros_like(centroids)
        np.add.at(sums, labels, x)
        counts = np.bincount(labels, minlength=k)
        reseeded: set[int] = set()
        for c in range(k):
            if counts[c] == 0:
                # re-seed a dead cluster to the point farthest from it
                dist_c = _squared_distances(x, centroids[c:c + 1])[:, 0]
                order = np.argsort(dist_c, kind="stable")
                pick = int(order[-1])
                for cand in order[::-1]:
                    if int(cand) not in reseeded:
                        pick = int(cand)
                        break
                reseeded.add(pick)
                centroids[c] = x[pick]
            else:
                centroids[c] = sums[c] / counts[c]

    return KMeansModel(
        k=k,
        dim=dim,
        centroids=centroids.astype(np.float32),
        seed=seed,
        iters_run=iters_run,
        final_sse=sse_history[-1],
        sse_history=tuple(sse_history),
    )


def assign_tokens(model: KMeansModel, m: FeatureMatrix) -> TokenSequence:
    """Map each frame to its nearest centroid; ties go to the lowest index."""
    if m.dim != model.dim:
        raise DimensionError(f"{m.utt_id}: feature dim {m.dim} != model dim {model.dim}")
    x = m.data.astype(np.float64)
    c = model.centroids.astype(np.float64)
    labels = np.argmin(_squared_distances(x, c), axis=1)
    return TokenSequence(utt_id=m.utt_id, tokens=tuple(int(t) for t in labels))


def collapse_repeats(seq: TokenSequence) -> TokenSequence:
    """Collapse maximal runs of equal adjacent tokens to a single token."""
    if len(seq.tokens) == 0:
        raise DataError(f"{seq.utt_id}: empty token sequence")
    return TokenSequence(utt_id=seq.utt_id, tokens=tuple(t for t, _ in groupby(seq.tokens)))


def save_kmeans_model(model: KMeansModel, path) -> None:
    header = _KMEANS_HEADER.pack(KMEANS_MAGIC, KMEANS_VERSION, model.k, model.dim, model.seed)
    with open(path, "wb") as f:
        f.write(header)
        f.write(model.centroids.tobytes())


def load_kmeans_model(path) -> KMeansModel:
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _KMEANS_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, k, dim, seed = _KMEANS_HEADER.unpack_from(raw)
    if magic != KMEANS_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != KMEANS_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    payload = raw[_KMEANS_HEADER.size:]
    if len(payload) != k * dim * 4:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {k * dim * 4}")
    centroids = np.frombuffer(payload, dtype="<f4").reshape(k, dim)
    return KMeansModel(k=k, dim=dim, centroids=centroids, seed=seed)
