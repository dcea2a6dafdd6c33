"""Byte-level writers/readers for the evaluation toolkit's file formats.

The extractor talks to the scoring toolkit only through files, so the
layouts here are load-bearing contracts:

Feature file: ``SPFT`` magic, u32 version 1, u32 n_frames, u32 dim,
u32 reserved 0 (all little-endian), then n_frames*dim float32 row-major.

Codebook file: ``SPKM`` magic, u32 version 1, u32 k, u32 dim, i64 seed,
then k*dim float32 centroids row-major.

Token file: UTF-8 text, one ``<utt_id><TAB>tok tok ...`` line per utterance.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FileFormatError

_FEATURE_HEADER = struct.Struct("<4sIIII")
_KMEANS_HEADER = struct.Struct("<4sIIIq")


def write_feature_file(data: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(data, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise FileFormatError(f"feature array must be 2-D and non-empty, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FileFormatError("feature array contains non-finite values")
    header = _FEATURE_HEADER.pack(b"SPFT", 1, arr.shape[0], arr.shape[1], 0)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.tobytes())


def read_feature_file(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _FEATURE_HEADER.size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, n_frames, dim, _reserved = _FEATURE_HEADER.unpack_from(raw)
    if magic != b"SPFT" or version != 1:
        raise FileFormatError(f"{path}: not a version-1 SPFT file")
    payload = raw[_FEATURE_HEADER.size:]
    if len(payload) != n_frames * dim * 4:
        raise FileFormatError(f"{path}: payload size mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(n_frames, dim)


def read_kmeans_centroids(path) -> np.ndarray:
    """Centroid matrix (k, dim) from a codebook file."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _KMEANS_HEADER.size:
        raise FileFormatError(f"{path}: truncated header")
    magic, version, k, dim, _seed = _KMEANS_HEADER.unpack_from(raw)
    if magic != b"SPKM" or version != 1:
        raise FileFormatError(f"{path}: not a version-1 SPKM file")
    payload = raw[_KMEANS_HEADER.size:]
    if len(payload) != k * dim * 4:
        raise FileFormatError(f"{path}: payload size mismatch")
    return np.frombuffer(payload, dtype="<f4").reshape(k, dim)


def write_token_file(entries: list[tuple[str, np.ndarray]], path) -> None:
    lines = []
    for utt_id, tokens in entries:
        if len(tokens) == 0:
            raise FileFormatError(f"{utt_id}: empty token sequence")
        lines.append(f"{utt_id}\t{' '.join(str(int(t)) for t in tokens)}\n")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.writelines(lines)
