"""Waveform -> feature/token extraction with atomic file writes."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import formats
from .audio import Waveform, load_wav, time_stretch
from .encoder import SpeechEncoder
from .errors import ModelError

STRETCH_ALGORITHM = "linear-interpolation resampling (speed change, pitch follows rate)"


@dataclass(frozen=True)
class ExtractorConfig:
    model_id: str
    layer: int
    stretch_factor: float = 1.0
    output_dir: str | None = None


def extract_features(wav: Waveform, cfg: ExtractorConfig, encoder: SpeechEncoder | None = None) -> np.ndarray:
    """Hidden states of the configured layer as an (n_frames, dim) float32 array."""
    enc = encoder if encoder is not None else SpeechEncoder(cfg.model_id)
    return enc.extract(wav.samples, cfg.layer)


def assign_codebook_tokens(features: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid ids per frame; exact ties go to the lowest index."""
    if features.shape[1] != centroids.shape[1]:
        raise ModelError(
            f"feature dim {features.shape[1]} != codebook dim {centroids.shape[1]}"
        )
    x = features.astype(np.float64)
    c = centroids.astype(np.float64)
    d2 = (
        np.einsum("ij,ij->i", x, x)[:, None]
        - 2.0 * (x @ c.T)
        + np.einsum("ij,ij->i", c, c)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return np.argmin(d2, axis=1)


def extract_tokens(wav: Waveform, cfg: ExtractorConfig, kmeans_path, encoder: SpeechEncoder | None = None) -> np.ndarray:
    """Discrete unit ids for one waveform via the codebook at ``kmeans_path``."""
    features = extract_features(wav, cfg, encoder)
    centroids = formats.read_kmeans_centroids(kmeans_path)
    return assign_codebook_tokens(features, centroids)


def _write_atomic(write_fn, path: Path) -> None:
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        write_fn(tmp_name)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def batch_extract(
    wav_dir,
    cfg: ExtractorConfig,
    out_dir,
    kmeans_path=None,
) -> list[str]:
    """Extract every ``*.wav`` under ``wav_dir`` into ``out_dir``.

    Writes ``<utt_id>.feat`` per utterance (atomically), an optional
    ``tokens.txt`` when a codebook is given, and an ``extraction.json``
    sidecar recording the full extraction provenance.
    """
    wav_dir = Path(wav_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wavs = sorted(wav_dir.glob("*.wav"))
    if not wavs:
        raise ModelError(f"{wav_dir}: no .wav files found")

    encoder = SpeechEncoder(cfg.model_id)
    centroids = formats.read_kmeans_centroids(kmeans_path) if kmeans_path else None
    if centroids is not None and centroids.shape[1] != encoder.dim:
        raise ModelError(
            f"codebook dim {centroids.shape[1]} != encoder dim {encoder.dim}"
        )

    token_entries: list[tuple[str, np.ndarray]] = []
    utt_ids: list[str] = []
    for wav_path in wavs:
        utt_id = wav_path.stem
        wav = time_stretch(load_wav(wav_path), cfg.stretch_factor)
        features = encoder.extract(wav.samples, cfg.layer)
        _write_atomic(
            lambda tmp, data=features: formats.write_feature_file(data, tmp),
            out_dir / f"{utt_id}.feat",
        )
        if centroids is not None:
            token_entries.append((utt_id, assign_codebook_tokens(features, centroids)))
        utt_ids.append(utt_id)

    if token_entries:
        _write_atomic(
            lambda tmp: formats.write_token_file(token_entries, tmp),
            out_dir / "tokens.txt",
        )

    sidecar = {
        "model_id": cfg.model_id,
        "layer": cfg.layer,
        "stretch_factor": cfg.stretch_factor,
        "stretch_algorithm": STRETCH_ALGORITHM,
        "checkpoint_fingerprint": encoder.fingerprint(),
        "sample_rate": 16000,
        "utterances": utt_ids,
    }

    def write_sidecar(tmp):
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            json.dump(sidecar, f, indent=2)
            f.write("\n")

    _write_atomic(write_sidecar, out_dir / "extraction.json")
    return utt_ids
