"""Pretrained self-supervised speech encoder wrapper (CPU inference)."""

from __future__ import annotations

import hashlib
from functools import reduce

import numpy as np
import torch
from transformers import AutoModel

from .errors import ModelError

# friendly aliases for the published checkpoints; any hub id or local
# save_pretrained directory also works as a model reference
MODEL_ALIASES = {
    "wav2vec2-base": "facebook/wav2vec2-base",
    "wav2vec2-large": "facebook/wav2vec2-large",
    "hubert-base": "facebook/hubert-base-ls960",
    "hubert-large": "facebook/hubert-large-ll60k",
    "wavlm-base": "microsoft/wavlm-base",
    "wavlm-base+": "microsoft/wavlm-base-plus",
    "wavlm-large": "microsoft/wavlm-large",
    "xlsr-53": "facebook/wav2vec2-large-xlsr-53",
}


class SpeechEncoder:
    """Loads an encoder once and emits hidden states of a chosen layer.

    Layers are indexed 1-based over transformer blocks (1 = closest to the
    input); the conv feature extractor's output itself is not exposed.
    """

    def __init__(self, model_ref: str):
        resolved = MODEL_ALIASES.get(model_ref, model_ref)
        try:
            self.model = AutoModel.from_pretrained(resolved)
        except Exception as e:
            raise ModelError(f"cannot load encoder {model_ref!r}: {e}") from None
        self.model.eval()
        self.model_ref = model_ref
        config = self.model.config
        for attr in ("num_hidden_layers", "hidden_size", "conv_kernel", "conv_stride"):
            if not hasattr(config, attr):
                raise ModelError(f"{model_ref!r} is not a supported speech encoder")
        self.num_layers = int(config.num_hidden_layers)
        self.dim = int(config.hidden_size)
        self._conv = list(zip(config.conv_kernel, config.conv_stride))
        self._fingerprint: str | None = None

    def frame_count(self, n_samples: int) -> int:
        """Frames the conv feature extractor produces for n_samples."""
        return reduce(lambda n, ks: (n - ks[0]) // ks[1] + 1, self._conv, n_samples)

    def min_samples(self) -> int:
        lo, hi = 1, 16000
        while self.frame_count(hi) < 1:
            hi *= 2
        while lo < hi:
            mid = (lo + hi) // 2
            if self.frame_count(mid) >= 1:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def extract(self, samples: np.ndarray, layer: int) -> np.ndarray:
        """Hidden states of transformer block ``layer``; (n_frames, dim) float32."""
        if not (1 <= layer <= self.num_layers):
            raise ModelError(
                f"layer {layer} out of range for {self.model_ref!r} "
                f"(1..{self.num_layers})"
            )
        if self.frame_count(len(samples)) < 1:
            raise ModelError(
                f"input too short: {len(samples)} samples yield no frames "
                f"(need >= {self.min_samples()})"
            )
        # copy: waveform buffers are read-only, from_numpy wants writable memory
        x = torch.from_numpy(np.array(samples, dtype=np.float32))[None, :]
        with torch.inference_mode():
            out = self.model(x, output_hidden_states=True)
        # hidden_states[0] is the pre-transformer projection, block i is [i]
        hs = out.hidden_states[layer][0]
        return hs.numpy().astype(np.float32)

    def fingerprint(self) -> str:
        """sha256 over parameter names and tensors in sorted name order."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for name, param in sorted(self.model.state_dict().items()):
                h.update(name.encode("utf-8"))
                h.update(param.detach().cpu().contiguous().numpy().tobytes())
            self._fingerprint = h.hexdigest()
        return self._fingerprint
