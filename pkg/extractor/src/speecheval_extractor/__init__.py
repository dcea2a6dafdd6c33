"""Feature/token extraction from waveforms via pretrained speech encoders.

Companion to the ``speecheval`` scoring toolkit: reads WAV files, runs a
self-supervised encoder's chosen hidden layer, and writes feature and token
files in the toolkit's binary/text formats.
"""

from .audio import SAMPLE_RATE, Waveform, load_wav, time_stretch
from .encoder import MODEL_ALIASES, SpeechEncoder
from .errors import AudioError, ExtractorError, FileFormatError, ModelError
from .pipeline import (
    ExtractorConfig,
    assign_codebook_tokens,
    batch_extract,
    extract_features,
    extract_tokens,
)

__version__ = "0.1.0"

__all__ = [
    "AudioError",
    "ExtractorConfig",
    "ExtractorError",
    "FileFormatError",
    "MODEL_ALIASES",
    "ModelError",
    "SAMPLE_RATE",
    "SpeechEncoder",
    "Waveform",
    "assign_codebook_tokens",
    "batch_extract",
    "extract_features",
    "extract_tokens",
    "load_wav",
    "time_stretch",
]
