"""Extractor exception types."""


class ExtractorError(Exception):
    """Base class for extraction failures."""


class AudioError(ExtractorError):
    """Unreadable or unusable waveform input."""


class ModelError(ExtractorError):
    """Unknown encoder, bad layer index, or incompatible codebook."""


class FileFormatError(ExtractorError):
    """A feature/codebook file does not match its binary layout."""
