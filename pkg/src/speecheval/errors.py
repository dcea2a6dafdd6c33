"""Exception hierarchy shared by all speecheval modules."""


class SpeechEvalError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(SpeechEvalError):
    """A file is malformed: bad magic, truncated payload, unparseable line."""


class DataError(SpeechEvalError):
    """Well-formed input carries invalid data (NaN, empty sequence, duplicate id)."""


class DimensionError(SpeechEvalError):
    """Operands have incompatible feature dimensions."""


class DegenerateWeightError(SpeechEvalError):
    """An importance-weighted mean has a zero denominator."""


class DegenerateInputError(SpeechEvalError):
    """Correlation input is too short or constant."""


class JoinError(SpeechEvalError):
    """A score report names an utterance absent from the manifest."""
