"""Shared data types and the bit-exact file formats every other module consumes.

Feature files (``.feat``, binary, little-endian):
    bytes 0-3   magic ``SPFT``
    bytes 4-7   format version, 32-bit unsigned (currently 1)
    bytes 8-11  n_frames, 32-bit unsigned
    bytes 12-15 dim, 32-bit unsigned
    bytes 16-19 reserved, must be 0
    then n_frames * dim IEEE-754 float32 values, row-major.

The utterance id is not stored in the file; readers derive it from the
file name stem, so features live in ``<utt_id>.feat``.

Token files (text, UTF-8, LF): one utterance per line,
``<utt_id><TAB><token> <token> ...``.

Manifests (CSV, UTF-8): header ``utt_id,system_id,gen_path,ref_path,rating``.

Score reports (JSON): keys ``metric``, ``config``, ``scores`` plus an
optional ``extras`` block for per-utterance auxiliary values.
"""

from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError

FEATURE_MAGIC = b"SPFT"
FEATURE_VERSION = 1
_FEATURE_HEADER = struct.Struct("<4sIIII")

MANIFEST_COLUMNS = ("utt_id", "system_id", "gen_path", "ref_path", "rating")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """One utterance's sequence of frame-level features, float32, row-major."""

    utt_id: str
    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float32)
        if arr.ndim != 2:
            raise DataError(f"{self.utt_id}: feature data must be 2-D, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"{self.utt_id}: feature matrix must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{self.utt_id}: feature matrix contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.utt_id == other.utt_id
            and self.data.shape == other.data.shape
            and self.data.tobytes() == other.data.tobytes()
        )

    def __hash__(self):
        return hash((self.utt_id, self.data.shape, self.data.tobytes()))


@dataclass(frozen=True)
class TokenSequence:
    """An ordered sequence of discrete unit ids for one utterance."""

    utt_id: str
    tokens: tuple[int, ...]

    def __post_init__(self):
        toks = tuple(int(t) for t in self.tokens)
        if len(toks) == 0:
            raise DataError(f"{self.utt_id}: token sequence is empty")
        if any(t < 0 for t in toks):
            raise DataError(f"{self.utt_id}: token ids must be non-negative")
        object.__setattr__(self, "tokens", toks)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class EvalPair:
    """One manifest row: a generated/reference pair with its human rating."""

    utt_id: str
    system_id: str
    gen_path: str
    ref_path: str
    rating: float

    def __post_init__(self):
        if not self.gen_path or not self.ref_path:
            raise DataError(f"{self.utt_id}: gen_path and ref_path must be non-empty")
        if not math.isfinite(self.rating):
            raise DataError(f"{self.utt_id}: rating must be finite, got {self.rating!r}")


@dataclass(frozen=True)
class ScoreReport:
    """Per-utterance metric values plus the configuration that produced them.

    ``scores`` preserves insertion (manifest) order; ``extras`` holds optional
    per-utterance auxiliary values such as raw edit distances.
    """

    metric: str
    config: dict
    scores: dict[str, float]
    extras: dict[str, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        for utt_id, value in self.scores.items():
            if not math.isfinite(value):
                raise DataError(f"{utt_id}: score must be finite, got {value!r}")


# ---------------------------------------------------------------------------
# feature files
# ---------------------------------------------------------------------------


def write_feature_file(m: FeatureMatrix, path) -> None:
    """Write ``m`` in the SPFT binary layout; byte-deterministic."""
    if not np.all(np.isfinite(m.data)):
        raise DataError(f"{m.utt_id}: refusing to write non-finite features")
    header = _FEATURE_HEADER.pack(FEATURE_MAGIC, FEATURE_VERSION, m.n_frames, m.dim, 0)
    with open(path, "wb") as f:
        f.write(header)
        f.write(m.data.tobytes())


def read_feature_file(path) -> FeatureMatrix:
    """Read an SPFT file; the utterance id is the file name stem."""
    path = Path(path)
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _FEATURE_HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, n_frames, dim, reserved = _FEATURE_HEADER.unpack_from(raw)
    if magic != FEATURE_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != FEATURE_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if n_frames < 1 or dim < 1:
        raise FormatError(f"{path}: invalid dimensions {n_frames}x{dim}")
    if reserved != 0:
        raise FormatError(f"{path}: reserved header field is {reserved}, expected 0")
    expected = n_frames * dim * 4
    payload = raw[_FEATURE_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes, header declares {expected}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(n_frames, dim)
    if not np.all(np.isfinite(data)):
        raise DataError(f"{path}: payload contains non-finite values")
    return FeatureMatrix(utt_id=path.stem, data=data)


# ---------------------------------------------------------------------------
# token files
# ---------------------------------------------------------------------------


def write_token_file(seqs: list[TokenSequence], path) -> None:
    """Write one ``<utt_id><TAB>tok tok ...`` line per sequence, LF endings."""
    lines = []
    for seq in seqs:
        if len(seq.tokens) == 0:
            raise DataError(f"{seq.utt_id}: empty token sequence")
        lines.append(f"{seq.utt_id}\t{' '.join(str(t) for t in seq.tokens)}\n")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.writelines(lines)


def read_token_file(path) -> list[TokenSequence]:
    """Parse a token file; raises FormatError with the offending line number."""
    seqs = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if "\t" not in line:
                raise FormatError(f"{path}: line {lineno}: expected '<utt_id><TAB>tokens'")
            utt_id, _, rest = line.partition("\t")
            fields = rest.split()
            if not fields:
                raise FormatError(f"{path}: line {lineno}: no tokens")
            tokens = []
            for tok in fields:
                try:
                    value = int(tok)
                except ValueError:
                    raise FormatError(
                        f"{path}: line {lineno}: non-integer token {tok!r}"
                    ) from None
                if value < 0:
                    raise FormatError(f"{path}: line {lineno}: negative token {value}")
                tokens.append(value)
            seqs.append(TokenSequence(utt_id=utt_id, tokens=tuple(tokens)))
    return seqs


def index_token_file(path) -> dict[str, TokenSequence]:
    """Read a token file into a utt_id-keyed map; duplicate ids are an error."""
    index: dict[str, TokenSequence] = {}
    for seq in read_token_file(path):
        if seq.utt_id in index:
            raise DataError(f"{path}: duplicate utt_id {seq.utt_id!r}")
        index[seq.utt_id] = seq
    return index


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------


def parse_manifest(path) -> list[EvalPair]:
    """Parse an evaluation manifest CSV into EvalPair rows."""
    pairs: list[EvalPair] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: missing header row")
        missing = [c for c in MANIFEST_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise FormatError(f"{path}: missing column(s) {', '.join(missing)}")
        for row in reader:
            utt_id = row["utt_id"]
            if utt_id in seen:
                raise DataError(f"{path}: duplicate utt_id {utt_id!r}")
            seen.add(utt_id)
            try:
                rating = float(row["rating"])
            except (TypeError, ValueError):
                raise DataError(f"{path}: {utt_id}: unparseable rating {row['rating']!r}") from None
            if not math.isfinite(rating):
                raise DataError(f"{path}: {utt_id}: non-finite rating {row['rating']!r}")
            pairs.append(
                EvalPair(
                    utt_id=utt_id,
                    system_id=row["system_id"],
                    gen_path=row["gen_path"],
                    ref_path=row["ref_path"],
                    rating=rating,
                )
            )
    return pairs


def write_manifest(pairs: list[EvalPair], path) -> None:
    """Write EvalPair rows back to manifest CSV, LF endings, deterministic."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_COLUMNS)
    for p in pairs:
        writer.writerow([p.utt_id, p.system_id, p.gen_path, p.ref_path, repr(p.rating)])
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(buf.getvalue())


# ---------------------------------------------------------------------------
# score reports
# ---------------------------------------------------------------------------


def write_report(report: ScoreReport, path) -> None:
    """Serialize a report as JSON; identical reports produce identical bytes."""
    doc = {"metric": report.metric, "config": report.config, "scores": report.scores}
    if report.extras:
        doc["extras"] = report.extras
    with open(path, "w", encoding="utf-8", newline="") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def read_report(path) -> ScoreReport:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}: invalid JSON: {e}") from None
    for key in ("metric", "config", "scores"):
        if key not in doc:
            raise FormatError(f"{path}: missing key {key!r}")
    scores = {utt: float(v) for utt, v in doc["scores"].items()}
    return ScoreReport(
        metric=doc["metric"],
        config=doc["config"],
        scores=scores,
        extras=doc.get("extras", {}),
    )
