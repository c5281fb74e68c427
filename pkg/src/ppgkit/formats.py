"""On-disk formats: the .ppg binary container, a JSON interchange encoding,
alignment and pitch TSVs, and the weights/similarity sidecars.

Binary layout, all little-endian:

    magic    4 bytes   "PPGF" (.ppg) / "PPGW" (weights) / "PPGS" (similarity)
    version  u32       1
    P        u32       phoneme count
    T        u32       frame count (.ppg only)
    hop      f64       hop in seconds (.ppg only)
    labels   P x (u32 byte length + UTF-8 bytes)
    payload  .ppg:        T*P float32, frame-major
             weights:     P uint64 ground-truth frame counts
             similarity:  P uint64 provenance counts, then P*P float64 row-major

The .ppg payload is float32, so write(read(s)) == s for any well-formed
stream, and read(write(x)) == x whenever x's probabilities are exactly
representable in float32. The binary forms are authoritative; the JSON and
TSV forms exist for the HTTP service and for human inspection.
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path
from typing import BinaryIO, NamedTuple, Optional, Union

import numpy as np

from .core import (
    Alignment,
    FrameLabels,
    PhonemeSet,
    PitchContour,
    Ppg,
    canonical_phoneme_set,
)
from .distance import ClassWeights, SimilarityMatrix, class_weights_from_counts
from .errors import (
    AlignmentFormatError,
    BadMagicError,
    FormatError,
    LabelCountMismatchError,
    PitchFormatError,
    TruncatedPayloadError,
    ValidationError,
    VersionMismatchError,
)

PPG_MAGIC = b"PPGF"
WEIGHTS_MAGIC = b"PPGW"
SIMILARITY_MAGIC = b"PPGS"
FORMAT_VERSION = 1

JSON_FORMAT_NAME = "ppg"

_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_F64 = struct.Struct("<d")


class PpgFileHeader(NamedTuple):
    """Parsed .ppg header; the float payload follows it in the stream."""

    version: int
    num_phonemes: int
    num_frames: int
    hop_seconds: float
    labels: tuple[str, ...]


def _read_exact(stream: BinaryIO, count: int, what: str) -> bytes:
    data = stream.read(count)
    if len(data) != count:
        raise TruncatedPayloadError(
            f"stream ended while reading {what}: wanted {count} bytes, "
            f"got {len(data)}"
        )
    return data


def _read_u32(stream: BinaryIO, what: str) -> int:
    return _U32.unpack(_read_exact(stream, 4, what))[0]


def _read_preamble(stream: BinaryIO, magic: bytes) -> int:
    """Check magic and version, return the phoneme count."""
    found = _read_exact(stream, 4, "magic")
    if found != magic:
        raise BadMagicError(f"bad magic {found!r}, expected {magic!r}")
    version = _read_u32(stream, "version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"unsupported format version {version}, expected {FORMAT_VERSION}"
        )
    return _read_u32(stream, "phoneme count")


def _read_labels(stream: BinaryIO, count: int) -> list[str]:
    labels: list[str] = []
    for position in range(count):
        try:
            length = _read_u32(stream, "label length")
            raw = _read_exact(stream, length, "label bytes")
        except TruncatedPayloadError:
            raise LabelCountMismatchError(
                f"header declares {count} phoneme labels but the stream "
                f"ended after {position}"
            ) from None
        try:
            labels.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise FormatError(f"label {position} is not valid UTF-8") from None
    return labels


def _write_labels(stream: BinaryIO, labels: tuple[str, ...]) -> None:
    for label in labels:
        raw = label.encode("utf-8")
        stream.write(_U32.pack(len(raw)))
        stream.write(raw)


def write_ppg(ppg: Ppg, stream: BinaryIO) -> None:
    """Serialize a posteriorgram; probabilities are quantized to float32."""
    stream.write(PPG_MAGIC)
    stream.write(_U32.pack(FORMAT_VERSION))
    stream.write(_U32.pack(ppg.num_phonemes))
    stream.write(_U32.pack(ppg.num_frames))
    stream.write(_F64.pack(ppg.hop_seconds))
    _write_labels(stream, ppg.phoneme_set.labels)
    stream.write(np.ascontiguousarray(ppg.frames, dtype="<f4").tobytes())


def read_ppg_header(stream: BinaryIO) -> PpgFileHeader:
    """Parse just the header, leaving the stream at the float payload."""
    num_phonemes = _read_preamble(stream, PPG_MAGIC)
    num_frames = _read_u32(stream, "frame count")
    hop_seconds = _F64.unpack(_read_exact(stream, 8, "hop"))[0]
    labels = _read_labels(stream, num_phonemes)
    return PpgFileHeader(
        FORMAT_VERSION, num_phonemes, num_frames, hop_seconds, tuple(labels)
    )


def read_ppg(stream: BinaryIO) -> Ppg:
    """Parse a .ppg stream; reads exactly the declared payload."""
    header = read_ppg_header(stream)
    payload = _read_exact(
        stream,
        header.num_frames * header.num_phonemes * 4,
        f"matrix payload ({header.num_frames} frames x "
        f"{header.num_phonemes} phonemes)",
    )
    frames = (
        np.frombuffer(payload, dtype="<f4")
        .reshape(header.num_frames, header.num_phonemes)
        .astype(np.float64)
    )
    return Ppg(PhonemeSet(header.labels), frames, header.hop_seconds)


def ppg_to_json_obj(ppg: Ppg, sig_digits: Optional[int] = None) -> dict:
    """JSON interchange encoding; the binary container stays authoritative."""
    frames = ppg.frames
    if sig_digits is not None:
        rows = [[float(f"{v:.{sig_digits}g}") for v in row] for row in frames]
    else:
        rows = [[float(v) for v in row] for row in frames]
    return {
        "format": JSON_FORMAT_NAME,
        "version": FORMAT_VERSION,
        "phonemes": list(ppg.phoneme_set.labels),
        "hop_seconds": ppg.hop_seconds,
        "frames": rows,
    }


def ppg_from_json_obj(obj) -> Ppg:
    """Decode the JSON interchange encoding ("format"/"version" optional)."""
    if not isinstance(obj, dict):
        raise FormatError("JSON posteriorgram must be an object")
    name = obj.get("format", JSON_FORMAT_NAME)
    if name != JSON_FORMAT_NAME:
        raise BadMagicError(f"bad format marker {name!r}, expected {JSON_FORMAT_NAME!r}")
    version = obj.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"unsupported format version {version!r}, expected {FORMAT_VERSION}"
        )
    for key in ("phonemes", "hop_seconds", "frames"):
        if key not in obj:
            raise FormatError(f"missing key {key!r}")
    phonemes = obj["phonemes"]
    if not isinstance(phonemes, list) or not all(isinstance(x, str) for x in phonemes):
        raise FormatError("'phonemes' must be a list of strings")
    rows = obj["frames"]
    if not isinstance(rows, list):
        raise FormatError("'frames' must be a list of rows")
    for t, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != len(phonemes):
            raise LabelCountMismatchError(
                f"frame {t} has {len(row) if isinstance(row, list) else '?'} "
                f"entries for {len(phonemes)} phonemes"
            )
    try:
        frames = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"frames are not numeric: {exc}") from None
    return Ppg(PhonemeSet(tuple(phonemes)), frames.reshape(len(rows), len(phonemes)), obj["hop_seconds"])


def save_ppg(ppg: Ppg, path: Union[str, Path]) -> None:
    """Write binary .ppg, or the JSON interchange when the suffix is .json."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(ppg_to_json_obj(ppg)))
        return
    with open(path, "wb") as stream:
        write_ppg(ppg, stream)


def load_ppg(path: Union[str, Path]) -> Ppg:
    """Read binary .ppg, or the JSON interchange when the suffix is .json."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            obj = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: invalid JSON: {exc}") from None
        return ppg_from_json_obj(obj)
    with open(path, "rb") as stream:
        return read_ppg(stream)


def read_alignment(text: str, phoneme_set: Optional[PhonemeSet] = None) -> Alignment:
    """Parse "start<TAB>end<TAB>phoneme" lines; '#' starts a comment."""
    if phoneme_set is None:
        phoneme_set = canonical_phoneme_set()
    intervals: list[tuple[float, float, str]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [piece.strip() for piece in line.split("\t")]
        if len(parts) != 3:
            raise AlignmentFormatError(
                f"line {number}: expected 'start<TAB>end<TAB>phoneme', got {raw!r}"
            )
        try:
            start = float(parts[0])
            end = float(parts[1])
        except ValueError:
            raise AlignmentFormatError(
                f"line {number}: bad interval bounds {parts[0]!r}, {parts[1]!r}"
            ) from None
        if start >= end:
            raise AlignmentFormatError(
                f"line {number}: start {start} >= end {end}"
            )
        if parts[2] not in phoneme_set:
            raise AlignmentFormatError(
                f"line {number}: unknown phoneme label {parts[2]!r}"
            )
        canonical = phoneme_set.labels[phoneme_set.index_of(parts[2])]
        intervals.append((start, end, canonical))
    intervals.sort(key=lambda iv: iv[0])
    for previous, current in zip(intervals, intervals[1:]):
        if current[0] < previous[1]:
            raise AlignmentFormatError(
                f"intervals overlap: ({previous[0]}, {previous[1]}, "
                f"{previous[2]!r}) and ({current[0]}, {current[1]}, {current[2]!r})"
            )
    return Alignment(tuple(intervals))


def alignment_to_frame_labels(
    alignment: Alignment,
    hop_seconds: float,
    num_frames: int,
    phoneme_set: Optional[PhonemeSet] = None,
) -> FrameLabels:
    """Rasterize intervals by frame-center sampling.

    Frame t takes the label of the interval containing its center time
    (t + 0.5) * hop, half-open on the right; uncovered frames are silence.
    """
    if phoneme_set is None:
        phoneme_set = canonical_phoneme_set()
    if hop_seconds <= 0 or not math.isfinite(hop_seconds):
        raise ValidationError(f"hop_seconds must be positive, got {hop_seconds}")
    if num_frames < 0:
        raise ValidationError(f"num_frames must be non-negative, got {num_frames}")
    centers = (np.arange(num_frames) + 0.5) * hop_seconds
    out = np.full(num_frames, -1, dtype=np.int64)
    for start, end, label in alignment.intervals:
        lo = int(np.searchsorted(centers, start, side="left"))
        hi = int(np.searchsorted(centers, end, side="left"))
        out[lo:hi] = phoneme_set.index_of(label)
    uncovered = out < 0
    if uncovered.any():
        silence = phoneme_set.silence_index
        if silence is None:
            raise ValidationError(
                "alignment leaves frames uncovered but the phoneme set has "
                "no silence label"
            )
        out[uncovered] = silence
    return FrameLabels(out, hop_seconds)


def alignment_frame_count(alignment: Alignment, hop_seconds: float) -> int:
    """Frames needed to cover the alignment: ceil(end_time / hop)."""
    if hop_seconds <= 0 or not math.isfinite(hop_seconds):
        raise ValidationError(f"hop_seconds must be positive, got {hop_seconds}")
    # The tiny slack keeps exact multiples from gaining a frame to rounding.
    return max(0, int(math.ceil(alignment.end_time / hop_seconds - 1e-9)))


def read_pitch(text: str) -> PitchContour:
    """Parse "time<TAB>f0_hz<TAB>periodicity" lines with a uniform time axis.

    The hop is inferred from the first time delta; all deltas must agree
    within 1e-6 s. f0 values are stored as-is; voicing decisions are the
    consumer's concern.
    """
    times: list[float] = []
    f0: list[float] = []
    periodicity: list[float] = []
    numbers: list[int] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [piece.strip() for piece in line.split("\t")]
        if len(parts) != 3:
            raise PitchFormatError(
                f"line {number}: expected 'time<TAB>f0_hz<TAB>periodicity', got {raw!r}"
            )
        try:
            row = [float(piece) for piece in parts]
        except ValueError:
            raise PitchFormatError(f"line {number}: bad number in {raw!r}") from None
        if not 0.0 <= row[2] <= 1.0:
            raise PitchFormatError(
                f"line {number}: periodicity {row[2]} outside [0, 1]"
            )
        times.append(row[0])
        f0.append(row[1])
        periodicity.append(row[2])
        numbers.append(number)
    if len(times) < 2:
        raise PitchFormatError(
            f"need at least two samples to infer the hop, got {len(times)}"
        )
    hop = times[1] - times[0]
    if hop <= 0:
        raise PitchFormatError(
            f"line {numbers[1]}: times must strictly increase"
        )
    for i in range(1, len(times)):
        delta = times[i] - times[i - 1]
        if abs(delta - hop) > 1e-6:
            raise PitchFormatError(
                f"line {numbers[i]}: non-uniform spacing, step {delta!r} "
                f"differs from {hop!r}"
            )
    return PitchContour(hop, np.array(f0), np.array(periodicity))


def write_class_weights(weights: ClassWeights, stream: BinaryIO) -> None:
    """Weights sidecar; counts alone determine the weights exactly."""
    stream.write(WEIGHTS_MAGIC)
    stream.write(_U32.pack(FORMAT_VERSION))
    stream.write(_U32.pack(len(weights.phoneme_set)))
    _write_labels(stream, weights.phoneme_set.labels)
    for count in weights.counts:
        stream.write(_U64.pack(count))


def read_class_weights(stream: BinaryIO) -> ClassWeights:
    size = _read_preamble(stream, WEIGHTS_MAGIC)
    labels = _read_labels(stream, size)
    counts = [
        _U64.unpack(_read_exact(stream, 8, f"count {i}"))[0] for i in range(size)
    ]
    return class_weights_from_counts(counts, PhonemeSet(tuple(labels)))


def write_similarity(similarity: SimilarityMatrix, stream: BinaryIO) -> None:
    """Similarity sidecar; float64 payload to preserve estimates exactly."""
    stream.write(SIMILARITY_MAGIC)
    stream.write(_U32.pack(FORMAT_VERSION))
    stream.write(_U32.pack(len(similarity.phoneme_set)))
    _write_labels(stream, similarity.phoneme_set.labels)
    for count in similarity.provenance:
        stream.write(_U64.pack(count))
    stream.write(np.ascontiguousarray(similarity.matrix, dtype="<f8").tobytes())


def read_similarity(stream: BinaryIO) -> SimilarityMatrix:
    size = _read_preamble(stream, SIMILARITY_MAGIC)
    labels = _read_labels(stream, size)
    provenance = [
        _U64.unpack(_read_exact(stream, 8, f"provenance {i}"))[0]
        for i in range(size)
    ]
    payload = _read_exact(stream, size * size * 8, "similarity payload")
    matrix = np.frombuffer(payload, dtype="<f8").reshape(size, size)
    return SimilarityMatrix(PhonemeSet(tuple(labels)), matrix, tuple(provenance))


def class_weights_tsv(weights: ClassWeights) -> str:
    """Human-readable weights table for inspection and plotting."""
    lines = ["# phoneme\tframes\tweight"]
    for label, count, weight in zip(
        weights.phoneme_set.labels, weights.counts, weights.weights
    ):
        lines.append(f"{label}\t{count}\t{float(weight)!r}")
    return "\n".join(lines) + "\n"


def similarity_tsv(similarity: SimilarityMatrix) -> str:
    """Heatmap-ready similarity table: one row per argmax phoneme."""
    labels = similarity.phoneme_set.labels
    lines = [
        "# rows: argmax phoneme; columns: average class-weighted probability",
        "# frames\t" + "\t".join(str(c) for c in similarity.provenance),
        "phoneme\t" + "\t".join(labels),
    ]
    for label, row in zip(labels, similarity.matrix):
        lines.append(label + "\t" + "\t".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def save_class_weights(weights: ClassWeights, path: Union[str, Path]) -> None:
    """Binary sidecar, or the TSV view when the suffix is .tsv."""
    path = Path(path)
    if path.suffix.lower() == ".tsv":
        path.write_text(class_weights_tsv(weights))
        return
    with open(path, "wb") as stream:
        write_class_weights(weights, stream)


def load_class_weights(path: Union[str, Path]) -> ClassWeights:
    with open(path, "rb") as stream:
        return read_class_weights(stream)


def save_similarity(similarity: SimilarityMatrix, path: Union[str, Path]) -> None:
    """Binary sidecar, or the TSV view when the suffix is .tsv."""
    path = Path(path)
    if path.suffix.lower() == ".tsv":
        path.write_text(similarity_tsv(similarity))
        return
    with open(path, "wb") as stream:
        write_similarity(similarity, stream)


def load_similarity(path: Union[str, Path]) -> SimilarityMatrix:
    with open(path, "rb") as stream:
        return read_similarity(stream)
