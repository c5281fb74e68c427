"""Core in-memory types: phoneme inventories, posteriorgrams, frame labels,
alignments, pitch contours, and argmax run sequences.

All types are immutable after construction and safe to share across threads.
Constructors enforce structural invariants (shapes, positive hop); content
invariants on probability matrices are checked by :func:`validate`, which
reports violations as data rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import ValidationError

# The 39 CMU Pronouncing Dictionary phoneme classes, alphabetical.
CMU_PHONEMES = (
    "aa", "ae", "ah", "ao", "aw", "ay", "b", "ch", "d", "dh", "eh", "er",
    "ey", "f", "g", "hh", "ih", "iy", "jh", "k", "l", "m", "n", "ng", "ow",
    "oy", "p", "r", "s", "sh", "t", "th", "uh", "uw", "v", "w", "y", "z",
    "zh",
)

# Label for non-speech frames; indexed last in the canonical inventory so
# the 39 CMU indices stay stable.
SILENCE = "sil"

DEFAULT_HOP_SECONDS = 0.010

# Float accumulation over 40 entries; frames are renormalized exactly by
# every operation that constructs them, so this only absorbs storage noise.
FRAME_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class PhonemeSet:
    """Ordered phoneme inventory with case-insensitive label lookup."""

    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise ValidationError("phoneme set must contain at least one label")
        index: dict[str, int] = {}
        for position, label in enumerate(labels):
            key = label.casefold()
            if not key:
                raise ValidationError("empty phoneme label")
            if key in index:
                raise ValidationError(f"duplicate phoneme label {label!r}")
            index[key] = position
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __contains__(self, label: str) -> bool:
        return str(label).casefold() in self._index

    def index_of(self, label: str) -> int:
        try:
            return self._index[str(label).casefold()]
        except KeyError:
            raise ValidationError(f"unknown phoneme label {label!r}") from None

    @property
    def silence_index(self) -> Optional[int]:
        return self._index.get(SILENCE)


_CANONICAL: Optional[PhonemeSet] = None


def canonical_phoneme_set() -> PhonemeSet:
    """The 39 CMU phonemes plus silence, silence last (40 labels total)."""
    global _CANONICAL
    if _CANONICAL is None:
        _CANONICAL = PhonemeSet(CMU_PHONEMES + (SILENCE,))
    return _CANONICAL


@dataclass(frozen=True, eq=False)
class Ppg:
    """Frame-major matrix of per-frame phoneme probabilities.

    ``frames[t, p]`` is the probability that frame ``t`` is phoneme ``p``.
    Held as float64 in memory; the binary container quantizes to float32
    (see :mod:`ppgkit.formats`).
    """

    phoneme_set: PhonemeSet
    frames: np.ndarray
    hop_seconds: float = DEFAULT_HOP_SECONDS

    def __post_init__(self):
        hop = float(self.hop_seconds)
        if not math.isfinite(hop) or hop <= 0:
            raise ValidationError(f"hop_seconds must be positive, got {hop}")
        arr = np.array(self.frames, dtype=np.float64, copy=True)
        if arr.size == 0:
            arr = arr.reshape(0, len(self.phoneme_set))
        if arr.ndim != 2:
            raise ValidationError(f"frames must be a 2-D matrix, got shape {arr.shape}")
        if arr.shape[1] != len(self.phoneme_set):
            raise ValidationError(
                f"frames have {arr.shape[1]} columns but the phoneme set "
                f"has {len(self.phoneme_set)} labels"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "frames", arr)
        object.__setattr__(self, "hop_seconds", hop)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_phonemes(self) -> int:
        return self.frames.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Ppg):
            return NotImplemented
        return (
            self.phoneme_set == other.phoneme_set
            and self.hop_seconds == other.hop_seconds
            and np.array_equal(self.frames, other.frames)
        )


@dataclass(frozen=True, eq=False)
class FrameLabels:
    """Per-frame phoneme indices at a fixed hop."""

    labels: np.ndarray
    hop_seconds: float = DEFAULT_HOP_SECONDS

    def __post_init__(self):
        hop = float(self.hop_seconds)
        if not math.isfinite(hop) or hop <= 0:
            raise ValidationError(f"hop_seconds must be positive, got {hop}")
        arr = np.array(self.labels, dtype=np.int64, copy=True)
        if arr.size == 0:
            arr = arr.reshape(0)
        if arr.ndim != 1:
            raise ValidationError(f"labels must be 1-D, got shape {arr.shape}")
        if arr.size and int(arr.min()) < 0:
            raise ValidationError("phoneme indices must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)
        object.__setattr__(self, "hop_seconds", hop)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, FrameLabels):
            return NotImplemented
        return self.hop_seconds == other.hop_seconds and np.array_equal(
            self.labels, other.labels
        )


class Interval(NamedTuple):
    start: float
    end: float
    label: str


@dataclass(frozen=True)
class Alignment:
    """Sorted, non-overlapping labeled time intervals."""

    intervals: tuple[Interval, ...]

    def __post_init__(self):
        intervals = tuple(
            Interval(float(s), float(e), str(label)) for s, e, label in self.intervals
        )
        previous: Optional[Interval] = None
        for interval in intervals:
            if interval.start >= interval.end:
                raise ValidationError(
                    f"interval {interval.label!r} has start {interval.start} "
                    f">= end {interval.end}"
                )
            if previous is not None and interval.start < previous.end:
                raise ValidationError(
                    f"intervals overlap or are unsorted near {previous.label!r} "
                    f"({previous.start}, {previous.end}) and {interval.label!r} "
                    f"({interval.start}, {interval.end})"
                )
            previous = interval
        object.__setattr__(self, "intervals", intervals)

    @property
    def end_time(self) -> float:
        return self.intervals[-1].end if self.intervals else 0.0


@dataclass(frozen=True, eq=False)
class PitchContour:
    """Per-frame fundamental frequency (Hz) and periodicity at a fixed hop."""

    hop_seconds: float
    f0_hz: np.ndarray
    periodicity: np.ndarray

    def __post_init__(self):
        hop = float(self.hop_seconds)
        if not math.isfinite(hop) or hop <= 0:
            raise ValidationError(f"hop_seconds must be positive, got {hop}")
        f0 = np.array(self.f0_hz, dtype=np.float64, copy=True).reshape(-1)
        periodicity = np.array(self.periodicity, dtype=np.float64, copy=True).reshape(-1)
        if f0.shape != periodicity.shape:
            raise ValidationError(
                f"f0 and periodicity lengths differ: {f0.size} vs {periodicity.size}"
            )
        if periodicity.size and (
            periodicity.min() < 0.0 or periodicity.max() > 1.0
        ):
            raise ValidationError("periodicity values must lie in [0, 1]")
        f0.setflags(write=False)
        periodicity.setflags(write=False)
        object.__setattr__(self, "hop_seconds", hop)
        object.__setattr__(self, "f0_hz", f0)
        object.__setattr__(self, "periodicity", periodicity)

    def __len__(self) -> int:
        return self.f0_hz.shape[0]


class Run(NamedTuple):
    phoneme: int
    start: int
    length: int


@dataclass(frozen=True)
class RunSequence:
    """Maximal constant-phoneme segments tiling frames 0..T-1."""

    runs: tuple[Run, ...]

    def __post_init__(self):
        runs = tuple(Run(int(p), int(s), int(n)) for p, s, n in self.runs)
        expected_start = 0
        previous_phoneme: Optional[int] = None
        for run in runs:
            if run.length < 1:
                raise ValidationError(f"run at frame {run.start} has length {run.length}")
            if run.phoneme < 0:
                raise ValidationError("run phoneme index must be non-negative")
            if run.start != expected_start:
                raise ValidationError(
                    f"runs must tile frames contiguously: expected start "
                    f"{expected_start}, got {run.start}"
                )
            if run.phoneme == previous_phoneme:
                raise ValidationError(
                    f"adjacent runs at frame {run.start} share phoneme {run.phoneme}"
                )
            expected_start += run.length
            previous_phoneme = run.phoneme
        object.__setattr__(self, "runs", runs)

    @property
    def num_frames(self) -> int:
        return sum(run.length for run in self.runs)

    @property
    def phonemes(self) -> tuple[int, ...]:
        """The run-level phoneme sequence (substrate for rule matching)."""
        return tuple(run.phoneme for run in self.runs)

    def expand(self) -> np.ndarray:
        """Frame-level phoneme indices; inverse of run_length_encode."""
        out = np.empty(self.num_frames, dtype=np.int64)
        for run in self.runs:
            out[run.start : run.start + run.length] = run.phoneme
        return out


class Violation(NamedTuple):
    """One broken invariant; ``frame`` is None for whole-matrix issues."""

    invariant: str
    frame: Optional[int]
    message: str


def from_logits(
    logits,
    phoneme_set: PhonemeSet,
    hop_seconds: float = DEFAULT_HOP_SECONDS,
) -> Ppg:
    """Convert raw per-frame scores to distributions with a stable softmax.

    Rows are shifted by their maximum before exponentiation, so the result
    is invariant to per-frame constant offsets and cannot overflow.
    """
    arr = np.array(logits, dtype=np.float64, copy=True)
    if arr.size == 0:
        arr = arr.reshape(0, len(phoneme_set))
    if arr.ndim != 2:
        raise ValidationError(f"logits must be a 2-D matrix, got shape {arr.shape}")
    if arr.shape[1] != len(phoneme_set):
        raise ValidationError(
            f"logits have {arr.shape[1]} columns but the phoneme set "
            f"has {len(phoneme_set)} labels"
        )
    bad = ~np.isfinite(arr)
    if bad.any():
        t, p = (int(v) for v in np.argwhere(bad)[0])
        raise ValidationError(
            f"non-finite logit at frame {t}, phoneme {phoneme_set.labels[p]!r} "
            f"(index {p})"
        )
    if arr.shape[0]:
        shifted = arr - arr.max(axis=1, keepdims=True)
        probs = np.exp(shifted)
        probs /= probs.sum(axis=1, keepdims=True)
    else:
        probs = arr
    return Ppg(phoneme_set, probs, hop_seconds)


def argmax_collapse(ppg: Ppg) -> FrameLabels:
    """Per-frame most probable phoneme; ties resolve to the lowest index."""
    return FrameLabels(np.argmax(ppg.frames, axis=1), ppg.hop_seconds)


def run_length_encode(labels: FrameLabels) -> RunSequence:
    """Collapse frame labels into maximal runs of equal consecutive values."""
    arr = labels.labels
    if arr.size == 0:
        return RunSequence(())
    changes = np.flatnonzero(arr[1:] != arr[:-1]) + 1
    starts = np.concatenate(([0], changes))
    ends = np.concatenate((changes, [arr.size]))
    return RunSequence(
        tuple(Run(int(arr[s]), int(s), int(e - s)) for s, e in zip(starts, ends))
    )


def validate(ppg: Ppg) -> list[Violation]:
    """Check content invariants; an empty list means the PPG is valid."""
    violations: list[Violation] = []
    frames = ppg.frames

    finite = np.isfinite(frames)
    for t in np.flatnonzero(~finite.all(axis=1)):
        violations.append(
            Violation("finite", int(t), f"frame {int(t)} contains non-finite entries")
        )

    out_of_range = ((frames < 0.0) | (frames > 1.0)) & finite
    for t in np.flatnonzero(out_of_range.any(axis=1)):
        p = int(np.flatnonzero(out_of_range[t])[0])
        violations.append(
            Violation(
                "range",
                int(t),
                f"frame {int(t)}: entry {frames[t, p]!r} at phoneme index {p} "
                f"outside [0, 1]",
            )
        )

    sums = frames.sum(axis=1)
    # NaN sums compare False and are already reported as "finite" violations.
    for t in np.flatnonzero(np.abs(sums - 1.0) > FRAME_SUM_TOLERANCE):
        violations.append(
            Violation(
                "sum",
                int(t),
                f"frame {int(t)} sums to {sums[t]!r}, expected 1 within "
                f"{FRAME_SUM_TOLERANCE}",
            )
        )
    return violations
