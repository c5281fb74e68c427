"""Objective evaluation: framewise phoneme accuracy, pitch error in cents,
word error rate, and Pearson correlation.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .core import FrameLabels, PitchContour, Ppg
from .errors import ValidationError

# Frames count as voiced only when periodicity is strictly above this.
PERIODICITY_THRESHOLD = 0.1625

CENTS_PER_OCTAVE = 1200.0

_PUNCTUATION_TABLE = str.maketrans("", "", string.punctuation)


@dataclass(frozen=True)
class VoicingMask:
    """Frame indices where both compared contours are voiced."""

    frames: frozenset[int]
    threshold: float = PERIODICITY_THRESHOLD

    def __len__(self) -> int:
        return len(self.frames)


def voicing_mask(
    a: PitchContour,
    b: PitchContour,
    threshold: float = PERIODICITY_THRESHOLD,
) -> VoicingMask:
    """Frames whose periodicity exceeds the threshold in both contours."""
    _check_contour_pair(a, b)
    voiced = (a.periodicity > threshold) & (b.periodicity > threshold)
    return VoicingMask(frozenset(int(t) for t in np.flatnonzero(voiced)), threshold)


def delta_cents(
    a: PitchContour,
    b: PitchContour,
    threshold: float = PERIODICITY_THRESHOLD,
) -> float:
    """Mean absolute pitch error in cents over the joint voicing mask.

    One octave of error is exactly 1200 cents; a semitone is 100.
    """
    mask = voicing_mask(a, b, threshold)
    if not mask.frames:
        raise ValidationError(
            "voicing mask is empty: no frame is voiced in both contours"
        )
    idx = np.fromiter(sorted(mask.frames), dtype=np.int64)
    ya = a.f0_hz[idx]
    yb = b.f0_hz[idx]
    if (ya <= 0).any() or (yb <= 0).any():
        t = int(idx[np.flatnonzero((ya <= 0) | (yb <= 0))[0]])
        raise ValidationError(f"non-positive f0 at voiced frame {t}")
    return float(CENTS_PER_OCTAVE * np.mean(np.abs(np.log2(ya / yb))))


def framewise_accuracy(ppg: Ppg, truth: FrameLabels) -> float:
    """Fraction of frames whose argmax phoneme matches the ground truth."""
    if ppg.num_frames != len(truth):
        raise ValidationError(
            f"frame count mismatch: {ppg.num_frames} vs {len(truth)}"
        )
    if ppg.num_frames == 0:
        raise ValidationError("cannot compute accuracy over zero frames")
    if truth.labels.size and int(truth.labels.max()) >= ppg.num_phonemes:
        raise ValidationError(
            f"truth label {int(truth.labels.max())} outside phoneme set of size "
            f"{ppg.num_phonemes}"
        )
    predicted = np.argmax(ppg.frames, axis=1)
    return float(np.mean(predicted == truth.labels))


def normalize_words(text_or_words: Union[str, Sequence[str]]) -> list[str]:
    """Lowercase, strip punctuation, and drop tokens that become empty."""
    if isinstance(text_or_words, str):
        words = text_or_words.split()
    else:
        words = [str(w) for w in text_or_words]
    cleaned = (w.lower().translate(_PUNCTUATION_TABLE) for w in words)
    return [w for w in cleaned if w]


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Edit distance with unit insertion, deletion, and substitution costs."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, item_a in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, item_b in enumerate(b, start=1):
            cost = 0 if item_a == item_b else 1
            current[j] = min(
                previous[j] + 1,        # deletion
                current[j - 1] + 1,     # insertion
                previous[j - 1] + cost, # substitution
            )
        previous = current
    return previous[-1]


def word_error_rate(
    reference: Union[str, Sequence[str]],
    hypothesis: Union[str, Sequence[str]],
) -> float:
    """Word-level edit distance over reference length, clamped to 1.0.

    Raw WER can exceed 1 with enough insertions; the clamp keeps the result
    a fraction between zero and one.
    """
    ref = normalize_words(reference)
    hyp = normalize_words(hypothesis)
    if not ref:
        raise ValidationError("reference transcript is empty after normalization")
    return min(1.0, levenshtein(ref, hyp) / len(ref))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, clamped to [-1, 1]."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 3:
        raise ValidationError(f"need at least 3 points, got {x.size}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValidationError("correlation inputs must be finite")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.dot(xc, xc)))
    sy = float(np.sqrt(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("constant series has no defined correlation")
    r = float(np.dot(xc, yc) / (sx * sy))
    return max(-1.0, min(1.0, r))


def _check_contour_pair(a: PitchContour, b: PitchContour) -> None:
    if len(a) != len(b):
        raise ValidationError(f"contour length mismatch: {len(a)} vs {len(b)}")
    if abs(a.hop_seconds - b.hop_seconds) > 1e-9:
        raise ValidationError(
            f"contour hop mismatch: {a.hop_seconds} vs {b.hop_seconds}"
        )
