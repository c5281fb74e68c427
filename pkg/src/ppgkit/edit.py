"""Fine-grained pronunciation editing: spherical interpolation between
posteriorgrams, rule-based phoneme substitution over argmax runs, and
direct region overwrites. Every operation returns a valid posteriorgram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .core import PhonemeSet, Ppg, run_length_encode, FrameLabels
from .errors import RuleSyntaxError, ValidationError

# Below this angle the square-root embeddings are effectively parallel and
# arccos is ill-conditioned; fall back to linear interpolation.
PARALLEL_ANGLE = 1e-7

WILDCARD = "."


def _as_distribution(vector, name: str) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-D probability vector")
    if not np.isfinite(v).all():
        raise ValidationError(f"{name} contains non-finite entries")
    if v.min() < 0:
        raise ValidationError(f"{name} contains negative mass")
    total = float(v.sum())
    if abs(total - 1.0) > 1e-6:
        raise ValidationError(f"{name} sums to {total!r}, expected 1 within 1e-06")
    return v


def slerp(p, q, t: float) -> np.ndarray:
    """Interpolate distributions along the great circle of their square roots.

    The inputs are embedded as unit vectors u = sqrt(p), v = sqrt(q); the
    spherical interpolant between u and v is squared to land back on the
    probability simplex, and renormalized exactly. Endpoints are returned
    as-is, and near-parallel inputs fall back to linear interpolation.
    """
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"interpolation weight must lie in [0, 1], got {t}")
    p = _as_distribution(p, "p")
    q = _as_distribution(q, "q")
    if p.shape != q.shape:
        raise ValidationError(f"length mismatch: {p.size} vs {q.size}")
    if t == 0.0:
        return p.copy()
    if t == 1.0:
        return q.copy()
    u = np.sqrt(p)
    v = np.sqrt(q)
    dot = min(1.0, float(u @ v))
    omega = math.acos(dot)
    if omega < PARALLEL_ANGLE:
        mixed = (1.0 - t) * p + t * q
    else:
        sin_omega = math.sin(omega)
        w = (math.sin((1.0 - t) * omega) * u + math.sin(t * omega) * v) / sin_omega
        mixed = w * w
    return mixed / mixed.sum()


def interpolate_region(
    a: Ppg, b: Ppg, frame_range: tuple[int, int], t: float
) -> Ppg:
    """Replace frames in the half-open range with slerp(a, b, t) frames."""
    if a.phoneme_set != b.phoneme_set:
        raise ValidationError("posteriorgrams use different phoneme sets")
    if a.num_frames != b.num_frames:
        raise ValidationError(
            f"frame count mismatch: {a.num_frames} vs {b.num_frames}"
        )
    start, end = _check_range(frame_range, a.num_frames)
    frames = a.frames.copy()
    for i in range(start, end):
        frames[i] = slerp(a.frames[i], b.frames[i], t)
    return Ppg(a.phoneme_set, frames, a.hop_seconds)


def set_region(ppg: Ppg, frame_range: tuple[int, int], target) -> Ppg:
    """Overwrite frames in the half-open range with one target distribution."""
    vector = _as_distribution(target, "target")
    if vector.size != ppg.num_phonemes:
        raise ValidationError(
            f"target has {vector.size} entries for {ppg.num_phonemes} phonemes"
        )
    if vector.max() > 1.0:
        raise ValidationError("target entries must lie in [0, 1]")
    start, end = _check_range(frame_range, ppg.num_frames)
    frames = ppg.frames.copy()
    frames[start:end] = vector / vector.sum()
    return Ppg(ppg.phoneme_set, frames, ppg.hop_seconds)


def _check_range(frame_range: tuple[int, int], num_frames: int) -> tuple[int, int]:
    start, end = (int(v) for v in frame_range)
    if start > end:
        raise ValidationError(f"frame range start {start} exceeds end {end}")
    if start < 0 or end > num_frames:
        raise ValidationError(
            f"frame range {start}:{end} outside document of {num_frames} frames"
        )
    return start, end


@dataclass(frozen=True)
class Rule:
    """One substitution rule over argmax runs.

    ``pattern`` tokens are None (wildcard: any run) or a frozenset of
    admissible phoneme indices; ``replacement`` tokens are None (keep the
    matched run) or the target phoneme index. Both sides have equal length.
    """

    pattern: tuple[Optional[frozenset[int]], ...]
    replacement: tuple[Optional[int], ...]
    source: str

    def __post_init__(self):
        if not self.pattern:
            raise ValidationError("rule pattern is empty")
        if len(self.pattern) != len(self.replacement):
            raise ValidationError(
                f"pattern has {len(self.pattern)} tokens but replacement "
                f"has {len(self.replacement)}"
            )

    def matches(self, phonemes: Sequence[int], at: int) -> bool:
        return all(
            token is None or phonemes[at + offset] in token
            for offset, token in enumerate(self.pattern)
        )


@dataclass(frozen=True)
class RuleSet:
    """Ordered substitution rules compiled against one phoneme set."""

    rules: tuple[Rule, ...]
    phoneme_set: PhonemeSet


def compile_rules(text: str, phoneme_set: PhonemeSet) -> RuleSet:
    """Parse rule lines of the form ``pattern -> replacement``.

    Tokens are space-separated: a phoneme label, the wildcard ``.``, or an
    alternation group ``{a,b,...}`` (pattern side only). On the replacement
    side ``.`` keeps the matched run. ``#`` starts a comment.
    """
    rules: list[Rule] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        pieces = line.split("->")
        if len(pieces) != 2:
            raise RuleSyntaxError(number, f"expected 'pattern -> replacement' in {raw!r}")
        pattern_tokens = pieces[0].split()
        replacement_tokens = pieces[1].split()
        if not pattern_tokens:
            raise RuleSyntaxError(number, "empty pattern")
        if len(pattern_tokens) != len(replacement_tokens):
            raise RuleSyntaxError(
                number,
                f"pattern has {len(pattern_tokens)} tokens but replacement "
                f"has {len(replacement_tokens)}",
            )
        pattern = tuple(
            _parse_pattern_token(token, phoneme_set, number)
            for token in pattern_tokens
        )
        replacement = tuple(
            _parse_replacement_token(token, phoneme_set, number)
            for token in replacement_tokens
        )
        rules.append(Rule(pattern, replacement, line))
    return RuleSet(tuple(rules), phoneme_set)


def _parse_pattern_token(
    token: str, phoneme_set: PhonemeSet, line_number: int
) -> Optional[frozenset[int]]:
    if token == WILDCARD:
        return None
    if token.startswith("{") and token.endswith("}"):
        labels = [piece.strip() for piece in token[1:-1].split(",")]
        if not any(labels):
            raise RuleSyntaxError(line_number, f"empty alternation group {token!r}")
        return frozenset(
            _lookup(label, phoneme_set, line_number) for label in labels if label
        )
    return frozenset((_lookup(token, phoneme_set, line_number),))


def _parse_replacement_token(
    token: str, phoneme_set: PhonemeSet, line_number: int
) -> Optional[int]:
    if token == WILDCARD:
        return None
    if token.startswith("{"):
        raise RuleSyntaxError(
            line_number, f"alternation {token!r} is not allowed in a replacement"
        )
    return _lookup(token, phoneme_set, line_number)


def _lookup(label: str, phoneme_set: PhonemeSet, line_number: int) -> int:
    try:
        return phoneme_set.index_of(label)
    except ValidationError:
        raise RuleSyntaxError(line_number, f"unknown phoneme {label!r}") from None


class Substitution(NamedTuple):
    from_phoneme: str
    to_phoneme: str
    frame_start: int
    frame_end: int


class RuleMatch(NamedTuple):
    rule_index: int
    rule: str
    run_start: int
    run_end: int
    frame_start: int
    frame_end: int
    substitutions: tuple[Substitution, ...]


@dataclass(frozen=True)
class EditReport:
    """Every rule match applied by :func:`apply_rules`, in application order."""

    matches: tuple[RuleMatch, ...]

    def to_dict(self) -> dict:
        return {
            "matches": [
                {
                    "rule_index": m.rule_index,
                    "rule": m.rule,
                    "run_span": [m.run_start, m.run_end],
                    "frame_span": [m.frame_start, m.frame_end],
                    "substitutions": [
                        {
                            "from_phoneme": s.from_phoneme,
                            "to_phoneme": s.to_phoneme,
                            "frame_start": s.frame_start,
                            "frame_end": s.frame_end,
                        }
                        for s in m.substitutions
                    ],
                }
                for m in self.matches
            ]
        }


def apply_rules(ppg: Ppg, rules: RuleSet) -> tuple[Ppg, EditReport]:
    """Rewrite argmax runs matching each rule, in order.

    The posteriorgram is collapsed to its argmax run sequence; each rule is
    matched leftmost and non-overlapping against the run phoneme sequence.
    A matched run whose replacement differs from its phoneme has the two
    phoneme rows swapped within the run's frames, which preserves each
    frame's multiset of probabilities (soft mass is kept, not overwritten).
    Later rules see the re-collapsed result of earlier rules.
    """
    if rules.phoneme_set != ppg.phoneme_set:
        raise ValidationError("rules were compiled against a different phoneme set")
    if not rules.rules:
        raise ValidationError("rule set is empty")
    frames = ppg.frames.copy()
    labels = ppg.phoneme_set.labels
    matches: list[RuleMatch] = []
    for rule_index, rule in enumerate(rules.rules):
        runs = run_length_encode(
            FrameLabels(np.argmax(frames, axis=1) if frames.size else [], ppg.hop_seconds)
        ).runs
        phonemes = tuple(run.phoneme for run in runs)
        width = len(rule.pattern)
        position = 0
        while position + width <= len(runs):
            if not rule.matches(phonemes, position):
                position += 1
                continue
            substitutions: list[Substitution] = []
            for offset, target in enumerate(rule.replacement):
                run = runs[position + offset]
                if target is None or target == run.phoneme:
                    continue
                lo, hi = run.start, run.start + run.length
                frames[lo:hi, [run.phoneme, target]] = frames[lo:hi, [target, run.phoneme]]
                substitutions.append(
                    Substitution(labels[run.phoneme], labels[target], lo, hi)
                )
            first, last = runs[position], runs[position + width - 1]
            matches.append(
                RuleMatch(
                    rule_index,
                    rule.source,
                    position,
                    position + width,
                    first.start,
                    last.start + last.length,
                    tuple(substitutions),
                )
            )
            position += width
    return Ppg(ppg.phoneme_set, frames, ppg.hop_seconds), EditReport(tuple(matches))
