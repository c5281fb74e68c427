"""Core type and operation tests: softmax conversion, argmax collapse,
run-length encoding, and validation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ppgkit import (
    FrameLabels,
    PhonemeSet,
    Ppg,
    RunSequence,
    ValidationError,
    argmax_collapse,
    canonical_phoneme_set,
    from_logits,
    run_length_encode,
    validate,
)


class TestPhonemeSet:
    def test_canonical_has_40_labels_silence_last(self):
        pset = canonical_phoneme_set()
        assert len(pset) == 40
        assert pset.labels[-1] == "sil"
        assert pset.labels[0] == "aa"
        assert pset.index_of("zh") == 38

    def test_lookup_is_case_insensitive(self):
        pset = canonical_phoneme_set()
        assert pset.index_of("AA") == pset.index_of("aa") == 0
        assert "EY" in pset

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValidationError):
            PhonemeSet(("aa", "AA"))

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError, match="qq"):
            canonical_phoneme_set().index_of("qq")


class TestFromLogits:
    def test_zero_row_gives_uniform(self):
        pset = canonical_phoneme_set()
        ppg = from_logits(np.zeros((2, 40)), pset)
        assert np.allclose(ppg.frames, 1.0 / 40.0, atol=1e-15)

    def test_constant_shift_invariance(self):
        pset = PhonemeSet(("a", "b", "c"))
        rng = np.random.default_rng(7)
        logits = rng.normal(size=(20, 3)) * 5
        shifted = logits + rng.normal(size=(20, 1)) * 100
        a = from_logits(logits, pset)
        b = from_logits(shifted, pset)
        assert np.max(np.abs(a.frames - b.frames)) < 1e-9

    def test_two_class_row_matches_direct_softmax(self):
        # independent evaluation: exp(10)/(exp(10)+1), 1/(exp(10)+1)
        pset = PhonemeSet(("a", "b"))
        ppg = from_logits([[10.0, 0.0]], pset)
        e10 = math.exp(10.0)
        assert ppg.frames[0, 0] == pytest.approx(e10 / (e10 + 1.0), abs=1e-12)
        assert ppg.frames[0, 1] == pytest.approx(1.0 / (e10 + 1.0), abs=1e-12)

    def test_nonfinite_logit_rejected_with_location(self):
        pset = PhonemeSet(("a", "b", "c"))
        logits = np.zeros((4, 3))
        logits[2, 1] = np.nan
        with pytest.raises(ValidationError, match="frame 2"):
            from_logits(logits, pset)

    def test_output_always_validates(self):
        pset = canonical_phoneme_set()
        rng = np.random.default_rng(3)
        for _ in range(20):
            ppg = from_logits(rng.normal(size=(5, 40)) * 30, pset)
            assert validate(ppg) == []

    def test_empty_input(self):
        pset = PhonemeSet(("a", "b"))
        ppg = from_logits(np.zeros((0, 2)), pset)
        assert ppg.num_frames == 0
        assert validate(ppg) == []


class TestArgmaxCollapse:
    def test_one_hot_frames(self):
        pset = canonical_phoneme_set()
        frames = np.zeros((3, 40))
        for t, p in enumerate((3, 7, 7)):
            frames[t, p] = 1.0
        labels = argmax_collapse(Ppg(pset, frames))
        assert labels.labels.tolist() == [3, 7, 7]

    def test_tie_breaks_to_lowest_index(self):
        pset = PhonemeSet(("a", "b"))
        labels = argmax_collapse(Ppg(pset, [[0.5, 0.5]]))
        assert labels.labels.tolist() == [0]

    def test_interior_maximum(self):
        pset = PhonemeSet(("a", "b", "c"))
        labels = argmax_collapse(Ppg(pset, [[0.2, 0.5, 0.3]]))
        assert labels.labels.tolist() == [1]


class TestRunLengthEncode:
    def test_basic_runs(self):
        runs = run_length_encode(FrameLabels([1, 1, 2, 2, 2, 1]))
        assert [(r.phoneme, r.start, r.length) for r in runs.runs] == [
            (1, 0, 2),
            (2, 2, 3),
            (1, 5, 1),
        ]

    def test_empty(self):
        assert run_length_encode(FrameLabels([])).runs == ()

    def test_single_frame(self):
        runs = run_length_encode(FrameLabels([4]))
        assert [(r.phoneme, r.start, r.length) for r in runs.runs] == [(4, 0, 1)]

    @given(st.lists(st.integers(min_value=0, max_value=5), max_size=60))
    def test_expand_round_trips(self, values):
        labels = FrameLabels(values)
        assert run_length_encode(labels).expand().tolist() == values

    def test_invalid_run_sequences_rejected(self):
        with pytest.raises(ValidationError):
            RunSequence(((1, 0, 2), (1, 2, 3)))  # adjacent equal phonemes
        with pytest.raises(ValidationError):
            RunSequence(((1, 1, 2),))  # does not start at frame 0


class TestValidate:
    def test_uniform_is_valid(self):
        pset = canonical_phoneme_set()
        assert validate(Ppg(pset, np.full((4, 40), 1.0 / 40.0))) == []

    def test_bad_sum_names_frame(self):
        pset = PhonemeSet(("a", "b"))
        violations = validate(Ppg(pset, [[0.5, 0.5], [1.0, 0.5]]))
        assert len(violations) == 1
        assert violations[0].invariant == "sum"
        assert violations[0].frame == 1

    def test_negative_entry_is_range_violation(self):
        pset = PhonemeSet(("a", "b"))
        violations = validate(Ppg(pset, [[1.1, -0.1]]))
        kinds = {v.invariant for v in violations}
        assert "range" in kinds

    def test_nonfinite_entry_reported(self):
        pset = PhonemeSet(("a", "b"))
        violations = validate(Ppg(pset, [[np.nan, 1.0]]))
        assert any(v.invariant == "finite" and v.frame == 0 for v in violations)

    def test_empty_ppg_is_valid(self):
        pset = PhonemeSet(("a", "b"))
        assert validate(Ppg(pset, np.zeros((0, 2)))) == []


class TestImmutability:
    def test_frames_are_read_only(self):
        ppg = Ppg(PhonemeSet(("a", "b")), [[0.5, 0.5]])
        with pytest.raises(ValueError):
            ppg.frames[0, 0] = 1.0

    def test_constructor_copies_input(self):
        source = np.array([[0.5, 0.5]])
        ppg = Ppg(PhonemeSet(("a", "b")), source)
        source[0, 0] = 0.9
        assert ppg.frames[0, 0] == 0.5

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            Ppg(PhonemeSet(("a", "b", "c")), [[0.5, 0.5]])

    def test_nonpositive_hop_rejected(self):
        with pytest.raises(ValidationError):
            Ppg(PhonemeSet(("a", "b")), [[0.5, 0.5]], hop_seconds=0.0)
