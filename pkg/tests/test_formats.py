"""Format tests: binary .ppg round trips and error taxonomy, JSON
interchange, alignment and pitch parsing, and the sidecar files."""

import io
import json

import numpy as np
import pytest

from ppgkit import (
    Alignment,
    BadMagicError,
    LabelCountMismatchError,
    PhonemeSet,
    PitchFormatError,
    Ppg,
    TruncatedPayloadError,
    ValidationError,
    VersionMismatchError,
    alignment_frame_count,
    alignment_to_frame_labels,
    canonical_phoneme_set,
    class_weights_from_counts,
    compute_similarity,
    ppg_from_json_obj,
    ppg_to_json_obj,
    read_alignment,
    read_class_weights,
    read_pitch,
    read_ppg,
    read_ppg_header,
    read_similarity,
    write_class_weights,
    write_ppg,
    write_similarity,
)
from ppgkit.errors import AlignmentFormatError
from ppgkit.formats import PPG_MAGIC


def roundtrip(ppg: Ppg) -> Ppg:
    buffer = io.BytesIO()
    write_ppg(ppg, buffer)
    buffer.seek(0)
    return read_ppg(buffer)


def random_f32_ppg(rng, num_frames, phoneme_set, hop=0.01) -> Ppg:
    """A valid PPG whose probabilities sit exactly on the float32 grid."""
    raw = rng.random((num_frames, len(phoneme_set)))
    raw /= raw.sum(axis=1, keepdims=True)
    return Ppg(
        phoneme_set, raw.astype(np.float32).astype(np.float64), hop
    )


class TestBinaryRoundTrip:
    def test_uniform_ppg_round_trips(self):
        pset = canonical_phoneme_set()
        ppg = Ppg(pset, np.full((3, 40), np.float64(np.float32(1.0 / 40.0))))
        back = roundtrip(ppg)
        assert back == ppg
        assert back.frames.dtype == np.float64

    def test_empty_ppg_round_trips(self):
        pset = PhonemeSet(("a", "b"))
        ppg = Ppg(pset, np.zeros((0, 2)), hop_seconds=0.02)
        back = roundtrip(ppg)
        assert back == ppg
        assert back.num_frames == 0

    def test_write_is_deterministic(self):
        rng = np.random.default_rng(0)
        ppg = random_f32_ppg(rng, 7, canonical_phoneme_set())
        first, second = io.BytesIO(), io.BytesIO()
        write_ppg(ppg, first)
        write_ppg(ppg, second)
        assert first.getvalue() == second.getvalue()

    def test_header_fields_survive(self):
        pset = PhonemeSet(("x", "y", "zh"))
        rng = np.random.default_rng(1)
        ppg = random_f32_ppg(rng, 5, pset, hop=0.0125)
        back = roundtrip(ppg)
        assert back.phoneme_set.labels == ("x", "y", "zh")
        assert back.hop_seconds == 0.0125

    def test_header_inspection_without_payload(self):
        rng = np.random.default_rng(21)
        ppg = random_f32_ppg(rng, 9, PhonemeSet(("a", "b")), hop=0.02)
        buffer = io.BytesIO()
        write_ppg(ppg, buffer)
        buffer.seek(0)
        header = read_ppg_header(buffer)
        assert header.version == 1
        assert header.num_frames == 9
        assert header.num_phonemes == 2
        assert header.hop_seconds == 0.02
        assert header.labels == ("a", "b")

    def test_reader_consumes_exactly_its_payload(self):
        # Streams are concatenable: two documents back to back.
        rng = np.random.default_rng(22)
        first = random_f32_ppg(rng, 3, PhonemeSet(("a", "b")))
        second = random_f32_ppg(rng, 2, PhonemeSet(("x", "y", "z")))
        buffer = io.BytesIO()
        write_ppg(first, buffer)
        write_ppg(second, buffer)
        buffer.seek(0)
        assert read_ppg(buffer) == first
        assert read_ppg(buffer) == second


class TestBinaryErrors:
    def _valid_bytes(self) -> bytes:
        rng = np.random.default_rng(2)
        ppg = random_f32_ppg(rng, 4, PhonemeSet(("a", "b", "c")))
        buffer = io.BytesIO()
        write_ppg(ppg, buffer)
        return buffer.getvalue()

    def test_bad_magic(self):
        data = b"XXXX" + self._valid_bytes()[4:]
        with pytest.raises(BadMagicError):
            read_ppg(io.BytesIO(data))

    def test_version_mismatch(self):
        data = bytearray(self._valid_bytes())
        data[4:8] = (2).to_bytes(4, "little")
        with pytest.raises(VersionMismatchError):
            read_ppg(io.BytesIO(bytes(data)))

    def test_truncated_matrix(self):
        data = self._valid_bytes()
        with pytest.raises(TruncatedPayloadError):
            read_ppg(io.BytesIO(data[:-5]))

    def test_truncated_header(self):
        with pytest.raises(TruncatedPayloadError):
            read_ppg(io.BytesIO(PPG_MAGIC + b"\x01"))

    def test_label_section_ending_early_is_label_count_mismatch(self):
        # Find where labels start: magic(4) + version(4) + P(4) + T(4) + hop(8).
        data = self._valid_bytes()
        labels_at = 24
        with pytest.raises(LabelCountMismatchError):
            read_ppg(io.BytesIO(data[: labels_at + 3]))

    def test_empty_stream(self):
        with pytest.raises(TruncatedPayloadError):
            read_ppg(io.BytesIO(b""))


class TestJsonInterchange:
    def test_round_trip(self):
        rng = np.random.default_rng(3)
        ppg = random_f32_ppg(rng, 6, PhonemeSet(("a", "b")))
        back = ppg_from_json_obj(json.loads(json.dumps(ppg_to_json_obj(ppg))))
        assert back == ppg

    def test_row_width_mismatch(self):
        obj = ppg_to_json_obj(Ppg(PhonemeSet(("a", "b")), [[0.5, 0.5]]))
        obj["frames"][0] = [0.5]
        with pytest.raises(LabelCountMismatchError):
            ppg_from_json_obj(obj)

    def test_bad_format_marker(self):
        with pytest.raises(BadMagicError):
            ppg_from_json_obj({"format": "nope", "phonemes": [], "frames": []})

    def test_version_checked(self):
        obj = ppg_to_json_obj(Ppg(PhonemeSet(("a", "b")), [[0.5, 0.5]]))
        obj["version"] = 9
        with pytest.raises(VersionMismatchError):
            ppg_from_json_obj(obj)

    def test_significant_digit_rounding(self):
        obj = ppg_to_json_obj(
            Ppg(PhonemeSet(("a", "b")), [[1 / 3, 2 / 3]]), sig_digits=9
        )
        assert obj["frames"][0][0] == float("0.333333333")


class TestAlignment:
    def test_single_interval_covers_all_frames(self):
        alignment = read_alignment("0.00\t0.03\taa")
        labels = alignment_to_frame_labels(alignment, 0.01, 3)
        pset = canonical_phoneme_set()
        assert labels.labels.tolist() == [pset.index_of("aa")] * 3

    def test_gap_maps_to_silence(self):
        # frame centers 0.005, 0.015, 0.025 against [0,0.01) and [0.02,0.03)
        alignment = read_alignment("0.00\t0.01\taa\n0.02\t0.03\tb")
        labels = alignment_to_frame_labels(alignment, 0.01, 3)
        pset = canonical_phoneme_set()
        assert labels.labels.tolist() == [
            pset.index_of("aa"),
            pset.index_of("sil"),
            pset.index_of("b"),
        ]

    def test_interval_bounds_are_half_open_at_frame_centers(self):
        # center 0.005 is included by [0.005, 0.015) and excluded by [0, 0.005)
        pset = canonical_phoneme_set()
        inside = read_alignment("0.005\t0.015\taa")
        labels = alignment_to_frame_labels(inside, 0.01, 2)
        assert labels.labels.tolist() == [pset.index_of("aa"), pset.index_of("sil")]
        outside = read_alignment("0.000\t0.005\taa")
        labels = alignment_to_frame_labels(outside, 0.01, 1)
        assert labels.labels.tolist() == [pset.index_of("sil")]

    def test_unknown_phoneme_rejected_with_line(self):
        with pytest.raises(AlignmentFormatError, match="line 2.*qq"):
            read_alignment("0.0\t0.1\taa\n0.1\t0.2\tqq")

    def test_reversed_interval_rejected(self):
        with pytest.raises(AlignmentFormatError, match="start"):
            read_alignment("0.2\t0.1\taa")

    def test_overlap_rejected(self):
        with pytest.raises(AlignmentFormatError, match="overlap"):
            read_alignment("0.0\t0.2\taa\n0.1\t0.3\tb")

    def test_comments_and_blank_lines_ignored(self):
        alignment = read_alignment("# header\n\n0.0\t0.1\taa  # trailing\n")
        assert len(alignment.intervals) == 1

    def test_empty_alignment_is_all_silence(self):
        labels = alignment_to_frame_labels(Alignment(()), 0.01, 4)
        assert labels.labels.tolist() == [canonical_phoneme_set().silence_index] * 4

    def test_output_length_is_always_t(self):
        alignment = read_alignment("0.00\t0.01\taa")
        for num_frames in (0, 1, 5, 50):
            labels = alignment_to_frame_labels(alignment, 0.01, num_frames)
            assert len(labels) == num_frames

    def test_frame_count_from_alignment(self):
        assert alignment_frame_count(read_alignment("0.0\t0.03\taa"), 0.01) == 3
        assert alignment_frame_count(read_alignment("0.0\t0.025\taa"), 0.01) == 3
        assert alignment_frame_count(Alignment(()), 0.01) == 0

    def test_labels_matched_case_insensitively(self):
        alignment = read_alignment("0.0\t0.01\tAA")
        assert alignment.intervals[0].label == "aa"


class TestPitch:
    def test_hop_inferred(self):
        contour = read_pitch("0.00\t200\t0.9\n0.01\t210\t0.8")
        assert contour.hop_seconds == pytest.approx(0.01)
        assert contour.f0_hz.tolist() == [200.0, 210.0]

    def test_non_uniform_spacing_rejected(self):
        with pytest.raises(PitchFormatError, match="non-uniform"):
            read_pitch("0.00\t200\t0.9\n0.02\t210\t0.8\n0.03\t220\t0.7")

    def test_periodicity_out_of_range_rejected(self):
        with pytest.raises(PitchFormatError, match="1.3"):
            read_pitch("0.00\t200\t1.3\n0.01\t210\t0.8")

    def test_single_sample_rejected(self):
        with pytest.raises(PitchFormatError, match="two samples"):
            read_pitch("0.00\t200\t0.9")

    def test_nonpositive_f0_stored_as_is(self):
        contour = read_pitch("0.00\t0\t0.05\n0.01\t210\t0.8")
        assert contour.f0_hz[0] == 0.0


class TestSidecars:
    def test_weights_round_trip(self):
        pset = PhonemeSet(("a", "b", "c"))
        weights = class_weights_from_counts([8, 2, 0], pset)
        buffer = io.BytesIO()
        write_class_weights(weights, buffer)
        buffer.seek(0)
        back = read_class_weights(buffer)
        assert back.counts == (8, 2, 0)
        assert back.weights == weights.weights
        assert back.phoneme_set == pset

    def test_similarity_round_trip_is_exact(self):
        pset = PhonemeSet(("a", "b", "c"))
        weights = class_weights_from_counts([3, 2, 4], pset)
        frames = np.eye(3)[np.array([0, 1, 2, 2, 0, 1])]
        sim = compute_similarity([Ppg(pset, frames)], weights)
        buffer = io.BytesIO()
        write_similarity(sim, buffer)
        buffer.seek(0)
        back = read_similarity(buffer)
        assert np.array_equal(back.matrix, sim.matrix)
        assert back.provenance == sim.provenance

    def test_weights_bad_magic(self):
        with pytest.raises(BadMagicError):
            read_class_weights(io.BytesIO(b"PPGF" + b"\0" * 32))

    def test_tsv_views_render(self):
        from ppgkit.formats import class_weights_tsv, similarity_tsv

        pset = PhonemeSet(("a", "b"))
        weights = class_weights_from_counts([4, 2], pset)
        tsv = class_weights_tsv(weights)
        assert "a\t4\t0.5" in tsv
        sim = compute_similarity([Ppg(pset, np.eye(2)[[0, 1, 1]])], weights)
        out = similarity_tsv(sim)
        assert out.splitlines()[2].startswith("phoneme\ta\tb")
