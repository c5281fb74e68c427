"""Toolkit for storing, comparing, and editing phonetic posteriorgrams."""

from .core import (
    CMU_PHONEMES,
    DEFAULT_HOP_SECONDS,
    FRAME_SUM_TOLERANCE,
    SILENCE,
    Alignment,
    FrameLabels,
    Interval,
    PhonemeSet,
    PitchContour,
    Ppg,
    Run,
    RunSequence,
    Violation,
    argmax_collapse,
    canonical_phoneme_set,
    from_logits,
    run_length_encode,
    validate,
)
from .distance import (
    DEFAULT_EPSILON,
    DEFAULT_GAMMA,
    ClassWeights,
    DistanceConfig,
    DistanceResult,
    SimilarityMatrix,
    class_weights_from_counts,
    compute_class_weights,
    compute_similarity,
    frame_distance,
    js_divergence,
    map_frame,
    pooled_distance,
    tune_gamma,
    utterance_distance,
)
from .edit import (
    EditReport,
    Rule,
    RuleMatch,
    RuleSet,
    Substitution,
    apply_rules,
    compile_rules,
    interpolate_region,
    set_region,
    slerp,
)
from .errors import (
    AlignmentFormatError,
    BadMagicError,
    FormatError,
    LabelCountMismatchError,
    PitchFormatError,
    PpgError,
    RuleSyntaxError,
    TruncatedPayloadError,
    ValidationError,
    VersionMismatchError,
)
from .formats import (
    PpgFileHeader,
    alignment_frame_count,
    alignment_to_frame_labels,
    load_class_weights,
    load_ppg,
    load_similarity,
    ppg_from_json_obj,
    ppg_to_json_obj,
    read_alignment,
    read_class_weights,
    read_pitch,
    read_ppg,
    read_ppg_header,
    read_similarity,
    save_class_weights,
    save_ppg,
    save_similarity,
    write_class_weights,
    write_ppg,
    write_similarity,
)
from .metrics import (
    PERIODICITY_THRESHOLD,
    VoicingMask,
    delta_cents,
    framewise_accuracy,
    levenshtein,
    normalize_words,
    pearson,
    voicing_mask,
    word_error_rate,
)

__version__ = "0.1.0"
