"""Evaluation toolkit for polyphonic sound event detection.

Parses the weak/strong tab-separated annotation formats, scores system
output with the collar-tolerant event-based F1 metric (macro-averaged over
classes), decodes frame-level activation grids into timed events, and
computes corpus statistics such as class-wise durations and overlap
proportions.
"""

from .annot import (
    ERROR,
    WARNING,
    Finding,
    NormalizeConfig,
    ParseError,
    StrongAnnotationSet,
    TimedEvent,
    ValidationReport,
    WeakAnnotationSet,
    parse_strong,
    parse_weak,
    scan_strong,
    scan_weak,
    serialize_strong,
    serialize_weak,
    validate_strong,
)
from .events import (
    ActivationMatrix,
    DecodeConfig,
    PolyphonyProfile,
    activation_from_events,
    decode,
    drop_short,
    median_filter_binary,
    merge_gaps,
    normalize,
    parse_activations,
    polyphony,
    serialize_activations,
)
from .metrics import (
    ClassCounts,
    ClassResult,
    EvalConfig,
    EvalReport,
    MatchDetail,
    accumulate,
    evaluate,
    event_matches,
    f1_class,
    macro_f1,
    match_clip,
)
from .stats import (
    ClassStats,
    ClassesPerClipStats,
    DurationHistogram,
    PolyphonyStats,
    class_stats,
    classes_per_clip,
    duration_histogram,
    overlap_stats,
    weak_class_stats,
)

__version__ = "0.1.0"

__all__ = [
    "ERROR",
    "WARNING",
    "ActivationMatrix",
    "ClassCounts",
    "ClassResult",
    "ClassStats",
    "ClassesPerClipStats",
    "DecodeConfig",
    "DurationHistogram",
    "EvalConfig",
    "EvalReport",
    "Finding",
    "MatchDetail",
    "NormalizeConfig",
    "ParseError",
    "PolyphonyProfile",
    "PolyphonyStats",
    "StrongAnnotationSet",
    "TimedEvent",
    "ValidationReport",
    "WeakAnnotationSet",
    "accumulate",
    "activation_from_events",
    "class_stats",
    "classes_per_clip",
    "decode",
    "drop_short",
    "duration_histogram",
    "evaluate",
    "event_matches",
    "f1_class",
    "macro_f1",
    "match_clip",
    "median_filter_binary",
    "merge_gaps",
    "normalize",
    "overlap_stats",
    "parse_activations",
    "parse_strong",
    "parse_weak",
    "polyphony",
    "scan_strong",
    "scan_weak",
    "serialize_activations",
    "serialize_strong",
    "serialize_weak",
    "validate_strong",
    "weak_class_stats",
    "__version__",
]
