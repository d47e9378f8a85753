"""Collar-tolerant event matching and the class-averaged event F1 metric.

A system event is a true positive when it can be paired one-to-one with a
reference event of the same class whose onset lies within the onset collar
and whose offset lies within max(offset_collar, offset_length_pct *
reference duration).  Pairing uses a maximum-cardinality bipartite matching
per clip and class, so the counts do not depend on event order and no
alternative assignment yields more true positives.  Per-class counts are
summed over the whole corpus and the final score is the unweighted mean of
the per-class F1 values, giving every class equal weight however many
events it has.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .annot import StrongAnnotationSet, TimedEvent, check_label
from .render import align_table, percent

__all__ = [
    "ClassCounts",
    "ClassResult",
    "EvalConfig",
    "EvalReport",
    "MatchDetail",
    "accumulate",
    "evaluate",
    "event_matches",
    "f1_class",
    "macro_f1",
    "match_clip",
    "precision",
    "recall",
]


@dataclass(frozen=True)
class EvalConfig:
    """Matching tolerances: collars in seconds, ``offset_length_pct`` as a
    fraction of the reference event's duration."""

    onset_collar: float = 0.200
    offset_collar: float = 0.200
    offset_length_pct: float = 0.20

    def __post_init__(self) -> None:
        for name in ("onset_collar", "offset_collar", "offset_length_pct"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {value}")
        if self.offset_length_pct > 1:
            raise ValueError(
                f"offset_length_pct is a fraction in [0, 1], got {self.offset_length_pct}"
            )


@dataclass(frozen=True)
class ClassCounts:
    """True/false positive and false negative tallies for one class."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    def __add__(self, other: "ClassCounts") -> "ClassCounts":
        return ClassCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


def event_matches(ref: TimedEvent, sys: TimedEvent, cfg: EvalConfig | None = None) -> bool:
    """Whether a system event is an acceptable detection of a reference event.

    Labels must be equal; the onset deviation may be at most the onset
    collar and the offset deviation at most max(offset_collar,
    offset_length_pct * reference duration).  Both comparisons are
    inclusive, so a deviation exactly equal to the collar is accepted.
    """
    cfg = cfg if cfg is not None else EvalConfig()
    if ref.label != sys.label:
        return False
    if abs(sys.onset - ref.onset) > cfg.onset_collar:
        return False
    offset_tolerance = max(cfg.offset_collar, cfg.offset_length_pct * ref.duration)
    return abs(sys.offset - ref.offset) <= offset_tolerance


@dataclass(frozen=True)
class MatchDetail:
    """One clip's matching outcome: one-to-one pairs and the leftovers."""

    pairs: tuple[tuple[TimedEvent, TimedEvent], ...]
    unmatched_ref: tuple[TimedEvent, ...]
    unmatched_sys: tuple[TimedEvent, ...]

    def counts(self) -> dict[str, ClassCounts]:
        out: dict[str, ClassCounts] = {}

        def bump(label: str, tp: int = 0, fp: int = 0, fn: int = 0) -> None:
            out[label] = out.get(label, ClassCounts()) + ClassCounts(tp, fp, fn)

        for ref, _ in self.pairs:
            bump(ref.label, tp=1)
        for e in self.unmatched_ref:
            bump(e.label, fn=1)
        for e in self.unmatched_sys:
            bump(e.label, fp=1)
        return out


def _max_one_to_one(adjacency: Sequence[Sequence[int]], n_right: int) -> list[int]:
    """Maximum bipartite matching by augmenting paths (Kuhn's algorithm).

    Returns the right-to-left assignment, -1 for unmatched right nodes.
    Left nodes are processed in index order, so the matching is
    deterministic for a given adjacency.
    """
    owner = [-1] * n_right

    def augment(i: int, seen: set[int]) -> bool:
        for j in adjacency[i]:
            if j in seen:
                continue
            seen.add(j)
            if owner[j] < 0 or augment(owner[j], seen):
                owner[j] = i
                return True
        return False

    for i in range(len(adjacency)):
        augment(i, set())
    return owner


def match_clip(
    ref_events: Iterable[TimedEvent],
    sys_events: Iterable[TimedEvent],
    cfg: EvalConfig | None = None,
) -> MatchDetail:
    """Match one clip's system events against its reference events.

    Events are matched per class with a maximum-cardinality one-to-one
    matching over the admissible pairs; both sides are sorted first so the
    augmenting order, and hence the chosen matching, is reproducible.
    """
    cfg = cfg if cfg is not None else EvalConfig()
    refs = sorted(ref_events)
    syss = sorted(sys_events)
    labels = sorted({e.label for e in refs} | {e.label for e in syss})
    pairs: list[tuple[TimedEvent, TimedEvent]] = []
    unmatched_ref: list[TimedEvent] = []
    unmatched_sys: list[TimedEvent] = []
    for label in labels:
        r = [e for e in refs if e.label == label]
        s = [e for e in syss if e.label == label]
        adjacency = [
            [j for j, candidate in enumerate(s) if event_matches(e, candidate, cfg)] for e in r
        ]
        owner = _max_one_to_one(adjacency, len(s))
        matched_refs = {i for i in owner if i >= 0}
        for j, i in enumerate(owner):
            if i >= 0:
                pairs.append((r[i], s[j]))
        unmatched_ref.extend(e for i, e in enumerate(r) if i not in matched_refs)
        unmatched_sys.extend(e for j, e in enumerate(s) if owner[j] < 0)
    return MatchDetail(tuple(pairs), tuple(unmatched_ref), tuple(unmatched_sys))


def accumulate(details: Iterable[MatchDetail]) -> dict[str, ClassCounts]:
    """Sum per-clip counts class-wise over a corpus."""
    totals: dict[str, ClassCounts] = {}
    for detail in details:
        for label, counts in detail.counts().items():
            totals[label] = totals.get(label, ClassCounts()) + counts
    return totals


def precision(counts: ClassCounts) -> float:
    denom = counts.tp + counts.fp
    return counts.tp / denom if denom else 0.0


def recall(counts: ClassCounts) -> float:
    denom = counts.tp + counts.fn
    return counts.tp / denom if denom else 0.0


def f1_class(counts: ClassCounts) -> float:
    """2*tp / (2*tp + fp + fn); defined as 0 for a class with no events at
    all (callers flag such classes separately)."""
    denom = 2 * counts.tp + counts.fp + counts.fn
    return 2 * counts.tp / denom if denom else 0.0


def macro_f1(per_class: Mapping[str, float]) -> float:
    """Unweighted mean of per-class F1 values over the class list."""
    if not per_class:
        raise ValueError("cannot average an empty class list")
    return math.fsum(per_class[label] for label in sorted(per_class)) / len(per_class)


@dataclass(frozen=True)
class ClassResult:
    """Counts and derived scores for one class.

    ``absent`` marks a class with no events in either reference or system
    output (its F1 is pinned to 0); ``scored`` tells whether the class is
    part of the macro average.
    """

    counts: ClassCounts
    precision: float
    recall: float
    f1: float
    absent: bool
    scored: bool


@dataclass(frozen=True)
class EvalReport:
    """Corpus evaluation result: per-class scores plus the macro average.

    ``per_class`` covers every class seen in either corpus plus the class
    list; ``macro_f1`` averages only over ``class_list``.
    """

    per_class: dict[str, ClassResult]
    macro_f1: float
    class_list: tuple[str, ...]
    clip_count: int
    config: EvalConfig

    def format_table(self) -> str:
        cfg = self.config
        header = [
            f"# clips evaluated: {self.clip_count}",
            f"# classes in macro average: {len(self.class_list)}",
            f"# onset collar {cfg.onset_collar:.3f} s; offset collar "
            f"max({cfg.offset_collar:.3f} s, {cfg.offset_length_pct * 100:g}% of reference length)",
        ]
        rows = []
        for label in sorted(self.per_class):
            r = self.per_class[label]
            notes = []
            if r.absent:
                notes.append("absent")
            if not r.scored:
                notes.append("not averaged")
            rows.append([
                label,
                str(r.counts.tp),
                str(r.counts.fp),
                str(r.counts.fn),
                percent(r.precision),
                percent(r.recall),
                percent(r.f1),
                ", ".join(notes),
            ])
        rows.append([
            "Macro average", "", "", "", "", "",
            percent(self.macro_f1), f"{len(self.class_list)} classes",
        ])
        table = align_table(
            ["Class", "TP", "FP", "FN", "Precision", "Recall", "F1", "Notes"],
            rows,
            aligns="lrrrrrrl",
        )
        return "\n".join(header) + "\n\n" + table

    def to_dict(self) -> dict:
        return {
            "config": {
                "onset_collar": self.config.onset_collar,
                "offset_collar": self.config.offset_collar,
                "offset_length_pct": self.config.offset_length_pct,
            },
            "clip_count": self.clip_count,
            "class_list": list(self.class_list),
            "per_class": {
                label: {
                    "tp": r.counts.tp,
                    "fp": r.counts.fp,
                    "fn": r.counts.fn,
                    "precision": r.precision,
                    "recall": r.recall,
                    "f1": r.f1,
                    "absent": r.absent,
                    "scored": r.scored,
                }
                for label, r in sorted(self.per_class.items())
            },
            "macro_f1": self.macro_f1,
        }

    def to_records(self) -> list[dict]:
        records: list[dict] = []
        for label in sorted(self.per_class):
            r = self.per_class[label]
            records.append({
                "record": "class",
                "class": label,
                "tp": r.counts.tp,
                "fp": r.counts.fp,
                "fn": r.counts.fn,
                "precision": r.precision,
                "recall": r.recall,
                "f1": r.f1,
                "absent": r.absent,
                "scored": r.scored,
            })
        records.append({
            "record": "macro",
            "macro_f1": self.macro_f1,
            "class_count": len(self.class_list),
            "clip_count": self.clip_count,
            "onset_collar": self.config.onset_collar,
            "offset_collar": self.config.offset_collar,
            "offset_length_pct": self.config.offset_length_pct,
        })
        return records


def evaluate(
    ref: StrongAnnotationSet,
    sys: StrongAnnotationSet,
    cfg: EvalConfig | None = None,
    class_list: Sequence[str] | None = None,
) -> EvalReport:
    """Score a system annotation set against a reference set.

    Clips are aligned by id; a clip present on one side only contributes
    all false positives (system only) or all false negatives (reference
    only).  Events never match across clips.  The macro average runs over
    ``class_list`` when given, else over the classes present in the
    reference; classes seen only in the system output are reported but not
    averaged unless listed.
    """
    cfg = cfg if cfg is not None else EvalConfig()
    clips = sorted(set(ref.entries) | set(sys.entries))
    details = [
        match_clip(ref.entries.get(clip, ()), sys.entries.get(clip, ()), cfg) for clip in clips
    ]
    counts = accumulate(details)
    if class_list is None:
        classes = ref.classes()
    else:
        deduped: list[str] = []
        for label in class_list:
            check_label(label)
            if label not in deduped:
                deduped.append(label)
        classes = tuple(deduped)
    if not classes:
        raise ValueError(
            "class list is empty: the reference has no events and no explicit class list was given"
        )
    scored = set(classes)
    per_class: dict[str, ClassResult] = {}
    for label in sorted(set(counts) | scored):
        c = counts.get(label, ClassCounts())
        per_class[label] = ClassResult(
            counts=c,
            precision=precision(c),
            recall=recall(c),
            f1=f1_class(c),
            absent=(c.tp == 0 and c.fp == 0 and c.fn == 0),
            scored=label in scored,
        )
    macro = macro_f1({label: per_class[label].f1 for label in classes})
    return EvalReport(
        per_class=per_class,
        macro_f1=macro,
        class_list=classes,
        clip_count=len(clips),
        config=cfg,
    )
