"""Corpus statistics over annotation sets.

Per-class clip/event counts and duration summaries, distinct-classes-per-
clip proportions, overlap (simultaneous event) proportions, and per-class
duration histograms.  Every function is a pure summary of its input set
and returns plain dataclasses; formatting helpers render aligned text
tables or one-record-per-row dicts for machine output.
"""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Union

from .annot import StrongAnnotationSet, WeakAnnotationSet
from .events import polyphony
from .render import align_table, percent

__all__ = [
    "BUCKETS",
    "TOTAL_LABEL",
    "ClassStats",
    "ClassesPerClipStats",
    "DurationHistogram",
    "PolyphonyStats",
    "class_stats",
    "class_stats_records",
    "classes_per_clip",
    "classes_per_clip_records",
    "duration_histogram",
    "format_class_stats",
    "format_classes_per_clip",
    "format_histograms",
    "format_overlap",
    "format_weak_class_stats",
    "histogram_records",
    "overlap_records",
    "overlap_stats",
    "weak_class_stats",
    "weak_class_stats_records",
]

TOTAL_LABEL = "Total"

# Clip/time shares are bucketed into exactly one, exactly two, or three or
# more concurrent items.
BUCKETS = ("1", "2", "3+")


def _bucket(n: int) -> str:
    return "3+" if n >= 3 else str(n)


@dataclass(frozen=True)
class ClassStats:
    label: str
    clip_count: int
    event_count: int
    mean_duration: float
    median_duration: float


def class_stats(annotations: StrongAnnotationSet) -> list[ClassStats]:
    """Per-class counts and duration summaries, with a final Total row.

    A class's clip count is the number of clips containing at least one of
    its events.  The Total row counts each clip once and pools all
    durations, so its event count is the sum of the per-class event counts
    but its clip count is not.
    """
    durations: dict[str, list[float]] = {}
    clips: dict[str, set[str]] = {}
    all_durations: list[float] = []
    for clip, events in annotations.entries.items():
        for e in events:
            durations.setdefault(e.label, []).append(e.duration)
            clips.setdefault(e.label, set()).add(clip)
            all_durations.append(e.duration)
    if not durations:
        return []
    rows = [
        ClassStats(
            label,
            len(clips[label]),
            len(durations[label]),
            statistics.mean(durations[label]),
            statistics.median(durations[label]),
        )
        for label in sorted(durations)
    ]
    rows.append(
        ClassStats(
            TOTAL_LABEL,
            len(annotations.entries),
            len(all_durations),
            statistics.mean(all_durations),
            statistics.median(all_durations),
        )
    )
    return rows


def weak_class_stats(annotations: WeakAnnotationSet) -> list[tuple[str, int]]:
    """Clips per class, plus a Total row summing the label occurrences."""
    counts: Counter[str] = Counter()
    for labels in annotations.entries.values():
        counts.update(labels)
    if not counts:
        return []
    rows = [(label, counts[label]) for label in sorted(counts)]
    rows.append((TOTAL_LABEL, sum(counts.values())))
    return rows


@dataclass(frozen=True)
class ClassesPerClipStats:
    """Share of clips containing 1 / 2 / 3+ distinct classes; empty for an
    empty corpus."""

    proportion: dict[str, float]


def classes_per_clip(
    annotations: Union[WeakAnnotationSet, StrongAnnotationSet]
) -> ClassesPerClipStats:
    """Bucket clips by how many distinct classes they contain.

    For strong sets a clip's classes are the distinct labels of its events.
    """
    if isinstance(annotations, WeakAnnotationSet):
        class_sets = list(annotations.entries.values())
    else:
        class_sets = [{e.label for e in events} for events in annotations.entries.values()]
    total = len(class_sets)
    if not total:
        return ClassesPerClipStats({})
    counts = Counter(_bucket(len(s)) for s in class_sets)
    return ClassesPerClipStats({b: counts.get(b, 0) / total for b in BUCKETS})


@dataclass(frozen=True)
class PolyphonyStats:
    """Overlap summary: ``time_proportion`` shares event-covered time by
    simultaneity level; ``clip_proportion`` buckets clips by their peak
    level.  Both are empty for an empty corpus."""

    time_proportion: dict[str, float]
    clip_proportion: dict[str, float]


def overlap_stats(annotations: StrongAnnotationSet) -> PolyphonyStats:
    """Share of event-covered time at 1 / 2 / 3+ simultaneous events, and
    share of clips by peak simultaneous-event count.

    Overlap counting ignores class labels.  The time denominator is the
    total time covered by at least one event (gaps do not count), so the
    shares sum to 1 whenever any event exists.
    """
    time_at = {b: 0.0 for b in BUCKETS}
    clips_at: Counter[str] = Counter()
    for events in annotations.entries.values():
        profile = polyphony(list(events))
        for start, end, count in profile.segments:
            if count >= 1:
                time_at[_bucket(count)] += end - start
        clips_at[_bucket(profile.max_level())] += 1
    covered = math.fsum(time_at.values())
    n_clips = len(annotations.entries)
    if not n_clips or covered <= 0:
        return PolyphonyStats({}, {})
    return PolyphonyStats(
        {b: time_at[b] / covered for b in BUCKETS},
        {b: clips_at.get(b, 0) / n_clips for b in BUCKETS},
    )


@dataclass(frozen=True)
class DurationHistogram:
    """Counts of one class's event durations in [k*w, (k+1)*w) bins; only
    non-empty bins are listed."""

    label: str
    bin_width: float
    bins: tuple[tuple[float, int], ...]


def duration_histogram(
    annotations: StrongAnnotationSet, bin_width: float
) -> list[DurationHistogram]:
    """Per-class histogram of event durations with the given bin width."""
    if not (bin_width > 0 and math.isfinite(bin_width)):
        raise ValueError(f"bin_width must be positive and finite, got {bin_width}")
    per_label: dict[str, Counter[int]] = {}
    for events in annotations.entries.values():
        for e in events:
            k = math.floor(e.duration / bin_width)
            per_label.setdefault(e.label, Counter())[k] += 1
    return [
        DurationHistogram(
            label, bin_width, tuple((k * bin_width, counter[k]) for k in sorted(counter))
        )
        for label, counter in sorted(per_label.items())
    ]


# ---------------------------------------------------------------------------
# rendering


def format_class_stats(rows: list[ClassStats]) -> str:
    return align_table(
        ["Class", "Clips", "Events", "Mean dur (s)", "Median dur (s)"],
        [
            [r.label, str(r.clip_count), str(r.event_count),
             f"{r.mean_duration:.2f}", f"{r.median_duration:.2f}"]
            for r in rows
        ],
    )


def class_stats_records(rows: list[ClassStats]) -> list[dict]:
    return [
        {
            "class": r.label,
            "clips": r.clip_count,
            "events": r.event_count,
            "mean_duration": r.mean_duration,
            "median_duration": r.median_duration,
        }
        for r in rows
    ]


def format_weak_class_stats(rows: list[tuple[str, int]]) -> str:
    return align_table(["Class", "Clips"], [[label, str(n)] for label, n in rows])


def weak_class_stats_records(rows: list[tuple[str, int]]) -> list[dict]:
    return [{"class": label, "clips": n} for label, n in rows]


def format_classes_per_clip(stats: ClassesPerClipStats) -> str:
    rows = [[b, percent(stats.proportion[b])] for b in BUCKETS if b in stats.proportion]
    return align_table(["Distinct classes", "Clip proportion"], rows)


def classes_per_clip_records(stats: ClassesPerClipStats) -> list[dict]:
    return [
        {"classes": b, "proportion": stats.proportion[b]}
        for b in BUCKETS
        if b in stats.proportion
    ]


def format_overlap(stats: PolyphonyStats) -> str:
    rows = []
    if stats.time_proportion:
        rows.append(["Time proportion"] + [percent(stats.time_proportion[b]) for b in BUCKETS])
    if stats.clip_proportion:
        rows.append(["Clip proportion"] + [percent(stats.clip_proportion[b]) for b in BUCKETS])
    return align_table(["Simultaneous events"] + list(BUCKETS), rows)


def overlap_records(stats: PolyphonyStats) -> list[dict]:
    return [
        {
            "simultaneous": b,
            "time_proportion": stats.time_proportion[b],
            "clip_proportion": stats.clip_proportion[b],
        }
        for b in BUCKETS
        if b in stats.time_proportion
    ]


def format_histograms(histograms: list[DurationHistogram], max_bar: int = 50) -> str:
    rows = []
    for h in histograms:
        peak = max((count for _, count in h.bins), default=0)
        for lower, count in h.bins:
            bar = "#" * max(1, round(max_bar * count / peak)) if peak else ""
            rows.append([h.label, f"{lower:.2f}", str(count), bar])
    return align_table(["Class", "Bin start (s)", "Count", ""], rows, aligns="lrrl")


def histogram_records(histograms: list[DurationHistogram]) -> list[dict]:
    return [
        {"class": h.label, "bin_start": lower, "bin_width": h.bin_width, "count": count}
        for h in histograms
        for lower, count in h.bins
    ]
