"""Event-list transforms and frame-activation decoding.

Covers the post-processing side of sound event detection: merging
near-adjacent same-class events, dropping too-short events, median
smoothing of binarized frame activity, turning activation grids into timed
events, and sweep-line overlap profiles used by the corpus statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .annot import (
    NormalizeConfig,
    ParseError,
    TimedEvent,
    check_clip_id,
    check_label,
    _split_lines,
)

__all__ = [
    "ActivationMatrix",
    "DecodeConfig",
    "NormalizeConfig",
    "PolyphonyProfile",
    "activation_from_events",
    "decode",
    "drop_short",
    "median_filter_binary",
    "merge_gaps",
    "normalize",
    "parse_activations",
    "polyphony",
    "serialize_activations",
]

_HEADER_FIELD = "filename"


def merge_gaps(events: Iterable[TimedEvent], min_gap: float) -> list[TimedEvent]:
    """Merge same-class events separated by a gap strictly below ``min_gap``.

    Each run of near-adjacent events is replaced by its hull, repeatedly,
    so the output has no same-class gap under the threshold.  A gap exactly
    equal to ``min_gap`` is kept; events of different classes never merge.
    """
    if not min_gap >= 0:
        raise ValueError(f"min_gap must be non-negative, got {min_gap}")
    by_label: dict[str, list[TimedEvent]] = {}
    for e in sorted(events):
        by_label.setdefault(e.label, []).append(e)
    merged: list[TimedEvent] = []
    for label, run in by_label.items():
        current = run[0]
        for e in run[1:]:
            if e.onset - current.offset < min_gap:
                if e.offset > current.offset:
                    current = TimedEvent(current.onset, e.offset, label)
            else:
                merged.append(current)
                current = e
        merged.append(current)
    return sorted(merged)


def drop_short(events: Iterable[TimedEvent], min_duration: float) -> list[TimedEvent]:
    """Drop events shorter than ``min_duration``; an exactly-equal duration
    is kept."""
    return [e for e in events if e.duration >= min_duration]


def normalize(events: Iterable[TimedEvent], cfg: NormalizeConfig | None = None) -> list[TimedEvent]:
    """Merge small same-class gaps, then drop events still under the minimum
    duration.  Merging runs first so fragmented detections can be rescued."""
    cfg = cfg if cfg is not None else NormalizeConfig()
    return drop_short(merge_gaps(events, cfg.min_gap), cfg.min_event_duration)


def median_filter_binary(seq: Sequence[int], window: int) -> list[int]:
    """Median-smooth a 0/1 sequence with an odd, centered window.

    The window shrinks to the valid index range near the edges.  A shrunk
    window can tie (as many ones as zeros); ties keep the input value.
    Length and alphabet are preserved and window 1 is the identity.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"median window must be an odd positive integer, got {window}")
    half = window // 2
    n = len(seq)
    prefix = [0] * (n + 1)
    for i, v in enumerate(seq):
        prefix[i + 1] = prefix[i] + (1 if v else 0)
    out = []
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        ones = prefix[hi] - prefix[lo]
        span = hi - lo
        if 2 * ones > span:
            out.append(1)
        elif 2 * ones < span:
            out.append(0)
        else:
            out.append(1 if seq[i] else 0)
    return out


@dataclass(frozen=True)
class DecodeConfig:
    """Thresholding and smoothing used to turn activations into events."""

    threshold: float = 0.5
    median_window: int = 51

    def __post_init__(self) -> None:
        if not 0 < self.threshold < 1:
            raise ValueError(f"threshold must lie strictly between 0 and 1, got {self.threshold}")
        if self.median_window < 1 or self.median_window % 2 == 0:
            raise ValueError(
                f"median_window must be an odd positive integer, got {self.median_window}"
            )


@dataclass(frozen=True, eq=False)
class ActivationMatrix:
    """Per-clip grid of class activation probabilities, one row per frame.

    ``hop`` is the frame step in seconds; frame ``i`` covers
    ``[i * hop, (i + 1) * hop)``.
    """

    clip: str
    classes: tuple[str, ...]
    values: np.ndarray
    hop: float = 0.020

    def __post_init__(self) -> None:
        check_clip_id(self.clip)
        classes = tuple(self.classes)
        if not classes:
            raise ValueError("an activation matrix needs at least one class column")
        for label in classes:
            check_label(label)
        if len(set(classes)) != len(classes):
            raise ValueError("duplicate class columns")
        if not (math.isfinite(self.hop) and self.hop > 0):
            raise ValueError(f"hop must be positive and finite, got {self.hop}")
        values = np.asarray(self.values, dtype=float)
        if values.size == 0:
            values = values.reshape(0, len(classes))
        if values.ndim != 2 or values.shape[1] != len(classes):
            raise ValueError(f"values must have shape (frames, {len(classes)})")
        if values.size and not (
            np.isfinite(values).all() and values.min() >= 0.0 and values.max() <= 1.0
        ):
            raise ValueError("activation values must lie in [0, 1]")
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "values", values)

    @property
    def frames(self) -> int:
        return self.values.shape[0]


def _runs(seq: Sequence[int]) -> Iterator[tuple[int, int]]:
    """Yield [start, stop) index spans of maximal runs of ones."""
    start = None
    for i, v in enumerate(seq):
        if v and start is None:
            start = i
        elif not v and start is not None:
            yield start, i
            start = None
    if start is not None:
        yield start, len(seq)


def decode(activation: ActivationMatrix, cfg: DecodeConfig | None = None) -> list[TimedEvent]:
    """Turn an activation grid into timed events, one class at a time.

    A frame is active when its probability is >= the threshold (inclusive,
    so saturated outputs still fire at high thresholds).  Activity is
    median-smoothed, then each maximal run of active frames [i, j] becomes
    an event spanning i*hop .. (j+1)*hop.
    """
    cfg = cfg if cfg is not None else DecodeConfig()
    events: list[TimedEvent] = []
    for col, label in enumerate(activation.classes):
        binary = [1 if v >= cfg.threshold else 0 for v in activation.values[:, col]]
        smoothed = median_filter_binary(binary, cfg.median_window)
        for start, stop in _runs(smoothed):
            events.append(TimedEvent(start * activation.hop, stop * activation.hop, label))
    return sorted(events)


@dataclass(frozen=True)
class PolyphonyProfile:
    """Piecewise-constant count of simultaneously active events.

    Segments are sorted, non-overlapping (start, end, count) triples that
    tile the span from the first onset to the last offset; adjacent
    segments always differ in count.
    """

    segments: tuple[tuple[float, float, int], ...]

    def max_level(self) -> int:
        return max((count for _, _, count in self.segments), default=0)

    def covered_time(self) -> float:
        return math.fsum(end - start for start, end, count in self.segments if count >= 1)


def polyphony(events: Iterable[TimedEvent]) -> PolyphonyProfile:
    """Sweep event boundaries and count how many events cover each span.

    Counting is class-agnostic.  Zero-count spans between active regions
    are kept, so the integral of count over the profile equals the summed
    event durations.
    """
    events = list(events)
    if not events:
        return PolyphonyProfile(())
    deltas: dict[float, int] = {}
    for e in events:
        deltas[e.onset] = deltas.get(e.onset, 0) + 1
        deltas[e.offset] = deltas.get(e.offset, 0) - 1
    times = sorted(deltas)
    segments: list[tuple[float, float, int]] = []
    level = 0
    for start, end in zip(times, times[1:]):
        level += deltas[start]
        if segments and segments[-1][2] == level:
            segments[-1] = (segments[-1][0], end, level)
        else:
            segments.append((start, end, level))
    return PolyphonyProfile(tuple(segments))


def parse_activations(text: str) -> list[ActivationMatrix]:
    """Parse an activation TSV into one matrix per clip.

    The header row carries the shared metadata; every later row is one
    frame of one clip::

        filename<TAB>hop_seconds<TAB>class...<TAB>class
        clip<TAB>frame_index<TAB>probability...<TAB>probability

    Rows of a clip must form one contiguous block with frame indices
    counting up from 0.  Raises :class:`ParseError` on the first bad line.
    """
    lines = _split_lines(text)
    if not lines or not lines[0]:
        raise ParseError(1, "missing activation header")
    header = lines[0].split("\t")
    if header[0] != _HEADER_FIELD or len(header) < 3:
        raise ParseError(1, "header must be 'filename<TAB>hop<TAB>class...'")
    try:
        hop = float(header[1])
    except ValueError:
        raise ParseError(1, f"hop must be decimal seconds, got {header[1]!r}") from None
    if not (math.isfinite(hop) and hop > 0):
        raise ParseError(1, f"hop must be positive, got {header[1]!r}")
    classes = tuple(c.strip() for c in header[2:])
    try:
        for label in classes:
            check_label(label)
    except ValueError as exc:
        raise ParseError(1, str(exc)) from None
    if len(set(classes)) != len(classes):
        raise ParseError(1, "duplicate class columns in header")

    order: list[str] = []
    rows: dict[str, list[list[float]]] = {}
    active: str | None = None
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 2 + len(classes):
            raise ParseError(
                line_no, f"expected {2 + len(classes)} tab-separated fields, got {len(fields)}"
            )
        clip = fields[0]
        try:
            check_clip_id(clip)
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from None
        if clip != active:
            if clip in rows:
                raise ParseError(line_no, f"rows for clip {clip!r} must form one contiguous block")
            rows[clip] = []
            order.append(clip)
            active = clip
        try:
            frame = int(fields[1])
        except ValueError:
            raise ParseError(line_no, f"frame index must be an integer, got {fields[1]!r}") from None
        if frame != len(rows[clip]):
            raise ParseError(
                line_no, f"frame indices for {clip!r} must count up from 0, got {frame}"
            )
        try:
            probs = [float(p) for p in fields[2:]]
        except ValueError:
            raise ParseError(line_no, "probabilities must be decimal numbers") from None
        if not all(math.isfinite(p) and 0.0 <= p <= 1.0 for p in probs):
            raise ParseError(line_no, "probabilities must lie in [0, 1]")
        rows[clip].append(probs)
    return [
        ActivationMatrix(clip, classes, np.asarray(rows[clip], dtype=float), hop)
        for clip in order
    ]


def serialize_activations(matrices: Sequence[ActivationMatrix]) -> str:
    """Inverse of :func:`parse_activations`.

    All matrices must share hop and classes and have distinct clips, since
    one file carries a single header.
    """
    if not matrices:
        raise ValueError("need at least one activation matrix")
    first = matrices[0]
    clips = [m.clip for m in matrices]
    if len(set(clips)) != len(clips):
        raise ValueError("duplicate clips in one activation file")
    for m in matrices[1:]:
        if m.classes != first.classes or m.hop != first.hop:
            raise ValueError("all matrices in one file must share hop and classes")
    lines = [f"{_HEADER_FIELD}\t{first.hop!r}\t" + "\t".join(first.classes)]
    for m in matrices:
        for i, row in enumerate(m.values):
            lines.append(f"{m.clip}\t{i}\t" + "\t".join(f"{p:.6f}" for p in row))
    return "".join(line + "\n" for line in lines)


def activation_from_events(
    clip: str,
    events: Iterable[TimedEvent],
    classes: Sequence[str],
    frames: int,
    hop: float = 0.020,
) -> ActivationMatrix:
    """Build a one-hot activation grid from an event list.

    A frame is active for a class when some event of that class overlaps
    the frame interval by a positive amount; events aligned to frame
    boundaries therefore decode back to themselves (window 1).
    """
    classes = tuple(classes)
    index = {label: i for i, label in enumerate(classes)}
    values = np.zeros((frames, len(classes)))
    for e in events:
        if e.label not in index:
            raise ValueError(f"event label {e.label!r} is not in the class list")
        col = index[e.label]
        for f in range(frames):
            if min(e.offset, (f + 1) * hop) - max(e.onset, f * hop) > 0:
                values[f, col] = 1.0
    return ActivationMatrix(clip, classes, values, hop)
