"""Weak and strong label files: parsing, serialization, and validation.

Two tab-separated annotation formats are supported, both UTF-8 with LF or
CRLF line endings and an optional header line whose first field is
literally ``filename``:

* weak labels, one clip per line, tagging classes without timestamps::

      clip<TAB>label(;label)*

* strong labels, one timed event per line::

      clip<TAB>onset_seconds<TAB>offset_seconds<TAB>label

Parsed sets are canonical: weak label sets are deduplicated, strong event
lists are sorted by (onset, offset, label).  Serialization emits clips in
lexicographic order with LF endings and no header, so ``serialize(parse(f))``
is byte-identical for a file already in canonical form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "ERROR",
    "WARNING",
    "Finding",
    "NormalizeConfig",
    "ParseError",
    "StrongAnnotationSet",
    "TimedEvent",
    "ValidationReport",
    "WeakAnnotationSet",
    "check_clip_id",
    "check_label",
    "parse_strong",
    "parse_weak",
    "scan_strong",
    "scan_weak",
    "serialize_strong",
    "serialize_weak",
    "validate_strong",
]

ERROR = "error"
WARNING = "warning"

_HEADER_FIELD = "filename"


class ParseError(ValueError):
    """A line of an input file violates its format.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


def check_label(label: str) -> str:
    """Return ``label`` unchanged if it is a legal class label.

    Labels are opaque, case-sensitive strings; they may contain spaces and
    slashes but no tabs, newlines, semicolons, or surrounding whitespace.
    """
    if not label:
        raise ValueError("class label must be non-empty")
    if any(c in label for c in "\t\n\r;"):
        raise ValueError(f"class label {label!r} contains a tab, newline, or semicolon")
    if label != label.strip():
        raise ValueError(f"class label {label!r} has surrounding whitespace")
    return label


def check_clip_id(clip: str) -> str:
    """Return ``clip`` unchanged if it is a legal clip id (filename)."""
    if not clip:
        raise ValueError("clip id must be non-empty")
    if any(c in clip for c in "\t\n\r"):
        raise ValueError(f"clip id {clip!r} contains a tab or newline")
    return clip


@dataclass(frozen=True, order=True)
class TimedEvent:
    """A labeled time interval within one clip, in seconds.

    Ordering is lexicographic on (onset, offset, label), which is also the
    canonical storage order inside a :class:`StrongAnnotationSet`.
    """

    onset: float
    offset: float
    label: str

    def __post_init__(self) -> None:
        check_label(self.label)
        if not (math.isfinite(self.onset) and math.isfinite(self.offset)):
            raise ValueError("onset and offset must be finite")
        if self.onset < 0:
            raise ValueError(f"onset must be non-negative, got {self.onset}")
        if self.offset <= self.onset:
            raise ValueError(
                f"offset must be greater than onset, got ({self.onset}, {self.offset})"
            )

    @property
    def duration(self) -> float:
        return self.offset - self.onset


@dataclass(frozen=True)
class WeakAnnotationSet:
    """Clip-level tags: a duplicate-free set of class labels per clip."""

    entries: dict[str, frozenset[str]]

    def __post_init__(self) -> None:
        canonical: dict[str, frozenset[str]] = {}
        for clip, labels in self.entries.items():
            check_clip_id(clip)
            label_set = frozenset(labels)
            if not label_set:
                raise ValueError(f"clip {clip!r} has an empty label set")
            for label in label_set:
                check_label(label)
            canonical[clip] = label_set
        object.__setattr__(self, "entries", canonical)

    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set().union(*self.entries.values()) if self.entries else ()))


@dataclass(frozen=True)
class StrongAnnotationSet:
    """Timed events per clip, stored sorted by (onset, offset, label)."""

    entries: dict[str, tuple[TimedEvent, ...]]

    def __post_init__(self) -> None:
        canonical: dict[str, tuple[TimedEvent, ...]] = {}
        for clip, events in self.entries.items():
            check_clip_id(clip)
            ordered = tuple(sorted(events))
            if not ordered:
                raise ValueError(f"clip {clip!r} has an empty event list")
            canonical[clip] = ordered
        object.__setattr__(self, "entries", canonical)

    def classes(self) -> tuple[str, ...]:
        return tuple(sorted({e.label for events in self.entries.values() for e in events}))

    def total_events(self) -> int:
        return sum(len(events) for events in self.entries.values())


@dataclass(frozen=True)
class Finding:
    """One validation finding: where it was seen and how bad it is.

    ``line`` is None for findings raised on a parsed set rather than on a
    specific input line.
    """

    clip: str
    line: int | None
    severity: str
    message: str

    def format_line(self) -> str:
        line = "-" if self.line is None else str(self.line)
        return f"{self.clip}:{line}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    """Ordered collection of findings; empty means the input passed."""

    findings: tuple[Finding, ...]

    @property
    def error_count(self) -> int:
        return sum(1 for f in self.findings if f.severity == ERROR)

    @property
    def warning_count(self) -> int:
        return sum(1 for f in self.findings if f.severity == WARNING)

    def has_errors(self) -> bool:
        return self.error_count > 0

    def promote_warnings(self) -> "ValidationReport":
        """Copy of the report with every warning escalated to an error."""
        return ValidationReport(
            tuple(
                Finding(f.clip, f.line, ERROR, f.message) if f.severity == WARNING else f
                for f in self.findings
            )
        )

    def format_text(self) -> str:
        lines = [f.format_line() for f in self.findings]
        lines.append(f"{self.error_count} error(s), {self.warning_count} warning(s)")
        return "\n".join(lines)

    def to_records(self) -> list[dict]:
        return [
            {"clip": f.clip, "line": f.line, "severity": f.severity, "message": f.message}
            for f in self.findings
        ]


def _split_lines(text: str) -> list[str]:
    """Split file contents on LF, tolerating CRLF and a trailing newline."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def scan_weak(text: str) -> tuple[WeakAnnotationSet, list[Finding]]:
    """Parse weak labels leniently, collecting per-line errors as findings.

    Lines that fail to parse are reported and skipped; everything else is
    merged into the returned set.
    """
    entries: dict[str, set[str]] = {}
    findings: list[Finding] = []
    for line_no, line in enumerate(_split_lines(text), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if line_no == 1 and fields[0] == _HEADER_FIELD:
            continue
        if len(fields) != 2:
            findings.append(
                Finding(fields[0] or "?", line_no, ERROR,
                        f"expected 2 tab-separated fields, got {len(fields)}")
            )
            continue
        clip, label_field = fields
        labels = [piece.strip() for piece in label_field.split(";")]
        try:
            check_clip_id(clip)
            for label in labels:
                check_label(label)
        except ValueError as exc:
            findings.append(Finding(clip or "?", line_no, ERROR, str(exc)))
            continue
        entries.setdefault(clip, set()).update(labels)
    parsed = WeakAnnotationSet({clip: frozenset(v) for clip, v in entries.items()})
    return parsed, findings


def scan_strong(text: str) -> tuple[StrongAnnotationSet, list[Finding]]:
    """Parse strong labels leniently, collecting per-line errors as findings."""
    entries: dict[str, list[TimedEvent]] = {}
    findings: list[Finding] = []

    def issue(line_no: int, clip: str, message: str) -> None:
        findings.append(Finding(clip or "?", line_no, ERROR, message))

    for line_no, line in enumerate(_split_lines(text), start=1):
        if not line:
            continue
        fields = line.split("\t")
        if line_no == 1 and fields[0] == _HEADER_FIELD:
            continue
        if len(fields) != 4:
            issue(line_no, fields[0], f"expected 4 tab-separated fields, got {len(fields)}")
            continue
        clip, onset_text, offset_text, label = fields[0], fields[1], fields[2], fields[3].strip()
        try:
            check_clip_id(clip)
            check_label(label)
        except ValueError as exc:
            issue(line_no, clip, str(exc))
            continue
        try:
            onset = float(onset_text)
            offset = float(offset_text)
        except ValueError:
            issue(line_no, clip,
                  f"onset/offset must be decimal seconds, got {onset_text!r}/{offset_text!r}")
            continue
        if not (math.isfinite(onset) and math.isfinite(offset)):
            issue(line_no, clip, f"onset/offset must be finite, got {onset_text}/{offset_text}")
            continue
        if onset < 0:
            issue(line_no, clip, f"negative onset {onset_text}")
            continue
        if offset <= onset:
            issue(line_no, clip, f"offset {offset_text} is not after onset {onset_text}")
            continue
        entries.setdefault(clip, []).append(TimedEvent(onset, offset, label))
    parsed = StrongAnnotationSet({clip: tuple(v) for clip, v in entries.items()})
    return parsed, findings


def _raise_first_error(findings: Iterable[Finding]) -> None:
    for f in findings:
        if f.severity == ERROR:
            raise ParseError(f.line or 0, f.message)


def parse_weak(text: str) -> WeakAnnotationSet:
    """Strictly parse a weak-label file; raise :class:`ParseError` on the
    first malformed line."""
    parsed, findings = scan_weak(text)
    _raise_first_error(findings)
    return parsed


def parse_strong(text: str) -> StrongAnnotationSet:
    """Strictly parse a strong-label file; raise :class:`ParseError` on the
    first malformed line."""
    parsed, findings = scan_strong(text)
    _raise_first_error(findings)
    return parsed


def serialize_weak(annotations: WeakAnnotationSet) -> str:
    """Canonical weak-label text: clips and labels in lexicographic order."""
    lines = []
    for clip in sorted(annotations.entries):
        lines.append(f"{clip}\t{';'.join(sorted(annotations.entries[clip]))}\n")
    return "".join(lines)


def serialize_strong(annotations: StrongAnnotationSet) -> str:
    """Canonical strong-label text with millisecond timestamps.

    Onset/offset are printed with exactly three decimals, so events shorter
    than a millisecond do not survive a serialize/parse round trip.
    """
    lines = []
    for clip in sorted(annotations.entries):
        for e in annotations.entries[clip]:
            lines.append(f"{clip}\t{e.onset:.3f}\t{e.offset:.3f}\t{e.label}\n")
    return "".join(lines)


@dataclass(frozen=True)
class NormalizeConfig:
    """Thresholds shared by annotation checks and event-list normalization.

    ``max_clip_duration`` may be None (or infinity) to disable the clip
    length check.
    """

    min_gap: float = 0.150
    min_event_duration: float = 0.250
    max_clip_duration: float | None = 10.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.min_gap) and self.min_gap >= 0):
            raise ValueError(f"min_gap must be finite and non-negative, got {self.min_gap}")
        if not (math.isfinite(self.min_event_duration) and self.min_event_duration >= 0):
            raise ValueError(
                f"min_event_duration must be finite and non-negative, got {self.min_event_duration}"
            )
        if self.max_clip_duration is not None and not self.max_clip_duration >= 0:
            raise ValueError(
                f"max_clip_duration must be non-negative or None, got {self.max_clip_duration}"
            )


def validate_strong(
    annotations: StrongAnnotationSet, cfg: NormalizeConfig | None = None
) -> ValidationReport:
    """Check annotation conventions on a parsed strong set.

    Short events, sub-threshold same-class gaps, and duplicated events are
    warnings (system output may legitimately violate them before
    normalization); an event running past the clip length limit is an error.
    """
    cfg = cfg if cfg is not None else NormalizeConfig()
    findings: list[Finding] = []
    for clip in sorted(annotations.entries):
        events = annotations.entries[clip]
        for prev, nxt in zip(events, events[1:]):
            if prev == nxt:
                findings.append(Finding(
                    clip, None, WARNING,
                    f"duplicate event ({prev.onset:.3f}, {prev.offset:.3f}, {prev.label})",
                ))
        for e in events:
            if e.duration < cfg.min_event_duration:
                findings.append(Finding(
                    clip, None, WARNING,
                    f"{e.label} event ({e.onset:.3f}, {e.offset:.3f}) lasts "
                    f"{e.duration:.3f} s, under the {cfg.min_event_duration:.3f} s minimum",
                ))
        if cfg.max_clip_duration is not None:
            for e in events:
                if e.offset > cfg.max_clip_duration:
                    findings.append(Finding(
                        clip, None, ERROR,
                        f"{e.label} event ends at {e.offset:.3f} s, beyond the "
                        f"{cfg.max_clip_duration:.3f} s clip limit",
                    ))
        by_label: dict[str, list[TimedEvent]] = {}
        for e in events:
            by_label.setdefault(e.label, []).append(e)
        for label in sorted(by_label):
            run = by_label[label]
            for prev, nxt in zip(run, run[1:]):
                gap = nxt.onset - prev.offset
                if gap < cfg.min_gap:
                    findings.append(Finding(
                        clip, None, WARNING,
                        f"{gap:.3f} s gap between {label} events at {prev.offset:.3f} s "
                        f"is under the {cfg.min_gap:.3f} s minimum",
                    ))
    return ValidationReport(tuple(findings))
