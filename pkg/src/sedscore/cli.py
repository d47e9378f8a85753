"""Command-line interface: evaluate, validate, stats, and decode subcommands.

Reports go to stdout, diagnostics to stderr.  Exit status: 0 success,
1 validation errors, 2 usage/parse/configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .annot import (
    NormalizeConfig,
    ParseError,
    StrongAnnotationSet,
    ValidationReport,
    parse_strong,
    parse_weak,
    scan_strong,
    scan_weak,
    serialize_strong,
    validate_strong,
)
from .events import DecodeConfig, decode, normalize, parse_activations
from .metrics import EvalConfig, evaluate
from . import stats as corpus_stats


class CliError(Exception):
    """Fatal command-line failure; its message goes to stderr, exit 2."""


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise CliError(f"{path}: not valid UTF-8 ({exc})") from exc


def _load_strong(path: str) -> StrongAnnotationSet:
    try:
        return parse_strong(_read_input(path))
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _load_class_list(path: str) -> list[str]:
    labels = [line.strip() for line in _read_input(path).splitlines()]
    labels = [label for label in labels if label]
    if not labels:
        raise CliError(f"{path}: class list file is empty")
    return labels


def _config(factory, **kwargs):
    try:
        return factory(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _normalize_set(annotations: StrongAnnotationSet, cfg: NormalizeConfig) -> StrongAnnotationSet:
    entries = {}
    for clip, events in annotations.entries.items():
        kept = normalize(events, cfg)
        if kept:
            entries[clip] = tuple(kept)
    return StrongAnnotationSet(entries)


def _emit_records(records: list[dict]) -> None:
    for record in records:
        print(json.dumps(record))


def _cmd_evaluate(args: argparse.Namespace) -> int:
    ref = _load_strong(args.reference)
    sys_set = _load_strong(args.system)
    cfg = _config(
        EvalConfig,
        onset_collar=args.onset_collar,
        offset_collar=args.offset_collar,
        offset_length_pct=args.offset_pct,
    )
    class_list = _load_class_list(args.classes) if args.classes else None
    if args.normalize:
        sys_set = _normalize_set(sys_set, NormalizeConfig())
    try:
        report = evaluate(ref, sys_set, cfg, class_list=class_list)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if args.format == "table":
        print(report.format_table())
    elif args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        _emit_records(report.to_records())
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    text = _read_input(args.path)
    cfg = _config(
        NormalizeConfig,
        min_gap=args.min_gap,
        min_event_duration=args.min_duration,
        max_clip_duration=args.max_clip_duration,
    )
    if args.kind == "weak":
        _, findings = scan_weak(text)
    else:
        parsed, findings = scan_strong(text)
        findings = list(findings) + list(validate_strong(parsed, cfg).findings)
    report = ValidationReport(tuple(findings))
    if args.strict:
        report = report.promote_warnings()
    if args.format == "table":
        print(report.format_text())
    elif args.format == "json":
        print(json.dumps({
            "findings": report.to_records(),
            "errors": report.error_count,
            "warnings": report.warning_count,
        }, indent=2))
    else:
        _emit_records(report.to_records())
    return 1 if report.has_errors() else 0


def _print_sections(sections: list[tuple[str, str]]) -> None:
    chunks = [f"# {title}\n{body}" for title, body in sections]
    print("\n\n".join(chunks))


def _cmd_stats(args: argparse.Namespace) -> int:
    text = _read_input(args.path)
    if args.kind == "weak" and args.histogram is not None:
        raise CliError("--histogram requires strong annotations")
    try:
        if args.kind == "weak":
            weak = parse_weak(text)
            sections = [
                ("clips per class",
                 corpus_stats.format_weak_class_stats(corpus_stats.weak_class_stats(weak))),
                ("distinct classes per clip",
                 corpus_stats.format_classes_per_clip(corpus_stats.classes_per_clip(weak))),
            ]
            doc = {
                "class_stats": corpus_stats.weak_class_stats_records(
                    corpus_stats.weak_class_stats(weak)),
                "classes_per_clip": corpus_stats.classes_per_clip_records(
                    corpus_stats.classes_per_clip(weak)),
            }
            records = (
                [{"table": "class_stats", **r} for r in doc["class_stats"]]
                + [{"table": "classes_per_clip", **r} for r in doc["classes_per_clip"]]
            )
        else:
            strong = parse_strong(text)
            overlap = corpus_stats.overlap_stats(strong)
            sections = [
                ("class statistics",
                 corpus_stats.format_class_stats(corpus_stats.class_stats(strong))),
                ("distinct classes per clip",
                 corpus_stats.format_classes_per_clip(corpus_stats.classes_per_clip(strong))),
                ("simultaneous events (time shares cover only event-covered time; "
                 "clips bucketed by peak simultaneity)",
                 corpus_stats.format_overlap(overlap)),
            ]
            doc = {
                "class_stats": corpus_stats.class_stats_records(corpus_stats.class_stats(strong)),
                "classes_per_clip": corpus_stats.classes_per_clip_records(
                    corpus_stats.classes_per_clip(strong)),
                "overlap": corpus_stats.overlap_records(overlap),
            }
            records = (
                [{"table": "class_stats", **r} for r in doc["class_stats"]]
                + [{"table": "classes_per_clip", **r} for r in doc["classes_per_clip"]]
                + [{"table": "overlap", **r} for r in doc["overlap"]]
            )
            if args.histogram is not None:
                if args.histogram <= 0:
                    raise CliError("--histogram bin width must be positive")
                histograms = corpus_stats.duration_histogram(strong, args.histogram)
                sections.append((
                    f"duration histogram (bin width {args.histogram:g} s)",
                    corpus_stats.format_histograms(histograms),
                ))
                doc["histogram"] = corpus_stats.histogram_records(histograms)
                records += [{"table": "histogram", **r} for r in doc["histogram"]]
    except ParseError as exc:
        raise CliError(f"{args.path}: {exc}") from exc
    if args.format == "table":
        _print_sections(sections)
    elif args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        _emit_records(records)
    return 0


def _cmd_decode(args: argparse.Namespace) -> int:
    text = _read_input(args.activations)
    try:
        matrices = parse_activations(text)
    except ParseError as exc:
        raise CliError(f"{args.activations}: {exc}") from exc
    cfg = _config(DecodeConfig, threshold=args.threshold, median_window=args.median)
    entries = {}
    for matrix in matrices:
        events = decode(matrix, cfg)
        if args.normalize:
            events = normalize(events, NormalizeConfig())
        if events:
            entries[matrix.clip] = tuple(events)
    output = serialize_strong(StrongAnnotationSet(entries))
    if args.output and args.output != "-":
        Path(args.output).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=("table", "json", "jsonl"),
        default="table",
        help="output form: aligned text table (default), one JSON document, or one JSON record per line",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sedscore",
        description="Evaluation toolkit for polyphonic sound event detection: "
        "collar-tolerant event F1 scoring, annotation validation, corpus "
        "statistics, and frame-activation decoding.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "evaluate",
        help="score a system strong-label file against a reference",
        description="Score a system's strong-label TSV against a reference TSV "
        "with the collar-tolerant event F1 metric, macro-averaged over classes.",
    )
    p.add_argument("reference", help="reference strong-label TSV ('-' for stdin)")
    p.add_argument("system", help="system strong-label TSV ('-' for stdin)")
    p.add_argument("--onset-collar", type=float, default=0.2, metavar="S",
                   help="onset tolerance in seconds (default 0.2)")
    p.add_argument("--offset-collar", type=float, default=0.2, metavar="S",
                   help="fixed offset tolerance in seconds (default 0.2)")
    p.add_argument("--offset-pct", type=float, default=0.2, metavar="F",
                   help="offset tolerance as a fraction of the reference event length (default 0.2)")
    p.add_argument("--classes", metavar="FILE",
                   help="pin the macro-average class list to this file, one label per line")
    p.add_argument("--normalize", action="store_true",
                   help="merge sub-150ms same-class gaps and drop sub-250ms events "
                   "in the system output before scoring")
    _add_format_flag(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser(
        "validate",
        help="check an annotation file and report findings",
        description="Check an annotation file; parse problems and events beyond "
        "the clip length are errors, convention violations are warnings.",
    )
    p.add_argument("path", help="annotation file ('-' for stdin)")
    p.add_argument("--kind", choices=("weak", "strong"), required=True,
                   help="annotation format of the file")
    p.add_argument("--strict", action="store_true", help="treat warnings as errors")
    p.add_argument("--min-duration", type=float, default=0.250, metavar="S",
                   help="minimum event duration in seconds (default 0.25)")
    p.add_argument("--min-gap", type=float, default=0.150, metavar="S",
                   help="minimum same-class gap in seconds (default 0.15)")
    p.add_argument("--max-clip-duration", type=float, default=10.0, metavar="S",
                   help="clip length limit in seconds; pass 'inf' to disable (default 10)")
    _add_format_flag(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser(
        "stats",
        help="corpus statistics for an annotation file",
        description="Per-class counts and durations, distinct-classes-per-clip "
        "proportions, and (for strong files) overlap proportions and duration histograms.",
    )
    p.add_argument("path", help="annotation file ('-' for stdin)")
    p.add_argument("--kind", choices=("weak", "strong"), required=True,
                   help="annotation format of the file")
    p.add_argument("--histogram", type=float, metavar="WIDTH",
                   help="also emit per-class duration histograms with this bin width in seconds")
    _add_format_flag(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser(
        "decode",
        help="turn a frame-activation TSV into strong labels",
        description="Threshold and median-smooth per-class frame activations and "
        "emit the resulting events as a strong-label TSV (valid input for 'evaluate').",
    )
    p.add_argument("activations", help="activation TSV ('-' for stdin)")
    p.add_argument("--threshold", type=float, default=0.5, metavar="P",
                   help="activation threshold in (0, 1) (default 0.5)")
    p.add_argument("--median", type=int, default=51, metavar="N",
                   help="median filter window in frames, odd (default 51)")
    p.add_argument("--normalize", action="store_true",
                   help="merge sub-150ms same-class gaps and drop sub-250ms events after decoding")
    p.add_argument("-o", "--output", metavar="FILE",
                   help="write the strong-label TSV here instead of stdout")
    p.set_defaults(func=_cmd_decode)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sedscore: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
