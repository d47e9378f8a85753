#!/usr/bin/env python3
"""Sweep the matching tolerances and report how the macro F1 responds.

Scores one system file against a reference under a range of onset collars
(the offset collar follows the onset collar unless pinned), which shows how
much of a system's error budget is boundary placement rather than
detection::

    python scripts/collar_sweep.py demo/reference.tsv demo/system.tsv
"""

from __future__ import annotations

import argparse

from sedscore import EvalConfig, evaluate, parse_strong
from sedscore.render import align_table, percent

DEFAULT_COLLARS = (0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("reference", help="reference strong-label TSV")
    parser.add_argument("system", help="system strong-label TSV")
    parser.add_argument("--collars", type=float, nargs="+", default=list(DEFAULT_COLLARS),
                        help="onset collar values in seconds")
    parser.add_argument("--offset-collar", type=float, default=None,
                        help="pin the fixed offset collar instead of tracking the onset collar")
    parser.add_argument("--offset-pct", type=float, default=0.2,
                        help="offset tolerance as a fraction of reference length (default 0.2)")
    args = parser.parse_args()

    ref = parse_strong(open(args.reference, encoding="utf-8").read())
    sys_set = parse_strong(open(args.system, encoding="utf-8").read())

    rows = []
    for collar in sorted(args.collars):
        cfg = EvalConfig(
            onset_collar=collar,
            offset_collar=args.offset_collar if args.offset_collar is not None else collar,
            offset_length_pct=args.offset_pct,
        )
        report = evaluate(ref, sys_set, cfg)
        totals = [report.per_class[c].counts for c in report.per_class]
        tp = sum(c.tp for c in totals)
        fp = sum(c.fp for c in totals)
        fn = sum(c.fn for c in totals)
        rows.append([f"{collar:.3f}", str(tp), str(fp), str(fn), percent(report.macro_f1)])

    print(align_table(["Onset collar (s)", "TP", "FP", "FN", "Macro F1"], rows))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
