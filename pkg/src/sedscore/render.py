"""Aligned-column text tables for the command-line reports."""

from __future__ import annotations

from typing import Sequence


def percent(x: float) -> str:
    return f"{100.0 * x:.2f}%"


def align_table(
    headers: Sequence[str],
    rows: Sequence[Sequence[str]],
    aligns: str | None = None,
) -> str:
    """Render rows as aligned columns separated by two spaces.

    ``aligns`` is one 'l'/'r' per column; by default the first column is
    left-aligned and the rest right-aligned.
    """
    if aligns is None:
        aligns = "l" + "r" * (len(headers) - 1)
    table = [list(headers)] + [list(row) for row in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = []
    for row in table:
        cells = [
            cell.ljust(width) if align == "l" else cell.rjust(width)
            for cell, width, align in zip(row, widths, aligns)
        ]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)
