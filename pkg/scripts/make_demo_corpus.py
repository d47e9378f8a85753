#!/usr/bin/env python3
"""Generate a small synthetic corpus for trying out the toolkit.

Writes four files into the output directory:

* ``reference.tsv``   strong labels used as ground truth
* ``weak.tsv``        clip-level tags derived from the reference
* ``system.tsv``      a degraded hypothesis (jitter, drops, spurious events)
* ``activations.tsv`` one-hot frame activations built from the reference

Typical session::

    python scripts/make_demo_corpus.py --out demo
    sedscore evaluate demo/reference.tsv demo/system.tsv
    sedscore decode demo/activations.tsv --median 1 | \\
        sedscore evaluate demo/reference.tsv -
"""

from __future__ import annotations

import argparse
import random
from pathlib import Path

from sedscore import (
    StrongAnnotationSet,
    TimedEvent,
    WeakAnnotationSet,
    activation_from_events,
    serialize_activations,
    serialize_strong,
    serialize_weak,
)

CLASSES = ("Alarm", "Blender", "Cat", "Dishes", "Dog", "Speech")
HOP = 0.02
FRAMES = 500  # 10 s clips


def random_clip_events(rng: random.Random) -> list[TimedEvent]:
    events: list[TimedEvent] = []
    for label in rng.sample(CLASSES, rng.randint(1, 3)):
        frame = rng.randint(0, 40)
        while frame < FRAMES - 15 and rng.random() < 0.7:
            length = rng.randint(15, 120)  # 0.3 .. 2.4 s
            stop = min(frame + length, FRAMES)
            events.append(TimedEvent(frame * HOP, stop * HOP, label))
            frame = stop + rng.randint(10, 150)
    if not events:
        events.append(TimedEvent(0.0, 50 * HOP, rng.choice(CLASSES)))
    return events


def degrade(events: list[TimedEvent], rng: random.Random) -> list[TimedEvent]:
    """Jitter boundaries, drop some events, and hallucinate a few extras."""
    out: list[TimedEvent] = []
    for e in events:
        if rng.random() < 0.15:
            continue
        onset = max(0.0, e.onset + rng.uniform(-0.15, 0.15))
        offset = max(onset + 0.05, e.offset + rng.uniform(-0.25, 0.25))
        out.append(TimedEvent(round(onset, 3), round(offset, 3), e.label))
    if rng.random() < 0.3:
        onset = round(rng.uniform(0.0, 8.0), 3)
        out.append(TimedEvent(onset, onset + 0.8, rng.choice(CLASSES)))
    return out


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="demo", help="output directory (default: demo)")
    parser.add_argument("--clips", type=int, default=8, help="number of clips (default: 8)")
    parser.add_argument("--seed", type=int, default=7, help="random seed (default: 7)")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    reference: dict[str, tuple[TimedEvent, ...]] = {}
    system: dict[str, tuple[TimedEvent, ...]] = {}
    weak: dict[str, frozenset[str]] = {}
    matrices = []
    for i in range(args.clips):
        clip = f"demo_{i:03d}.wav"
        events = random_clip_events(rng)
        reference[clip] = tuple(events)
        weak[clip] = frozenset(e.label for e in events)
        degraded = degrade(events, rng)
        if degraded:
            system[clip] = tuple(degraded)
        matrices.append(activation_from_events(clip, events, CLASSES, FRAMES, HOP))

    (out_dir / "reference.tsv").write_text(
        serialize_strong(StrongAnnotationSet(reference)), encoding="utf-8")
    (out_dir / "system.tsv").write_text(
        serialize_strong(StrongAnnotationSet(system)), encoding="utf-8")
    (out_dir / "weak.tsv").write_text(
        serialize_weak(WeakAnnotationSet(weak)), encoding="utf-8")
    (out_dir / "activations.tsv").write_text(
        serialize_activations(matrices), encoding="utf-8")

    n_events = sum(len(v) for v in reference.values())
    print(f"wrote {args.clips} clips / {n_events} reference events to {out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
