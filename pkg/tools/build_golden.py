#!/usr/bin/env python3
"""Regenerate the golden arrangement bytes under tests/golden/.

Run after any intentional behavior change in the pipeline and commit the
result; the acceptance suite compares against these bytes exactly.
"""

from __future__ import annotations

from pathlib import Path

from cadenza.arrange import Complexity, arrange, load_textures
from cadenza.harmonize import harmonize
from cadenza.library import TransitionStats, load_default_library
from cadenza.midi import arrangement_midi_bytes, load_annotation, parse_melody_midi

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "src" / "cadenza" / "data"
GOLDEN = ROOT / "tests" / "golden"


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    library = load_default_library()
    stats = TransitionStats.build(library)
    melody = parse_melody_midi(
        DATA / "demo_melody.mid", load_annotation(DATA / "demo_annotation.json")
    )
    result = harmonize(melody, library, stats)
    arrangement = arrange(melody, result, load_textures(), Complexity.MEDIUM)
    payload = arrangement_midi_bytes(arrangement)
    (GOLDEN / "demo_arrangement.mid").write_bytes(payload)
    print(f"wrote {GOLDEN / 'demo_arrangement.mid'} ({len(payload)} bytes)")


if __name__ == "__main__":
    main()
