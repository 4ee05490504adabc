from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cadenza.core import AnnotatedMelody, Key, MelodyNote, Mode
from cadenza.harmonize import load_default_micro_table
from cadenza.library import Library, TransitionStats, load_default_library
from cadenza.midi import load_annotation, parse_melody_midi, parse_phrase_string

DATA_DIR = Path(__file__).parent.parent / "src" / "cadenza" / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def seed_library() -> Library:
    return load_default_library()


@pytest.fixture(scope="session")
def seed_stats(seed_library) -> TransitionStats:
    return TransitionStats.build(seed_library)


@pytest.fixture(scope="session")
def micro_table():
    return load_default_micro_table()


@pytest.fixture(scope="session")
def textures():
    from cadenza.arrange import load_textures

    return load_textures()


@pytest.fixture(scope="session")
def demo_melody() -> AnnotatedMelody:
    annotation = load_annotation(DATA_DIR / "demo_annotation.json")
    return parse_melody_midi(DATA_DIR / "demo_melody.mid", annotation)


@pytest.fixture(scope="session")
def minor_melody() -> AnnotatedMelody:
    """A small A-minor melody with an A8B8 structure, built in-process."""
    a_section = [
        (0, 2, 69), (2, 2, 72), (4, 4, 76), (8, 2, 74), (10, 2, 72), (12, 4, 71),
        (16, 2, 69), (18, 2, 65), (20, 4, 64), (24, 4, 69), (28, 4, 72),
        (32, 2, 76), (34, 2, 74), (36, 4, 72), (40, 2, 71), (42, 2, 69), (44, 4, 68),
        (48, 4, 69), (52, 4, 76), (56, 4, 74), (60, 4, 69),
    ]
    b_section = [
        (64, 4, 65), (68, 2, 69), (70, 2, 72), (72, 4, 71), (76, 4, 67),
        (80, 2, 76), (82, 2, 72), (84, 4, 69), (88, 8, 69),
        (96, 2, 65), (98, 2, 69), (100, 4, 74), (104, 2, 67), (106, 2, 71),
        (108, 4, 76), (112, 4, 72), (116, 4, 71), (120, 8, 69),
    ]
    notes = tuple(MelodyNote(o, d, p) for o, d, p in a_section + b_section)
    return AnnotatedMelody(
        notes, parse_phrase_string("A8B8"), Key(9, Mode.MINOR), (4, 4)
    )
