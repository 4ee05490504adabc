#!/usr/bin/env python3
"""Regenerate the bundled data files in src/cadenza/data/.

Everything here is deterministic; run it after changing a recipe and commit
the result. The seed library ships style twins (pop_standard + pop_complex)
for every progression so per-phrase restyling always has somewhere to go.
"""

from __future__ import annotations

import json
from pathlib import Path

from cadenza.core import (
    ChordEvent,
    ChordProgression,
    Key,
    MelodyNote,
    Mode,
    TriadQuality,
    VoicingNote,
    MAJOR_SCALE,
    NATURAL_MINOR_SCALE,
    parse_pitch_class,
)
from cadenza.core import AnnotatedMelody
from cadenza.library import Library, StyleLabel, Template, save_library
from cadenza.midi import parse_phrase_string, write_melody_midi

DATA = Path(__file__).resolve().parent.parent / "src" / "cadenza" / "data"

# -- micro-loss table ---------------------------------------------------------

# Dissonance by interval between melody pitch class and chord root, from the
# classical consonance ranking: unison < P5 < P4 < thirds < sixths <
# M2/m7 < m2/M7 < tritone.
_ROOT_INTERVAL_LOSS = {
    0: 0.0, 7: 0.1, 5: 0.15, 4: 0.25, 3: 0.25, 9: 0.35, 8: 0.35,
    2: 0.5, 10: 0.5, 1: 0.7, 11: 0.7, 6: 0.9,
}


def build_micro_table() -> dict:
    def matrix(scale: tuple[int, ...], darken_dominant: bool) -> list[list[float]]:
        rows = []
        for degree in range(1, 8):
            root_interval = scale[degree - 1]
            row = []
            for melody_interval in range(12):
                value = _ROOT_INTERVAL_LOSS[(melody_interval - root_interval) % 12]
                if darken_dominant and degree in (5, 7) and value >= 0.35:
                    value = min(1.0, value + 0.1)
                row.append(round(value, 3))
            rows.append(row)
        return rows

    return {
        "major": matrix(MAJOR_SCALE, darken_dominant=False),
        "minor": matrix(NATURAL_MINOR_SCALE, darken_dominant=True),
        "non_diatonic_penalty": 0.8,
    }


# -- seed chord-progression library --------------------------------------------

def chord(symbol: str) -> ChordEvent:
    quality = TriadQuality.MINOR if symbol.endswith("m") else TriadQuality.MAJOR
    root = parse_pitch_class(symbol[:-1] if symbol.endswith("m") else symbol)
    return ChordEvent(root, quality)


def progression_events(bar_symbols: list[str], anticipate: bool = False) -> ChordProgression:
    bars = [chord(s) for s in bar_symbols]
    events = []
    for slot in range(len(bars) * 8):
        bar = slot // 8
        if anticipate and slot % 8 == 7 and bar + 1 < len(bars):
            bar += 1
        events.append(bars[bar])
    return ChordProgression(tuple(events))


def _segments(progression: ChordProgression) -> list[tuple[int, int, ChordEvent]]:
    segments = []
    start = 0
    for slot in range(1, len(progression) + 1):
        if slot == len(progression) or progression[slot] != progression[start]:
            segments.append((start, slot - start, progression[start]))
            start = slot
    return segments


def _seventh(quality: TriadQuality) -> int:
    return 11 if quality is TriadQuality.MAJOR else 10


def voice_pop_standard(progression: ChordProgression) -> list[VoicingNote]:
    notes = []
    for start, length, event in _segments(progression):
        pc, third = event.root, event.quality.third
        for pitch, velocity in ((36 + pc, 78), (48 + pc, 80),
                                (48 + pc + third, 76), (55 + pc, 74)):
            notes.append(VoicingNote(start, length, pitch, velocity))
    return notes


def voice_pop_complex(progression: ChordProgression) -> list[VoicingNote]:
    notes = []
    for start, length, event in _segments(progression):
        pc, third = event.root, event.quality.third
        hits = [(start, length)]
        if length >= 4:
            half = length // 2
            hits = [(start, half), (start + half, length - half)]
        for onset, duration in hits:
            for pitch, velocity in (
                (36 + pc, 76),
                (48 + pc + third, 78),
                (48 + pc + _seventh(event.quality), 72),
                (50 + pc + 12, 68),  # ninth
            ):
                notes.append(VoicingNote(onset, duration, pitch, velocity))
    return notes


def voice_dark(progression: ChordProgression) -> list[VoicingNote]:
    notes = []
    for start, length, event in _segments(progression):
        pc, third = event.root, event.quality.third
        for pitch, velocity in ((33 + pc, 72), (40 + pc, 68),
                                (45 + pc, 64), (45 + pc + third, 62)):
            notes.append(VoicingNote(start, length, pitch, velocity))
    return notes


def voice_rnb(progression: ChordProgression) -> list[VoicingNote]:
    notes = []
    for start, length, event in _segments(progression):
        pc, third = event.root, event.quality.third
        for pitch, velocity in (
            (36 + pc, 82),
            (48 + pc + third, 84),
            (48 + pc + 7, 78),
            (48 + pc + _seventh(event.quality), 76),
        ):
            notes.append(VoicingNote(start, length, pitch, velocity))
    return notes


_VOICERS = {
    StyleLabel.POP_STANDARD: voice_pop_standard,
    StyleLabel.POP_COMPLEX: voice_pop_complex,
    StyleLabel.DARK: voice_dark,
    StyleLabel.RNB: voice_rnb,
    StyleLabel.UNKNOWN: voice_pop_standard,
}

MAJOR_8 = {
    "axis": ["C", "G", "Am", "F", "C", "G", "Am", "F"],
    "fifties": ["C", "Am", "F", "G", "C", "Am", "F", "G"],
    "cadence": ["C", "F", "G", "C", "Am", "F", "G", "C"],
    "lift": ["C", "Em", "F", "G", "C", "Em", "F", "G"],
    "anthem": ["Am", "F", "C", "G", "Am", "F", "C", "G"],
    "royal": ["F", "G", "Em", "Am", "Dm", "G", "C", "C"],
    "slow": ["C", "C", "F", "F", "G", "G", "C", "C"],
    "turn": ["C", "Dm", "G", "C", "C", "Dm", "G", "C"],
}
MAJOR_4 = {
    "axis": ["C", "G", "Am", "F"],
    "fifties": ["C", "Am", "F", "G"],
    "cadence": ["C", "F", "G", "C"],
    "anthem": ["Am", "F", "C", "G"],
    "twofive": ["Dm", "G", "C", "Am"],
    "circle": ["C", "Am", "Dm", "G"],
}
MINOR_8 = {
    "lament": ["Am", "G", "F", "E", "Am", "G", "F", "E"],
    "pull": ["Am", "F", "C", "G", "Am", "F", "C", "G"],
    "plain": ["Am", "Dm", "Am", "E", "Am", "Dm", "E", "Am"],
    "drift": ["Am", "Em", "F", "G", "Am", "Em", "F", "E"],
}
MINOR_4 = {
    "pull": ["Am", "F", "C", "G"],
    "cadence": ["Am", "Dm", "E", "Am"],
    "lament": ["Am", "G", "F", "E"],
    "drift": ["Am", "Em", "F", "G"],
}


def build_seed_library() -> Library:
    templates: list[Template] = []

    def add(name: str, bars: list[str], mode: Mode, style: StyleLabel,
            anticipate: bool = False) -> None:
        progression = progression_events(bars, anticipate)
        templates.append(
            Template(
                id=name,
                progression=progression,
                voicing=tuple(_VOICERS[style](progression)),
                style=style,
                mode=mode,
                length_bars=len(bars),
                source="seed",
            )
        )

    for group, mode in ((MAJOR_8, Mode.MAJOR), (MAJOR_4, Mode.MAJOR),
                        (MINOR_8, Mode.MINOR), (MINOR_4, Mode.MINOR)):
        prefix = "maj" if mode is Mode.MAJOR else "min"
        for name, bars in group.items():
            base = f"{prefix}{len(bars)}_{name}"
            add(f"{base}_std", bars, mode, StyleLabel.POP_STANDARD)
            add(f"{base}_cpx", bars, mode, StyleLabel.POP_COMPLEX)

    add("maj8_axis_rnb", MAJOR_8["axis"], Mode.MAJOR, StyleLabel.RNB, anticipate=True)
    add("maj4_circle_rnb", MAJOR_4["circle"], Mode.MAJOR, StyleLabel.RNB, anticipate=True)
    add("min8_pull_rnb", MINOR_8["pull"], Mode.MINOR, StyleLabel.RNB, anticipate=True)
    add("min4_pull_rnb", MINOR_4["pull"], Mode.MINOR, StyleLabel.RNB, anticipate=True)

    add("min8_lament_dark", MINOR_8["lament"], Mode.MINOR, StyleLabel.DARK)
    add("min8_pull_dark", MINOR_8["pull"], Mode.MINOR, StyleLabel.DARK)
    add("min4_lament_dark", MINOR_4["lament"], Mode.MINOR, StyleLabel.DARK)
    add("min4_pull_dark", MINOR_4["pull"], Mode.MINOR, StyleLabel.DARK)

    add("maj4_folk_unk", ["C", "F", "C", "G"], Mode.MAJOR, StyleLabel.UNKNOWN)
    add("min8_modal_unk", ["Am", "G", "Am", "G", "F", "G", "Am", "Am"],
        Mode.MINOR, StyleLabel.UNKNOWN)

    return Library(tuple(templates))


# -- texture library -------------------------------------------------------------

TEXTURE_SOURCE_4 = ["C", "F", "G", "C"]
TEXTURE_SOURCE_8 = ["C", "Am", "F", "G", "C", "F", "G", "C"]


def _bar_pattern(pattern: str, event: ChordEvent) -> list[tuple[int, int, int, int]]:
    pc, third = event.root, event.quality.third
    if pattern == "sparse_low":
        return [(0, 8, 36 + pc, 64), (0, 8, 43 + pc, 60), (0, 8, 48 + pc, 58)]
    if pattern == "sparse_open":
        return [(0, 4, 36 + pc, 64), (0, 4, 43 + pc, 60),
                (4, 4, 36 + pc, 62), (4, 4, 48 + pc, 58)]
    if pattern == "med_pulse":
        notes = []
        for k in range(4):
            notes += [(2 * k, 2, 36 + pc, 70), (2 * k, 2, 48 + pc + third, 68),
                      (2 * k, 2, 43 + pc, 66)]
        return notes
    if pattern == "med_bounce":
        return [(0, 2, 36 + pc, 72), (2, 2, 48 + pc, 68), (2, 2, 48 + pc + third, 66),
                (4, 2, 43 + pc, 70), (6, 2, 48 + pc, 68), (6, 2, 48 + pc + third, 66)]
    if pattern == "dense_arp":
        cycle = [36 + pc, 43 + pc, 48 + pc, 48 + pc + third,
                 43 + pc, 48 + pc, 48 + pc + third, 43 + pc]
        return [(i, 1, pitch, 72 if i % 2 == 0 else 66) for i, pitch in enumerate(cycle)]
    if pattern == "dense_alberti":
        cycle = [48 + pc, 43 + pc, 48 + pc + third, 43 + pc] * 2
        return [(i, 1, pitch, 70 if i % 2 == 0 else 64) for i, pitch in enumerate(cycle)]
    raise ValueError(pattern)


def build_textures() -> list[dict]:
    records = []
    specs = [
        ("sparse_low", "sparse"), ("sparse_open", "sparse"),
        ("med_pulse", "medium"), ("med_bounce", "medium"),
        ("dense_arp", "dense"), ("dense_alberti", "dense"),
    ]
    for source, bars in ((TEXTURE_SOURCE_4, 4), (TEXTURE_SOURCE_8, 8)):
        progression = progression_events(source)
        for pattern, complexity in specs:
            notes = []
            for bar in range(bars):
                event = progression[bar * 8]
                for onset, duration, pitch, velocity in _bar_pattern(pattern, event):
                    notes.append([bar * 8 + onset, duration, pitch, velocity])
            records.append({
                "id": f"tex_{pattern}_{bars}",
                "complexity": complexity,
                "length_bars": bars,
                "notes": notes,
                "source_chords": progression.as_pairs(),
                "source": "seed",
            })
    return records


# -- demo melody ------------------------------------------------------------------

DEMO_SECTION_A = [
    (0, 2, 67), (2, 2, 64), (4, 2, 67), (6, 2, 72),
    (8, 4, 74), (12, 2, 71), (14, 2, 67),
    (16, 2, 69), (18, 2, 72), (20, 4, 76),
    (24, 2, 72), (26, 2, 69), (28, 4, 65),
    (32, 2, 64), (34, 2, 67), (36, 4, 72),
    (40, 2, 74), (42, 2, 72), (44, 4, 71),
    (48, 4, 69), (52, 4, 76),
    (56, 2, 77), (58, 2, 76), (60, 4, 74),
]
DEMO_SECTION_B = [
    (0, 4, 65), (4, 2, 67), (6, 2, 69),
    (8, 4, 71), (12, 4, 67),
    (16, 4, 76), (20, 2, 72), (22, 2, 69),
    (24, 8, 69),
    (32, 2, 65), (34, 2, 69), (36, 4, 74),
    (40, 2, 67), (42, 2, 71), (44, 4, 74),
    (48, 4, 76), (52, 4, 72),
    (56, 4, 74), (60, 4, 72),
]


def build_demo_melody() -> AnnotatedMelody:
    notes = []
    for offset in (0, 64):
        notes += [MelodyNote(onset + offset, dur, pitch)
                  for onset, dur, pitch in DEMO_SECTION_A]
    notes += [MelodyNote(onset + 128, dur, pitch)
              for onset, dur, pitch in DEMO_SECTION_B]
    return AnnotatedMelody(
        notes=tuple(notes),
        phrases=parse_phrase_string("A8A8B8"),
        key=Key(0, Mode.MAJOR),
        meter=(4, 4),
    )


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)

    table = build_micro_table()
    (DATA / "micro_loss.json").write_text(
        json.dumps(table, indent=1, sort_keys=True) + "\n", "utf-8"
    )

    library = build_seed_library()
    save_library(library, DATA / "seed_library.jsonl")
    styles: dict[str, int] = {}
    for t in library:
        styles[t.style.value] = styles.get(t.style.value, 0) + 1
    manifest = {
        "templates": library.N,
        "styles": dict(sorted(styles.items())),
        "lengths": {
            "4": sum(1 for t in library if t.length_bars == 4),
            "8": sum(1 for t in library if t.length_bars == 8),
        },
    }
    (DATA / "seed_manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", "utf-8"
    )

    textures = build_textures()
    (DATA / "textures.jsonl").write_text(
        "\n".join(json.dumps(r, sort_keys=True, separators=(",", ":"))
                  for r in textures) + "\n",
        "utf-8",
    )

    melody = build_demo_melody()
    write_melody_midi(melody, DATA / "demo_melody.mid")
    (DATA / "demo_annotation.json").write_text(
        json.dumps({"phrases": "A8A8B8", "key": "C", "mode": "major",
                    "meter": "4/4"}, indent=1, sort_keys=True) + "\n",
        "utf-8",
    )

    print(f"library: {library.N} templates ({manifest['styles']})")
    print(f"textures: {len(textures)}")
    print(f"melody: {melody.total_bars} bars, {len(melody.notes)} notes")


if __name__ == "__main__":
    main()
