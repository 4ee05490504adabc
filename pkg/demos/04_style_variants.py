"""Per-phrase style control: swap a phrase to another variant of its identity.

Swapping styles never changes a phrase's Roman numerals; it changes the
rendering template, so the voicing (and with rhythm-shifting styles like
rnb, the per-slot chord placement) is what moves.
"""

from pathlib import Path

from cadenza import (
    StyleLabel,
    TransitionStats,
    harmonize,
    load_default_library,
    select_style,
)
from cadenza.midi import load_annotation, parse_melody_midi

DATA = Path(__file__).resolve().parent.parent / "src" / "cadenza" / "data"

melody = parse_melody_midi(
    DATA / "demo_melody.mid", load_annotation(DATA / "demo_annotation.json")
)
library = load_default_library()
stats = TransitionStats.build(library)
result = harmonize(melody, library, stats)

phrase = result.choices[1]
print(f"phrase 1 starts as {phrase.chosen.id_string} "
      f"({phrase.chosen.style.value}), identity {phrase.identity}")
print(f"available styles: {[s.value for s in phrase.available_styles()]}\n")

for style in (StyleLabel.POP_STANDARD, StyleLabel.RNB, StyleLabel.POP_COMPLEX):
    try:
        restyled = select_style(result, 1, style)
    except ValueError as exc:
        print(f"{style.value}: {exc}")
        continue
    choice = restyled.choices[1]
    chords = restyled.phrase_chords(1)
    changes = sum(
        1 for a, b in zip(chords, chords.events[1:]) if a != b
    ) + 1
    print(f"{style.value:>12}: template {choice.chosen.id_string}, "
          f"{len(choice.chosen.voicing)} voicing notes, "
          f"{changes} chord segments, identity {choice.identity}")

print("\nidentities never move; other phrases are untouched.")
