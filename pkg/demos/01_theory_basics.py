"""Tour of the core model: pitch classes, chords, keys, Roman numerals.

Everything downstream is built from these few values: chords are (root,
major/minor) pairs sampled on an 8th-note grid, and progressions that share
a Roman-numeral sequence form one "identity" regardless of style.
"""

from cadenza import (
    ChordEvent,
    ChordProgression,
    Key,
    Mode,
    TriadQuality,
    chord_degree,
    interval_pc,
    to_roman,
)

c_major = Key(0, Mode.MAJOR)
a_minor = Key(9, Mode.MINOR)

print("intervals are pitch-class arithmetic:")
print("  C up to G:", interval_pc(0, 7), "semitones")
print("  A up to D:", interval_pc(9, 2), "semitones")

print("\nchord degrees are diatonic positions (None = chromatic):")
for root, name in ((0, "C"), (7, "G"), (9, "Am"), (1, "C#")):
    quality = TriadQuality.MINOR if name.endswith("m") else TriadQuality.MAJOR
    print(f"  {name:>3} in C major -> {chord_degree(ChordEvent(root, quality), c_major)}")

print("\na progression is one chord per 8th-note slot (8 per 4/4 bar):")
pairs = (
    [[0, "maj"]] * 8 + [[9, "min"]] * 8 + [[2, "min"]] * 8 + [[7, "maj"]] * 8
)
progression = ChordProgression.from_pairs(pairs)
print(f"  {len(progression)} slots, {progression.bars} bars")
print("  identity in C major:", to_roman(progression, c_major))

print("\nidentities are transposition-invariant:")
for k in (2, 5, 9):
    shifted = progression.transpose(k)
    print(f"  up {k:>2} semitones:", to_roman(shifted, c_major.transpose(k)))

print("\nminor keys use the natural-minor scale:")
minor_pairs = [[9, "min"]] * 16 + [[2, "min"]] * 8 + [[4, "maj"]] * 8
print("  Am-Dm-E in A minor:", to_roman(ChordProgression.from_pairs(minor_pairs), a_minor))
