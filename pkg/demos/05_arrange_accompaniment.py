"""Full pipeline: harmonize, pick textures, and write two-track MIDI.

Textures are chosen per phrase by fitness (rhythm compatibility + register
separation) and transition smoothness under a Viterbi search; repeated
phrase labels (both A's in A8A8B8) reuse one texture. Each texture is then
retargeted to the harmonized chords: every note keeps its rhythm, and its
pitch follows its role (chord tone or scale degree) into the new chord.
"""

from pathlib import Path

from cadenza import (
    Complexity,
    TransitionStats,
    arrange,
    coverage_violations,
    harmonize,
    load_default_library,
    load_textures,
    write_arrangement_midi,
)
from cadenza.midi import load_annotation, parse_melody_midi

DATA = Path(__file__).resolve().parent.parent / "src" / "cadenza" / "data"
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

melody = parse_melody_midi(
    DATA / "demo_melody.mid", load_annotation(DATA / "demo_annotation.json")
)
library = load_default_library()
stats = TransitionStats.build(library)
textures = load_textures()

result = harmonize(melody, library, stats)

for complexity in Complexity:
    arrangement = arrange(melody, result, textures, complexity)
    onsets = {n.onset_slot for n in arrangement.accompaniment}
    density = len(onsets) / melody.total_bars
    violations = coverage_violations(arrangement, melody.key)
    path = OUT / f"demo_{complexity.value}.mid"
    write_arrangement_midi(arrangement, path)
    print(f"{complexity.value:>7}: textures {arrangement.texture_ids}")
    print(f"         {density:.1f} onsets/bar, "
          f"{len(violations)} coverage violations -> {path}")
