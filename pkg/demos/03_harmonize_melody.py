"""Harmonize the bundled 24-bar demo melody (A8A8B8).

Each phrase gets the template (or pair of 4-bar templates) that maximizes
beta*(1 - micro) + (1-beta)*(1 - meso) plus alpha*(1 - macro) across
junctions, searched by dynamic programming. The result groups each choice
with every same-identity variant the user could swap in.
"""

from pathlib import Path

from cadenza import (
    HarmonizerConfig,
    TransitionStats,
    harmonize,
    load_default_library,
)
from cadenza.midi import (
    TrackSpec,
    load_annotation,
    melody_track_spec,
    parse_melody_midi,
    write_midi_bytes,
)

DATA = Path(__file__).resolve().parent.parent / "src" / "cadenza" / "data"
OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

melody = parse_melody_midi(
    DATA / "demo_melody.mid", load_annotation(DATA / "demo_annotation.json")
)
library = load_default_library()
stats = TransitionStats.build(library)

result = harmonize(melody, library, stats, HarmonizerConfig(alpha=0.1, beta=0.5))

print(f"total score: {result.total_score:.4f}\n")
for choice in result.choices:
    style = choice.chosen.style.value if choice.chosen.style else "mixed"
    print(f"phrase {choice.phrase_index} [{choice.label}] -> {choice.identity}")
    print(f"  template {choice.chosen.id_string} ({style})")
    print(f"  losses: micro {choice.micro:.3f}, meso {choice.meso:.3f}, "
          f"macro {choice.macro:.3f}")
    alternatives = [f"{v.id_string} ({v.style.value if v.style else 'mixed'})"
                    for v in choice.variants]
    print(f"  variants: {', '.join(alternatives)}\n")

lead_sheet = OUT / "demo_lead_sheet.mid"
lead_sheet.write_bytes(
    write_midi_bytes(
        [melody_track_spec(melody), TrackSpec("chords", result.lead_sheet_voicing(), channel=1)],
        time_signature=melody.meter,
    )
)
(OUT / "demo_harmonization.json").write_text(result.to_json())
print(f"wrote {lead_sheet} and {OUT / 'demo_harmonization.json'}")
