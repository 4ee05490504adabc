"""Curating a raw MIDI corpus into a template library.

The pipeline rejects melody-contaminated tracks, maps raw style labels
(taken from each file's subdirectory) through a user mapping, transposes
everything to the canonical key, and removes transposition duplicates.
This demo fabricates a tiny corpus on the fly to show each pass firing.
"""

import tempfile
from pathlib import Path

from cadenza import ChordEvent, ChordProgression, TriadQuality, VoicingNote, curate
from cadenza.library import StyleLabel
from cadenza.midi import TrackSpec, write_midi_bytes


def block_chords(chords, transpose=0):
    events = []
    for root, quality in chords:
        events.extend([ChordEvent(root, TriadQuality(quality))] * 8)
    progression = ChordProgression(tuple(events)).transpose(transpose)
    notes = []
    for slot in range(0, len(progression), 8):
        event = progression[slot]
        for interval in event.quality.triad_intervals:
            notes.append(VoicingNote(slot, 8, 48 + event.root + interval, 80))
    return write_midi_bytes([TrackSpec("chords", tuple(notes))])


PROGRESSION_A = [(0, "maj"), (5, "maj"), (7, "maj"), (0, "maj")]
PROGRESSION_B = [(9, "min"), (5, "maj"), (0, "maj"), (7, "maj")]

with tempfile.TemporaryDirectory() as scratch:
    corpus = Path(scratch) / "corpus"
    (corpus / "epic_pop").mkdir(parents=True)
    (corpus / "gloomy").mkdir(parents=True)

    (corpus / "epic_pop" / "tune_a.mid").write_bytes(block_chords(PROGRESSION_A))
    (corpus / "epic_pop" / "tune_a_in_d.mid").write_bytes(
        block_chords(PROGRESSION_A, transpose=2)  # redundant: only the key differs
    )
    (corpus / "gloomy" / "tune_b.mid").write_bytes(block_chords(PROGRESSION_B))

    # a melody track that must be filtered out
    lead = tuple(VoicingNote(i * 2, 2, 64 + (i * 5) % 9, 90) for i in range(16))
    (corpus / "epic_pop" / "lead.mid").write_bytes(
        write_midi_bytes([TrackSpec("lead", lead)])
    )

    style_map = {"epic_pop": StyleLabel.POP_STANDARD, "gloomy": StyleLabel.DARK}
    library, report = curate(corpus, style_map)

    print(report.text())
    print("\nkept templates:")
    for template in library:
        print(f"  {template.id}: {template.style.value}/{template.mode.value}, "
              f"{template.length_bars} bars (from {template.source})")
