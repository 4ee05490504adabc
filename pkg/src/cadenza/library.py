"""Chord-progression template library: loading, curation, and transition stats.

A library is a set of templates, each a chord progression sampled on the
8th-note grid in a canonical key (C major or A minor) plus the full voicing
used for rendering and style/mode/length labels. Curation ingests a raw MIDI
corpus: melody-contaminated files are rejected, raw style labels are mapped,
and key-transposed duplicates are removed.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    ChordEvent,
    ChordProgression,
    Key,
    Mode,
    SLOTS_PER_TEMPLATE_BAR,
    TriadQuality,
    VoicingNote,
    interval_pc,
)
from .midi import MidiData, TimedNote, read_midi, snap_to_slot

log = logging.getLogger(__name__)

TEMPLATE_LENGTHS_BARS = (4, 8)


class StyleLabel(Enum):
    POP_STANDARD = "pop_standard"
    POP_COMPLEX = "pop_complex"
    DARK = "dark"
    RNB = "rnb"
    UNKNOWN = "unknown"


def canonical_key(mode: Mode) -> Key:
    """C major or A minor, the key every library template is stored in."""
    return Key(0, Mode.MAJOR) if mode is Mode.MAJOR else Key(9, Mode.MINOR)


@dataclass(frozen=True)
class Template:
    id: str
    progression: ChordProgression
    voicing: tuple[VoicingNote, ...]
    style: StyleLabel
    mode: Mode
    length_bars: int
    source: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "voicing", tuple(self.voicing))
        if self.length_bars not in TEMPLATE_LENGTHS_BARS:
            raise ValueError(
                f"template {self.id}: length_bars must be one of "
                f"{TEMPLATE_LENGTHS_BARS}, got {self.length_bars}"
            )
        expected = self.length_bars * SLOTS_PER_TEMPLATE_BAR
        if len(self.progression) != expected:
            raise ValueError(
                f"template {self.id}: progression has {len(self.progression)} slots, "
                f"expected {expected} for {self.length_bars} bars"
            )
        for note in self.voicing:
            if note.end_slot > expected:
                raise ValueError(
                    f"template {self.id}: voicing note at slot {note.onset_slot} "
                    f"extends past the template's {expected} slots"
                )

    @property
    def slots(self) -> int:
        return self.length_bars * SLOTS_PER_TEMPLATE_BAR

    def first_bar(self) -> tuple[ChordEvent, ...]:
        return self.progression.bar(0)

    def last_bar(self) -> tuple[ChordEvent, ...]:
        return self.progression.bar(self.progression.bars - 1)


def dedup_signature(template: Template) -> str:
    """Transposition-invariant identity of a template.

    Encodes mode, style, length, and the progression relative to its first
    root, so copies that differ only in key collapse while genuinely
    different progressions (or the same progression in a different style)
    stay distinct.
    """
    first_root = template.progression[0].root
    cells = ",".join(
        f"{interval_pc(first_root, e.root)}{e.quality.value[0]}"
        for e in template.progression
    )
    return f"{template.mode.value}|{template.style.value}|{template.length_bars}|{cells}"


@dataclass(frozen=True)
class Library:
    templates: tuple[Template, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "templates", tuple(self.templates))
        if not self.templates:
            raise ValueError("empty library")
        ids = [t.id for t in self.templates]
        duplicate_ids = [i for i, c in Counter(ids).items() if c > 1]
        if duplicate_ids:
            raise ValueError(f"duplicate template ids: {sorted(duplicate_ids)}")
        signatures = Counter(dedup_signature(t) for t in self.templates)
        clashes = [s for s, c in signatures.items() if c > 1]
        if clashes:
            raise ValueError(
                f"{len(clashes)} template(s) share a dedup signature; "
                "run curation to remove redundant progressions"
            )

    @property
    def N(self) -> int:
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    def __len__(self) -> int:
        return len(self.templates)

    def by_id(self, template_id: str) -> Template:
        for t in self.templates:
            if t.id == template_id:
                return t
        raise KeyError(template_id)

    def select(
        self,
        *,
        mode: Optional[Mode] = None,
        length_bars: Optional[int] = None,
        styles: Optional[frozenset[StyleLabel]] = None,
    ) -> list[Template]:
        out = []
        for t in self.templates:
            if mode is not None and t.mode is not mode:
                continue
            if length_bars is not None and t.length_bars != length_bars:
                continue
            if styles is not None and t.style not in styles:
                continue
            out.append(t)
        return out


# -- serialization -------------------------------------------------------------

_REQUIRED_FIELDS = ("id", "style", "mode", "length_bars", "chords", "voicing")


def _template_from_record(record: dict, line: int) -> Template:
    for name in _REQUIRED_FIELDS:
        if name not in record:
            raise ValueError(f"line {line}: missing field {name!r}")
    try:
        style = StyleLabel(record["style"])
    except ValueError:
        raise ValueError(f"line {line}: field 'style': unknown style {record['style']!r}")
    try:
        mode = Mode(record["mode"])
    except ValueError:
        raise ValueError(f"line {line}: field 'mode': unknown mode {record['mode']!r}")
    try:
        progression = ChordProgression.from_pairs(record["chords"])
    except ValueError as exc:
        raise ValueError(f"line {line}: field 'chords': {exc}") from exc
    try:
        voicing = tuple(
            VoicingNote(int(o), int(d), int(p), int(v)) for o, d, p, v in record["voicing"]
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"line {line}: field 'voicing': {exc}") from exc
    try:
        return Template(
            id=str(record["id"]),
            progression=progression,
            voicing=voicing,
            style=style,
            mode=mode,
            length_bars=int(record["length_bars"]),
            source=str(record.get("source", "")),
        )
    except ValueError as exc:
        raise ValueError(f"line {line}: {exc}") from exc


def template_to_record(template: Template) -> dict:
    return {
        "id": template.id,
        "style": template.style.value,
        "mode": template.mode.value,
        "length_bars": template.length_bars,
        "chords": template.progression.as_pairs(),
        "voicing": [[n.onset_slot, n.duration_slots, n.pitch, n.velocity]
                    for n in template.voicing],
        "source": template.source,
    }


def load_library(path: str | Path) -> Library:
    """Load a line-delimited template library file, validating every record."""
    path = Path(path)
    templates: list[Template] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_number}: invalid JSON ({exc})")
            templates.append(_template_from_record(record, line_number))
    if not templates:
        raise ValueError(f"{path}: empty library")
    return Library(tuple(templates))


def save_library(library: Library, path: str | Path) -> None:
    lines = [
        json.dumps(template_to_record(t), sort_keys=True, separators=(",", ":"))
        for t in library
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def default_library_path() -> Path:
    return Path(__file__).parent / "data" / "seed_library.jsonl"


def load_default_library() -> Library:
    return load_library(default_library_path())


# -- transition statistics ------------------------------------------------------

def window_signature(events: Sequence[ChordEvent]) -> str:
    return ",".join(f"{e.root}{e.quality.value[0]}" for e in events)


@dataclass(frozen=True)
class TransitionStats:
    """Two-bar window occurrence counts over a library, for transition loss."""

    counts: dict[str, int]
    N: int

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"transition stats need a library of N >= 2, got {self.N}")

    @classmethod
    def build(cls, library: Library) -> TransitionStats:
        """Count every 2-bar window (stride 1 bar) across all templates."""
        counts: Counter[str] = Counter()
        for template in library:
            progression = template.progression
            for bar in range(progression.bars - 1):
                window = progression.bar(bar) + progression.bar(bar + 1)
                counts[window_signature(window)] += 1
        return cls(dict(counts), library.N)

    def count(
        self,
        last_bar: Sequence[ChordEvent],
        first_bar: Sequence[ChordEvent],
    ) -> int:
        if len(last_bar) != SLOTS_PER_TEMPLATE_BAR or len(first_bar) != SLOTS_PER_TEMPLATE_BAR:
            raise ValueError("transition bars must be 8 slots each")
        return self.counts.get(window_signature(tuple(last_bar) + tuple(first_bar)), 0)

    def transition_loss(
        self,
        last_bar: Sequence[ChordEvent],
        first_bar: Sequence[ChordEvent],
    ) -> float:
        """1 + log_N(1/c) for the junction's corpus count c, clamped to [0, 2].

        A count of zero is smoothed to 1/N, which lands exactly on the upper
        clamp: unseen junctions cost 2, a unique junction costs 1, and a
        junction as frequent as the library is large costs 0.
        """
        c = self.count(last_bar, first_bar)
        c_eff = c if c >= 1 else 1.0 / self.N
        raw = 1.0 - math.log(c_eff) / math.log(self.N)
        return min(2.0, max(0.0, raw))


def transition_loss_for_count(c: int, n: int) -> float:
    """The transition-loss curve itself, useful for analysis and tests."""
    if n < 2:
        raise ValueError(f"log base must exceed 1, got N={n}")
    c_eff = c if c >= 1 else 1.0 / n
    return min(2.0, max(0.0, 1.0 - math.log(c_eff) / math.log(n)))


# -- style map -------------------------------------------------------------------

def load_style_map(path: str | Path) -> dict[str, StyleLabel]:
    """Parse a raw-label mapping file: one ``raw_label = style`` pair per line.

    Styles may be any of pop_standard, pop_complex, dark, rnb. Blank lines
    and ``#`` comments are ignored; labels match case-insensitively.
    """
    mapping: dict[str, StyleLabel] = {}
    allowed = {s.value: s for s in StyleLabel if s is not StyleLabel.UNKNOWN}
    for line_number, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"style map line {line_number}: expected 'raw = style'")
        raw, style_name = (part.strip() for part in line.split("=", 1))
        style = allowed.get(style_name.lower())
        if style is None:
            raise ValueError(
                f"style map line {line_number}: unknown style {style_name!r} "
                f"(expected one of {sorted(allowed)})"
            )
        mapping[raw.lower()] = style
    return mapping


def map_style(raw_label: str, style_map: dict[str, StyleLabel]) -> StyleLabel:
    return style_map.get(raw_label.strip().lower(), StyleLabel.UNKNOWN)


# -- curation ---------------------------------------------------------------------

@dataclass(frozen=True)
class CurateOptions:
    """Thresholds for the melody-contamination heuristic and extraction."""

    thin_slot_ratio: float = 0.4      # reject when > ratio of sounding slots are thin
    min_simultaneous: int = 3         # a slot is "thin" below this many notes
    ioi_entropy_threshold: float = 2.0  # bits; above = complex rhythmic texture


@dataclass
class CurationReport:
    files_seen: int = 0
    unreadable: int = 0
    melody_like: int = 0
    unsupported_length: int = 0
    style_mapped: int = 0
    style_unknown: int = 0
    duplicates_removed: int = 0
    kept: int = 0

    def text(self) -> str:
        lines = [
            "curation report",
            f"  files seen: {self.files_seen}",
            f"  unreadable (skipped): {self.unreadable}",
            f"  rejected melody-like or complex-rhythm: {self.melody_like}",
            f"  rejected unsupported length: {self.unsupported_length}",
            f"  style labels mapped: {self.style_mapped}",
            f"  style labels unknown: {self.style_unknown}",
            f"  duplicates removed: {self.duplicates_removed}",
            f"  templates kept: {self.kept}",
        ]
        return "\n".join(lines)


# Krumhansl-Kessler key profiles, the standard histogram-correlation method.
_MAJOR_PROFILE = np.array(
    [6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88]
)
_MINOR_PROFILE = np.array(
    [6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17]
)


def detect_key(notes: Sequence[VoicingNote]) -> Key:
    """Pick the best (tonic, mode) by duration-weighted pitch-class histogram
    correlation against the major/minor profiles; ties break toward major."""
    histogram = np.zeros(12)
    for note in notes:
        histogram[note.pitch % 12] += note.duration_slots
    if histogram.sum() == 0:
        raise ValueError("cannot detect a key from an empty track")
    best = (-2.0, 0, Mode.MAJOR)
    for tonic in range(12):
        rolled = np.roll(histogram, -tonic)
        if rolled.std() == 0:
            continue
        for mode, profile in ((Mode.MAJOR, _MAJOR_PROFILE), (Mode.MINOR, _MINOR_PROFILE)):
            score = float(np.corrcoef(rolled, profile)[0, 1])
            # strict > keeps the earlier candidate on ties; major is tried first
            if score > best[0] + 1e-12:
                best = (score, tonic, mode)
    return Key(best[1], best[2])


def _sounding_grid(notes: Sequence[VoicingNote], total_slots: int) -> list[list[VoicingNote]]:
    grid: list[list[VoicingNote]] = [[] for _ in range(total_slots)]
    for note in notes:
        for slot in range(note.onset_slot, min(note.end_slot, total_slots)):
            grid[slot].append(note)
    return grid


def looks_melody_like(notes: Sequence[VoicingNote], options: CurateOptions) -> bool:
    """True for tracks that read as melody or complex rhythm, not chords."""
    if not notes:
        return True
    total_slots = max(n.end_slot for n in notes)
    grid = _sounding_grid(notes, total_slots)
    sounding = [slot for slot in grid if slot]
    thin = sum(1 for slot in sounding if len(slot) < options.min_simultaneous)
    if sounding and thin / len(sounding) > options.thin_slot_ratio:
        return True
    onsets = sorted({n.onset_slot for n in notes})
    intervals = [b - a for a, b in zip(onsets, onsets[1:])]
    if intervals:
        counts = Counter(intervals)
        total = len(intervals)
        entropy = -sum(
            (c / total) * math.log2(c / total) for c in counts.values()
        )
        if entropy > options.ioi_entropy_threshold:
            return True
    return False


def extract_progression(
    notes: Sequence[VoicingNote],
    total_slots: int,
    mode: Mode,
) -> ChordProgression:
    """Reduce a voiced chord track to per-slot (root, major/minor) events.

    The lowest sounding pitch is tried as root first; the first pitch class
    with a third above it wins. Thirdless slots (power chords) reduce by mode
    context, and silent slots sustain their neighbours.
    """
    grid = _sounding_grid(notes, total_slots)
    events: list[Optional[ChordEvent]] = []
    for slot in grid:
        if not slot:
            events.append(None)
            continue
        pcs = {n.pitch % 12 for n in slot}
        ordered = [n.pitch % 12 for n in sorted(slot, key=lambda n: n.pitch)]
        roots = list(dict.fromkeys(ordered))
        chosen: Optional[ChordEvent] = None
        for root in roots:
            if (root + 4) % 12 in pcs:
                chosen = ChordEvent(root, TriadQuality.MAJOR)
                break
            if (root + 3) % 12 in pcs:
                chosen = ChordEvent(root, TriadQuality.MINOR)
                break
        if chosen is None:
            quality = TriadQuality.MAJOR if mode is Mode.MAJOR else TriadQuality.MINOR
            chosen = ChordEvent(roots[0], quality)
        events.append(chosen)
    filled: list[ChordEvent] = []
    previous: Optional[ChordEvent] = None
    for event in events:
        if event is not None:
            previous = event
        filled.append(previous)  # type: ignore[arg-type]  # backfilled below
    if filled and filled[0] is None:
        first = next(e for e in filled if e is not None)
        filled = [first if e is None else e for e in filled]
    if any(e is None for e in filled):
        raise ValueError("no chords found in track")
    return ChordProgression(tuple(filled))


def _quantize_voicing(notes: Sequence[TimedNote], division: int) -> list[VoicingNote]:
    out = []
    for note in notes:
        onset = snap_to_slot(note.tick, division)
        end = max(onset + 1, snap_to_slot(note.tick + note.duration_ticks, division))
        out.append(VoicingNote(onset, end - onset, note.pitch, max(1, min(127, note.velocity))))
    return out


def _chord_track(midi: MidiData) -> list[TimedNote]:
    candidates = [t for t in midi.tracks if t.notes]
    if not candidates:
        raise ValueError("no notes")
    # chord corpora are single-track; otherwise take the busiest track
    return max(candidates, key=lambda t: len(t.notes)).notes


def template_from_midi(
    path: Path,
    raw_label: str,
    style_map: dict[str, StyleLabel],
    options: CurateOptions,
) -> tuple[Optional[Template], str]:
    """One curation unit: returns (template, "") or (None, rejection reason)."""
    midi = read_midi(path)
    notes = _quantize_voicing(_chord_track(midi), midi.division)
    if looks_melody_like(notes, options):
        return None, "melody_like"

    raw_slots = max(n.end_slot for n in notes)
    bars = math.ceil(raw_slots / SLOTS_PER_TEMPLATE_BAR)
    if bars not in TEMPLATE_LENGTHS_BARS:
        return None, "unsupported_length"
    total_slots = bars * SLOTS_PER_TEMPLATE_BAR

    key = detect_key(notes)
    progression = extract_progression(notes, total_slots, key.mode)
    target = canonical_key(key.mode)
    shift = (target.tonic - key.tonic) % 12
    if shift > 6:
        shift -= 12
    progression = progression.transpose(shift)
    voicing = tuple(n.transpose(shift) for n in notes)
    style = map_style(raw_label, style_map)
    template = Template(
        id=path.stem.replace("+", "_"),
        progression=progression,
        voicing=voicing,
        style=style,
        mode=key.mode,
        length_bars=bars,
        source=str(path.name),
    )
    return template, ""


def curate(
    midi_dir: str | Path,
    style_map: dict[str, StyleLabel],
    options: CurateOptions = CurateOptions(),
) -> tuple[Library, CurationReport]:
    """Curate a MIDI corpus into a template library.

    Three passes, in order: reject melody-contaminated or rhythmically
    complex files, map raw style labels (the name of the file's immediate
    subdirectory under ``midi_dir``; unmapped labels become Unknown),
    transpose to the canonical key and drop transposition duplicates.
    """
    midi_dir = Path(midi_dir)
    report = CurationReport()
    kept: list[Template] = []
    seen_signatures: set[str] = set()
    used_ids: set[str] = set()

    paths = sorted(p for p in midi_dir.rglob("*") if p.suffix.lower() in (".mid", ".midi"))
    for path in paths:
        report.files_seen += 1
        relative = path.relative_to(midi_dir)
        raw_label = relative.parts[0] if len(relative.parts) > 1 else ""
        try:
            template, reason = template_from_midi(path, raw_label, style_map, options)
        except (ValueError, OSError) as exc:
            log.warning("skipping unreadable MIDI %s: %s", path, exc)
            report.unreadable += 1
            continue
        if template is None:
            if reason == "melody_like":
                report.melody_like += 1
            else:
                report.unsupported_length += 1
            continue
        if template.style is StyleLabel.UNKNOWN:
            report.style_unknown += 1
        else:
            report.style_mapped += 1
        signature = dedup_signature(template)
        if signature in seen_signatures:
            report.duplicates_removed += 1
            continue
        seen_signatures.add(signature)
        if template.id in used_ids:
            template = Template(
                id=f"{template.id}_{len(used_ids)}",
                progression=template.progression,
                voicing=template.voicing,
                style=template.style,
                mode=template.mode,
                length_bars=template.length_bars,
                source=template.source,
            )
        used_ids.add(template.id)
        kept.append(template)

    if not kept:
        raise ValueError(f"curation produced zero templates from {midi_dir}")
    report.kept = len(kept)
    return Library(tuple(kept)), report
