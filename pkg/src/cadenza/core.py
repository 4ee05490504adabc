"""Core music model: keys, chords, melodies, and diatonic arithmetic.

Time is measured in 8th-note slots throughout the package. A 4/4 bar holds
8 slots and a 2/4 bar holds 4; chord templates always use 8-slot bars.
Pitch classes are plain integers 0-11 with 0 = C. All types here are
immutable values and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence

SLOTS_PER_TEMPLATE_BAR = 8

MAJOR_SCALE = (0, 2, 4, 5, 7, 9, 11)
NATURAL_MINOR_SCALE = (0, 2, 3, 5, 7, 8, 10)

NOTE_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")
_FLAT_NAMES = {"DB": 1, "EB": 3, "GB": 6, "AB": 8, "BB": 10}

# Roman numeral per semitone above the tonic. Case is applied afterwards from
# the chord quality; non-diatonic roots carry an accidental prefix (flats for
# lowered neighbours, sharps for raised ones, so the raised leading tone in
# minor renders as #VII rather than bI).
_MAJOR_NUMERALS = ("I", "bII", "II", "bIII", "III", "IV",
                   "bV", "V", "bVI", "VI", "bVII", "VII")
_MINOR_NUMERALS = ("I", "bII", "II", "III", "#III", "IV",
                   "bV", "V", "VI", "bVII", "VII", "#VII")


class Mode(Enum):
    MAJOR = "major"
    MINOR = "minor"

    @property
    def scale(self) -> tuple[int, ...]:
        """Diatonic pitch-class offsets from the tonic (natural minor)."""
        return MAJOR_SCALE if self is Mode.MAJOR else NATURAL_MINOR_SCALE


class TriadQuality(Enum):
    MAJOR = "maj"
    MINOR = "min"

    @property
    def third(self) -> int:
        return 4 if self is TriadQuality.MAJOR else 3

    @property
    def triad_intervals(self) -> tuple[int, int, int]:
        return (0, self.third, 7)


def _check_pc(value: int, what: str) -> None:
    if not isinstance(value, int) or not 0 <= value <= 11:
        raise ValueError(f"{what} must be an integer in [0, 11], got {value!r}")


def interval_pc(a: int, b: int) -> int:
    """Interval in semitones from pitch class ``a`` up to ``b``, mod 12."""
    _check_pc(a, "pitch class a")
    _check_pc(b, "pitch class b")
    return (b - a) % 12


def transpose_pc(pc: int, semitones: int) -> int:
    _check_pc(pc, "pitch class")
    return (pc + semitones) % 12


def parse_pitch_class(name: str) -> int:
    """Parse a note name like ``C``, ``F#`` or ``Bb`` into a pitch class."""
    token = name.strip().upper()
    if token in _FLAT_NAMES:
        return _FLAT_NAMES[token]
    normalized = token.replace("♯", "#")
    if normalized in NOTE_NAMES:
        return NOTE_NAMES.index(normalized)
    raise ValueError(f"unknown note name {name!r}")


@dataclass(frozen=True)
class Key:
    tonic: int
    mode: Mode

    def __post_init__(self) -> None:
        _check_pc(self.tonic, "key tonic")
        if not isinstance(self.mode, Mode):
            raise ValueError(f"mode must be a Mode, got {self.mode!r}")

    @property
    def scale_pcs(self) -> tuple[int, ...]:
        return tuple((self.tonic + step) % 12 for step in self.mode.scale)

    def transpose(self, semitones: int) -> Key:
        return Key((self.tonic + semitones) % 12, self.mode)

    def __str__(self) -> str:
        return f"{NOTE_NAMES[self.tonic]} {self.mode.value}"


@dataclass(frozen=True)
class ChordEvent:
    root: int
    quality: TriadQuality

    def __post_init__(self) -> None:
        _check_pc(self.root, "chord root")
        if not isinstance(self.quality, TriadQuality):
            raise ValueError(f"quality must be a TriadQuality, got {self.quality!r}")

    @property
    def triad_pcs(self) -> tuple[int, int, int]:
        return tuple((self.root + i) % 12 for i in self.quality.triad_intervals)

    @property
    def scale_pcs(self) -> tuple[int, ...]:
        """Pitch classes of the scale the chord implies (major or natural minor)."""
        steps = MAJOR_SCALE if self.quality is TriadQuality.MAJOR else NATURAL_MINOR_SCALE
        return tuple((self.root + s) % 12 for s in steps)

    def transpose(self, semitones: int) -> ChordEvent:
        return ChordEvent((self.root + semitones) % 12, self.quality)


@dataclass(frozen=True)
class ChordProgression:
    """A chord per 8th-note slot; length is a positive multiple of 8."""

    events: tuple[ChordEvent, ...]

    def __post_init__(self) -> None:
        events = tuple(self.events)
        object.__setattr__(self, "events", events)
        if not events:
            raise ValueError("progression must contain at least one bar")
        if len(events) % SLOTS_PER_TEMPLATE_BAR != 0:
            raise ValueError(
                f"progression length must be a multiple of {SLOTS_PER_TEMPLATE_BAR} "
                f"slots, got {len(events)}"
            )
        for e in events:
            if not isinstance(e, ChordEvent):
                raise ValueError(f"progression entries must be ChordEvent, got {e!r}")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[ChordEvent]:
        return iter(self.events)

    def __getitem__(self, slot: int) -> ChordEvent:
        return self.events[slot]

    @property
    def bars(self) -> int:
        return len(self.events) // SLOTS_PER_TEMPLATE_BAR

    def bar(self, index: int) -> tuple[ChordEvent, ...]:
        """The 8 events of template bar ``index``."""
        start = index * SLOTS_PER_TEMPLATE_BAR
        if not 0 <= index < self.bars:
            raise IndexError(f"bar {index} out of range for {self.bars}-bar progression")
        return self.events[start:start + SLOTS_PER_TEMPLATE_BAR]

    def transpose(self, semitones: int) -> ChordProgression:
        return ChordProgression(tuple(e.transpose(semitones) for e in self.events))

    def concat(self, other: ChordProgression) -> ChordProgression:
        return ChordProgression(self.events + other.events)

    def as_pairs(self) -> list[list]:
        return [[e.root, e.quality.value] for e in self.events]

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence]) -> ChordProgression:
        events = []
        for i, pair in enumerate(pairs):
            if len(pair) != 2:
                raise ValueError(f"chord entry {i} must be [root, quality], got {pair!r}")
            root, quality = pair
            try:
                events.append(ChordEvent(int(root), TriadQuality(quality)))
            except ValueError as exc:
                raise ValueError(f"chord entry {i}: {exc}") from exc
        return cls(tuple(events))


@dataclass(frozen=True)
class MelodyNote:
    onset_slot: int
    duration_slots: int
    pitch: int

    def __post_init__(self) -> None:
        if self.onset_slot < 0:
            raise ValueError(f"onset_slot must be >= 0, got {self.onset_slot}")
        if self.duration_slots < 1:
            raise ValueError(f"duration_slots must be >= 1, got {self.duration_slots}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch must be in [0, 127], got {self.pitch}")

    @property
    def end_slot(self) -> int:
        return self.onset_slot + self.duration_slots

    def transpose(self, semitones: int) -> MelodyNote:
        return MelodyNote(self.onset_slot, self.duration_slots, self.pitch + semitones)


@dataclass(frozen=True)
class VoicingNote:
    onset_slot: int
    duration_slots: int
    pitch: int
    velocity: int

    def __post_init__(self) -> None:
        if self.onset_slot < 0:
            raise ValueError(f"onset_slot must be >= 0, got {self.onset_slot}")
        if self.duration_slots < 1:
            raise ValueError(f"duration_slots must be >= 1, got {self.duration_slots}")
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch must be in [0, 127], got {self.pitch}")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity must be in [1, 127], got {self.velocity}")

    @property
    def end_slot(self) -> int:
        return self.onset_slot + self.duration_slots

    def transpose(self, semitones: int) -> VoicingNote:
        return VoicingNote(self.onset_slot, self.duration_slots,
                           self.pitch + semitones, self.velocity)

    def shift(self, slots: int) -> VoicingNote:
        return VoicingNote(self.onset_slot + slots, self.duration_slots,
                           self.pitch, self.velocity)


@dataclass(frozen=True)
class Phrase:
    label: str
    length_bars: int
    start_bar: int

    def __post_init__(self) -> None:
        if not (len(self.label) == 1 and self.label.isalpha()):
            raise ValueError(f"phrase label must be a single letter, got {self.label!r}")
        if self.length_bars not in (4, 8):
            raise ValueError(f"phrase length must be 4 or 8 bars, got {self.length_bars}")
        if self.start_bar < 0:
            raise ValueError(f"start_bar must be >= 0, got {self.start_bar}")

    @property
    def end_bar(self) -> int:
        return self.start_bar + self.length_bars


@dataclass(frozen=True)
class AnnotatedMelody:
    """A quantized monophonic melody with contiguous labeled phrases."""

    notes: tuple[MelodyNote, ...]
    phrases: tuple[Phrase, ...]
    key: Key
    meter: tuple[int, int] = (4, 4)

    def __post_init__(self) -> None:
        notes = tuple(sorted(self.notes, key=lambda n: (n.onset_slot, n.pitch)))
        object.__setattr__(self, "notes", notes)
        object.__setattr__(self, "phrases", tuple(self.phrases))
        if self.meter not in ((4, 4), (2, 4)):
            raise ValueError(f"meter must be 4/4 or 2/4, got {self.meter}")
        if not self.phrases:
            raise ValueError("melody must have at least one phrase")
        expected_start = 0
        for p in self.phrases:
            if p.start_bar != expected_start:
                raise ValueError(
                    f"phrases must tile contiguously: phrase {p.label} starts at bar "
                    f"{p.start_bar}, expected {expected_start}"
                )
            expected_start = p.end_bar
        for prev, cur in zip(notes, notes[1:]):
            if prev.end_slot > cur.onset_slot:
                raise ValueError(
                    f"melody must be monophonic: note at slot {prev.onset_slot} "
                    f"overlaps note at slot {cur.onset_slot}"
                )
        if notes and notes[-1].end_slot > self.total_slots:
            raise ValueError(
                f"melody extends to slot {notes[-1].end_slot} beyond the "
                f"{self.total_slots} slots covered by its phrases"
            )

    @property
    def slots_per_bar(self) -> int:
        return 8 if self.meter == (4, 4) else 4

    @property
    def total_bars(self) -> int:
        return self.phrases[-1].end_bar

    @property
    def total_slots(self) -> int:
        return self.total_bars * self.slots_per_bar

    def phrase_slot_range(self, index: int) -> tuple[int, int]:
        p = self.phrases[index]
        return (p.start_bar * self.slots_per_bar, p.end_bar * self.slots_per_bar)

    def pitch_slots(self) -> list[Optional[int]]:
        """Per-slot sounding pitch (onset or sustain), None for rests."""
        grid: list[Optional[int]] = [None] * self.total_slots
        for note in self.notes:
            for slot in range(note.onset_slot, min(note.end_slot, self.total_slots)):
                grid[slot] = note.pitch
        return grid

    def phrase_pitches(self, index: int) -> list[Optional[int]]:
        start, end = self.phrase_slot_range(index)
        return self.pitch_slots()[start:end]

    def transpose(self, semitones: int) -> AnnotatedMelody:
        return AnnotatedMelody(
            tuple(n.transpose(semitones) for n in self.notes),
            self.phrases,
            self.key.transpose(semitones),
            self.meter,
        )


def chord_degree(chord: ChordEvent, key: Key) -> Optional[int]:
    """Scale degree (1-7) of the chord root in the key, or None if chromatic.

    Minor keys use the natural-minor scale, so the raised leading tone is
    non-diatonic here and falls back to the accidental rendering in
    :func:`to_roman`.
    """
    step = interval_pc(key.tonic, chord.root)
    scale = key.mode.scale
    if step in scale:
        return scale.index(step) + 1
    return None


def roman_token(chord: ChordEvent, key: Key) -> str:
    """Roman numeral for one chord: case from quality, accidental if chromatic."""
    step = interval_pc(key.tonic, chord.root)
    table = _MAJOR_NUMERALS if key.mode is Mode.MAJOR else _MINOR_NUMERALS
    numeral = table[step]
    if chord.quality is TriadQuality.MINOR:
        accidental = numeral[0] if numeral[0] in "b#" else ""
        numeral = accidental + numeral.lstrip("b#").lower()
    return numeral


def to_roman(progression: ChordProgression, key: Key) -> str:
    """Roman-numeral identity string, consecutive identical chords collapsed."""
    tokens: list[str] = []
    previous: Optional[ChordEvent] = None
    for event in progression:
        if event != previous:
            tokens.append(roman_token(event, key))
            previous = event
    return "-".join(tokens)
