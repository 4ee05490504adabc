"""MIDI parsing, quantization to the 8th-note grid, and file writing.

Implements just enough of the standard MIDI file format (read format 0/1,
write format 1) for melody input and two-track arrangement output. The
writer is fully deterministic: identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, TYPE_CHECKING

from .core import (
    AnnotatedMelody,
    Key,
    MelodyNote,
    Mode,
    Phrase,
    VoicingNote,
    parse_pitch_class,
)

if TYPE_CHECKING:  # pragma: no cover
    from .arrange import Arrangement

DEFAULT_DIVISION = 480
DEFAULT_TEMPO_BPM = 120.0
DEFAULT_MELODY_VELOCITY = 96

_META_TRACK_NAME = 0x03
_META_END_OF_TRACK = 0x2F
_META_TEMPO = 0x51
_META_TIME_SIGNATURE = 0x58


@dataclass(frozen=True)
class TimedNote:
    """A note in absolute MIDI ticks, before quantization."""

    tick: int
    duration_ticks: int
    pitch: int
    velocity: int


@dataclass
class MidiTrack:
    name: str
    notes: list[TimedNote]


@dataclass
class MidiData:
    division: int
    tracks: list[MidiTrack]
    tempo_us_per_quarter: int = 500_000
    time_signature: tuple[int, int] = (4, 4)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def bytes(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError("truncated MIDI file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.bytes(1)[0]

    def varlen(self) -> int:
        value = 0
        for _ in range(4):
            byte = self.u8()
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise ValueError("variable-length quantity longer than 4 bytes")


def read_midi_bytes(data: bytes) -> MidiData:
    reader = _Reader(data)
    if reader.bytes(4) != b"MThd":
        raise ValueError("not a standard MIDI file (missing MThd)")
    header_len = struct.unpack(">I", reader.bytes(4))[0]
    header = reader.bytes(header_len)
    fmt, ntrks, division = struct.unpack(">HHH", header[:6])
    if fmt not in (0, 1):
        raise ValueError(f"unsupported MIDI format {fmt}")
    if division & 0x8000:
        raise ValueError("SMPTE time division is not supported")
    if division == 0:
        raise ValueError("invalid MIDI division 0")

    midi = MidiData(division=division, tracks=[])
    for _ in range(ntrks):
        if reader.bytes(4) != b"MTrk":
            raise ValueError("malformed MIDI file (missing MTrk)")
        track_len = struct.unpack(">I", reader.bytes(4))[0]
        track_reader = _Reader(reader.bytes(track_len))
        midi.tracks.append(_read_track(track_reader, midi))
    return midi


def _read_track(r: _Reader, midi: MidiData) -> MidiTrack:
    track = MidiTrack(name="", notes=[])
    tick = 0
    running_status = 0
    open_notes: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def close_note(channel: int, pitch: int, end_tick: int) -> None:
        stack = open_notes.get((channel, pitch))
        if stack:
            start, velocity = stack.pop(0)
            track.notes.append(TimedNote(start, max(1, end_tick - start), pitch, velocity))

    while r.pos < len(r.data):
        tick += r.varlen()
        status = r.u8()
        if status < 0x80:
            if running_status < 0x80:
                raise ValueError("running status without a prior status byte")
            r.pos -= 1
            status = running_status
        if status == 0xFF:
            meta_type = r.u8()
            payload = r.bytes(r.varlen())
            if meta_type == _META_TRACK_NAME:
                track.name = payload.decode("latin-1")
            elif meta_type == _META_TEMPO and len(payload) == 3:
                midi.tempo_us_per_quarter = int.from_bytes(payload, "big")
            elif meta_type == _META_TIME_SIGNATURE and len(payload) >= 2:
                midi.time_signature = (payload[0], 1 << payload[1])
            elif meta_type == _META_END_OF_TRACK:
                break
            continue
        if status in (0xF0, 0xF7):
            r.bytes(r.varlen())
            continue
        running_status = status
        kind = status & 0xF0
        channel = status & 0x0F
        if kind == 0x90:
            pitch, velocity = r.u8(), r.u8()
            if velocity > 0:
                open_notes.setdefault((channel, pitch), []).append((tick, velocity))
            else:
                close_note(channel, pitch, tick)
        elif kind == 0x80:
            pitch = r.u8()
            r.u8()
            close_note(channel, pitch, tick)
        elif kind in (0xA0, 0xB0, 0xE0):
            r.bytes(2)
        elif kind in (0xC0, 0xD0):
            r.bytes(1)
        else:
            raise ValueError(f"unsupported MIDI status byte 0x{status:02x}")

    for (channel, pitch), stack in open_notes.items():
        for start, velocity in stack:
            track.notes.append(TimedNote(start, 1, pitch, velocity))
    track.notes.sort(key=lambda n: (n.tick, n.pitch))
    return track


def read_midi(path: str | Path) -> MidiData:
    return read_midi_bytes(Path(path).read_bytes())


def snap_to_slot(tick: int, division: int) -> int:
    """Nearest 8th-note slot to a tick; exact halves snap to the earlier slot."""
    numerator = 4 * tick + division
    denominator = 2 * division
    if numerator % denominator == 0:
        return numerator // denominator - 1
    return numerator // denominator


# -- annotation sidecar -------------------------------------------------------

_PHRASE_TOKEN = re.compile(r"([A-Za-z])(\d+)")


def parse_phrase_string(s: str) -> tuple[Phrase, ...]:
    """Parse a phrase annotation like ``A8A8B8`` into Phrase values."""
    if not s or not s.strip():
        raise ValueError("phrase string must be non-empty")
    s = s.strip()
    phrases: list[Phrase] = []
    start_bar = 0
    pos = 0
    while pos < len(s):
        match = _PHRASE_TOKEN.match(s, pos)
        if not match:
            raise ValueError(
                f"phrase string {s!r}: expected LETTER+LENGTH at position {pos}"
            )
        label, digits = match.group(1).upper(), match.group(2)
        length = int(digits)
        if length not in (4, 8):
            raise ValueError(
                f"phrase string {s!r}: phrase {label} at position {pos} has length "
                f"{length}; only 4 and 8 bars are supported"
            )
        phrases.append(Phrase(label, length, start_bar))
        start_bar += length
        pos = match.end()
    return tuple(phrases)


@dataclass(frozen=True)
class AnnotationSidecar:
    """Manual labels accompanying a melody MIDI: phrases, key, mode, meter."""

    phrase_string: str
    key_name: str
    mode_name: str
    meter: str = "4/4"

    def phrases(self) -> tuple[Phrase, ...]:
        return parse_phrase_string(self.phrase_string)

    def key(self) -> Key:
        try:
            mode = Mode(self.mode_name.strip().lower())
        except ValueError:
            raise ValueError(f"mode must be 'major' or 'minor', got {self.mode_name!r}")
        return Key(parse_pitch_class(self.key_name), mode)

    def meter_tuple(self) -> tuple[int, int]:
        meter = self.meter.strip()
        if meter not in ("4/4", "2/4"):
            raise ValueError(f"meter must be '4/4' or '2/4', got {self.meter!r}")
        numerator, denominator = meter.split("/")
        return (int(numerator), int(denominator))


def load_annotation(path: str | Path) -> AnnotationSidecar:
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"annotation file {path}: invalid JSON ({exc})") from exc
    for field in ("phrases", "key", "mode"):
        if field not in raw:
            raise ValueError(f"annotation file {path}: missing field {field!r}")
    return AnnotationSidecar(
        phrase_string=str(raw["phrases"]),
        key_name=str(raw["key"]),
        mode_name=str(raw["mode"]),
        meter=str(raw.get("meter", "4/4")),
    )


# -- melody parsing -----------------------------------------------------------

def _select_melody_track(midi: MidiData, preferred_name: Optional[str]) -> MidiTrack:
    candidates = [t for t in midi.tracks if t.notes]
    if not candidates:
        raise ValueError("MIDI file contains no note-bearing track")
    if len(candidates) == 1:
        return candidates[0]
    wanted = (preferred_name or "melody").strip().lower()
    for track in candidates:
        if track.name.strip().lower() == wanted:
            return track
    if preferred_name is not None:
        raise ValueError(
            f"no track named {preferred_name!r}; note tracks: "
            f"{[t.name or '<unnamed>' for t in candidates]}"
        )
    return max(candidates, key=lambda t: sum(n.pitch for n in t.notes) / len(t.notes))


def _quantize_monophonic(notes: Sequence[TimedNote], division: int) -> list[MelodyNote]:
    snapped: dict[int, TimedNote] = {}
    for note in sorted(notes, key=lambda n: (n.tick, n.pitch)):
        onset = snap_to_slot(note.tick, division)
        # Chords in a melody track keep the highest pitch at that onset.
        best = snapped.get(onset)
        if best is None or note.pitch > best.pitch:
            snapped[onset] = note
    melody: list[MelodyNote] = []
    onsets = sorted(snapped)
    for i, onset in enumerate(onsets):
        note = snapped[onset]
        end = max(onset + 1, snap_to_slot(note.tick + note.duration_ticks, division))
        if i + 1 < len(onsets):
            end = min(end, onsets[i + 1])
        if end > onset:
            melody.append(MelodyNote(onset, end - onset, note.pitch))
    return melody


def parse_melody_midi(
    path: str | Path,
    annotation: AnnotationSidecar,
    *,
    melody_track: Optional[str] = None,
) -> AnnotatedMelody:
    """Parse and quantize a melody MIDI against its manual annotation.

    Track choice: the single note track if there is only one, otherwise the
    track named ``melody_track`` (default preference ``melody``), otherwise
    the note track with the highest mean pitch. The melody is snapped to the
    8th-note grid and forced monophonic by truncating each note at the next
    onset. A trailing gap of up to one bar is accepted as rest padding.
    """
    midi = read_midi(path)
    track = _select_melody_track(midi, melody_track)
    notes = _quantize_monophonic(track.notes, midi.division)

    phrases = annotation.phrases()
    key = annotation.key()
    meter = annotation.meter_tuple()
    slots_per_bar = 8 if meter == (4, 4) else 4
    expected_slots = sum(p.length_bars for p in phrases) * slots_per_bar

    extent = max((n.end_slot for n in notes), default=0)
    if extent > expected_slots:
        raise ValueError(
            f"melody spans {extent} slots but the annotation covers only "
            f"{expected_slots}; fix the phrase string or trim the file"
        )
    if extent <= expected_slots - slots_per_bar:
        raise ValueError(
            f"melody spans {extent} slots, more than one bar short of the "
            f"{expected_slots} slots announced by the annotation"
        )
    return AnnotatedMelody(tuple(notes), phrases, key, meter)


# -- writing ------------------------------------------------------------------

def _varlen(value: int) -> bytes:
    if value < 0:
        raise ValueError("negative delta time")
    chunks = [value & 0x7F]
    value >>= 7
    while value:
        chunks.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(chunks))


def _meta(meta_type: int, payload: bytes) -> bytes:
    return bytes([0xFF, meta_type]) + _varlen(len(payload)) + payload


@dataclass(frozen=True)
class TrackSpec:
    """Slot-timed notes for one output track."""

    name: str
    notes: tuple[VoicingNote, ...]
    channel: int = 0


def _encode_track(
    spec: TrackSpec,
    division: int,
    *,
    head_meta: bytes = b"",
) -> bytes:
    ticks_per_slot = division // 2
    events: list[tuple[int, int, int, bytes]] = []
    for note in spec.notes:
        on_tick = note.onset_slot * ticks_per_slot
        off_tick = note.end_slot * ticks_per_slot
        on = bytes([0x90 | spec.channel, note.pitch, note.velocity])
        off = bytes([0x80 | spec.channel, note.pitch, 0])
        events.append((on_tick, 1, note.pitch, on))
        events.append((off_tick, 0, note.pitch, off))
    events.sort(key=lambda e: (e[0], e[1], e[2]))

    body = bytearray()
    body += _varlen(0) + _meta(_META_TRACK_NAME, spec.name.encode("latin-1"))
    body += head_meta
    tick = 0
    for event_tick, _, _, payload in events:
        body += _varlen(event_tick - tick) + payload
        tick = event_tick
    body += _varlen(0) + _meta(_META_END_OF_TRACK, b"")
    return b"MTrk" + struct.pack(">I", len(body)) + bytes(body)


def write_midi_bytes(
    tracks: Sequence[TrackSpec],
    *,
    division: int = DEFAULT_DIVISION,
    tempo_bpm: float = DEFAULT_TEMPO_BPM,
    time_signature: tuple[int, int] = (4, 4),
) -> bytes:
    """Serialize tracks as a deterministic format-1 MIDI file."""
    if not tracks:
        raise ValueError("at least one track is required")
    numerator, denominator = time_signature
    tempo = _meta(_META_TEMPO, round(60_000_000 / tempo_bpm).to_bytes(3, "big"))
    timesig = _meta(
        _META_TIME_SIGNATURE,
        bytes([numerator, denominator.bit_length() - 1, 24, 8]),
    )
    head_meta = _varlen(0) + timesig + _varlen(0) + tempo
    chunks = [struct.pack(">4sIHHH", b"MThd", 6, 1, len(tracks), division)]
    for i, spec in enumerate(tracks):
        chunks.append(_encode_track(spec, division, head_meta=head_meta if i == 0 else b""))
    return b"".join(chunks)


def melody_track_spec(
    melody: AnnotatedMelody,
    *,
    velocity: int = DEFAULT_MELODY_VELOCITY,
    name: str = "melody",
) -> TrackSpec:
    notes = tuple(
        VoicingNote(n.onset_slot, n.duration_slots, n.pitch, velocity)
        for n in melody.notes
    )
    return TrackSpec(name, notes, channel=0)


def write_melody_midi(
    melody: AnnotatedMelody,
    path: str | Path,
    *,
    tempo_bpm: float = DEFAULT_TEMPO_BPM,
    velocity: int = DEFAULT_MELODY_VELOCITY,
) -> None:
    data = write_midi_bytes(
        [melody_track_spec(melody, velocity=velocity)],
        tempo_bpm=tempo_bpm,
        time_signature=melody.meter,
    )
    Path(path).write_bytes(data)


def arrangement_midi_bytes(
    arrangement: "Arrangement",
    *,
    tempo_bpm: float = DEFAULT_TEMPO_BPM,
    melody_velocity: int = DEFAULT_MELODY_VELOCITY,
) -> bytes:
    """Two-track MIDI: track 1 melody, track 2 accompaniment."""
    melody = arrangement.melody
    tracks = [
        melody_track_spec(melody, velocity=melody_velocity),
        TrackSpec("accompaniment", tuple(arrangement.accompaniment), channel=1),
    ]
    return write_midi_bytes(tracks, tempo_bpm=tempo_bpm, time_signature=melody.meter)


def write_arrangement_midi(
    arrangement: "Arrangement",
    path: str | Path,
    *,
    tempo_bpm: float = DEFAULT_TEMPO_BPM,
    melody_velocity: int = DEFAULT_MELODY_VELOCITY,
) -> None:
    Path(path).write_bytes(
        arrangement_midi_bytes(
            arrangement, tempo_bpm=tempo_bpm, melody_velocity=melody_velocity
        )
    )
