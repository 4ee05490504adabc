"""Accompaniment arrangement: texture search and chord-tone remapping.

Textures are phrase-length piano patterns stored with the chords they were
originally played over. For a harmonized melody, textures are chosen phrase
by phrase (fitness to the melody plus transition smoothness, optimized by
Viterbi, with repeated phrase labels reusing one texture), then each chosen
texture is retargeted to the new chords by a deterministic note-role remap
that preserves rhythm and, where possible, contour.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .core import (
    AnnotatedMelody,
    ChordEvent,
    ChordProgression,
    Key,
    SLOTS_PER_TEMPLATE_BAR,
    VoicingNote,
)
from .dp import best_path
from .harmonize import HarmonizationResult

log = logging.getLogger(__name__)


class Complexity(Enum):
    SPARSE = "sparse"
    MEDIUM = "medium"
    DENSE = "dense"


@dataclass(frozen=True)
class TexturePhrase:
    """A reusable accompaniment pattern plus the harmony it was built over."""

    id: str
    length_bars: int
    notes: tuple[VoicingNote, ...]
    source_chords: ChordProgression
    complexity: Complexity
    source: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "notes", tuple(self.notes))
        if self.length_bars not in (4, 8):
            raise ValueError(
                f"texture {self.id}: length_bars must be 4 or 8, got {self.length_bars}"
            )
        if len(self.source_chords) != self.slots:
            raise ValueError(
                f"texture {self.id}: source_chords spans "
                f"{len(self.source_chords)} slots, expected {self.slots}"
            )
        for note in self.notes:
            if note.end_slot > self.slots:
                raise ValueError(
                    f"texture {self.id}: note at slot {note.onset_slot} extends "
                    f"past the texture's {self.slots} slots"
                )

    @property
    def slots(self) -> int:
        return self.length_bars * SLOTS_PER_TEMPLATE_BAR

    @property
    def rhythm_density(self) -> float:
        """Distinct onset slots per 8-slot bar."""
        onsets = {n.onset_slot for n in self.notes}
        return len(onsets) / self.length_bars

    @property
    def register(self) -> Optional[tuple[int, int]]:
        if not self.notes:
            return None
        pitches = [n.pitch for n in self.notes]
        return (min(pitches), max(pitches))


def load_textures(path: str | Path | None = None) -> list[TexturePhrase]:
    """Load a texture library file (bundled set when no path is given)."""
    if path is None:
        path = Path(__file__).parent / "data" / "textures.jsonl"
    path = Path(path)
    textures: list[TexturePhrase] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_number}: invalid JSON ({exc})")
            try:
                textures.append(
                    TexturePhrase(
                        id=str(record["id"]),
                        length_bars=int(record["length_bars"]),
                        notes=tuple(
                            VoicingNote(int(o), int(d), int(p), int(v))
                            for o, d, p, v in record["notes"]
                        ),
                        source_chords=ChordProgression.from_pairs(record["source_chords"]),
                        complexity=Complexity(record["complexity"]),
                        source=str(record.get("source", "")),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: line {line_number}: {exc}") from exc
    if not textures:
        raise ValueError(f"{path}: empty texture library")
    return textures


def texture_by_id(textures: Iterable[TexturePhrase], texture_id: str) -> TexturePhrase:
    for texture in textures:
        if texture.id == texture_id:
            return texture
    raise KeyError(texture_id)


@dataclass(frozen=True)
class ArrangerConfig:
    rhythm_weight: float = 0.5
    register_weight: float = 0.5
    max_density_ratio: float = 3.0   # texture may be this many times busier
    transition_weight: float = 1.0
    register_norm: float = 24.0      # semitones over which smoothness decays
    reuse_labels: bool = True
    enumeration_budget: int = 200_000

    def __post_init__(self) -> None:
        if self.rhythm_weight < 0 or self.register_weight < 0:
            raise ValueError("fitness weights must be non-negative")
        if self.rhythm_weight + self.register_weight == 0:
            raise ValueError("at least one fitness weight must be positive")
        if self.max_density_ratio <= 0:
            raise ValueError("max_density_ratio must be positive")


def _melody_phrase_profile(
    melody: AnnotatedMelody, phrase_index: int
) -> tuple[float, Optional[tuple[int, int]], int]:
    """(onset density per 8-slot bar, register, slot count) of one phrase."""
    start, end = melody.phrase_slot_range(phrase_index)
    notes = [n for n in melody.notes if start <= n.onset_slot < end]
    bars = (end - start) / SLOTS_PER_TEMPLATE_BAR
    density = len({n.onset_slot for n in notes}) / bars
    register = None
    if notes:
        pitches = [n.pitch for n in notes]
        register = (min(pitches), max(pitches))
    return density, register, end - start


def phrase_fitness(
    melody: AnnotatedMelody,
    phrase_index: int,
    texture: TexturePhrase,
    config: ArrangerConfig = ArrangerConfig(),
) -> float:
    """How well a texture suits one melody phrase, in [0, 1].

    Combines rhythm-density compatibility (textures much busier than the
    melody are penalized) and register separation (textures overlapping the
    melody's range are penalized). Lengths must already match.
    """
    density, register, phrase_slots = _melody_phrase_profile(melody, phrase_index)
    if texture.slots != phrase_slots:
        raise ValueError(
            f"texture {texture.id} spans {texture.slots} slots but phrase "
            f"{phrase_index} spans {phrase_slots}"
        )
    if not texture.notes:
        return 0.0

    if density == 0:
        rhythm_score = 1.0
    else:
        ratio = texture.rhythm_density / density
        if ratio <= config.max_density_ratio:
            rhythm_score = 1.0
        else:
            rhythm_score = max(0.0, 1.0 - (ratio - config.max_density_ratio)
                               / config.max_density_ratio)

    texture_register = texture.register
    if register is None or texture_register is None:
        register_score = 1.0
    else:
        low = max(texture_register[0], register[0])
        high = min(texture_register[1], register[1])
        overlap = max(0, high - low + 1)
        span = texture_register[1] - texture_register[0] + 1
        register_score = max(0.0, 1.0 - overlap / span)

    weight_sum = config.rhythm_weight + config.register_weight
    return (config.rhythm_weight * rhythm_score
            + config.register_weight * register_score) / weight_sum


def transition_smoothness(
    a: TexturePhrase, b: TexturePhrase, config: ArrangerConfig = ArrangerConfig()
) -> float:
    """Smoothness of moving from texture ``a`` to ``b``, in [0, 1]."""
    reg_a, reg_b = a.register, b.register
    if reg_a is None or reg_b is None:
        register_score = 1.0
    else:
        mid_a = (reg_a[0] + reg_a[1]) / 2
        mid_b = (reg_b[0] + reg_b[1]) / 2
        register_score = 1.0 - min(1.0, abs(mid_a - mid_b) / config.register_norm)
    density_gap = abs(a.rhythm_density - b.rhythm_density)
    density_score = 1.0 - density_gap / max(a.rhythm_density, b.rhythm_density, 1.0)
    return (register_score + density_score) / 2.0


def _texture_pools(
    melody: AnnotatedMelody,
    textures: Sequence[TexturePhrase],
    complexity: Complexity,
) -> list[list[TexturePhrase]]:
    pools = []
    for index in range(len(melody.phrases)):
        start, end = melody.phrase_slot_range(index)
        slots = end - start
        pool = sorted(
            (t for t in textures if t.slots == slots and t.complexity is complexity),
            key=lambda t: t.id,
        )
        if not pool:
            pool = sorted(
                (t for t in textures if t.slots == slots), key=lambda t: t.id
            )
            if pool:
                log.warning(
                    "no %s texture spans %d slots; falling back to all complexities",
                    complexity.value, slots,
                )
        if not pool:
            raise ValueError(
                f"no texture of matching length: phrase {index} spans {slots} slots"
            )
        pools.append(pool)
    return pools


def _assignment_score(
    pick: Sequence[TexturePhrase],
    fitness: Sequence[dict[str, float]],
    config: ArrangerConfig,
) -> float:
    total = sum(fitness[i][t.id] for i, t in enumerate(pick))
    for a, b in zip(pick, pick[1:]):
        total += config.transition_weight * transition_smoothness(a, b, config)
    return total


def search_textures(
    melody: AnnotatedMelody,
    harmonization: HarmonizationResult,
    textures: Sequence[TexturePhrase],
    complexity: Complexity,
    config: ArrangerConfig = ArrangerConfig(),
) -> list[str]:
    """Choose one texture id per phrase.

    Stage score is the phrase fitness, transition score the smoothness
    between consecutive textures. Phrases sharing a label (and length) are
    constrained to reuse one texture: such instances are solved by exact
    enumeration over per-label assignments while the assignment space is
    within budget, falling back to a first-occurrence greedy beyond it.
    """
    if len(harmonization.choices) != len(melody.phrases):
        raise ValueError("harmonization does not match the melody's phrase count")
    pools = _texture_pools(melody, textures, complexity)
    fitness: list[dict[str, float]] = [
        {t.id: phrase_fitness(melody, i, t, config) for t in pool}
        for i, pool in enumerate(pools)
    ]

    reuse_keys = [
        (p.label, melody.phrase_slot_range(i)[1] - melody.phrase_slot_range(i)[0])
        for i, p in enumerate(melody.phrases)
    ]
    constrained = config.reuse_labels and len(set(reuse_keys)) < len(reuse_keys)

    if not constrained:
        stage = [
            [fitness[i][t.id] for t in pool] for i, pool in enumerate(pools)
        ]
        transitions = []
        for i in range(1, len(pools)):
            matrix = np.empty((len(pools[i - 1]), len(pools[i])))
            for a_idx, a in enumerate(pools[i - 1]):
                for b_idx, b in enumerate(pools[i]):
                    matrix[a_idx, b_idx] = (
                        config.transition_weight * transition_smoothness(a, b, config)
                    )
            transitions.append(matrix)
        path, _ = best_path(stage, transitions)
        return [pools[i][idx].id for i, idx in enumerate(path)]

    distinct: list[tuple] = []
    for key in reuse_keys:
        if key not in distinct:
            distinct.append(key)
    key_pool = {key: pools[reuse_keys.index(key)] for key in distinct}

    space = 1
    for key in distinct:
        space *= len(key_pool[key])
    if space <= config.enumeration_budget:
        best_pick: Optional[list[TexturePhrase]] = None
        best_score = -np.inf
        for assignment in itertools.product(*(key_pool[key] for key in distinct)):
            by_key = dict(zip(distinct, assignment))
            pick = [by_key[key] for key in reuse_keys]
            score = _assignment_score(pick, fitness, config)
            if score > best_score:
                best_score = score
                best_pick = pick
        assert best_pick is not None
        return [t.id for t in best_pick]

    log.warning(
        "texture assignment space %d exceeds budget %d; using greedy reuse",
        space, config.enumeration_budget,
    )
    by_key = {}
    for key in distinct:
        phrase_indices = [i for i, k in enumerate(reuse_keys) if k == key]
        by_key[key] = max(
            key_pool[key],
            key=lambda t: (sum(fitness[i][t.id] for i in phrase_indices), t.id),
        )
    return [by_key[key].id for key in reuse_keys]


# -- re-harmonization --------------------------------------------------------------

def _nearest_scale_step(interval: int, steps: Sequence[int]) -> int:
    """Index of the scale step closest to ``interval`` on the pc circle,
    preferring the step below on ties."""
    def distance(step: int) -> tuple[int, int]:
        forward = (interval - step) % 12
        backward = (step - interval) % 12
        return (min(forward, backward), forward)

    best = min(range(len(steps)), key=lambda i: distance(steps[i]))
    return best


def _nearest_octave(pc: int, reference: int) -> int:
    delta = (pc - reference) % 12
    up = reference + delta
    down = up - 12
    if delta < 6:
        chosen = up
    elif delta > 6:
        chosen = down
    else:
        chosen = down  # exact tritone: take the lower option
    while chosen < 0:
        chosen += 12
    while chosen > 127:
        chosen -= 12
    return chosen


def _map_pitch(pitch: int, source: ChordEvent, target: ChordEvent) -> int:
    interval = (pitch - source.root) % 12
    triad = source.quality.triad_intervals
    if interval in triad:
        role = triad.index(interval)
        target_pc = (target.root + target.quality.triad_intervals[role]) % 12
    else:
        source_steps = [(pc - source.root) % 12 for pc in source.scale_pcs]
        degree = _nearest_scale_step(interval, source_steps)
        target_steps = [(pc - target.root) % 12 for pc in target.scale_pcs]
        target_pc = (target.root + target_steps[degree]) % 12
    return _nearest_octave(target_pc, pitch)


def reharmonize(
    texture: TexturePhrase,
    target_chords: ChordProgression,
) -> tuple[VoicingNote, ...]:
    """Retarget a texture's notes from its source chords to new ones.

    Each note keeps its onset, duration and velocity; its pitch is mapped by
    role (triad member, else nearest scale degree of the chord's implied
    scale) against the chord at its onset slot, placed in the octave nearest
    the original pitch. Between consecutive single-note onsets the source's
    melodic direction is restored by an octave shift when that stays within
    an octave of the original note.
    """
    if len(texture.source_chords) != len(target_chords):
        raise ValueError(
            f"texture {texture.id} spans {len(texture.source_chords)} slots but "
            f"target chords span {len(target_chords)}"
        )
    ordered = sorted(texture.notes, key=lambda n: (n.onset_slot, n.pitch))
    mapped: list[VoicingNote] = []
    for note in ordered:
        source = texture.source_chords[note.onset_slot]
        target = target_chords[note.onset_slot]
        mapped.append(
            VoicingNote(
                note.onset_slot,
                note.duration_slots,
                _map_pitch(note.pitch, source, target),
                note.velocity,
            )
        )

    onset_counts = {}
    for note in ordered:
        onset_counts[note.onset_slot] = onset_counts.get(note.onset_slot, 0) + 1
    for i in range(1, len(mapped)):
        prev, cur = ordered[i - 1], ordered[i]
        if prev.onset_slot == cur.onset_slot:
            continue
        if onset_counts[prev.onset_slot] > 1 or onset_counts[cur.onset_slot] > 1:
            continue
        source_direction = np.sign(cur.pitch - prev.pitch)
        mapped_direction = np.sign(mapped[i].pitch - mapped[i - 1].pitch)
        if source_direction == 0 or mapped_direction == 0:
            continue
        if source_direction != mapped_direction:
            adjusted = mapped[i].pitch + 12 * int(source_direction)
            if 0 <= adjusted <= 127 and abs(adjusted - cur.pitch) < 12:
                mapped[i] = VoicingNote(
                    mapped[i].onset_slot,
                    mapped[i].duration_slots,
                    adjusted,
                    mapped[i].velocity,
                )
    return tuple(mapped)


# A reharmonizer maps a texture onto new chords; the default is the
# rule-based remap above, and arrange() accepts any drop-in replacement
# with the same signature (e.g. a learned model).
Reharmonizer = Callable[[TexturePhrase, ChordProgression], tuple[VoicingNote, ...]]


# -- arrangement --------------------------------------------------------------------

@dataclass(frozen=True)
class Arrangement:
    melody: AnnotatedMelody
    accompaniment: tuple[VoicingNote, ...]
    chords_used: ChordProgression
    texture_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "accompaniment",
            tuple(sorted(self.accompaniment, key=lambda n: (n.onset_slot, n.pitch))),
        )
        if len(self.chords_used) != self.melody.total_slots:
            raise ValueError(
                f"chords cover {len(self.chords_used)} slots, melody covers "
                f"{self.melody.total_slots}"
            )
        if len(self.texture_ids) != len(self.melody.phrases):
            raise ValueError("one texture id per phrase is required")
        for note in self.accompaniment:
            if note.end_slot > self.melody.total_slots:
                raise ValueError(
                    f"accompaniment note at slot {note.onset_slot} extends past "
                    f"the melody's {self.melody.total_slots} slots"
                )


def _phrase_accompaniment(
    melody: AnnotatedMelody,
    harmonization: HarmonizationResult,
    texture: TexturePhrase,
    phrase_index: int,
    reharmonizer: Reharmonizer,
) -> list[VoicingNote]:
    start, _ = melody.phrase_slot_range(phrase_index)
    target = harmonization.phrase_chords(phrase_index)
    return [n.shift(start) for n in reharmonizer(texture, target)]


def arrange(
    melody: AnnotatedMelody,
    harmonization: HarmonizationResult,
    textures: Sequence[TexturePhrase],
    complexity: Complexity = Complexity.MEDIUM,
    config: ArrangerConfig = ArrangerConfig(),
    reharmonizer: Reharmonizer = reharmonize,
) -> Arrangement:
    """Full arrangement: search textures per phrase, retarget them to the
    harmonized chords, and lay them under the melody."""
    ids = search_textures(melody, harmonization, textures, complexity, config)
    accompaniment: list[VoicingNote] = []
    for index, texture_id in enumerate(ids):
        texture = texture_by_id(textures, texture_id)
        accompaniment.extend(
            _phrase_accompaniment(melody, harmonization, texture, index, reharmonizer)
        )
    return Arrangement(
        melody=melody,
        accompaniment=tuple(accompaniment),
        chords_used=harmonization.all_chords(),
        texture_ids=tuple(ids),
    )


def rearrange_phrase(
    arrangement: Arrangement,
    harmonization: HarmonizationResult,
    textures: Sequence[TexturePhrase],
    phrase_index: int,
    reharmonizer: Reharmonizer = reharmonize,
) -> Arrangement:
    """Recompute one phrase's accompaniment (texture kept) after its chords
    changed, leaving every other phrase's notes untouched."""
    melody = arrangement.melody
    start, end = melody.phrase_slot_range(phrase_index)
    texture = texture_by_id(textures, arrangement.texture_ids[phrase_index])
    fresh = _phrase_accompaniment(
        melody, harmonization, texture, phrase_index, reharmonizer
    )
    kept = [n for n in arrangement.accompaniment if not start <= n.onset_slot < end]
    return Arrangement(
        melody=melody,
        accompaniment=tuple(kept + fresh),
        chords_used=harmonization.all_chords(),
        texture_ids=arrangement.texture_ids,
    )


def coverage_violations(arrangement: Arrangement, key: Key) -> list[VoicingNote]:
    """Accompaniment onsets whose pitch class is neither a chord tone nor a
    scale tone of the active chord or key. Empty for a well-formed remap."""
    violations = []
    key_pcs = set(key.scale_pcs)
    for note in arrangement.accompaniment:
        chord = arrangement.chords_used[note.onset_slot]
        allowed = set(chord.triad_pcs) | set(chord.scale_pcs) | key_pcs
        if note.pitch % 12 not in allowed:
            violations.append(note)
    return violations
