"""Shared oracles and random-instance builders for the test suite.

The brute-force path enumerators here stay independent of the package's
dynamic programs: they exhaustively score every assignment tuple.
"""

from __future__ import annotations

import itertools
import random
from typing import Optional, Sequence

import numpy as np

from cadenza.core import (
    AnnotatedMelody,
    ChordEvent,
    ChordProgression,
    Key,
    MelodyNote,
    Mode,
    Phrase,
    TriadQuality,
    VoicingNote,
)
from cadenza.harmonize import MicroLossTable
from cadenza.library import Library, StyleLabel, Template


def brute_force_best_path(
    stage_scores: Sequence[Sequence[float]],
    transition_scores: Sequence[np.ndarray],
) -> tuple[tuple[int, ...], float]:
    """Exhaustive maximum over every candidate assignment."""
    best_path: Optional[tuple[int, ...]] = None
    best_score = -np.inf
    ranges = [range(len(s)) for s in stage_scores]
    for assignment in itertools.product(*ranges):
        score = sum(stage_scores[i][c] for i, c in enumerate(assignment))
        for i in range(1, len(assignment)):
            score += float(transition_scores[i - 1][assignment[i - 1], assignment[i]])
        if score > best_score:
            best_score = score
            best_path = assignment
    assert best_path is not None
    return best_path, float(best_score)


def unrolled_path_score(
    path: Sequence[int],
    stage_scores: Sequence[Sequence[float]],
    transition_scores: Sequence[np.ndarray],
) -> float:
    score = sum(stage_scores[i][c] for i, c in enumerate(path))
    for i in range(1, len(path)):
        score += float(transition_scores[i - 1][path[i - 1], path[i]])
    return float(score)


def block_voicing(progression: ChordProgression, base: int = 48) -> tuple[VoicingNote, ...]:
    """Whole-segment root+third+fifth stacks; enough for any valid Template."""
    notes = []
    start = 0
    for slot in range(1, len(progression) + 1):
        if slot == len(progression) or progression[slot] != progression[start]:
            event = progression[start]
            for interval in event.quality.triad_intervals:
                notes.append(
                    VoicingNote(start, slot - start, base + event.root + interval, 80)
                )
            start = slot
    return tuple(notes)


def random_progression(rng: random.Random, bars: int) -> ChordProgression:
    events = []
    for _ in range(bars):
        event = ChordEvent(rng.randrange(12), rng.choice(list(TriadQuality)))
        events.extend([event] * 8)
    return ChordProgression(tuple(events))


def random_library(
    rng: random.Random,
    mode: Mode,
    four_bar: int,
    eight_bar: int,
) -> Library:
    templates = []
    styles = list(StyleLabel)
    seen = set()
    counter = 0
    while len(templates) < four_bar + eight_bar:
        bars = 4 if len(templates) < four_bar else 8
        progression = random_progression(rng, bars)
        template = Template(
            id=f"rnd{counter:03d}",
            progression=progression,
            voicing=block_voicing(progression),
            style=rng.choice(styles),
            mode=mode,
            length_bars=bars,
        )
        counter += 1
        from cadenza.library import dedup_signature

        signature = dedup_signature(template)
        if signature in seen:
            continue
        seen.add(signature)
        templates.append(template)
    return Library(tuple(templates))


def random_melody(
    rng: random.Random,
    phrase_bars: Sequence[int],
    key: Key,
    rest_chance: float = 0.15,
) -> AnnotatedMelody:
    phrases = []
    start = 0
    for i, bars in enumerate(phrase_bars):
        phrases.append(Phrase(chr(ord("A") + i), bars, start))
        start += bars
    total_slots = start * 8
    notes = []
    slot = 0
    pitch = 67
    while slot < total_slots:
        duration = rng.choice((1, 1, 2, 2, 2, 4))
        duration = min(duration, total_slots - slot)
        if rng.random() > rest_chance:
            pitch = min(84, max(55, pitch + rng.choice((-4, -2, -1, 0, 1, 2, 4))))
            notes.append(MelodyNote(slot, duration, pitch))
        slot += duration
    if not notes:
        notes.append(MelodyNote(0, 2, 67))
    return AnnotatedMelody(tuple(notes), tuple(phrases), key, (4, 4))


def random_micro_table(rng: random.Random) -> MicroLossTable:
    def matrix() -> np.ndarray:
        return np.array(
            [[round(rng.random(), 3) for _ in range(12)] for _ in range(7)]
        )

    return MicroLossTable(
        major=matrix(),
        minor=matrix(),
        non_diatonic_penalty=round(rng.random(), 3),
    )
