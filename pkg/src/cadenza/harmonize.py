"""Melody harmonization by chord-template matching.

Candidates for each phrase are library templates of the phrase's length plus
ordered concatenations of two half-length templates. Each candidate is scored
note-wise against the melody (micro loss, a 7x12 dissonance table), for
phrase integrity (meso loss: concatenation-junction transition cost, plus a
prohibitive term for length mismatches), and for inter-phrase smoothness
(macro loss). A dynamic program maximizes the weighted sum of the
complemented losses and the winning path is grouped into Roman-numeral
identities whose style variants the user can swap per phrase.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    ChordEvent,
    ChordProgression,
    Key,
    Mode,
    SLOTS_PER_TEMPLATE_BAR,
    VoicingNote,
    chord_degree,
    interval_pc,
    to_roman,
    AnnotatedMelody,
)
from .dp import best_path
from .library import (
    Library,
    StyleLabel,
    Template,
    TransitionStats,
    canonical_key,
)

# 1/delta2 - 1 when a candidate's length differs from the phrase's
LENGTH_MISMATCH_PENALTY = math.exp(10.0) - 1.0

NEUTRAL_MICRO_LOSS = 0.5  # a phrase of pure rest neither fits nor clashes


@dataclass(frozen=True, eq=False)
class MicroLossTable:
    """Note-wise dissonance of (chord degree 1-7, melody interval to key center)."""

    major: np.ndarray
    minor: np.ndarray
    non_diatonic_penalty: float

    def __post_init__(self) -> None:
        for name in ("major", "minor"):
            matrix = np.asarray(getattr(self, name), dtype=float)
            if matrix.shape != (7, 12):
                raise ValueError(f"{name} matrix must be 7x12, got {matrix.shape}")
            if matrix.min() < 0.0 or matrix.max() > 1.0:
                raise ValueError(f"{name} matrix entries must lie in [0, 1]")
            matrix.setflags(write=False)
            object.__setattr__(self, name, matrix)
        if not 0.0 <= self.non_diatonic_penalty <= 1.0:
            raise ValueError("non_diatonic_penalty must lie in [0, 1]")

    def matrix(self, mode: Mode) -> np.ndarray:
        return self.major if mode is Mode.MAJOR else self.minor


def load_micro_table(path: str | Path) -> MicroLossTable:
    raw = json.loads(Path(path).read_text("utf-8"))
    for name in ("major", "minor", "non_diatonic_penalty"):
        if name not in raw:
            raise ValueError(f"micro-loss table {path}: missing field {name!r}")
    return MicroLossTable(
        major=np.asarray(raw["major"], dtype=float),
        minor=np.asarray(raw["minor"], dtype=float),
        non_diatonic_penalty=float(raw["non_diatonic_penalty"]),
    )


def default_micro_table_path() -> Path:
    return Path(__file__).parent / "data" / "micro_loss.json"


@functools.lru_cache(maxsize=1)
def load_default_micro_table() -> MicroLossTable:
    return load_micro_table(default_micro_table_path())


@dataclass(frozen=True)
class HarmonizerConfig:
    alpha: float = 0.1
    beta: float = 0.5
    style_filter: Optional[frozenset[StyleLabel]] = None
    micro_table: MicroLossTable = field(default_factory=load_default_micro_table)

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.style_filter is not None:
            object.__setattr__(self, "style_filter", frozenset(self.style_filter))
            if not self.style_filter:
                raise ValueError("style_filter must be None or non-empty")


@dataclass(frozen=True)
class Candidate:
    """One or two templates proposed for a phrase."""

    ids: tuple[str, ...]
    progression: ChordProgression
    voicing: tuple[VoicingNote, ...]
    concatenated: bool
    length_bars: int
    style: Optional[StyleLabel]

    def __post_init__(self) -> None:
        if self.concatenated != (len(self.ids) == 2):
            raise ValueError("concatenated candidates have exactly two parts")
        if len(self.progression) != self.length_bars * SLOTS_PER_TEMPLATE_BAR:
            raise ValueError(
                f"candidate {self.id_string}: progression slots do not match "
                f"{self.length_bars} bars"
            )

    @property
    def id_string(self) -> str:
        return "+".join(self.ids)

    def first_bar(self) -> tuple[ChordEvent, ...]:
        return self.progression.bar(0)

    def last_bar(self) -> tuple[ChordEvent, ...]:
        return self.progression.bar(self.progression.bars - 1)

    def junction(self) -> Optional[tuple[tuple[ChordEvent, ...], tuple[ChordEvent, ...]]]:
        """The two bars that meet where the parts join, None for plain candidates."""
        if not self.concatenated:
            return None
        half_bars = self.length_bars // 2
        return (self.progression.bar(half_bars - 1), self.progression.bar(half_bars))

    @classmethod
    def from_template(cls, template: Template) -> Candidate:
        return cls(
            ids=(template.id,),
            progression=template.progression,
            voicing=template.voicing,
            concatenated=False,
            length_bars=template.length_bars,
            style=template.style,
        )

    @classmethod
    def from_pair(cls, first: Template, second: Template) -> Candidate:
        voicing = first.voicing + tuple(n.shift(first.slots) for n in second.voicing)
        return cls(
            ids=(first.id, second.id),
            progression=first.progression.concat(second.progression),
            voicing=voicing,
            concatenated=True,
            length_bars=first.length_bars + second.length_bars,
            style=first.style if first.style is second.style else None,
        )


def generate_candidates(
    library: Library,
    phrase_len_bars: int,
    mode: Mode,
    style_filter: Optional[frozenset[StyleLabel]] = None,
) -> list[Candidate]:
    """All candidates for a phrase: exact-length templates plus, for 8-bar
    phrases, every ordered pair of 4-bar templates (self-pairs included).

    With a style filter, plain candidates and both halves of a pair must
    carry a filtered style; without one, pair halves may mix styles.
    """
    if phrase_len_bars not in (4, 8):
        raise ValueError(f"phrase length must be 4 or 8 bars, got {phrase_len_bars}")
    candidates = [
        Candidate.from_template(t)
        for t in library.select(mode=mode, length_bars=phrase_len_bars, styles=style_filter)
    ]
    if phrase_len_bars == 8:
        halves = library.select(mode=mode, length_bars=4, styles=style_filter)
        candidates.extend(
            Candidate.from_pair(a, b) for a in halves for b in halves
        )
    if not candidates:
        wanted = "any style" if style_filter is None else (
            "styles " + ", ".join(sorted(s.value for s in style_filter))
        )
        raise ValueError(
            f"no candidates for phrase: no {mode.value} templates of "
            f"{phrase_len_bars} bars ({wanted})"
        )
    candidates.sort(key=lambda c: c.ids)
    return candidates


# -- losses ---------------------------------------------------------------------

def micro_loss(
    phrase_pitches: Sequence[Optional[int]],
    candidate: Candidate,
    key: Key,
    table: MicroLossTable,
) -> float:
    """Mean per-slot dissonance of sounding melody against the candidate."""
    if len(phrase_pitches) != len(candidate.progression):
        raise ValueError(
            f"melody phrase spans {len(phrase_pitches)} slots but candidate "
            f"{candidate.id_string} spans {len(candidate.progression)}"
        )
    matrix = table.matrix(key.mode)
    total = 0.0
    sounding = 0
    for slot, pitch in enumerate(phrase_pitches):
        if pitch is None:
            continue
        sounding += 1
        degree = chord_degree(candidate.progression[slot], key)
        if degree is None:
            total += table.non_diatonic_penalty
        else:
            total += matrix[degree - 1, interval_pc(key.tonic, pitch % 12)]
    if sounding == 0:
        return NEUTRAL_MICRO_LOSS
    return total / sounding


def meso_loss(
    candidate: Candidate,
    phrase_len_bars: int,
    stats: TransitionStats,
) -> float:
    """Phrase-integrity loss: junction transition cost for concatenated
    candidates plus 1/delta2 - 1, which explodes on length mismatch."""
    mismatch = 0.0 if candidate.length_bars == phrase_len_bars else LENGTH_MISMATCH_PENALTY
    junction = candidate.junction()
    if junction is None:
        return mismatch
    return stats.transition_loss(*junction) + mismatch


def macro_loss(
    prev: Optional[Candidate],
    curr: Candidate,
    stats: TransitionStats,
) -> float:
    """Smoothness of the junction between consecutive phrases; 0 for the first."""
    if prev is None:
        return 0.0
    return stats.transition_loss(prev.last_bar(), curr.first_bar())


# -- results ----------------------------------------------------------------------

@dataclass(frozen=True)
class Variant:
    """A same-identity rendering alternative (template or template pair)."""

    candidate: Candidate

    @property
    def id_string(self) -> str:
        return self.candidate.id_string

    @property
    def style(self) -> Optional[StyleLabel]:
        return self.candidate.style


@dataclass(frozen=True)
class PhraseChoice:
    phrase_index: int
    label: str
    chosen: Candidate
    identity: str
    variants: tuple[Variant, ...]
    micro: float
    meso: float
    macro: float

    @property
    def losses(self) -> tuple[float, float, float]:
        return (self.micro, self.meso, self.macro)

    def available_styles(self) -> list[StyleLabel]:
        styles = {v.style for v in self.variants if v.style is not None}
        return sorted(styles, key=lambda s: s.value)


@dataclass(frozen=True)
class HarmonizationResult:
    choices: tuple[PhraseChoice, ...]
    total_score: float
    config_used: HarmonizerConfig
    key: Key
    meter: tuple[int, int]
    canonical_shift: int
    phrase_template_bars: tuple[int, ...]
    phrase_pitches: tuple[tuple[Optional[int], ...], ...] = field(repr=False)
    stats: TransitionStats = field(repr=False)

    @property
    def canonical_key(self) -> Key:
        return canonical_key(self.key.mode)

    def phrase_chords(self, index: int) -> ChordProgression:
        """The chosen chords of one phrase, in the melody's input key."""
        return self.choices[index].chosen.progression.transpose(-self.canonical_shift)

    def all_chords(self) -> ChordProgression:
        merged = self.phrase_chords(0)
        for index in range(1, len(self.choices)):
            merged = merged.concat(self.phrase_chords(index))
        return merged

    def lead_sheet_voicing(self) -> tuple[VoicingNote, ...]:
        """Chosen template voicings, transposed to the input key and laid
        end to end on the melody's slot grid."""
        notes: list[VoicingNote] = []
        offset = 0
        for choice in self.choices:
            for note in choice.chosen.voicing:
                notes.append(note.transpose(-self.canonical_shift).shift(offset))
            offset += len(choice.chosen.progression)
        notes.sort(key=lambda n: (n.onset_slot, n.pitch))
        return tuple(notes)

    def to_dict(self) -> dict:
        return {
            "key": {"tonic": self.key.tonic, "mode": self.key.mode.value},
            "meter": list(self.meter),
            "alpha": self.config_used.alpha,
            "beta": self.config_used.beta,
            "style_filter": (
                sorted(s.value for s in self.config_used.style_filter)
                if self.config_used.style_filter else None
            ),
            "total_score": self.total_score,
            "phrases": [
                {
                    "index": choice.phrase_index,
                    "label": choice.label,
                    "identity": choice.identity,
                    "template_id": choice.chosen.id_string,
                    "style": choice.chosen.style.value if choice.chosen.style else None,
                    "losses": {
                        "micro": choice.micro,
                        "meso": choice.meso,
                        "macro": choice.macro,
                    },
                    "variants": [
                        [v.id_string, v.style.value if v.style else None]
                        for v in choice.variants
                    ],
                    "chords": self.phrase_chords(i).as_pairs(),
                }
                for i, choice in enumerate(self.choices)
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _collect_variants(
    library: Library,
    chosen: Candidate,
    identity: str,
    template_bars: int,
    mode: Mode,
) -> tuple[Variant, ...]:
    canon = canonical_key(mode)
    variants = [
        Variant(Candidate.from_template(t))
        for t in library.select(mode=mode, length_bars=template_bars)
        if to_roman(t.progression, canon) == identity
    ]
    if not any(v.id_string == chosen.id_string for v in variants):
        variants.append(Variant(chosen))
    variants.sort(key=lambda v: v.id_string)
    return tuple(variants)


def _canonical_shift(key: Key) -> int:
    shift = (canonical_key(key.mode).tonic - key.tonic) % 12
    return shift - 12 if shift > 6 else shift


def _phrase_template_bars(melody: AnnotatedMelody, index: int) -> int:
    start, end = melody.phrase_slot_range(index)
    slots = end - start
    if slots % SLOTS_PER_TEMPLATE_BAR != 0 or slots // SLOTS_PER_TEMPLATE_BAR not in (4, 8):
        raise ValueError(
            f"no candidates for phrase {index}: it spans {slots} slots; "
            f"library templates are 32 or 64 slots"
        )
    return slots // SLOTS_PER_TEMPLATE_BAR


def _path_total(
    choices: Sequence[PhraseChoice],
    config: HarmonizerConfig,
) -> float:
    total = 0.0
    for i, choice in enumerate(choices):
        total += config.beta * (1.0 - choice.micro)
        total += (1.0 - config.beta) * (1.0 - choice.meso)
        if i > 0:
            total += config.alpha * (1.0 - choice.macro)
    return total


def harmonize(
    melody: AnnotatedMelody,
    library: Library,
    stats: TransitionStats,
    config: Optional[HarmonizerConfig] = None,
) -> HarmonizationResult:
    """Find the best per-phrase chord templates for an annotated melody.

    The melody is moved to the canonical key, every phrase's candidates are
    scored, and the stage-plus-transition dynamic program picks the path
    maximizing ``beta(1-micro) + (1-beta)(1-meso)`` per phrase plus
    ``alpha(1-macro)`` per junction. Ties resolve to the lexicographically
    smallest template ids. The result carries chords in the input key.
    """
    if config is None:
        config = HarmonizerConfig()
    shift = _canonical_shift(melody.key)
    canon = canonical_key(melody.key.mode)
    pitch_grid = melody.pitch_slots()

    phrase_pitches: list[tuple[Optional[int], ...]] = []
    template_bars: list[int] = []
    candidates: list[list[Candidate]] = []
    for index in range(len(melody.phrases)):
        bars = _phrase_template_bars(melody, index)
        start, end = melody.phrase_slot_range(index)
        pitches = tuple(
            None if p is None else p + shift for p in pitch_grid[start:end]
        )
        phrase_pitches.append(pitches)
        template_bars.append(bars)
        try:
            candidates.append(
                generate_candidates(library, bars, melody.key.mode, config.style_filter)
            )
        except ValueError as exc:
            raise ValueError(f"phrase {index}: {exc}") from exc

    micro: list[list[float]] = []
    stage_scores: list[list[float]] = []
    for index, phrase_candidates in enumerate(candidates):
        mic_row = [
            micro_loss(phrase_pitches[index], c, canon, config.micro_table)
            for c in phrase_candidates
        ]
        mes_row = [
            meso_loss(c, template_bars[index], stats) for c in phrase_candidates
        ]
        micro.append(mic_row)
        stage_scores.append(
            [
                config.beta * (1.0 - mic) + (1.0 - config.beta) * (1.0 - mes)
                for mic, mes in zip(mic_row, mes_row)
            ]
        )

    transitions = []
    for index in range(1, len(candidates)):
        prev_last = [c.last_bar() for c in candidates[index - 1]]
        cur_first = [c.first_bar() for c in candidates[index]]
        matrix = np.empty((len(prev_last), len(cur_first)))
        for t, last in enumerate(prev_last):
            for s, first in enumerate(cur_first):
                matrix[t, s] = config.alpha * (1.0 - stats.transition_loss(last, first))
        transitions.append(matrix)

    path, total = best_path(stage_scores, transitions)

    choices: list[PhraseChoice] = []
    previous: Optional[Candidate] = None
    for index, chosen_index in enumerate(path):
        chosen = candidates[index][chosen_index]
        identity = to_roman(chosen.progression, canon)
        variants = _collect_variants(
            library, chosen, identity, template_bars[index], melody.key.mode
        )
        choices.append(
            PhraseChoice(
                phrase_index=index,
                label=melody.phrases[index].label,
                chosen=chosen,
                identity=identity,
                variants=variants,
                micro=micro[index][chosen_index],
                meso=meso_loss(chosen, template_bars[index], stats),
                macro=macro_loss(previous, chosen, stats),
            )
        )
        previous = chosen

    return HarmonizationResult(
        choices=tuple(choices),
        total_score=total,
        config_used=config,
        key=melody.key,
        meter=melody.meter,
        canonical_shift=shift,
        phrase_template_bars=tuple(template_bars),
        phrase_pitches=tuple(phrase_pitches),
        stats=stats,
    )


def select_style(
    result: HarmonizationResult,
    phrase_index: int,
    style: StyleLabel,
) -> HarmonizationResult:
    """Swap one phrase's rendering template for a variant in the given style.

    The phrase's Roman-numeral identity and every other phrase are unchanged;
    the loss triples and path total are recomputed for the new template.
    Raises ValueError when the identity has no variant in that style.
    """
    if not 0 <= phrase_index < len(result.choices):
        raise ValueError(
            f"phrase index {phrase_index} out of range (0..{len(result.choices) - 1})"
        )
    choice = result.choices[phrase_index]
    if choice.chosen.style is style:
        return result
    matching = [v for v in choice.variants if v.style is style]
    if not matching:
        available = ", ".join(s.value for s in choice.available_styles()) or "none"
        raise ValueError(
            f"phrase {phrase_index} identity {choice.identity} has no "
            f"{style.value} variant; available styles: {available}"
        )
    new_chosen = matching[0].candidate

    config = result.config_used
    canon = result.canonical_key
    choices = list(result.choices)
    choices[phrase_index] = replace(
        choice,
        chosen=new_chosen,
        micro=micro_loss(
            result.phrase_pitches[phrase_index], new_chosen, canon, config.micro_table
        ),
        meso=meso_loss(
            new_chosen, result.phrase_template_bars[phrase_index], result.stats
        ),
        macro=macro_loss(
            choices[phrase_index - 1].chosen if phrase_index > 0 else None,
            new_chosen,
            result.stats,
        ),
    )
    if phrase_index + 1 < len(choices):
        following = choices[phrase_index + 1]
        choices[phrase_index + 1] = replace(
            following,
            macro=macro_loss(new_chosen, following.chosen, result.stats),
        )
    return replace(
        result,
        choices=tuple(choices),
        total_score=_path_total(choices, config),
    )
