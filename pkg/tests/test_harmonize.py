from __future__ import annotations

import math
import random

import numpy as np
import pytest

from cadenza.core import (
    AnnotatedMelody,
    ChordEvent,
    ChordProgression,
    Key,
    MelodyNote,
    Mode,
    Phrase,
    TriadQuality,
    chord_degree,
    interval_pc,
    to_roman,
)
from cadenza.harmonize import (
    Candidate,
    HarmonizerConfig,
    LENGTH_MISMATCH_PENALTY,
    MicroLossTable,
    generate_candidates,
    harmonize,
    load_default_micro_table,
    macro_loss,
    meso_loss,
    micro_loss,
    select_style,
)
from cadenza.library import (
    Library,
    StyleLabel,
    Template,
    TransitionStats,
    canonical_key,
    window_signature,
)

from support import (
    block_voicing,
    random_library,
    random_melody,
    random_micro_table,
)
from test_library import make_template

C_MAJOR = Key(0, Mode.MAJOR)


def phrase_melody(pitches: list, bars: int = 4) -> list:
    """Per-slot pitches padded with rests to the requested bar count."""
    grid = list(pitches) + [None] * (bars * 8 - len(pitches))
    return grid


def single_phrase_melody(notes, bars=4, key=C_MAJOR) -> AnnotatedMelody:
    return AnnotatedMelody(tuple(notes), (Phrase("A", bars, 0),), key, (4, 4))


def brute_force_harmonization_score(melody, candidates, stats, config, canon, shift):
    """Exhaustive path enumeration over per-phrase candidate lists."""
    import itertools

    grid = melody.pitch_slots()
    stage = []
    for index, phrase_candidates in enumerate(candidates):
        start, end = melody.phrase_slot_range(index)
        pitches = [None if p is None else p + shift for p in grid[start:end]]
        bars = (end - start) // 8
        row = []
        for candidate in phrase_candidates:
            mic = micro_loss(pitches, candidate, canon, config.micro_table)
            mes = meso_loss(candidate, bars, stats)
            row.append(config.beta * (1 - mic) + (1 - config.beta) * (1 - mes))
        stage.append(row)

    best = -np.inf
    best_assignment = None
    for assignment in itertools.product(*(range(len(c)) for c in candidates)):
        total = sum(stage[i][c] for i, c in enumerate(assignment))
        for i in range(1, len(assignment)):
            prev = candidates[i - 1][assignment[i - 1]]
            cur = candidates[i][assignment[i]]
            total += config.alpha * (1 - macro_loss(prev, cur, stats))
        if total > best:
            best = total
            best_assignment = assignment
    return best, best_assignment, stage


class TestMicroTable:
    def test_default_table_loads_and_validates(self, micro_table):
        assert micro_table.major.shape == (7, 12)
        assert micro_table.minor.shape == (7, 12)
        assert 0.0 <= micro_table.non_diatonic_penalty <= 1.0

    def test_rejects_out_of_range_entries(self):
        bad = np.zeros((7, 12))
        bad[0, 0] = 1.5
        with pytest.raises(ValueError, match="0, 1"):
            MicroLossTable(major=bad, minor=np.zeros((7, 12)), non_diatonic_penalty=0.5)

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError, match="7x12"):
            MicroLossTable(
                major=np.zeros((6, 12)), minor=np.zeros((7, 12)), non_diatonic_penalty=0.5
            )


class TestMicroLoss:
    def test_tonic_over_tonic_triad_hits_lightest_cell(self, micro_table):
        candidate = Candidate.from_template(make_template([(0, "maj")] * 4))
        pitches = phrase_melody([60] * 32)
        expected = float(micro_table.major[0, 0])
        assert micro_loss(pitches, candidate, C_MAJOR, micro_table) == pytest.approx(expected)
        assert expected == 0.0  # lightest cell of the shipped table

    def test_all_rest_phrase_is_neutral(self, micro_table):
        candidate = Candidate.from_template(make_template([(0, "maj")] * 4))
        assert micro_loss(phrase_melody([]), candidate, C_MAJOR, micro_table) == 0.5

    def test_mixed_phrase_equals_per_slot_mean(self, micro_table):
        """Independent per-slot tabulation oracle over the shipped table."""
        chords = [(0, "maj"), (9, "min"), (5, "maj"), (7, "maj")]
        candidate = Candidate.from_template(make_template(chords))
        rng = random.Random(4)
        pitches = [rng.choice([None, 60, 62, 64, 65, 67, 69, 71, 72]) for _ in range(32)]

        expected_cells = []
        for slot, pitch in enumerate(pitches):
            if pitch is None:
                continue
            chord = candidate.progression[slot]
            degree = chord_degree(chord, C_MAJOR)
            column = interval_pc(C_MAJOR.tonic, pitch % 12)
            expected_cells.append(float(micro_table.major[degree - 1, column]))
        expected = sum(expected_cells) / len(expected_cells)

        assert micro_loss(pitches, candidate, C_MAJOR, micro_table) == pytest.approx(expected)

    def test_non_diatonic_chord_uses_penalty(self, micro_table):
        candidate = Candidate.from_template(make_template([(1, "maj")] * 4))
        value = micro_loss(phrase_melody([60] * 32), candidate, C_MAJOR, micro_table)
        assert value == pytest.approx(micro_table.non_diatonic_penalty)

    def test_length_mismatch_raises(self, micro_table):
        candidate = Candidate.from_template(make_template([(0, "maj")] * 4))
        with pytest.raises(ValueError, match="slots"):
            micro_loss([60] * 8, candidate, C_MAJOR, micro_table)

    def test_always_within_unit_interval(self, micro_table):
        rng = random.Random(11)
        for _ in range(50):
            chords = [(rng.randrange(12), rng.choice(["maj", "min"])) for _ in range(4)]
            candidate = Candidate.from_template(make_template(chords))
            pitches = [rng.choice([None] + list(range(55, 80))) for _ in range(32)]
            value = micro_loss(pitches, candidate, C_MAJOR, micro_table)
            assert 0.0 <= value <= 1.0


class TestMesoLoss:
    def test_equal_length_plain_candidate_is_free(self, seed_stats):
        candidate = Candidate.from_template(make_template([(0, "maj")] * 4))
        assert meso_loss(candidate, 4, seed_stats) == 0.0

    def test_equal_length_concatenation_with_count_n_junction(self):
        a = make_template([(0, "maj"), (5, "maj"), (7, "maj"), (0, "maj")], "a")
        b = make_template([(0, "maj"), (9, "min"), (2, "min"), (7, "maj")], "b")
        pair = Candidate.from_pair(a, b)
        junction = pair.junction()
        signature = window_signature(junction[0] + junction[1])
        n = 12
        stats = TransitionStats({signature: n}, n)
        # transition loss at c = N is exactly 0, so the pair costs nothing
        assert meso_loss(pair, 8, stats) == pytest.approx(0.0, abs=1e-12)

    def test_length_mismatch_pays_exp_ten_minus_one(self, seed_stats):
        candidate = Candidate.from_template(make_template([(0, "maj")] * 4))
        value = meso_loss(candidate, 8, seed_stats)
        assert value == pytest.approx(math.exp(10.0) - 1.0, rel=1e-9)
        assert value == pytest.approx(22025.4658, rel=1e-6)

    def test_concatenated_mismatch_adds_junction_cost(self):
        a = make_template([(0, "maj")] * 4, "a")
        b = make_template([(7, "maj")] * 4, "b")
        pair = Candidate.from_pair(a, b)
        stats = TransitionStats({}, 10)  # unseen junction costs 2
        assert meso_loss(pair, 4, stats) == pytest.approx(
            LENGTH_MISMATCH_PENALTY + 2.0, rel=1e-12
        )


class TestMacroLoss:
    def test_first_phrase_costs_zero(self, seed_stats):
        candidate = Candidate.from_template(make_template([(0, "maj")] * 4))
        assert macro_loss(None, candidate, seed_stats) == 0.0

    def test_unique_junction_costs_one(self):
        prev = Candidate.from_template(make_template([(0, "maj")] * 4, "prev"))
        cur = Candidate.from_template(make_template([(7, "maj")] * 4, "cur"))
        signature = window_signature(prev.last_bar() + cur.first_bar())
        stats = TransitionStats({signature: 1}, 8)
        assert macro_loss(prev, cur, stats) == pytest.approx(1.0, abs=1e-12)

    def test_seed_library_counts_match_direct_recount(self, seed_library, seed_stats):
        """Recompute one junction count by brute-force window enumeration."""
        prev = Candidate.from_template(seed_library.templates[0])
        cur = Candidate.from_template(seed_library.templates[1])
        window = prev.last_bar() + cur.first_bar()
        count = 0
        for template in seed_library:
            progression = template.progression
            for bar in range(progression.bars - 1):
                if progression.bar(bar) + progression.bar(bar + 1) == window:
                    count += 1
        assert seed_stats.count(prev.last_bar(), cur.first_bar()) == count


class TestGenerateCandidates:
    def test_three_four_bar_templates_make_nine_pairs(self):
        templates = tuple(
            make_template(
                [(i, "maj"), (5, "maj"), (7, "maj"), (i, "maj")], f"t{i}"
            )
            for i in (0, 2, 4)
        )
        library = Library(templates)
        candidates = generate_candidates(library, 8, Mode.MAJOR)
        pairs = [c for c in candidates if c.concatenated]
        plain = [c for c in candidates if not c.concatenated]
        assert len(pairs) == 9  # ordered pairs incl. self-pairs, by enumeration
        assert len(plain) == 0

    def test_single_eight_bar_template(self):
        library = Library((make_template([(0, "maj")] * 8, "t8"),))
        candidates = generate_candidates(library, 8, Mode.MAJOR)
        assert len(candidates) == 1
        assert not candidates[0].concatenated

    def test_filter_with_no_match_is_an_error(self, seed_library):
        with pytest.raises(ValueError, match="no candidates"):
            generate_candidates(
                seed_library, 4, Mode.MAJOR, frozenset({StyleLabel.DARK})
            )

    def test_filter_applies_to_both_pair_halves(self, seed_library):
        candidates = generate_candidates(
            seed_library, 8, Mode.MINOR, frozenset({StyleLabel.DARK})
        )
        for candidate in candidates:
            if candidate.concatenated:
                for part_id in candidate.ids:
                    assert seed_library.by_id(part_id).style is StyleLabel.DARK

    def test_rejects_unsupported_length(self, seed_library):
        with pytest.raises(ValueError, match="4 or 8"):
            generate_candidates(seed_library, 6, Mode.MAJOR)

    def test_candidates_sorted_by_ids(self, seed_library):
        candidates = generate_candidates(seed_library, 8, Mode.MAJOR)
        assert [c.ids for c in candidates] == sorted(c.ids for c in candidates)


class TestHarmonize:
    def test_single_candidate_degenerate_dp(self, micro_table):
        library = Library((make_template([(0, "maj"), (5, "maj"), (7, "maj"), (0, "maj")], "only"),))
        stats = TransitionStats.build(
            Library((library.templates[0], make_template([(0, "maj")] * 4, "pad")))
        )
        melody = single_phrase_melody([MelodyNote(0, 4, 60), MelodyNote(4, 4, 64)])
        config = HarmonizerConfig(alpha=0.3, beta=0.6)
        result = harmonize(melody, library, stats, config)
        choice = result.choices[0]
        assert choice.chosen.id_string == "only"
        expected = config.beta * (1 - choice.micro) + (1 - config.beta) * (1 - choice.meso)
        assert result.total_score == pytest.approx(expected, abs=1e-12)

    def test_small_instances_match_brute_force(self):
        rng = random.Random(123)
        for trial in range(20):
            mode = rng.choice(list(Mode))
            key = Key(rng.randrange(12), mode)
            library = random_library(rng, mode, four_bar=3, eight_bar=2)
            stats = TransitionStats.build(library)
            melody = random_melody(rng, [rng.choice((4, 8)) for _ in range(rng.randint(1, 3))], key)
            config = HarmonizerConfig(
                alpha=rng.random(), beta=rng.random(),
                micro_table=random_micro_table(rng),
            )
            result = harmonize(melody, library, stats, config)

            canon = canonical_key(mode)
            shift = result.canonical_shift
            candidates = [
                generate_candidates(library, bars, mode)
                for bars in result.phrase_template_bars
            ]
            expected, _, _ = brute_force_harmonization_score(
                melody, candidates, stats, config, canon, shift
            )
            assert result.total_score == pytest.approx(expected, abs=1e-9), f"trial {trial}"

    def test_transposition_invariance_single_shift(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        shifted = harmonize(demo_melody.transpose(3), seed_library, seed_stats)
        assert [c.identity for c in shifted.choices] == [c.identity for c in result.choices]
        assert shifted.total_score == result.total_score
        original_roots = [e.root for e in result.all_chords()]
        shifted_roots = [e.root for e in shifted.all_chords()]
        assert shifted_roots == [(r + 3) % 12 for r in original_roots]

    def test_beta_never_changes_micro_argmin_for_single_phrase(self, seed_library, seed_stats, micro_table):
        melody = single_phrase_melody(
            [MelodyNote(i * 4, 4, p) for i, p in enumerate((64, 67, 72, 69, 65, 64, 62, 60))],
            bars=4,
        )
        chosen_ids = set()
        for beta in (0.05, 0.3, 0.7, 1.0):
            config = HarmonizerConfig(alpha=0.1, beta=beta)
            result = harmonize(melody, seed_library, seed_stats, config)
            choice = result.choices[0]
            candidates = generate_candidates(seed_library, 4, Mode.MAJOR)
            micro_values = {
                c.id_string: micro_loss(
                    result.phrase_pitches[0], c, canonical_key(Mode.MAJOR), micro_table
                )
                for c in candidates
            }
            best = min(micro_values.values())
            assert micro_values[choice.chosen.id_string] == pytest.approx(best)
            chosen_ids.add(choice.chosen.id_string)
        assert len(chosen_ids) == 1  # deterministic across beta

    def test_style_filter_soundness(self, seed_library, seed_stats, minor_melody):
        config = HarmonizerConfig(style_filter=frozenset({StyleLabel.DARK}))
        result = harmonize(minor_melody, seed_library, seed_stats, config)
        for choice in result.choices:
            if not choice.chosen.concatenated:
                template = seed_library.by_id(choice.chosen.ids[0])
                assert template.style is StyleLabel.DARK

    def test_no_candidates_for_2_4_four_bar_phrase(self, seed_library, seed_stats):
        melody = AnnotatedMelody(
            (MelodyNote(0, 2, 69),),
            (Phrase("A", 4, 0),),
            Key(9, Mode.MINOR),
            (2, 4),
        )
        with pytest.raises(ValueError, match="no candidates"):
            harmonize(melody, seed_library, seed_stats)

    def test_2_4_eight_bar_phrase_uses_four_bar_templates(self, seed_library, seed_stats):
        notes = tuple(MelodyNote(i * 2, 2, p) for i, p in enumerate(
            (69, 72, 76, 74, 72, 71, 69, 68, 69, 72, 76, 74, 72, 71, 69, 69)
        ))
        melody = AnnotatedMelody(
            notes, (Phrase("A", 8, 0),), Key(9, Mode.MINOR), (2, 4)
        )
        result = harmonize(melody, seed_library, seed_stats)
        assert len(result.choices[0].chosen.progression) == 32

    def test_identity_matches_chosen_progression(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        canon = result.canonical_key
        for choice in result.choices:
            assert choice.identity == to_roman(choice.chosen.progression, canon)
            assert any(v.id_string == choice.chosen.id_string for v in choice.variants)

    def test_serialization_shape(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        payload = result.to_dict()
        assert payload["alpha"] == 0.1 and payload["beta"] == 0.5
        assert len(payload["phrases"]) == 3
        for entry in payload["phrases"]:
            assert set(entry) >= {
                "index", "label", "identity", "template_id", "style",
                "losses", "variants", "chords",
            }
            assert len(entry["chords"]) == 64


class TestSelectStyle:
    def test_same_style_is_identity(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        style = result.choices[0].chosen.style
        again = select_style(result, 0, style)
        assert again is result

    def test_swap_keeps_identity_changes_template(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        current = result.choices[1].chosen.style
        target = (
            StyleLabel.POP_STANDARD
            if current is not StyleLabel.POP_STANDARD
            else StyleLabel.POP_COMPLEX
        )
        swapped = select_style(result, 1, target)
        assert swapped.choices[1].identity == result.choices[1].identity
        assert swapped.choices[1].chosen.id_string != result.choices[1].chosen.id_string
        assert swapped.choices[1].chosen.style is target
        for i in (0, 2):
            assert swapped.choices[i].chosen.id_string == result.choices[i].chosen.id_string

    def test_absent_style_lists_available(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        with pytest.raises(ValueError, match="available styles"):
            select_style(result, 0, StyleLabel.DARK)

    def test_never_changes_roman_numerals(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        for style in result.choices[2].available_styles():
            swapped = select_style(result, 2, style)
            assert [c.identity for c in swapped.choices] == [
                c.identity for c in result.choices
            ]

    def test_total_score_recomputed_consistently(self, seed_library, seed_stats, demo_melody):
        result = harmonize(demo_melody, seed_library, seed_stats)
        style = next(
            s for s in result.choices[1].available_styles()
            if s is not result.choices[1].chosen.style
        )
        swapped = select_style(result, 1, style)
        back = select_style(swapped, 1, result.choices[1].chosen.style)
        assert back.total_score == pytest.approx(result.total_score, abs=1e-9)
