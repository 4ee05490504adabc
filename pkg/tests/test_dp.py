from __future__ import annotations

import random

import numpy as np
import pytest

from cadenza.dp import best_path

from support import brute_force_best_path, unrolled_path_score


def random_instance(rng: random.Random, max_stages=4, max_candidates=6):
    stages = rng.randint(1, max_stages)
    sizes = [rng.randint(1, max_candidates) for _ in range(stages)]
    stage_scores = [[rng.uniform(-2, 2) for _ in range(n)] for n in sizes]
    transitions = [
        np.array([[rng.uniform(-1, 1) for _ in range(sizes[i + 1])]
                  for _ in range(sizes[i])])
        for i in range(stages - 1)
    ]
    return stage_scores, transitions


def test_single_stage_picks_maximum():
    path, score = best_path([[0.2, 0.9, 0.5]], [])
    assert path == [1]
    assert score == pytest.approx(0.9)


def test_ties_resolve_to_lowest_index():
    path, _ = best_path([[1.0, 1.0], [1.0, 1.0]], [np.zeros((2, 2))])
    assert path == [0, 0]


def test_transition_dominates_when_stage_scores_tie():
    transitions = [np.array([[0.0, 1.0], [0.0, 0.0]])]
    path, score = best_path([[0.0, 0.0], [0.0, 0.0]], transitions)
    assert path == [0, 1]
    assert score == pytest.approx(1.0)


def test_matches_brute_force_on_random_instances():
    rng = random.Random(20240831)
    for _ in range(300):
        stage_scores, transitions = random_instance(rng)
        path, score = best_path(stage_scores, transitions)
        _, expected = brute_force_best_path(stage_scores, transitions)
        assert score == pytest.approx(expected, abs=1e-9)
        assert unrolled_path_score(path, stage_scores, transitions) == pytest.approx(
            expected, abs=1e-9
        )


def test_rejects_empty_stage():
    with pytest.raises(ValueError):
        best_path([], [])
    with pytest.raises(ValueError):
        best_path([[1.0], []], [np.zeros((1, 0))])


def test_rejects_mismatched_transition_shape():
    with pytest.raises(ValueError, match="shape"):
        best_path([[1.0], [1.0]], [np.zeros((2, 1))])


def test_rejects_wrong_transition_count():
    with pytest.raises(ValueError, match="transition"):
        best_path([[1.0], [1.0]], [])
