"""Best-path dynamic program shared by the harmonizer and the arranger.

Maximizes the sum of per-stage candidate scores plus pairwise transition
scores between consecutive stages. Ties always resolve to the lowest
candidate index, so callers get deterministic paths by pre-sorting their
candidates.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


def best_path(
    stage_scores: Sequence[Sequence[float]],
    transition_scores: Sequence[np.ndarray],
) -> tuple[list[int], float]:
    """Return (chosen index per stage, total score) for the optimal path.

    ``stage_scores[i]`` holds the score of each candidate at stage ``i``;
    ``transition_scores[i]`` is a matrix indexed ``[prev_candidate,
    cur_candidate]`` added between stages ``i`` and ``i + 1``.
    """
    if not stage_scores:
        raise ValueError("best_path needs at least one stage")
    if len(transition_scores) != len(stage_scores) - 1:
        raise ValueError(
            f"expected {len(stage_scores) - 1} transition matrices, "
            f"got {len(transition_scores)}"
        )

    stages = [np.asarray(s, dtype=float) for s in stage_scores]
    for i, s in enumerate(stages):
        if s.ndim != 1 or s.size == 0:
            raise ValueError(f"stage {i} must have at least one candidate")

    running = stages[0].copy()
    backpointers: list[np.ndarray] = []
    for i, trans in enumerate(transition_scores):
        trans = np.asarray(trans, dtype=float)
        if trans.shape != (stages[i].size, stages[i + 1].size):
            raise ValueError(
                f"transition {i} has shape {trans.shape}, expected "
                f"{(stages[i].size, stages[i + 1].size)}"
            )
        reach = running[:, None] + trans
        # np.argmax returns the first (lowest-index) maximum.
        best_prev = np.argmax(reach, axis=0)
        backpointers.append(best_prev)
        running = stages[i + 1] + reach[best_prev, np.arange(stages[i + 1].size)]

    last = int(np.argmax(running))
    total = float(running[last])
    path = [last]
    for pointers in reversed(backpointers):
        path.append(int(pointers[path[-1]]))
    path.reverse()
    return path, total
