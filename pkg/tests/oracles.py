"""Independent Monte Carlo oracles for the analytic chains.

These re-implement the bundle-level correction rules directly from their
verbal statement, with numpy Bernoulli draws instead of polynomial
algebra, so the chain construction and the oracle share no code paths.

Rules (81-bit corrector, one step):
  * the propagated state is a 3x3 grid of marks, identical in all squares;
    line k of the grid carries m_k marks;
  * the line-k gate of square l fails with probability f(m_k), where
    f(0) = 3 e^2 - 2 e^3, f(1) = 2 e - e^2, f(m >= 2) = 1, independently
    over the nine gates;
  * the per-square failure counts become the line counts of the next grid;
  * two or more squares with two or more failures is a logical error.
"""

from __future__ import annotations

import numpy as np

PROFILES = ((0, 0, 0), (1, 0, 0), (1, 1, 0), (1, 1, 1), (2, 0, 0), (3, 0, 0),
            (2, 1, 0), (3, 1, 0), (2, 1, 1), (3, 1, 1))
CLASS_OF = (0, 1, 2, 3, 4, 4, 5, 5, 6, 6)
LOGICAL = 7
_PROFILE_TO_CLASS = {q: c for q, c in zip(PROFILES, CLASS_OF)}


def fail_prob(m: int, eps: float) -> float:
    """Gate failure probability given m propagated errors on its line."""
    if m == 0:
        return 3.0 * eps ** 2 - 2.0 * eps ** 3
    if m == 1:
        return 2.0 * eps - eps ** 2
    return 1.0


def _classify_counts(counts: np.ndarray) -> np.ndarray:
    """Map per-square failure counts (N, 3) to class 0..6 or LOGICAL."""
    heavy = (counts >= 2).sum(axis=1)
    out = np.full(len(counts), LOGICAL, dtype=np.int64)
    alive = heavy < 2
    srt = -np.sort(-counts[alive], axis=1)
    lut = np.full((4, 4, 4), -1, dtype=np.int64)
    for q, c in _PROFILE_TO_CLASS.items():
        lut[q] = c
    cls = lut[srt[:, 0], srt[:, 1], srt[:, 2]]
    if (cls < 0).any():
        raise RuntimeError("surviving pattern fit no class")
    out[alive] = cls
    return out


def step_distribution(profile: tuple[int, int, int], eps: float, steps: int,
                      rng: np.random.Generator,
                      chunk: int = 1_000_000) -> np.ndarray:
    """Empirical one-step outcome frequencies from a given line profile.

    Returns length-8 frequencies over (class 0..6, logical).
    """
    probs = np.array([fail_prob(m, eps) for m in profile])
    counts = np.zeros(8, dtype=np.int64)
    left = steps
    while left > 0:
        n = min(chunk, left)
        fails = rng.random((n, 3, 3)) < probs[None, None, :]
        counts += np.bincount(_classify_counts(fails.sum(axis=2)), minlength=8)
        left -= n
    return counts / steps


def trajectory_mark_fraction(eps: float, steps: int,
                             rng: np.random.Generator,
                             batches: int = 100) -> tuple[float, float]:
    """Stationary erroneous-bundle fraction of the grid process.

    Runs ``batches`` independent grid chains in lockstep; a chain that hits
    a logical failure restarts from the clear grid (a negligible-bias
    stand-in for survival conditioning at small eps).  Returns the mean
    marks/9 over all post-warmup steps and its batch-means standard error.
    """
    state = np.zeros((batches, 3), dtype=np.int64)  # per-line mark counts
    warm = max(50, steps // 100)
    sums = np.zeros(batches)
    tallied = 0
    for t in range(warm + steps):
        p0 = 3.0 * eps ** 2 - 2.0 * eps ** 3
        p1 = 2.0 * eps - eps ** 2
        probs = np.where(state == 0, p0, np.where(state == 1, p1, 1.0))
        fails = rng.random((batches, 3, 3)) < probs[:, None, :]
        counts = fails.sum(axis=2)
        logical = (counts >= 2).sum(axis=1) >= 2
        counts[logical] = 0
        state = counts
        if t >= warm:
            sums += state.sum(axis=1) / 9.0
            tallied += 1
    means = sums / tallied
    return float(means.mean()), float(means.std(ddof=1) / np.sqrt(batches))
