"""Reference implementations used only by the tests.

Each one is deliberately naive and shares no code with the library path it
checks.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def transition_bruteforce(scores: np.ndarray, t: int, l: int, gesture: int, source: int) -> float:
    """Direct evaluation of the windowed formula with explicit frame indices."""
    total = 0.0
    for n in range(t - l + 1, t - l // 2 + 1):
        total += scores[n][source]
    for n in range(t - l // 2 + 1, t + 1):
        total += scores[n][gesture]
    return total / l


def all_paths(scores: np.ndarray, t: int, l: int) -> list[float]:
    return [transition_bruteforce(scores, t, l, g, s) for s in (5, 6) for g in range(5)]


def simulate_algorithm(scores: np.ndarray, l: int, th_s: float, th_e: float, flush: bool = True) -> list[tuple[int, int, int]]:
    """Literal start/record/stop loop recomputing every path from scratch.

    Returns (class, start, end) triples.
    """
    out = []
    active = False
    rec: list[np.ndarray] = []
    start = -1
    last = -1
    for t in range(l - 1, len(scores)):
        paths = all_paths(scores, t, l)
        last = t
        if not active:
            if any(p > th_s for p in paths):
                active, start, rec = True, t, [scores[t]]
            continue
        rec.append(scores[t])
        if all(p < th_e for p in paths):
            mean = np.mean(np.array(rec), axis=0)
            out.append((int(np.argmax(mean[:5])), start, t))
            active, rec = False, []
    if active and flush and last > start:
        mean = np.mean(np.array(rec), axis=0)
        out.append((int(np.argmax(mean[:5])), start, last))
    return out


def levenshtein_recursive(a: tuple, b: tuple) -> int:
    """Textbook recursion with memoisation over suffix pairs."""

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        if a[i] == b[j]:
            return d(i + 1, j + 1)
        return 1 + min(d(i + 1, j), d(i, j + 1), d(i + 1, j + 1))

    return d(0, 0)


def levenshtein_matrix(a, b) -> int:
    """Full quadratic table, numpy flavoured."""
    m = np.zeros((len(a) + 1, len(b) + 1), dtype=int)
    m[:, 0] = np.arange(len(a) + 1)
    m[0, :] = np.arange(len(b) + 1)
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            m[i, j] = min(m[i - 1, j] + 1, m[i, j - 1] + 1, m[i - 1, j - 1] + (a[i - 1] != b[j - 1]))
    return int(m[-1, -1])


def weighted_sum(vectors: list[tuple[float, ...]], weights: list[float]) -> list[float]:
    total = sum(weights)
    return [sum(w / total * v[k] for v, w in zip(vectors, weights)) for k in range(len(vectors[0]))]


def random_frames(rng: np.random.Generator, n: int) -> np.ndarray:
    x = rng.random((n, 7)) ** 3
    return x / x.sum(axis=1, keepdims=True)
