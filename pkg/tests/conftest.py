import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gesture_spotter.core import Hand, ScoreFrame, StreamHeader  # noqa: E402
from gesture_spotter.streamio import ScoreStreamFile  # noqa: E402


def one_hot(k: int) -> tuple[float, ...]:
    v = [0.0] * 7
    v[k] = 1.0
    return tuple(v)


def make_stream(classes, hand=Hand.LEFT) -> ScoreStreamFile:
    """Stream whose frame k is one-hot on classes[k]."""
    return ScoreStreamFile.from_scores(StreamHeader(hand), [one_hot(c) for c in classes])


def frames_from(scores) -> list[ScoreFrame]:
    return [ScoreFrame(i, tuple(float(x) for x in row)) for i, row in enumerate(scores)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one line per acceptance criterion; shown in the terminal summary."""

    def record(name: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
