import io
import time

import pytest

from conftest import make_stream
from gesture_spotter.activation import ActivationConfig, run_stream
from gesture_spotter.sources import (
    TextStreamSource,
    ThrottledSource,
    detect_source,
    iter_source,
    replay_source,
    synth_source,
    throttled_source,
)
from gesture_spotter.streamio import FormatError, dumps_score_stream
from gesture_spotter.synth import SynthConfig, generate_corpus, generate_stream

CFG = ActivationConfig(0.6, 0.5)


@pytest.fixture(scope="module")
def corpus_stream():
    return generate_corpus(1, 10, 2000, SynthConfig(seed=31, noise_level=0.1))[0]


def test_replay_empty():
    src = replay_source(make_stream([]))
    assert src.next() is None and src.next() is None


def test_replay_yields_all_then_stays_empty(corpus_stream):
    stream, _ = corpus_stream
    src = replay_source(stream)
    frames = list(iter_source(src))
    assert frames == list(stream.frames)
    assert src.next() is None


def test_detection_equivalence(corpus_stream):
    stream, _ = corpus_stream
    assert detect_source(replay_source(stream), CFG) == run_stream(stream, CFG)


def test_text_pipe_source(corpus_stream):
    stream, _ = corpus_stream
    src = TextStreamSource(io.StringIO(dumps_score_stream(stream)))
    assert src.header() == stream.header
    assert detect_source(src, CFG) == run_stream(stream, CFG)


def test_text_source_rejects_invalid_rows():
    text = dumps_score_stream(make_stream([5, 5])).replace("1,0.0,0.0,0.0,0.0,0.0,1.0,0.0", "1,0.0,0.0,0.0,0.0,0.0,2.0,0.0")
    src = TextStreamSource(io.StringIO(text))
    src.next()
    with pytest.raises(FormatError):
        src.next()


def test_synth_source(corpus_stream):
    stream, ann = corpus_stream
    cfg = SynthConfig(seed=1, noise_level=0.2)
    src = synth_source(ann, stream.header.hand, len(stream), cfg)
    assert src.header().total_frames == len(stream)
    assert list(iter_source(src)) == list(generate_stream(ann, stream.header.hand, len(stream), cfg).frames)


class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now

    def sleep(self, dt):
        self.now += dt


def test_throttle_values_and_order_unchanged(corpus_stream):
    stream, _ = corpus_stream
    clock = FakeClock()
    src = ThrottledSource(replay_source(stream), 30.0, clock=clock, sleep=clock.sleep)
    assert list(iter_source(src)) == list(stream.frames)
    assert clock.now >= (len(stream) - 1) / 30.0 - 1e-9


def test_throttle_wall_clock():
    stream = make_stream([5] * 10)
    src = throttled_source(replay_source(stream), 200.0)
    t0 = time.monotonic()
    n = len(list(iter_source(src)))
    elapsed = time.monotonic() - t0
    assert n == 10
    assert elapsed >= (n - 1) / 200.0 - 1e-3


def test_throttle_rate_validation():
    with pytest.raises(ValueError):
        ThrottledSource(replay_source(make_stream([])), 0)
