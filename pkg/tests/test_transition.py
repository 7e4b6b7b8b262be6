import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import frames_from, one_hot
from oracles import all_paths, random_frames, transition_bruteforce
from gesture_spotter.core import ScoreFrame
from gesture_spotter.transition import RESYNC_INTERVAL, TransitionEngine, WindowConfig, transition_prob_direct


def engine_outputs(scores, l, mode="separate"):
    eng = TransitionEngine(WindowConfig(l, background_mass=mode))
    return [eng.push(f) for f in frames_from(scores)]


class TestWindowConfig:
    @pytest.mark.parametrize("l", [0, 1, 3, 63, -2, 2.0])
    def test_rejects_odd_or_small(self, l):
        with pytest.raises(ValueError):
            WindowConfig(l)

    def test_default(self):
        assert WindowConfig().window_length == 64


class TestDirect:
    def test_perfect_transition(self):
        window = frames_from([one_hot(5), one_hot(5), one_hot(2), one_hot(2)])
        assert transition_prob_direct(window, 2, 5) == 1.0

    @pytest.mark.parametrize("g,s", [(0, 5), (4, 6), (2, 6)])
    def test_uniform(self, g, s):
        window = frames_from([(1 / 7,) * 7] * 64)
        assert transition_prob_direct(window, g, s) == pytest.approx(1 / 7, abs=1e-12)

    def test_random_l6_matches_bruteforce(self, rng):
        scores = random_frames(rng, 6)
        window = frames_from(scores)
        for s in (5, 6):
            for g in range(5):
                assert transition_prob_direct(window, g, s) == pytest.approx(transition_bruteforce(scores, 5, 6, g, s), abs=1e-15)

    def test_role_errors(self):
        window = frames_from([one_hot(5)] * 4)
        with pytest.raises(ValueError):
            transition_prob_direct(window, 5, 5)
        with pytest.raises(ValueError):
            transition_prob_direct(window, 0, 3)
        with pytest.raises(ValueError):
            transition_prob_direct(window, 0, 5, window_length=6)


class TestPush:
    def test_warm_up(self):
        eng = TransitionEngine(WindowConfig(8))
        outs = [eng.push(f) for f in frames_from([one_hot(5)] * 8)]
        assert outs[:7] == [None] * 7
        assert outs[7] is not None and outs[7].t == 7

    def test_single_gesture_frame_adds_one_over_l(self):
        l = 64
        scores = [one_hot(5)] * l + [one_hot(3)]
        outs = engine_outputs(scores, l)
        before, after = outs[l - 1], outs[l]
        assert before.prob(5, 3) == 0.5
        assert after.prob(5, 3) - before.prob(5, 3) == pytest.approx(1 / l, abs=1e-15)
        # independent check of the absolute value
        assert after.prob(5, 3) == pytest.approx(transition_bruteforce(np.array(scores), l, l, 3, 5), abs=1e-15)

    def test_exhaustive_equivalence(self, rng):
        scores = random_frames(rng, 200)
        for l in (4, 6, 64):
            for t, m in enumerate(engine_outputs(scores, l)):
                if t < l - 1:
                    assert m is None
                    continue
                window = frames_from(scores[t - l + 1 : t + 1])
                direct = [transition_prob_direct(window, g, s) for s in (5, 6) for g in range(5)]
                got = [p for row in m.probs for p in row]
                assert np.max(np.abs(np.subtract(got, direct))) <= 1e-9
                assert m.peak == pytest.approx(max(all_paths(scores, t, l)), abs=1e-9)

    def test_combined_background_mass(self, rng):
        scores = random_frames(rng, 40)
        outs = engine_outputs(scores, 8, "combined")
        for t in range(7, 40):
            window = frames_from(scores[t - 7 : t + 1])
            for g in range(5):
                want = transition_prob_direct(window, g, 5, background_mass="combined")
                assert outs[t].prob(5, g) == pytest.approx(want, abs=1e-12)
                assert outs[t].prob(6, g) == outs[t].prob(5, g)

    def test_out_of_order_rejected(self):
        eng = TransitionEngine(WindowConfig(4))
        eng.push(ScoreFrame(0, one_hot(5)))
        with pytest.raises(ValueError, match="expected index 1"):
            eng.push(ScoreFrame(2, one_hot(5)))

    def test_long_stream_drift_bounded(self, rng):
        scores = random_frames(rng, 3 * RESYNC_INTERVAL + 100)
        l = 64
        outs = engine_outputs(scores, l)
        for t in range(len(scores) - 50, len(scores)):
            assert max(abs(a - b) for a, b in zip([p for r in outs[t].probs for p in r], all_paths(scores, t, l))) <= 1e-9


class TestReset:
    def test_reset_restarts_warm_up(self):
        eng = TransitionEngine(WindowConfig(4))
        for f in frames_from([one_hot(5)] * 10):
            eng.push(f)
        eng.reset()
        eng.reset()
        outs = [eng.push(f) for f in frames_from([one_hot(5)] * 3)]
        assert outs == [None] * 3

    def test_replay_equals_fresh(self, rng):
        scores = random_frames(rng, 50)
        used = TransitionEngine(WindowConfig(8))
        for f in frames_from(random_frames(rng, 30)):
            used.push(f)
        used.reset()
        fresh = TransitionEngine(WindowConfig(8))
        for f in frames_from(scores):
            a, b = used.push(f), fresh.push(f)
            assert (a is None) == (b is None)
            if a is not None:
                assert a.probs == b.probs


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.lists(st.floats(0.0, 1.0), min_size=7, max_size=7), min_size=4, max_size=40),
    st.sampled_from([2, 4, 6]),
)
def test_bounds_and_equivalence_property(rows, l):
    scores = np.array(rows) + 1e-3
    scores = scores / scores.sum(axis=1, keepdims=True)
    for t, m in enumerate(engine_outputs(scores, l)):
        if m is None:
            continue
        probs = [p for r in m.probs for p in r]
        assert all(-1e-12 <= p <= 1 + 1e-12 for p in probs)
        assert max(abs(a - b) for a, b in zip(probs, all_paths(scores, t, l))) <= 1e-9


@given(st.integers(0, 4), st.integers(0, 63))
def test_monotone_response(gesture, pos):
    """Appending a one-hot gesture frame never gives a lower p than appending None."""
    l = 64
    prefix = [one_hot(5)] * (l + pos)
    a = engine_outputs(prefix + [one_hot(gesture)], l)[-1]
    b = engine_outputs(prefix + [one_hot(5)], l)[-1]
    for source in (5, 6):
        assert a.prob(source, gesture) >= b.prob(source, gesture)
