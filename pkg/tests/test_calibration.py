import pytest

from gesture_spotter.activation import ActivationConfig, run_stream
from gesture_spotter.calibration import CalibrationGrid, calibrate
from gesture_spotter.evaluation import evaluate_run
from gesture_spotter.synth import SynthConfig, generate_corpus


@pytest.fixture(scope="module")
def clean_corpus():
    return generate_corpus(3, 20, 4000, SynthConfig(seed=21))


@pytest.fixture(scope="module")
def noisy_corpus():
    return generate_corpus(3, 20, 4000, SynthConfig(seed=22, noise_level=0.3))


def test_default_grid():
    g = CalibrationGrid()
    assert g.th_s_values[0] == 0.55 and g.th_s_values[-1] == 0.95 and len(g.th_s_values) == 9
    assert g.th_e_values[0] == 0.30
    assert all(e <= s for s, e in g.pairs())
    assert (0.55, 0.55) in g.pairs() and (0.55, 0.6) not in g.pairs()


def test_grid_validation():
    with pytest.raises(ValueError):
        CalibrationGrid((), (0.5,))
    with pytest.raises(ValueError):
        CalibrationGrid((0.6, 0.5), (0.5,))
    with pytest.raises(ValueError):
        CalibrationGrid((1.0,), (0.5,))


def test_zero_noise_plateau(clean_corpus):
    res = calibrate(clean_corpus)
    perfect = [r for r in res.table if r.mean_accuracy == 1.0]
    assert len(perfect) >= 5
    assert res.best.mean_accuracy == 1.0
    # ties go to the largest th_s, then the largest th_e
    assert (res.th_s, res.th_e) == max((r.th_s, r.th_e) for r in perfect)


def test_single_pair(clean_corpus):
    res = calibrate(clean_corpus, CalibrationGrid((0.7,), (0.4,)))
    assert (res.th_s, res.th_e) == (0.7, 0.4) and len(res.table) == 1


def test_best_is_table_max_and_matches_direct_run(noisy_corpus):
    res = calibrate(noisy_corpus)
    assert len(res.table) == len(CalibrationGrid().pairs())
    assert all(res.best.mean_accuracy >= r.mean_accuracy for r in res.table)
    cfg = ActivationConfig(res.th_s, res.th_e)
    accs = [evaluate_run(run_stream(s, cfg), a, s.header.hand).accuracy for s, a in noisy_corpus]
    assert sum(accs) / len(accs) == pytest.approx(res.best.mean_accuracy, abs=1e-12)


def test_deterministic_and_parallel(noisy_corpus):
    grid = CalibrationGrid((0.55, 0.6, 0.65), (0.4, 0.5))
    a = calibrate(noisy_corpus, grid)
    b = calibrate(noisy_corpus, grid, workers=2)
    assert a.table == b.table and (a.th_s, a.th_e) == (b.th_s, b.th_e)


def test_window_length_search(clean_corpus):
    res = calibrate(clean_corpus, CalibrationGrid((0.6,), (0.5,), window_lengths=(32, 64)))
    assert {r.window_length for r in res.table} == {32, 64}


def test_errors(clean_corpus):
    with pytest.raises(ValueError):
        calibrate([])
    with pytest.raises(ValueError, match="feasible"):
        calibrate(clean_corpus, CalibrationGrid((0.5,), (0.6,)))
