import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import brute_force_features, random_events, reference_lowpass
from sahs.annotations import EventKind, ScoredEvent
from sahs.edf import SignalRecord
from sahs.features import (CSV_COLUMNS, FEATURE_NAMES, FeatureVector, Segment, compute_features,
                           extract_segments, read_feature_csv, subject_features, write_feature_csv)

A, H = EventKind.APNEA, EventKind.HYPOPNEA


def _record(x, fs=32.0):
    return SignalRecord("Airflow", fs, "a.u.", np.asarray(x, dtype=float))


def test_names_and_columns():
    assert len(FEATURE_NAMES) == 17
    assert CSV_COLUMNS[0] == "subject_id" and CSV_COLUMNS[-2:] == ("ahi", "label")


def test_hand_example_population_std():
    fv = compute_features([Segment(A, 10.0, np.array([1.0, 2.0, 3.0]))])
    assert fv.mean_of_std_amp == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert fv.std_duration_s == 0.0 and fv.n_events == 1


def test_hand_example_weighted_means():
    segs = [Segment(A, 1.0, np.array([0.0, 1.0])), Segment(H, 3.0, np.array([0.0, 2.0]))]
    fv = compute_features(segs)
    assert fv.mean_of_max_amp == 1.5
    assert fv.wmean_max_amp == 1.75
    assert (fv.n_apnea, fv.n_hypopnea, fv.n_events) == (1, 1, 2)
    assert fv.total_duration_s == 4.0 and fv.mean_duration_s == 2.0
    assert fv.std_duration_s == 1.0 and fv.var_duration_s2 == 1.0


def test_no_events_gives_zero_vector():
    assert compute_features([]) == FeatureVector.zeros()


def test_segment_indexing_and_clipping():
    x = np.arange(64.0)  # 2 s at 32 Hz
    events = [ScoredEvent(A, 0.5, 0.25), ScoredEvent(H, 1.9, 5.0), ScoredEvent(A, 3.0, 1.0)]
    segs = extract_segments(_record(x), events)
    assert segs.dropped == 1 and segs.clipped == 1
    np.testing.assert_array_equal(segs.segments[0].samples, np.arange(16.0, 24.0))
    assert segs.segments[1].samples.tolist() == [60.0, 61.0, 62.0, 63.0]
    assert segs.segments[1].duration_s == pytest.approx(0.1)


def test_matches_brute_force_oracle():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = 32 * 600
        x = np.cumsum(rng.normal(size=n)) * 0.01 + np.sin(np.arange(n) / 20)
        events = random_events(rng, n / 32, int(rng.integers(0, 30)))
        fv, _ = subject_features(_record(x), events)
        expected = brute_force_features(reference_lowpass(x), 32.0, events)
        np.testing.assert_allclose(fv.to_array(), expected, rtol=1e-9, atol=1e-12)


segments_strategy = st.lists(
    st.tuples(st.sampled_from([A, H]), st.floats(0.5, 120.0),
              st.lists(st.floats(-5, 5), min_size=1, max_size=20)),
    min_size=1, max_size=15)


@settings(max_examples=60, deadline=None)
@given(segments_strategy, st.randoms(use_true_random=False))
def test_invariants(raw, rnd):
    segs = [Segment(k, d, np.array(v)) for k, d, v in raw]
    fv = compute_features(segs)
    assert fv.n_events == fv.n_apnea + fv.n_hypopnea
    assert fv.var_duration_s2 == fv.std_duration_s * fv.std_duration_s
    assert fv.min_duration_s <= fv.mean_duration_s * (1 + 1e-12) and fv.mean_duration_s <= fv.max_duration_s * (1 + 1e-12)
    assert fv.mean_of_min_amp <= fv.mean_of_mean_amp + 1e-9 <= fv.mean_of_max_amp + 2e-9
    shuffled = list(segs)
    rnd.shuffle(shuffled)
    assert compute_features(shuffled) == fv


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rows = [(f"S{i}", FeatureVector.from_array(rng.normal(size=17)), float(rng.uniform(0, 50)), "Mild")
            for i in (3, 1, 2)]
    path = tmp_path / "f.csv"
    write_feature_csv(path, rows)
    back = read_feature_csv(path)
    assert [r[0] for r in back] == ["S1", "S2", "S3"]
    for (sid, fv, ahi, label), orig in zip(back, sorted(rows)):
        np.testing.assert_allclose(fv.to_array(), orig[1].to_array(), rtol=1e-11)
        assert ahi == pytest.approx(orig[2], rel=1e-11) and label == "Mild"
