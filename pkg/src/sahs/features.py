"""Event-aligned airflow segments and the 17 per-subject features.

Feature order (amplitudes are in the signal's physical units)::

    f1  n_apnea            f10 min_duration_s
    f2  n_hypopnea         f11 mean_duration_s
    f3  n_events           f12 std_duration_s
    f4  total_duration_s   f13 var_duration_s2
    f5  mean_of_max_amp    f14 wmean_max_amp
    f6  mean_of_min_amp    f15 wmean_min_amp
    f7  mean_of_mean_amp   f16 wmean_mean_amp
    f8  mean_of_std_amp    f17 wmean_std_amp
    f9  max_duration_s

f14-f17 weight each event's statistic by its duration.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .annotations import EventKind, ScoredEvent
from .dsp import FilterSpec, design_lowpass, filtfilt
from .edf import SignalRecord

FEATURE_NAMES = (
    "n_apnea",
    "n_hypopnea",
    "n_events",
    "total_duration_s",
    "mean_of_max_amp",
    "mean_of_min_amp",
    "mean_of_mean_amp",
    "mean_of_std_amp",
    "max_duration_s",
    "min_duration_s",
    "mean_duration_s",
    "std_duration_s",
    "var_duration_s2",
    "wmean_max_amp",
    "wmean_min_amp",
    "wmean_mean_amp",
    "wmean_std_amp",
)
NUM_FEATURES = len(FEATURE_NAMES)
CSV_COLUMNS = ("subject_id", *(f"f{i}" for i in range(1, NUM_FEATURES + 1)), "ahi", "label")


@dataclass(frozen=True)
class Segment:
    kind: EventKind
    duration_s: float
    samples: np.ndarray


@dataclass
class SegmentSet:
    segments: list[Segment]
    dropped: int = 0
    clipped: int = 0


@dataclass(frozen=True)
class FeatureVector:
    n_apnea: float
    n_hypopnea: float
    n_events: float
    total_duration_s: float
    mean_of_max_amp: float
    mean_of_min_amp: float
    mean_of_mean_amp: float
    mean_of_std_amp: float
    max_duration_s: float
    min_duration_s: float
    mean_duration_s: float
    std_duration_s: float
    var_duration_s2: float
    wmean_max_amp: float
    wmean_min_amp: float
    wmean_mean_amp: float
    wmean_std_amp: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "FeatureVector":
        values = [float(v) for v in values]
        if len(values) != NUM_FEATURES:
            raise ValueError(f"expected {NUM_FEATURES} values, got {len(values)}")
        return cls(*values)

    @classmethod
    def zeros(cls) -> "FeatureVector":
        return cls(*([0.0] * NUM_FEATURES))


def extract_segments(signal: SignalRecord, events: Iterable[ScoredEvent]) -> SegmentSet:
    """Cut ``[start, start + duration)`` windows out of ``signal``.

    Events running past the end are clipped (their duration shortened to the
    recording end); events with no samples inside the recording are dropped.
    """
    fs = signal.sampling_rate_hz
    x = np.asarray(signal.samples)
    n = len(x)
    end_s = n / fs
    out = SegmentSet([])
    for ev in events:
        lo = math.floor(ev.start_s * fs)
        hi = math.floor((ev.start_s + ev.duration_s) * fs)
        duration = ev.duration_s
        clipped = hi > n
        if clipped:
            hi = n
            duration = end_s - ev.start_s
        if lo >= hi:
            out.dropped += 1
            continue
        out.clipped += clipped
        out.segments.append(Segment(ev.kind, duration, x[lo:hi]))
    return out


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _pstd(values: Sequence[float], mean: float) -> float:
    return math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))


def _wmean(values: Sequence[float], weights: Sequence[float], total: float) -> float:
    return math.fsum(w * v for w, v in zip(weights, values)) / total


def compute_features(segments: Sequence[Segment]) -> FeatureVector:
    """All 17 features; an empty segment list gives the zero vector.

    Cross-segment sums use :func:`math.fsum`, which is exactly rounded, so the
    result does not depend on segment order.
    """
    if not segments:
        return FeatureVector.zeros()

    n_apnea = sum(s.kind is EventKind.APNEA for s in segments)
    n_hyp = sum(s.kind is EventKind.HYPOPNEA for s in segments)
    durations = [float(s.duration_s) for s in segments]
    maxima, minima, means, stds = [], [], [], []
    for s in segments:
        x = np.asarray(s.samples, dtype=np.float64)
        mu = float(x.mean())
        maxima.append(float(x.max()))
        minima.append(float(x.min()))
        means.append(mu)
        stds.append(float(np.sqrt(np.mean((x - mu) ** 2))))

    total = math.fsum(durations)
    mean_dur = total / len(durations)
    std_dur = _pstd(durations, mean_dur)
    return FeatureVector(
        n_apnea=float(n_apnea),
        n_hypopnea=float(n_hyp),
        n_events=float(n_apnea + n_hyp),
        total_duration_s=total,
        mean_of_max_amp=_mean(maxima),
        mean_of_min_amp=_mean(minima),
        mean_of_mean_amp=_mean(means),
        mean_of_std_amp=_mean(stds),
        max_duration_s=max(durations),
        min_duration_s=min(durations),
        mean_duration_s=mean_dur,
        std_duration_s=std_dur,
        var_duration_s2=std_dur * std_dur,
        wmean_max_amp=_wmean(maxima, durations, total),
        wmean_min_amp=_wmean(minima, durations, total),
        wmean_mean_amp=_wmean(means, durations, total),
        wmean_std_amp=_wmean(stds, durations, total),
    )


def subject_features(
    signal: SignalRecord,
    events: Iterable[ScoredEvent],
    *,
    cutoff_hz: float = 3.0,
    order: int = 4,
) -> tuple[FeatureVector, SegmentSet]:
    """Low-pass the whole night once, then cut the event segments and reduce them."""
    spec = FilterSpec(cutoff_hz=cutoff_hz, sampling_rate_hz=signal.sampling_rate_hz, order=order)
    filtered = SignalRecord(
        label=signal.label,
        sampling_rate_hz=signal.sampling_rate_hz,
        physical_dimension=signal.physical_dimension,
        samples=filtfilt(design_lowpass(spec), signal.samples),
    )
    segs = extract_segments(filtered, events)
    return compute_features(segs.segments), segs


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def write_feature_csv(path, rows: Iterable[tuple[str, FeatureVector, float, str]]) -> None:
    """Rows of ``(subject_id, features, ahi, label)``, written sorted by subject id."""
    rows = sorted(rows, key=lambda r: r[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for subject_id, fv, ahi, label in rows:
            writer.writerow([subject_id, *(_fmt(v) for v in fv.to_array()), _fmt(ahi), label])


def read_feature_csv(path) -> list[tuple[str, FeatureVector, float, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [
            (
                row["subject_id"],
                FeatureVector.from_array(row[f"f{i}"] for i in range(1, NUM_FEATURES + 1)),
                float(row["ahi"]),
                row["label"],
            )
            for row in reader
        ]
