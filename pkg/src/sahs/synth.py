"""Synthetic overnight airflow cohorts with known AHI.

Breathing is an amplitude- and frequency-jittered sinusoid near 0.25 Hz plus
low-passed noise. Each scored event scales the breathing amplitude down
(apnea to at most 10%, hypopnea to 30-70%) for its duration. Events never
overlap and always lie entirely inside the recording.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotations import EventKind, ScoredEvent, events_to_xml
from .dsp import lowpass
from .edf import SignalHeader, SignalRecord, make_header, write_edf
from .errors import EventPlacementOverflow, IoFailure
from .eval.labels import SeverityLabel

# Per-class AHI (events/hour) mean and standard deviation of the reference cohort.
AHI_MEAN = (1.82, 8.71, 21.50, 41.20)
AHI_STD = (1.40, 2.97, 3.95, 9.90)
_BANDS = ((0.0, 5.0), (5.0, 15.0), (15.0, 30.0), (30.0, math.inf))

MANIFEST_COLUMNS = ("subject_id", "true_ahi", "class")


@dataclass(frozen=True)
class CohortSpec:
    counts: tuple[int, int, int, int] = (185, 190, 85, 60)
    ahi_mean: tuple[float, ...] = AHI_MEAN
    ahi_std: tuple[float, ...] = AHI_STD
    hours: float = 8.0
    sampling_rate_hz: int = 32
    event_duration_s: tuple[float, float] = (10.0, 60.0)
    apnea_fraction: float = 0.4
    seed: int = 0
    channel_label: str = "Airflow"

    def __post_init__(self):
        if len(self.counts) != 4 or any(c < 0 for c in self.counts) or sum(self.counts) == 0:
            raise ValueError("counts must be four non-negative integers, not all zero")
        lo, hi = self.event_duration_s
        if not 0 < lo <= hi:
            raise ValueError("event duration range must satisfy 0 < min <= max")
        if self.hours <= 0 or self.sampling_rate_hz <= 0:
            raise ValueError("hours and sampling rate must be positive")
        if not (self.hours * 3600).is_integer():
            raise ValueError("recording length must be a whole number of seconds")
        if not 0 <= self.apnea_fraction <= 1:
            raise ValueError("apnea_fraction must lie in [0, 1]")

    @classmethod
    def balanced(cls, **kwargs) -> "CohortSpec":
        """The 70/70/70/60 four-class cohort."""
        return cls(counts=(70, 70, 70, 60), **kwargs)

    @property
    def n_samples(self) -> int:
        return int(self.hours * 3600) * self.sampling_rate_hz


def sample_ahi(severity: SeverityLabel, spec: CohortSpec, rng: np.random.Generator) -> float:
    """Normal draw truncated to the class band and to mean +/- 3 sd."""
    i = int(severity)
    mu, sd = spec.ahi_mean[i], spec.ahi_std[i]
    lo = max(_BANDS[i][0], mu - 3 * sd)
    hi = min(_BANDS[i][1], mu + 3 * sd)
    while True:
        value = rng.normal(mu, sd)
        if lo <= value < hi:
            return float(value)


def event_count(ahi: float, hours: float) -> int:
    """round(ahi * hours), halves rounded up."""
    return int(math.floor(ahi * hours + 0.5))


def place_events(n: int, spec: CohortSpec, rng: np.random.Generator) -> list[ScoredEvent]:
    if n == 0:
        return []
    total_s = spec.n_samples / spec.sampling_rate_hz
    durations = rng.uniform(*spec.event_duration_s, size=n)
    free = total_s - durations.sum()
    if free <= 0:
        raise EventPlacementOverflow(
            f"{n} events totalling {durations.sum():.0f} s do not fit in {total_s:.0f} s"
        )
    cuts = np.sort(rng.uniform(0.0, free, size=n))
    gaps = np.diff(np.concatenate([[0.0], cuts]))
    starts = np.cumsum(gaps) + np.concatenate([[0.0], np.cumsum(durations[:-1])])
    apnea = rng.random(n) < spec.apnea_fraction
    events = []
    for start, dur, is_apnea in zip(starts, durations, apnea):
        kind = EventKind.APNEA if is_apnea else EventKind.HYPOPNEA
        name = "Obstructive Apnea" if is_apnea else "Hypopnea"
        # rounding both ends (monotone) keeps neighbours from overlapping
        lo, hi = round(float(start), 3), round(float(start + dur), 3)
        events.append(ScoredEvent(kind, lo, hi - lo, name))
    return events


def _slow_noise(n: int, fs: float, rng: np.random.Generator, knot_s: float = 10.0) -> np.ndarray:
    """Smooth unit-scale noise: random knots every ``knot_s`` seconds, linearly interpolated."""
    knots = int(math.ceil(n / fs / knot_s)) + 2
    values = rng.normal(size=knots)
    return np.interp(np.arange(n) / fs, np.arange(knots) * knot_s, values)


def breathing_signal(events: list[ScoredEvent], spec: CohortSpec, rng: np.random.Generator) -> np.ndarray:
    n, fs = spec.n_samples, spec.sampling_rate_hz
    base_freq = rng.uniform(0.2, 0.3)
    freq = base_freq * (1.0 + 0.08 * _slow_noise(n, fs, rng))
    phase = 2 * np.pi * np.cumsum(freq) / fs + rng.uniform(0, 2 * np.pi)
    amplitude = rng.uniform(0.4, 0.6) * (1.0 + 0.1 * _slow_noise(n, fs, rng))

    envelope = np.ones(n)
    for ev in events:
        lo = int(math.floor(ev.start_s * fs))
        hi = min(int(math.floor(ev.end_s * fs)), n)
        if ev.kind is EventKind.APNEA:
            envelope[lo:hi] = rng.uniform(0.0, 0.1)
        else:
            envelope[lo:hi] = rng.uniform(0.3, 0.7)

    noise = 0.02 * lowpass(rng.normal(size=n), fs, cutoff_hz=min(4.0, 0.45 * fs))
    return np.clip(amplitude * envelope * np.sin(phase) + noise, -1.0, 1.0)


def generate_subject(severity: SeverityLabel, spec: CohortSpec, rng: np.random.Generator):
    """Returns ``(SignalRecord, events, true_ahi)`` for one subject."""
    ahi = sample_ahi(severity, spec, rng)
    events = place_events(event_count(ahi, spec.hours), spec, rng)
    samples = breathing_signal(events, spec, rng)
    record = SignalRecord(spec.channel_label, float(spec.sampling_rate_hz), "a.u.", samples, 2.0 / 65535)
    return record, events, ahi


def _edf_header(spec: CohortSpec, subject_id: str):
    signal = SignalHeader(
        label=spec.channel_label,
        physical_min=-1.0,
        physical_max=1.0,
        digital_min=-32768,
        digital_max=32767,
        samples_per_record=spec.sampling_rate_hz,
        transducer="Thermistor (synthetic)",
        physical_dimension="a.u.",
        prefiltering="HP:0.15Hz",
    )
    return make_header(
        [signal],
        num_data_records=int(spec.hours * 3600),
        record_duration_s=1.0,
        patient_id=f"{subject_id} X X X",
        recording_id="Startdate 01-JAN-2001 X X synthetic",
        start_datetime=dt.datetime(2001, 1, 1, 22, 0, 0),
    )


def subject_plan(spec: CohortSpec) -> list[tuple[str, SeverityLabel, np.random.SeedSequence]]:
    """Subject ids, classes and per-subject seed streams, independent of generation order."""
    root = np.random.SeedSequence(spec.seed)
    shuffle_seq, subject_root = root.spawn(2)
    classes = [SeverityLabel(i) for i, c in enumerate(spec.counts) for _ in range(c)]
    order = np.random.default_rng(shuffle_seq).permutation(len(classes))
    children = subject_root.spawn(len(classes))
    width = max(4, len(str(len(classes))))
    return [(f"S{i + 1:0{width}d}", classes[j], children[i]) for i, j in enumerate(order)]


def write_subject(out_dir: Path, subject_id: str, severity: SeverityLabel, seq, spec: CohortSpec) -> float:
    record, events, ahi = generate_subject(severity, spec, np.random.default_rng(seq))
    write_edf(_edf_header(spec, subject_id), [record.samples], out_dir / f"{subject_id}.edf")
    (out_dir / f"{subject_id}.xml").write_text(events_to_xml(events))
    return ahi


def generate_cohort(spec: CohortSpec, out_dir) -> Path:
    """Write one EDF + XML pair per subject and ``manifest.csv``; returns the manifest path."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        rows = []
        for subject_id, severity, seq in subject_plan(spec):
            ahi = write_subject(out_dir, subject_id, severity, seq, spec)
            rows.append((subject_id, f"{ahi:.12g}", severity.display))
        manifest = out_dir / "manifest.csv"
        with open(manifest, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MANIFEST_COLUMNS)
            writer.writerows(rows)
    except OSError as exc:
        raise IoFailure(f"cannot write cohort to {out_dir}: {exc}") from exc
    return manifest


def read_manifest(path) -> list[tuple[str, float, str]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != MANIFEST_COLUMNS:
            raise ValueError(f"{path}: expected columns {MANIFEST_COLUMNS}")
        return [(r["subject_id"], float(r["true_ahi"]), r["class"]) for r in reader]
