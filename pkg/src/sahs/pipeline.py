"""Cohort-level glue: EDF + XML pairs to feature rows, feature rows to subjects."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import read_annotations
from .edf import read_signal
from .errors import SahsError
from .eval.experiment import Subject
from .eval.labels import SeverityLabel, label_from_ahi
from .features import FeatureVector, read_feature_csv, subject_features
from .synth import read_manifest

log = logging.getLogger(__name__)


@dataclass
class ExtractionResult:
    rows: list[tuple[str, FeatureVector, float, str]] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)


def extract_subject(cohort_dir: Path, subject_id: str, channel: str, *, cutoff_hz: float = 3.0,
                    order: int = 4, case_insensitive: bool = False) -> FeatureVector:
    signal = read_signal(cohort_dir / f"{subject_id}.edf", channel, case_insensitive=case_insensitive)
    annotations = read_annotations(cohort_dir / f"{subject_id}.xml")
    features, segments = subject_features(signal, annotations.events, cutoff_hz=cutoff_hz, order=order)
    if segments.dropped or segments.clipped:
        log.warning("%s: %d event(s) outside the recording dropped, %d clipped",
                    subject_id, segments.dropped, segments.clipped)
    return features


def extract_cohort(cohort_dir, channel: str, *, cutoff_hz: float = 3.0, order: int = 4,
                   case_insensitive: bool = False) -> ExtractionResult:
    """Features for every subject in ``manifest.csv``; failures are collected, not raised."""
    cohort_dir = Path(cohort_dir)
    result = ExtractionResult()
    for subject_id, ahi, _ in read_manifest(cohort_dir / "manifest.csv"):
        try:
            fv = extract_subject(cohort_dir, subject_id, channel, cutoff_hz=cutoff_hz, order=order,
                                 case_insensitive=case_insensitive)
        except (SahsError, OSError, ValueError) as exc:
            result.failures.append((subject_id, f"{type(exc).__name__}: {exc}"))
            continue
        result.rows.append((subject_id, fv, ahi, label_from_ahi(ahi).display))
    return result


def load_subjects(features_csv) -> list[Subject]:
    subjects = []
    for subject_id, fv, ahi, label in read_feature_csv(features_csv):
        parsed = SeverityLabel.parse(label)
        if parsed != label_from_ahi(ahi):
            raise ValueError(f"{subject_id}: label {label!r} disagrees with AHI {ahi}")
        subjects.append(Subject(subject_id, fv.to_array(), ahi, parsed))
    return subjects
