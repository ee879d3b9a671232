"""AHI severity bands and binary cutoffs."""

from __future__ import annotations

import enum

CUTOFFS = (5, 15, 30)


class SeverityLabel(enum.IntEnum):
    NO = 0
    MILD = 1
    MODERATE = 2
    SEVERE = 3

    @property
    def display(self) -> str:
        return {0: "No", 1: "Mild", 2: "Moderate", 3: "Severe"}[self.value]

    @classmethod
    def parse(cls, text: str) -> "SeverityLabel":
        for label in cls:
            if text.strip().casefold() in (label.display.casefold(), label.name.casefold()):
                return label
        raise ValueError(f"unknown severity label {text!r}")


def label_from_ahi(ahi: float) -> SeverityLabel:
    """No < 5 <= Mild < 15 <= Moderate < 30 <= Severe (events per hour)."""
    if ahi < 0:
        raise ValueError(f"AHI must be non-negative, got {ahi}")
    if ahi < 5:
        return SeverityLabel.NO
    if ahi < 15:
        return SeverityLabel.MILD
    if ahi < 30:
        return SeverityLabel.MODERATE
    return SeverityLabel.SEVERE


# lower AHI bound of each severity band
_BAND_FLOOR = {SeverityLabel.NO: 0.0, SeverityLabel.MILD: 5.0,
               SeverityLabel.MODERATE: 15.0, SeverityLabel.SEVERE: 30.0}


def binarize(label_or_ahi: SeverityLabel | float, cutoff: int) -> int:
    """1 (positive, affected) iff AHI >= cutoff, else 0.

    A :class:`SeverityLabel` is accepted because every cutoff coincides with a
    band boundary.
    """
    if cutoff not in CUTOFFS:
        raise ValueError(f"cutoff must be one of {CUTOFFS}, got {cutoff}")
    if isinstance(label_or_ahi, SeverityLabel):
        return int(_BAND_FLOOR[label_or_ahi] >= cutoff)
    return int(label_or_ahi >= cutoff)
