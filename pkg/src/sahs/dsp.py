"""Butterworth low-pass design and zero-phase filtering of airflow signals."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal as _signal

from .errors import CutoffAboveNyquist


class ShortSignalWarning(UserWarning):
    """Raised (as a warning) when a signal is too short to be filtered."""


@dataclass(frozen=True)
class FilterSpec:
    cutoff_hz: float = 3.0
    sampling_rate_hz: float = 32.0
    order: int = 4
    kind: str = "butterworth_lowpass"

    def __post_init__(self):
        if self.kind != "butterworth_lowpass":
            raise ValueError(f"unsupported filter kind {self.kind!r}")
        if self.order <= 0:
            raise ValueError("filter order must be positive")
        if self.cutoff_hz <= 0 or self.sampling_rate_hz <= 0:
            raise ValueError("cutoff and sampling rate must be positive")
        if self.cutoff_hz >= self.sampling_rate_hz / 2:
            raise CutoffAboveNyquist(
                f"cutoff {self.cutoff_hz} Hz is not below Nyquist ({self.sampling_rate_hz / 2} Hz)"
            )


@dataclass(frozen=True)
class Biquads:
    """Second-order sections, one row ``[b0, b1, b2, 1, a1, a2]`` per section."""

    sos: np.ndarray
    order: int


def design_lowpass(spec: FilterSpec) -> Biquads:
    """Digital Butterworth low-pass via the bilinear transform with prewarping.

    Every section is scaled to unit gain at DC, so the cascade has DC gain 1.
    """
    n, fs = spec.order, spec.sampling_rate_hz
    warped = 2.0 * fs * np.tan(np.pi * spec.cutoff_hz / fs)
    k = np.arange(n)
    analog = warped * np.exp(1j * np.pi * (2 * k + n + 1) / (2 * n))
    poles = (2.0 * fs + analog) / (2.0 * fs - analog)

    sections = []
    upper = sorted((p for p in poles if p.imag > 1e-12), key=lambda p: -abs(p))
    for p in upper:
        b = np.array([1.0, 2.0, 1.0])
        a = np.array([1.0, -2.0 * p.real, abs(p) ** 2])
        sections.append(np.concatenate([b * (a.sum() / b.sum()), a]))
    if n % 2:
        p = poles[np.argmin(np.abs(poles.imag))].real
        b = np.array([1.0, 1.0, 0.0])
        a = np.array([1.0, -p, 0.0])
        sections.append(np.concatenate([b * (a.sum() / b.sum()), a]))
    return Biquads(np.array(sections), n)


def frequency_response(coeffs: Biquads, freqs_hz, sampling_rate_hz: float) -> np.ndarray:
    """Complex response of the cascade at the given frequencies (single pass)."""
    z = np.exp(-1j * 2 * np.pi * np.asarray(freqs_hz, dtype=float) / sampling_rate_hz)
    h = np.ones_like(z)
    for b0, b1, b2, a0, a1, a2 in coeffs.sos:
        h *= (b0 + b1 * z + b2 * z**2) / (a0 + a1 * z + a2 * z**2)
    return h


def filtfilt(coeffs: Biquads, samples) -> np.ndarray:
    """Forward-backward (zero-phase) filtering.

    The ends are extended by odd reflection over ``3 * order`` samples and both
    passes start from the steady-state response to the edge value. Inputs not
    longer than the padding are returned unchanged with a ShortSignalWarning.
    """
    x = np.asarray(samples, dtype=np.float64)
    padlen = 3 * coeffs.order
    if x.shape[-1] <= padlen:
        warnings.warn(
            f"signal of {x.shape[-1]} samples is too short to filter (needs > {padlen})",
            ShortSignalWarning,
            stacklevel=2,
        )
        return x.copy()

    left = 2 * x[0] - x[padlen:0:-1]
    right = 2 * x[-1] - x[-2 : -padlen - 2 : -1]
    ext = np.concatenate([left, x, right])

    zi = _signal.sosfilt_zi(coeffs.sos)
    y, _ = _signal.sosfilt(coeffs.sos, ext, zi=zi * ext[0])
    y = y[::-1]
    y, _ = _signal.sosfilt(coeffs.sos, y, zi=zi * y[0])
    return y[::-1][padlen:-padlen].copy()


def lowpass(samples, sampling_rate_hz: float, cutoff_hz: float = 3.0, order: int = 4) -> np.ndarray:
    spec = FilterSpec(cutoff_hz=cutoff_hz, sampling_rate_hz=sampling_rate_hz, order=order)
    return filtfilt(design_lowpass(spec), samples)
