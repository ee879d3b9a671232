"""Independent reference implementations and random fixtures shared by the tests."""

from __future__ import annotations

import datetime as dt
import math
import string

import numpy as np
from scipy import signal as sp_signal

from sahs.annotations import EventKind, ScoredEvent
from sahs.edf import SignalHeader, make_header


def random_edf(rng: np.random.Generator):
    """A valid random header plus matching physical-unit signals."""
    ns = int(rng.integers(1, 5))
    alphabet = string.ascii_letters + string.digits + " -_."
    signals = []
    for i in range(ns):
        dmin = int(rng.integers(-32768, 0))
        dmax = int(rng.integers(dmin + 1, 32768))
        pmin = round(float(rng.uniform(-500, 500)), 3)
        pmax = round(pmin + float(rng.uniform(0.5, 1000)), 3)
        if rng.random() < 0.2:
            pmin, pmax = pmax, pmin  # inverted calibration is legal
        label = "".join(rng.choice(list(alphabet), size=int(rng.integers(1, 12)))).strip() or "X"
        signals.append(SignalHeader(f"{label}{i}", pmin, pmax, dmin, dmax, int(rng.integers(1, 64)),
                                    transducer="AgAgCl", physical_dimension="uV", prefiltering="HP:0.1Hz"))
    n_records = int(rng.integers(1, 20))
    duration = float(rng.choice([0.5, 1.0, 2.0, 30.0]))
    when = dt.datetime(int(rng.integers(1985, 2085)), int(rng.integers(1, 13)), int(rng.integers(1, 29)),
                       int(rng.integers(0, 24)), int(rng.integers(0, 60)), int(rng.integers(0, 60)))
    header = make_header(signals, n_records, duration, patient_id=f"P{int(rng.integers(1e6))} M",
                         recording_id="Startdate X rand", start_datetime=when)
    data = []
    for sh in signals:
        lo, hi = sorted((sh.physical_min, sh.physical_max))
        x = rng.uniform(lo, hi, size=n_records * sh.samples_per_record)
        x[0], x[-1] = lo, hi
        data.append(x)
    return header, data


def butter_sos(cutoff_hz=3.0, fs=32.0, order=4):
    return sp_signal.butter(order, cutoff_hz, btype="low", fs=fs, output="sos")


def reference_lowpass(x, fs=32.0, cutoff_hz=3.0, order=4):
    return sp_signal.sosfiltfilt(butter_sos(cutoff_hz, fs, order), np.asarray(x, float), padlen=3 * order)


def brute_force_features(filtered, fs, events):
    """Plain-Python loops over the filtered night; returns the 17 values in order."""
    n = len(filtered)
    rows = []
    for ev in events:
        if ev.kind is EventKind.OTHER:
            continue
        first = int(math.floor(ev.start_s * fs))
        last = int(math.floor((ev.start_s + ev.duration_s) * fs))
        duration = ev.duration_s
        if last > n:
            last = n
            duration = n / fs - ev.start_s
        seg = [float(filtered[i]) for i in range(first, last)]
        if not seg:
            continue
        m = sum(seg) / len(seg)
        sd = math.sqrt(sum((v - m) ** 2 for v in seg) / len(seg))
        rows.append((ev.kind, duration, max(seg), min(seg), m, sd))
    if not rows:
        return [0.0] * 17
    na = sum(1 for r in rows if r[0] is EventKind.APNEA)
    nh = sum(1 for r in rows if r[0] is EventKind.HYPOPNEA)
    d = [r[1] for r in rows]
    k = len(rows)
    total = sum(d)
    mean_d = total / k
    var_d = sum((x - mean_d) ** 2 for x in d) / k

    def avg(col):
        return sum(r[col] for r in rows) / k

    def wavg(col):
        return sum(r[1] * r[col] for r in rows) / total

    return [na, nh, na + nh, total, avg(2), avg(3), avg(4), avg(5), max(d), min(d), mean_d,
            math.sqrt(var_d), var_d, wavg(2), wavg(3), wavg(4), wavg(5)]


def random_events(rng: np.random.Generator, total_s: float, n: int):
    """Possibly overlapping random events, some running past the end of the recording."""
    out = []
    for _ in range(n):
        start = float(rng.uniform(0, total_s))
        dur = float(rng.uniform(1, 60))
        kind = EventKind.APNEA if rng.random() < 0.5 else EventKind.HYPOPNEA
        out.append(ScoredEvent(kind, round(start, 2), round(dur, 2), kind.value))
    return sorted(out, key=lambda e: e.start_s)


def exhaustive_split(x, y, w, n_classes, tol=1e-12):
    """Brute force over every (feature, midpoint): the minimum weighted Gini, with
    near-ties (within ``tol``) going to the lowest feature, then the lowest threshold."""
    candidates = []
    total = float(np.sum(w))
    for f in range(x.shape[1]):
        vals = sorted(set(x[:, f].tolist()))
        for a, b in zip(vals, vals[1:]):
            t = (a + b) / 2
            imp = 0.0
            for mask in (x[:, f] <= t, x[:, f] > t):
                wm = w[mask]
                s = float(wm.sum())
                p = np.array([wm[y[mask] == c].sum() for c in range(n_classes)]) / s
                imp += s / total * (1 - float(np.sum(p * p)))
            candidates.append((imp, f, t))
    if not candidates:
        return None
    lowest = min(c[0] for c in candidates)
    return min((c for c in candidates if c[0] <= lowest + tol), key=lambda c: (c[1], c[2]))


def paired_t_oracle(a, b):
    from scipy import stats
    r = stats.ttest_rel(a, b)
    return float(r.statistic), float(r.pvalue)
