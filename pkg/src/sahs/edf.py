"""Reading and writing of plain EDF (European Data Format) files.

Only the classic 16-bit format is handled. Annotation channels of EDF+ are not
interpreted; scored events come from the XML side (see :mod:`sahs.annotations`).
"""

from __future__ import annotations

import datetime as dt
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import (
    AmbiguousChannel,
    ChannelNotFound,
    FieldOverflow,
    InconsistentHeaderBytes,
    InvalidNumeric,
    IoFailure,
    NonAsciiField,
    TruncatedDataRecord,
    TruncatedHeader,
    ValueOutOfPhysicalRange,
)

PathOrBytes = Union[str, os.PathLike, bytes, bytearray, memoryview]

# (name, width) of the fixed part of the header, in file order
_MAIN_FIELDS = (
    ("version", 8),
    ("patient_id", 80),
    ("recording_id", 80),
    ("start_date", 8),
    ("start_time", 8),
    ("header_bytes", 8),
    ("reserved", 44),
    ("num_data_records", 8),
    ("record_duration_s", 8),
    ("num_signals", 4),
)

# per-signal fields; each is stored as ns consecutive values
_SIGNAL_FIELDS = (
    ("label", 16),
    ("transducer", 80),
    ("physical_dimension", 8),
    ("physical_min", 8),
    ("physical_max", 8),
    ("digital_min", 8),
    ("digital_max", 8),
    ("prefiltering", 80),
    ("samples_per_record", 8),
    ("reserved", 32),
)


@dataclass(frozen=True)
class SignalHeader:
    label: str
    physical_min: float
    physical_max: float
    digital_min: int
    digital_max: int
    samples_per_record: int
    transducer: str = ""
    physical_dimension: str = ""
    prefiltering: str = ""
    reserved: str = ""

    @property
    def gain(self) -> float:
        """Physical units per digital step."""
        return (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min)


@dataclass(frozen=True)
class EdfHeader:
    version: str
    patient_id: str
    recording_id: str
    start_datetime: dt.datetime
    header_bytes: int
    num_data_records: int
    record_duration_s: float
    signals: tuple[SignalHeader, ...]
    reserved: str = ""

    @property
    def num_signals(self) -> int:
        return len(self.signals)

    @property
    def bytes_per_record(self) -> int:
        return 2 * sum(s.samples_per_record for s in self.signals)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.signals]

    def sampling_rate(self, index: int) -> float:
        return self.signals[index].samples_per_record / self.record_duration_s


@dataclass
class SignalRecord:
    """Calibrated samples of one channel, in physical units."""

    label: str
    sampling_rate_hz: float
    physical_dimension: str
    samples: np.ndarray
    quantization_step: float = field(default=0.0, repr=False)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sampling_rate_hz


def make_header(
    signals: Sequence[SignalHeader],
    num_data_records: int,
    record_duration_s: float = 1.0,
    *,
    patient_id: str = "X X X X",
    recording_id: str = "Startdate X X X X",
    start_datetime: dt.datetime = dt.datetime(2001, 1, 1),
) -> EdfHeader:
    """Build a header whose ``header_bytes`` is consistent with the signal count."""
    return EdfHeader(
        version="0",
        patient_id=patient_id,
        recording_id=recording_id,
        start_datetime=start_datetime,
        header_bytes=256 * (len(signals) + 1),
        num_data_records=num_data_records,
        record_duration_s=record_duration_s,
        signals=tuple(signals),
    )


# --- field decoding ----------------------------------------------------------

def _decode_text(raw: bytes, name: str) -> str:
    if any(b < 32 or b > 126 for b in raw):
        raise NonAsciiField(f"header field {name!r} contains non-printable or non-ASCII bytes")
    return raw.decode("ascii").rstrip(" ")


def _decode_int(raw: bytes, name: str) -> int:
    text = _decode_text(raw, name).strip()
    try:
        return int(text)
    except ValueError:
        # some writers put "32.0" in integer fields
        try:
            value = float(text)
        except ValueError:
            raise InvalidNumeric(f"header field {name!r}: {text!r} is not an integer") from None
        if not value.is_integer():
            raise InvalidNumeric(f"header field {name!r}: {text!r} is not an integer")
        return int(value)


def _decode_float(raw: bytes, name: str) -> float:
    text = _decode_text(raw, name).strip()
    try:
        value = float(text)
    except ValueError:
        raise InvalidNumeric(f"header field {name!r}: {text!r} is not a number") from None
    if not np.isfinite(value):
        raise InvalidNumeric(f"header field {name!r}: {text!r} is not finite")
    return value


def _decode_datetime(date_raw: bytes, time_raw: bytes) -> dt.datetime:
    date = _decode_text(date_raw, "start_date").strip()
    time = _decode_text(time_raw, "start_time").strip()
    try:
        day, month, year = (int(p) for p in date.split("."))
        hour, minute, second = (int(p) for p in time.split("."))
        # EDF clipping date: 85-99 -> 1985-1999, 00-84 -> 2000-2084
        year += 1900 if year >= 85 else 2000
        return dt.datetime(year, month, day, hour, minute, second)
    except ValueError:
        raise InvalidNumeric(f"invalid start date/time {date!r} {time!r}") from None


def parse_header(data: bytes) -> EdfHeader:
    """Parse the fixed and per-signal header of an EDF file.

    ``data`` may be the whole file; only the first ``header_bytes`` bytes are
    inspected.
    """
    if not isinstance(data, bytes):
        data = bytes(data)
    if len(data) < 256:
        raise TruncatedHeader(f"EDF header needs at least 256 bytes, got {len(data)}")

    raw: dict[str, bytes] = {}
    pos = 0
    for name, width in _MAIN_FIELDS:
        raw[name] = data[pos : pos + width]
        pos += width

    ns = _decode_int(raw["num_signals"], "num_signals")
    if ns <= 0:
        raise InvalidNumeric(f"num_signals must be positive, got {ns}")
    header_bytes = _decode_int(raw["header_bytes"], "header_bytes")
    if header_bytes != 256 * (ns + 1):
        raise InconsistentHeaderBytes(
            f"header_bytes is {header_bytes} but {ns} signal(s) require {256 * (ns + 1)}"
        )
    if len(data) < header_bytes:
        raise TruncatedHeader(f"EDF header declares {header_bytes} bytes, only {len(data)} available")

    per_signal: dict[str, list[bytes]] = {}
    for name, width in _SIGNAL_FIELDS:
        per_signal[name] = [data[pos + i * width : pos + (i + 1) * width] for i in range(ns)]
        pos += ns * width

    signals = []
    for i in range(ns):
        sh = SignalHeader(
            label=_decode_text(per_signal["label"][i], "label"),
            transducer=_decode_text(per_signal["transducer"][i], "transducer"),
            physical_dimension=_decode_text(per_signal["physical_dimension"][i], "physical_dimension"),
            physical_min=_decode_float(per_signal["physical_min"][i], "physical_min"),
            physical_max=_decode_float(per_signal["physical_max"][i], "physical_max"),
            digital_min=_decode_int(per_signal["digital_min"][i], "digital_min"),
            digital_max=_decode_int(per_signal["digital_max"][i], "digital_max"),
            prefiltering=_decode_text(per_signal["prefiltering"][i], "prefiltering"),
            samples_per_record=_decode_int(per_signal["samples_per_record"][i], "samples_per_record"),
            reserved=_decode_text(per_signal["reserved"][i], "signal reserved"),
        )
        if sh.digital_min >= sh.digital_max:
            raise InvalidNumeric(f"signal {sh.label!r}: digital_min must be below digital_max")
        if sh.physical_min == sh.physical_max:
            raise InvalidNumeric(f"signal {sh.label!r}: physical_min equals physical_max")
        if sh.samples_per_record <= 0:
            raise InvalidNumeric(f"signal {sh.label!r}: samples_per_record must be positive")
        signals.append(sh)

    duration = _decode_float(raw["record_duration_s"], "record_duration_s")
    if duration <= 0:
        raise InvalidNumeric(f"record duration must be positive, got {duration}")
    n_records = _decode_int(raw["num_data_records"], "num_data_records")
    if n_records < -1:
        raise InvalidNumeric(f"invalid num_data_records {n_records}")

    return EdfHeader(
        version=_decode_text(raw["version"], "version"),
        patient_id=_decode_text(raw["patient_id"], "patient_id"),
        recording_id=_decode_text(raw["recording_id"], "recording_id"),
        start_datetime=_decode_datetime(raw["start_date"], raw["start_time"]),
        header_bytes=header_bytes,
        num_data_records=n_records,
        record_duration_s=duration,
        signals=tuple(signals),
        reserved=_decode_text(raw["reserved"], "reserved"),
    )


# --- reading -------------------------------------------------------------------

def _load(file: PathOrBytes) -> bytes:
    if isinstance(file, (bytes, bytearray, memoryview)):
        return bytes(file)
    try:
        return Path(file).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {file}: {exc}") from exc


def _records(header: EdfHeader, buf: bytes) -> np.ndarray:
    """Data section as an (n_records, samples_per_record_total) int16 array."""
    data = memoryview(buf)[header.header_bytes :]
    bpr = header.bytes_per_record
    n = header.num_data_records
    if n == -1:
        n = len(data) // bpr
    elif len(data) < n * bpr:
        raise TruncatedDataRecord(
            f"header declares {n} data records ({n * bpr} bytes), file holds {len(data)} bytes"
        )
    return np.frombuffer(data[: n * bpr], dtype="<i2").reshape(n, bpr // 2)


def find_channel(header: EdfHeader, label: str, *, case_insensitive: bool = False) -> int:
    """Index of the signal whose trimmed label matches ``label``."""
    want = label.strip()
    if case_insensitive:
        want = want.casefold()
        hits = [i for i, s in enumerate(header.signals) if s.label.strip().casefold() == want]
    else:
        hits = [i for i, s in enumerate(header.signals) if s.label.strip() == want]
    if not hits:
        raise ChannelNotFound(f"no channel labelled {label!r}; available: {header.labels}")
    if len(hits) > 1:
        raise AmbiguousChannel(f"{len(hits)} channels labelled {label!r}")
    return hits[0]


def _calibrate(sh: SignalHeader, digital: np.ndarray) -> np.ndarray:
    return sh.physical_min + (digital.astype(np.float64) - sh.digital_min) * sh.gain


def _record_from(header: EdfHeader, records: np.ndarray, index: int) -> SignalRecord:
    offset = sum(s.samples_per_record for s in header.signals[:index])
    sh = header.signals[index]
    digital = records[:, offset : offset + sh.samples_per_record].reshape(-1)
    return SignalRecord(
        label=sh.label,
        sampling_rate_hz=header.sampling_rate(index),
        physical_dimension=sh.physical_dimension,
        samples=_calibrate(sh, digital),
        quantization_step=abs(sh.gain),
    )


def read_signal(file: PathOrBytes, channel_label: str, *, case_insensitive: bool = False) -> SignalRecord:
    buf = _load(file)
    header = parse_header(buf)
    index = find_channel(header, channel_label, case_insensitive=case_insensitive)
    return _record_from(header, _records(header, buf), index)


def read_edf(file: PathOrBytes) -> tuple[EdfHeader, list[SignalRecord]]:
    """Header plus every channel; ``num_data_records == -1`` is resolved in the result."""
    buf = _load(file)
    header = parse_header(buf)
    records = _records(header, buf)
    if header.num_data_records == -1:
        header = replace(header, num_data_records=records.shape[0])
    return header, [_record_from(header, records, i) for i in range(header.num_signals)]


# --- writing -------------------------------------------------------------------

def _encode_text(value: str, width: int, name: str) -> bytes:
    if any(ord(c) < 32 or ord(c) > 126 for c in value):
        raise NonAsciiField(f"field {name!r} must be printable ASCII: {value!r}")
    if len(value) > width:
        raise FieldOverflow(f"field {name!r} longer than {width} characters: {value!r}")
    return value.ljust(width).encode("ascii")


def _encode_number(value: float, width: int, name: str) -> bytes:
    if isinstance(value, (int, np.integer)) or float(value).is_integer():
        text = str(int(value))
        if len(text) <= width:
            return text.ljust(width).encode("ascii")
        raise FieldOverflow(f"field {name!r}: {value} does not fit in {width} characters")
    value = float(value)
    candidates = [repr(value)] + [f"{value:.{p}g}" for p in range(width, 0, -1)]
    for text in candidates:
        if len(text) <= width and float(text) == value:
            return text.ljust(width).encode("ascii")
    raise FieldOverflow(f"field {name!r}: {value!r} cannot be written exactly in {width} characters")


def _encode_datetime(when: dt.datetime) -> tuple[bytes, bytes]:
    if not 1985 <= when.year <= 2084:
        raise FieldOverflow(f"EDF start dates cover 1985-2084, got {when.year}")
    if when.microsecond:
        raise FieldOverflow("EDF start time has one-second resolution")
    date = f"{when.day:02d}.{when.month:02d}.{when.year % 100:02d}"
    time = f"{when.hour:02d}.{when.minute:02d}.{when.second:02d}"
    return date.encode("ascii"), time.encode("ascii")


def header_to_bytes(header: EdfHeader) -> bytes:
    ns = header.num_signals
    if header.header_bytes != 256 * (ns + 1):
        raise InconsistentHeaderBytes(
            f"header_bytes is {header.header_bytes} but {ns} signal(s) require {256 * (ns + 1)}"
        )
    date, time = _encode_datetime(header.start_datetime)
    out = [
        _encode_text(header.version, 8, "version"),
        _encode_text(header.patient_id, 80, "patient_id"),
        _encode_text(header.recording_id, 80, "recording_id"),
        date,
        time,
        _encode_number(header.header_bytes, 8, "header_bytes"),
        _encode_text(header.reserved, 44, "reserved"),
        _encode_number(header.num_data_records, 8, "num_data_records"),
        _encode_number(header.record_duration_s, 8, "record_duration_s"),
        _encode_number(ns, 4, "num_signals"),
    ]
    for name, width in _SIGNAL_FIELDS:
        for sh in header.signals:
            value = getattr(sh, name)
            if isinstance(value, str):
                out.append(_encode_text(value, width, name))
            else:
                out.append(_encode_number(value, width, name))
    blob = b"".join(out)
    assert len(blob) == header.header_bytes
    return blob


def physical_to_digital(sh: SignalHeader, samples: np.ndarray) -> np.ndarray:
    """Quantize physical values to the nearest digital code."""
    samples = np.asarray(samples, dtype=np.float64)
    lo, hi = sorted((sh.physical_min, sh.physical_max))
    # anything within half a step of the range still rounds onto an end code
    slack = abs(sh.gain) / 2
    if samples.size and (not np.all(np.isfinite(samples)) or samples.min() < lo - slack
                         or samples.max() > hi + slack):
        raise ValueOutOfPhysicalRange(
            f"signal {sh.label!r}: values must lie in [{lo}, {hi}]"
        )
    digital = np.rint((samples - sh.physical_min) / sh.gain + sh.digital_min)
    return np.clip(digital, sh.digital_min, sh.digital_max).astype("<i2")


def write_edf(header: EdfHeader, signals: Sequence[np.ndarray], path: str | os.PathLike) -> None:
    """Write physical-unit ``signals`` (one array per header signal) to ``path``."""
    if len(signals) != header.num_signals:
        raise ValueError(f"header describes {header.num_signals} signals, got {len(signals)}")
    for sh in header.signals:
        if not (-32768 <= sh.digital_min < sh.digital_max <= 32767):
            raise InvalidNumeric(f"signal {sh.label!r}: digital range must fit in 16 bits")

    n = header.num_data_records
    if n == -1:
        n = len(signals[0]) // header.signals[0].samples_per_record
    for sh, sig in zip(header.signals, signals):
        if len(sig) != n * sh.samples_per_record:
            raise ValueError(
                f"signal {sh.label!r} has {len(sig)} samples, expected {n} x {sh.samples_per_record}"
            )

    blob = header_to_bytes(header)
    data = np.empty((n, header.bytes_per_record // 2), dtype="<i2")
    offset = 0
    for sh, sig in zip(header.signals, signals):
        spr = sh.samples_per_record
        data[:, offset : offset + spr] = physical_to_digital(sh, sig).reshape(n, spr)
        offset += spr
    try:
        with open(path, "wb") as fh:
            fh.write(blob)
            fh.write(data.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
