"""Versioned model container: one ``.npz`` archive with a JSON metadata entry.

Arrays are stored verbatim, so a save/load round trip is exact.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import IoFailure, ModelFormatError


def save(path, tag: str, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    header = json.dumps({"format": tag, **meta}, sort_keys=True)
    payload = {"__meta__": np.frombuffer(header.encode("utf-8"), dtype=np.uint8)}
    for name, arr in arrays.items():
        if name == "__meta__":
            raise ValueError("'__meta__' is reserved")
        payload[name] = np.asarray(arr)
    try:
        with open(path, "wb") as fh:
            np.savez(fh, **payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load(path, expected_tag: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        with np.load(path, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ModelFormatError(f"{path} is not a model archive: {exc}") from exc
    if "__meta__" not in arrays:
        raise ModelFormatError(f"{path} has no metadata entry")
    meta = json.loads(arrays.pop("__meta__").tobytes().decode("utf-8"))
    tag = meta.pop("format", None)
    if expected_tag is not None and tag != expected_tag:
        raise ModelFormatError(f"{path}: expected format {expected_tag!r}, found {tag!r}")
    return meta, arrays

