"""Writer for the tokenizer's binary feature format.

The sibling `syltok` package owns the format; this module reimplements it so
the dumper stays importable without the tokenizer installed. Layout, all
little-endian::

    bytes 0-3    magic  b"ZSFT"
    u32          format version (currently 1)
    u32          T, number of frames
    u32          D, feature dimension
    f64          frame_period_s
    f32[T * D]   frame data, row-major

A matching reader is included for round-trip checks; production consumers
should read through `syltok` instead.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"ZSFT"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


def _checked(frames: np.ndarray) -> np.ndarray:
    arr = np.asarray(frames)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"frames must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        raise ValueError(f"frames must be floating point, got dtype {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("frames contain non-finite values")
    return np.ascontiguousarray(arr, dtype=np.float32)


def write_zsft(path, frames: np.ndarray, frame_period_s: float) -> None:
    """Write one utterance's frames. float32 data round-trips bit-exactly."""
    arr = _checked(frames)
    if not (frame_period_s > 0):
        raise ValueError(f"frame_period_s must be positive, got {frame_period_s}")
    header = _HEADER.pack(MAGIC, VERSION, arr.shape[0], arr.shape[1], frame_period_s)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.tobytes())


def read_zsft(path) -> tuple[np.ndarray, float]:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: shorter than the header")
    magic, version, t, d, period = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 4 * t * d
    if len(raw) != expected:
        raise ValueError(f"{path}: payload size {len(raw)} does not match header ({expected})")
    frames = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(t, d)
    return frames, period


def write_manifest(path, rows) -> None:
    """``utterance_id<TAB>relative_path`` lines, one per utterance, in order."""
    with open(path, "w", encoding="utf-8") as f:
        for utt, rel in rows:
            f.write(f"{utt}\t{rel}\n")
