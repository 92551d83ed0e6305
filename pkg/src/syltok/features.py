"""Framewise feature files and corpus manifests.

One file holds the features of one utterance at one encoder layer; which
layer a directory holds is encoded in the directory path, and utterance
identity lives in the file name and the manifest, not in the header.

Binary layout (all little-endian)::

    bytes 0-3    magic  b"ZSFT"
    u32          format version (currently 1)
    u32          T, number of frames
    u32          D, feature dimension
    f64          frame_period_s
    f32[T * D]   frame data, row-major

Manifests are UTF-8 TSV files with one utterance per line::

    utterance_id <TAB> relative_path [<TAB> duration_s]

Relative paths resolve against the directory containing the manifest file.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FileCorruptionError, FileFormatError
from .validation import check_frames

MAGIC = b"ZSFT"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")

DEFAULT_FRAME_PERIOD_S = 0.02


@dataclass(frozen=True)
class FeatureMatrix:
    """Framewise features of a single utterance.

    ``frames`` is stored as C-contiguous float32 so that a write/read cycle
    through the binary format reproduces it bit-exactly. Treat the array as
    immutable; it may be shared between workers.
    """

    utterance_id: str
    frames: np.ndarray
    frame_period_s: float = DEFAULT_FRAME_PERIOD_S

    def __post_init__(self):
        arr = check_frames(self.frames, name=f"frames of {self.utterance_id!r}")
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        object.__setattr__(self, "frames", arr)
        if not (self.frame_period_s > 0):
            raise ValueError(f"frame_period_s must be positive, got {self.frame_period_s}")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_frames * self.frame_period_s


def write_features(m: FeatureMatrix, path) -> None:
    """Write one utterance's features; output bytes depend only on ``m``."""
    t, d = m.frames.shape
    payload = np.ascontiguousarray(m.frames, dtype="<f4").tobytes()
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, t, d, m.frame_period_s))
        f.write(payload)


def read_features(path, utterance_id: str | None = None) -> FeatureMatrix:
    """Read a feature file written by :func:`write_features`.

    The utterance id defaults to the file name without its extension.
    Raises :class:`FileFormatError` for a bad magic or version,
    :class:`FileCorruptionError` when the payload size disagrees with the
    header, and :class:`ValueError` for non-finite frame values.
    """
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FileFormatError(f"{path}: file too short for a feature header")
        magic, version, t, d, period = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FileFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FileFormatError(f"{path}: unsupported version {version}")
        if t < 1 or d < 1 or not period > 0:
            raise FileFormatError(f"{path}: header declares T={t}, D={d}, frame_period={period}")
        payload = f.read()
    expected = 4 * t * d
    if len(payload) < expected:
        raise FileCorruptionError(f"{path}: payload truncated ({len(payload)} of {expected} bytes)")
    if len(payload) > expected:
        raise FileCorruptionError(f"{path}: {len(payload) - expected} trailing bytes after payload")
    frames = np.frombuffer(payload, dtype="<f4").reshape(t, d)
    if utterance_id is None:
        utterance_id = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return FeatureMatrix(utterance_id=utterance_id, frames=frames, frame_period_s=period)


@dataclass(frozen=True)
class ManifestEntry:
    utterance_id: str
    path: str
    duration_s: float | None = None


@dataclass
class Manifest:
    """Ordered list of utterances with unique ids."""

    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.utterance_id in seen:
                raise ValueError(f"duplicate utterance_id in manifest: {e.utterance_id!r}")
            seen.add(e.utterance_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def resolved_paths(self, base_dir) -> list[tuple[str, str]]:
        """(utterance_id, absolute path) pairs, resolving against ``base_dir``."""
        base = os.fspath(base_dir)
        return [(e.utterance_id, os.path.normpath(os.path.join(base, e.path))) for e in self.entries]


def read_manifest(path) -> Manifest:
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 tab-separated columns")
            duration = float(cols[2]) if len(cols) == 3 else None
            entries.append(ManifestEntry(cols[0], cols[1], duration))
    return Manifest(entries)


def write_manifest(manifest: Manifest, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for e in manifest:
            if e.duration_s is None:
                f.write(f"{e.utterance_id}\t{e.path}\n")
            else:
                f.write(f"{e.utterance_id}\t{e.path}\t{e.duration_s:.6f}\n")
