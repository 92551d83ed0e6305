"""Codebooks: centroid matrices with an optional silence-collapse map.

A large spherical-k-means vocabulary trained on speech embeddings devotes
many centroids to silence and non-speech noise. Averaging-linkage
hierarchical clustering of the centroids under cosine distance separates
those from the rest: the two branches under the dendrogram root are the
natural split, and the smaller branch is the silence side. Collapsing maps
every raw id in the smaller branch to the reserved id 0 and renumbers the
remaining ids consecutively in raw order.

Binary layout (all little-endian)::

    bytes 0-3    magic  b"ZSCB"
    u32          format version (currently 1)
    u32          K, number of centroids
    u32          D, centroid dimension
    u8           1 if a collapse map follows the centroids, else 0
    f32[K * D]   centroids, row-major
    u32[K]       collapse map            (only when the flag is 1)
    u32          collapsed vocabulary size (only when the flag is 1)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage

from .errors import CollapseTieError, FileCorruptionError, FileFormatError

MAGIC = b"ZSCB"
VERSION = 1
_HEADER = struct.Struct("<4sIIIB")

SILENCE_ID = 0


@dataclass(frozen=True)
class Codebook:
    """K unit-norm centroid rows, float32, plus an optional collapse map."""

    centroids: np.ndarray
    collapse_map: np.ndarray | None = None
    collapsed_vocab_size: int | None = None

    def __post_init__(self):
        c = np.ascontiguousarray(self.centroids, dtype=np.float32)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"centroids must be a non-empty 2-D matrix, got shape {c.shape}")
        if not np.isfinite(c).all():
            raise ValueError("centroids contain non-finite values")
        norms = np.linalg.norm(c.astype(np.float64), axis=1)
        worst = np.abs(norms - 1.0).max()
        if worst > 1e-6:
            raise ValueError(f"centroid rows must be unit-norm within 1e-6, worst error {worst:g}")
        object.__setattr__(self, "centroids", c)

        if self.collapse_map is None:
            size = self.k if self.collapsed_vocab_size is None else self.collapsed_vocab_size
            if size != self.k:
                raise ValueError("collapsed_vocab_size without a collapse_map must equal K")
            object.__setattr__(self, "collapsed_vocab_size", self.k)
            return

        m = np.asarray(self.collapse_map, dtype=np.int64)
        if m.shape != (self.k,):
            raise ValueError(f"collapse_map must have shape ({self.k},), got {m.shape}")
        if self.collapsed_vocab_size is None:
            raise ValueError("collapse_map requires an explicit collapsed_vocab_size")
        size = int(self.collapsed_vocab_size)
        if not 1 <= size <= self.k:
            raise ValueError(f"collapsed_vocab_size must be in [1, {self.k}], got {size}")
        used = np.unique(m)
        if used[0] < 0 or used[-1] >= size or used.size != size:
            raise ValueError("collapse_map must map onto all of [0, collapsed_vocab_size)")
        object.__setattr__(self, "collapse_map", m)
        object.__setattr__(self, "collapsed_vocab_size", size)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]

    def apply_collapse(self, raw_ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(raw_ids, dtype=np.int64)
        if self.collapse_map is None:
            return ids
        return self.collapse_map[ids]


def _branch_leaves(z: np.ndarray, node: int, n_leaves: int) -> np.ndarray:
    out = []
    stack = [int(node)]
    while stack:
        m = stack.pop()
        if m < n_leaves:
            out.append(m)
        else:
            row = z[m - n_leaves]
            stack.append(int(row[0]))
            stack.append(int(row[1]))
    return np.sort(np.asarray(out, dtype=np.int64))


def collapse_silence(codebook: Codebook) -> Codebook:
    """Fold the smaller root branch of the centroid dendrogram into id 0.

    Returns a new codebook with the same centroids and a collapse map; the
    input must not already carry one. Raises :class:`CollapseTieError` when
    the two root branches have equal size, since neither can be called the
    silence side.
    """
    if codebook.collapse_map is not None:
        raise ValueError("codebook already has a collapse map")
    k = codebook.k
    if k < 2:
        raise ValueError("collapsing needs at least 2 centroids")

    z = linkage(codebook.centroids.astype(np.float64), method="average", metric="cosine")
    left = _branch_leaves(z, int(z[-1, 0]), k)
    right = _branch_leaves(z, int(z[-1, 1]), k)
    if left.size == right.size:
        raise CollapseTieError(
            f"root branches have equal size {left.size}; cannot pick a silence branch"
        )
    silence = left if left.size < right.size else right

    collapse_map = np.empty(k, dtype=np.int64)
    collapse_map[silence] = SILENCE_ID
    speech_mask = np.ones(k, dtype=bool)
    speech_mask[silence] = False
    collapse_map[speech_mask] = np.arange(1, 1 + int(speech_mask.sum()))
    size = k - silence.size + 1
    return Codebook(codebook.centroids, collapse_map=collapse_map, collapsed_vocab_size=size)


def write_codebook(codebook: Codebook, path) -> None:
    has_map = codebook.collapse_map is not None
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, codebook.k, codebook.dim, int(has_map)))
        f.write(np.ascontiguousarray(codebook.centroids, dtype="<f4").tobytes())
        if has_map:
            f.write(codebook.collapse_map.astype("<u4").tobytes())
            f.write(struct.pack("<I", codebook.collapsed_vocab_size))


def read_codebook(path) -> Codebook:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FileFormatError(f"{path}: file too short for a codebook header")
        magic, version, k, d, has_map = _HEADER.unpack(head)
        if magic != MAGIC:
            raise FileFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise FileFormatError(f"{path}: unsupported version {version}")
        if k < 1 or d < 1 or has_map not in (0, 1):
            raise FileFormatError(f"{path}: header declares K={k}, D={d}, flag={has_map}")
        payload = f.read()
    expected = 4 * k * d + (4 * k + 4 if has_map else 0)
    if len(payload) != expected:
        raise FileCorruptionError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    centroids = np.frombuffer(payload[: 4 * k * d], dtype="<f4").reshape(k, d)
    if not has_map:
        return Codebook(centroids)
    collapse_map = np.frombuffer(payload[4 * k * d : 4 * k * d + 4 * k], dtype="<u4")
    (size,) = struct.unpack("<I", payload[-4:])
    return Codebook(centroids, collapse_map=collapse_map.astype(np.int64), collapsed_vocab_size=size)
