"""Segment embeddings and discrete token sequences.

Pooling averages the semantic feature frames inside each segment: segment j
covers the half-open frame range [b_j, b_{j+1}). Quantization assigns each
pooled embedding to its highest-cosine centroid and applies the codebook's
collapse map when one is present.

Token files come in pairs: a text file with one line per utterance
(``utterance_id<TAB>space-separated ids``) for language-model consumers,
and a sibling TSV with one row per token
(``utterance_id, id, start_s, end_s``) carrying the time spans.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .codebook import SILENCE_ID, Codebook
from .features import FeatureMatrix
from .segmentation import Segmentation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentEmbedding:
    utterance_id: str
    segment_index: int
    vector: np.ndarray
    start_s: float
    end_s: float


def pool_segments(semantic: FeatureMatrix, seg: Segmentation) -> list[SegmentEmbedding]:
    """Mean-pool the frames of each segment into one embedding.

    The segmentation's last boundary must equal the number of semantic
    frames; boundary and semantic layers of the same utterance share the
    frame grid.
    """
    if seg.n_frames != semantic.n_frames:
        raise ValueError(
            f"{semantic.utterance_id!r}: segmentation covers {seg.n_frames} frames "
            f"but features have {semantic.n_frames}"
        )
    frames = semantic.frames
    bounds = seg.boundaries
    times = seg.boundary_times_s
    out = []
    for j in range(seg.n_segments):
        a, b = int(bounds[j]), int(bounds[j + 1])
        vec = frames[a:b].mean(axis=0, dtype=np.float64)
        out.append(
            SegmentEmbedding(
                utterance_id=semantic.utterance_id,
                segment_index=j,
                vector=vec,
                start_s=float(times[j]),
                end_s=float(times[j + 1]),
            )
        )
    return out


def stack_embeddings(embeddings) -> np.ndarray:
    """Stack SegmentEmbedding vectors into an (N, D) float64 matrix."""
    if not embeddings:
        raise ValueError("no embeddings to stack")
    return np.stack([e.vector for e in embeddings]).astype(np.float64)


@dataclass(frozen=True)
class TokenSequence:
    """Discrete ids with time spans, tiling [0, duration] without gaps."""

    utterance_id: str
    ids: np.ndarray
    start_s: np.ndarray
    end_s: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        start = np.asarray(self.start_s, dtype=np.float64)
        end = np.asarray(self.end_s, dtype=np.float64)
        if not (ids.shape == start.shape == end.shape) or ids.ndim != 1 or ids.size < 1:
            raise ValueError(f"{self.utterance_id!r}: ids/start_s/end_s must be equal-length 1-D")
        if np.any(end <= start):
            raise ValueError(f"{self.utterance_id!r}: token spans must have positive length")
        if start[0] != 0.0 or np.any(np.abs(start[1:] - end[:-1]) > 1e-9):
            raise ValueError(f"{self.utterance_id!r}: token spans must tile [0, duration]")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "start_s", start)
        object.__setattr__(self, "end_s", end)

    def __len__(self) -> int:
        return self.ids.size

    @property
    def duration_s(self) -> float:
        return float(self.end_s[-1])


def quantize(semantic: FeatureMatrix, seg: Segmentation, codebook: Codebook) -> TokenSequence:
    """Pool, assign each segment to its nearest centroid by cosine, collapse.

    Cosine ties resolve to the lowest centroid index. A zero-norm pooled
    segment carries no direction to compare, so it is assigned the reserved
    silence id directly (raw id 0 when the codebook is uncollapsed) and
    counted in a logged warning.
    """
    pooled = pool_segments(semantic, seg)
    vectors = stack_embeddings(pooled)
    if vectors.shape[1] != codebook.dim:
        raise ValueError(
            f"{semantic.utterance_id!r}: embeddings have dim {vectors.shape[1]}, "
            f"codebook expects {codebook.dim}"
        )
    norms = np.linalg.norm(vectors, axis=1)
    zero = norms == 0.0
    if np.any(zero):
        logger.warning(
            "%s: %d zero-norm segment(s) assigned the silence id",
            semantic.utterance_id,
            int(zero.sum()),
        )
    unit = vectors / np.where(zero, 1.0, norms)[:, None]
    raw = np.argmax(unit @ codebook.centroids.astype(np.float64).T, axis=1)
    ids = codebook.apply_collapse(raw)
    ids[zero] = SILENCE_ID
    return TokenSequence(
        utterance_id=semantic.utterance_id,
        ids=ids,
        start_s=np.array([e.start_s for e in pooled]),
        end_s=np.array([e.end_s for e in pooled]),
    )


def write_token_ids(sequences, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for seq in sequences:
            f.write(f"{seq.utterance_id}\t{' '.join(str(int(i)) for i in seq.ids)}\n")


def write_token_spans(sequences, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for seq in sequences:
            for i, s, e in zip(seq.ids, seq.start_s, seq.end_s):
                f.write(f"{seq.utterance_id}\t{int(i)}\t{s:.6f}\t{e:.6f}\n")


def read_token_spans(path) -> dict[str, TokenSequence]:
    """Rebuild token sequences from a span TSV, keyed by utterance id."""
    rows: dict[str, list[tuple[int, float, float]]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated columns")
            rows.setdefault(cols[0], []).append((int(cols[1]), float(cols[2]), float(cols[3])))
    out = {}
    for utt, toks in rows.items():
        out[utt] = TokenSequence(
            utterance_id=utt,
            ids=np.array([t[0] for t in toks], dtype=np.int64),
            start_s=np.array([t[1] for t in toks]),
            end_s=np.array([t[2] for t in toks]),
        )
    return out
