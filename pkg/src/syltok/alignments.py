"""Reference syllable alignments.

Consumed as a TSV with one token per row::

    utterance_id <TAB> start_s <TAB> end_s <TAB> label <TAB> is_silence

``is_silence`` accepts 0/1 or true/false. Rows for one utterance must be
sorted and non-overlapping; gaps are allowed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TRUE = {"1", "true"}
_FALSE = {"0", "false"}


@dataclass(frozen=True)
class SyllableAlignment:
    utterance_id: str
    start_s: np.ndarray
    end_s: np.ndarray
    labels: tuple[str, ...]
    is_silence: np.ndarray

    def __post_init__(self):
        start = np.asarray(self.start_s, dtype=np.float64)
        end = np.asarray(self.end_s, dtype=np.float64)
        sil = np.asarray(self.is_silence, dtype=bool)
        labels = tuple(self.labels)
        n = start.shape[0]
        if not (end.shape[0] == sil.shape[0] == len(labels) == n) or n < 1:
            raise ValueError(f"{self.utterance_id!r}: alignment fields must be equal-length, non-empty")
        if np.any(end <= start):
            raise ValueError(f"{self.utterance_id!r}: alignment tokens must have positive length")
        if np.any(start[1:] < end[:-1] - 1e-9):
            raise ValueError(f"{self.utterance_id!r}: alignment tokens overlap or are unsorted")
        object.__setattr__(self, "start_s", start)
        object.__setattr__(self, "end_s", end)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "is_silence", sil)

    def __len__(self) -> int:
        return self.start_s.shape[0]


def _parse_flag(text: str, where: str) -> bool:
    low = text.strip().lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ValueError(f"{where}: is_silence must be 0/1 or true/false, got {text!r}")


def read_alignments_tsv(path) -> dict[str, SyllableAlignment]:
    rows: dict[str, list[tuple[float, float, str, bool]]] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated columns")
            utt, start, end, label, sil = cols
            rows.setdefault(utt, []).append(
                (float(start), float(end), label, _parse_flag(sil, f"{path}:{lineno}"))
            )
    out = {}
    for utt, toks in rows.items():
        out[utt] = SyllableAlignment(
            utterance_id=utt,
            start_s=np.array([t[0] for t in toks]),
            end_s=np.array([t[1] for t in toks]),
            labels=tuple(t[2] for t in toks),
            is_silence=np.array([t[3] for t in toks], dtype=bool),
        )
    return out


def write_alignments_tsv(alignments, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for aln in alignments:
            for s, e, lab, sil in zip(aln.start_s, aln.end_s, aln.labels, aln.is_silence):
                f.write(f"{aln.utterance_id}\t{s:.6f}\t{e:.6f}\t{lab}\t{int(sil)}\n")
