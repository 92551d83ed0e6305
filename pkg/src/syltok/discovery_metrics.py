"""Cluster-quality and rate statistics for discovered token inventories.

Each discovered token is paired with the reference syllable it overlaps
most (ties to the earlier reference token). Reference silence intervals
participate under one reserved label so that a collapsed-silence id can be
credited for finding them; a flag drops them instead. Tokens overlapping no
reference at all land on a reserved out-of-alignment label and are counted
in a logged warning.

From the resulting contingency table come per-cluster purity (how pure each
cluster is), per-syllable purity (how concentrated each syllable is), and
the share of syllable-label uncertainty removed by knowing the cluster id,
I(C;S)/H(S) in bits. The rate statistics are the token frequency and the
entropic bitrate, frequency times the unigram entropy of the id stream.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .alignments import SyllableAlignment
from .tokenization import TokenSequence

logger = logging.getLogger(__name__)

SILENCE_LABEL = "<sil>"
UNMAPPED_LABEL = "<none>"


@dataclass(frozen=True)
class ContingencyTable:
    """Joint counts of (cluster id, reference label)."""

    counts: dict[tuple[int, str], int]
    n_unmapped: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def as_arrays(self) -> tuple[np.ndarray, list[int], list[str]]:
        """Dense count matrix plus its row (cluster) and column (label) keys."""
        clusters = sorted({c for c, _ in self.counts})
        labels = sorted({s for _, s in self.counts})
        row = {c: i for i, c in enumerate(clusters)}
        col = {s: i for i, s in enumerate(labels)}
        mat = np.zeros((len(clusters), len(labels)), dtype=np.int64)
        for (c, s), n in self.counts.items():
            mat[row[c], col[s]] = n
        return mat, clusters, labels


def _check_aligned_keys(tokens, refs):
    missing = sorted(set(refs) - set(tokens))
    extra = sorted(set(tokens) - set(refs))
    if missing or extra:
        problem = missing[0] if missing else extra[0]
        raise ValueError(f"utterance sets differ between tokens and references: {problem!r}")


def build_contingency(
    tokens: dict[str, TokenSequence],
    refs: dict[str, SyllableAlignment],
    include_silence: bool = True,
) -> ContingencyTable:
    """Count (cluster id, reference label) pairs by maximum temporal overlap.

    With ``include_silence`` false, tokens whose best overlap is a silence
    interval are left out of the table entirely.
    """
    _check_aligned_keys(tokens, refs)
    counts: Counter = Counter()
    n_unmapped = 0
    for utt, seq in tokens.items():
        aln = refs[utt]
        for tok_id, ts, te in zip(seq.ids, seq.start_s, seq.end_s):
            overlap = np.minimum(te, aln.end_s) - np.maximum(ts, aln.start_s)
            best = int(np.argmax(overlap))
            if overlap[best] <= 0.0:
                n_unmapped += 1
                counts[(int(tok_id), UNMAPPED_LABEL)] += 1
                continue
            if aln.is_silence[best]:
                if include_silence:
                    counts[(int(tok_id), SILENCE_LABEL)] += 1
                continue
            counts[(int(tok_id), aln.labels[best])] += 1
    if n_unmapped:
        logger.warning("%d token(s) overlap no reference interval", n_unmapped)
    return ContingencyTable(counts=dict(counts), n_unmapped=n_unmapped)


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p @ np.log2(p)))


def purity_and_snmi(table: ContingencyTable) -> tuple[float, float, float]:
    """(per-cluster purity, per-syllable purity, normalized mutual information).

    The last value is I(C;S)/H(S) in bits; a corpus with a single syllable
    label has H(S) = 0 and scores 1 by convention.
    """
    mat, _, _ = table.as_arrays()
    n = mat.sum()
    if n == 0:
        raise ValueError("contingency table is empty")
    pc_purity = float(mat.max(axis=1).sum() / n)
    ps_purity = float(mat.max(axis=0).sum() / n)

    joint = mat / n
    pc = joint.sum(axis=1)
    ps = joint.sum(axis=0)
    h_c = _entropy_bits(pc)
    h_s = _entropy_bits(ps)
    nz = joint > 0
    outer = np.outer(pc, ps)
    mi = float((joint[nz] * np.log2(joint[nz] / outer[nz])).sum())
    mi = max(mi, 0.0)
    if mi > min(h_c, h_s) + 1e-9:
        raise AssertionError(f"I(C;S)={mi} exceeds min(H(C), H(S))={min(h_c, h_s)}")
    snmi = 1.0 if h_s == 0.0 else mi / h_s
    if not -1e-9 <= snmi <= 1.0 + 1e-9:
        raise AssertionError(f"normalized mutual information out of range: {snmi}")
    return pc_purity, ps_purity, float(min(max(snmi, 0.0), 1.0))


def bitrate_and_freq(tokens, total_duration_s: float) -> tuple[float, float]:
    """(entropic bitrate in bits/s, token frequency in Hz) of an id stream.

    ``tokens`` is an iterable of :class:`TokenSequence`. An empty stream is
    0 bits/s at 0 Hz.
    """
    seqs = list(tokens)
    ids = np.concatenate([s.ids for s in seqs]) if seqs else np.empty(0, dtype=np.int64)
    if ids.size == 0:
        return 0.0, 0.0
    if not total_duration_s > 0:
        raise ValueError(f"total_duration_s must be positive, got {total_duration_s}")
    freq = ids.size / total_duration_s
    _, counts = np.unique(ids, return_counts=True)
    entropy = _entropy_bits(counts / ids.size)
    return freq * entropy, freq


@dataclass(frozen=True)
class DiscoveryReport:
    pc_purity: float
    ps_purity: float
    snmi: float
    bitrate_bps: float
    token_freq_hz: float
    vocab_used: int

    def as_dict(self) -> dict:
        return {
            "pc_purity": self.pc_purity,
            "ps_purity": self.ps_purity,
            "snmi": self.snmi,
            "bitrate_bps": self.bitrate_bps,
            "token_freq_hz": self.token_freq_hz,
            "vocab_used": self.vocab_used,
        }


def evaluate_discovery(
    tokens: dict[str, TokenSequence],
    refs: dict[str, SyllableAlignment],
    include_silence: bool = True,
) -> DiscoveryReport:
    """Full cluster-quality report; duration comes from the token spans."""
    table = build_contingency(tokens, refs, include_silence=include_silence)
    pc, ps, snmi = purity_and_snmi(table)
    total_duration = sum(seq.duration_s for seq in tokens.values())
    bitrate, freq = bitrate_and_freq(tokens.values(), total_duration)
    vocab = np.unique(np.concatenate([s.ids for s in tokens.values()])).size
    return DiscoveryReport(
        pc_purity=pc,
        ps_purity=ps,
        snmi=snmi,
        bitrate_bps=bitrate,
        token_freq_hz=freq,
        vocab_used=int(vocab),
    )


def write_contingency_tsv(table: ContingencyTable, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for (c, s), n in sorted(table.counts.items()):
            f.write(f"{c}\t{s}\t{n}\n")
