"""Accuracy on scored minimal pairs.

A pair holds a positive and a negative item with language-model total log
likelihoods and token counts. The normalized criterion compares mean log
likelihood per token; the unnormalized one compares the raw totals, which
favors shorter token streams. The two can disagree on the same scores, so
which one a benchmark uses is part of its definition.

Pairs are read from a TSV with columns
``pair_id, pos_ll, pos_tokens, neg_ll, neg_tokens``.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ScoredPair:
    pair_id: str
    pos_ll: float
    pos_tokens: int
    neg_ll: float
    neg_tokens: int

    def __post_init__(self):
        if self.pos_tokens < 1 or self.neg_tokens < 1:
            raise ValueError(f"{self.pair_id!r}: token counts must be >= 1")


def pair_accuracy(pairs, normalized: bool = True) -> float:
    """Fraction of pairs where the positive item wins; exact ties score 0.5."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no pairs to score")
    score = 0.0
    for p in pairs:
        if normalized:
            pos, neg = p.pos_ll / p.pos_tokens, p.neg_ll / p.neg_tokens
        else:
            pos, neg = p.pos_ll, p.neg_ll
        if pos > neg:
            score += 1.0
        elif pos == neg:
            score += 0.5
    return score / len(pairs)


def read_pairs_tsv(path) -> list[ScoredPair]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise ValueError(f"{path}:{lineno}: expected 5 tab-separated columns")
            out.append(
                ScoredPair(
                    pair_id=cols[0],
                    pos_ll=float(cols[1]),
                    pos_tokens=int(cols[2]),
                    neg_ll=float(cols[3]),
                    neg_tokens=int(cols[4]),
                )
            )
    return out
