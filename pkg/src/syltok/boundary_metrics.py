"""Boundary and token agreement between predictions and reference alignments.

Reference boundaries are syllable token edges, except edges touching a
silence token and the utterance's first and last edge: silence onsets are
acoustically trivial and would inflate the scores. Predicted boundaries are
shifted by a constant first (clock offsets between feature frames and the
aligner are common), then predictions falling strictly inside a
tolerance-expanded silence interval are dropped, as are the structural
utterance-edge entries. Matching is one-to-one: candidate pairs within the
tolerance are taken greedily by smallest time difference, ties preferring
the earlier reference and then the earlier prediction.

Corpus metrics are micro-averages: counts are summed over utterances before
any ratio is formed.

Token-level scores treat a predicted segment as a hit when one reference
syllable token (never reused) has both endpoints within the tolerance.
Precision counts only predicted segments that do not sit inside an expanded
silence interval.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .alignments import SyllableAlignment
from .errors import UndefinedMetricError

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE_S = 0.05

# -100 ms .. +100 ms in 10 ms steps.
DEFAULT_SHIFT_GRID_S = tuple(i / 100 for i in range(-10, 11))


@dataclass(frozen=True)
class BoundaryReport:
    precision: float
    recall: float
    f1: float
    over_segmentation: float
    r_value: float
    token_precision: float
    token_recall: float
    token_f1: float
    n_ref: int
    n_pred: int
    shift_s: float

    def __post_init__(self):
        for name in ("precision", "recall", "f1", "token_precision", "token_recall", "token_f1"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.over_segmentation < -1.0:
            raise ValueError(f"over_segmentation must be >= -1, got {self.over_segmentation}")

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "over_segmentation": self.over_segmentation,
            "r_value": self.r_value,
            "token_precision": self.token_precision,
            "token_recall": self.token_recall,
            "token_f1": self.token_f1,
            "n_ref": self.n_ref,
            "n_pred": self.n_pred,
            "shift_s": self.shift_s,
        }


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def r_value(recall: float, over_segmentation: float) -> float:
    """Segmentation quality combining recall with over-segmentation.

    r1 is the distance from ideal (recall 1, no over-segmentation); r2 is
    the signed distance from the line where extra boundaries exactly pay
    for missed ones. Perfect segmentation gives exactly 1.
    """
    r1 = math.hypot(1.0 - recall, over_segmentation)
    r2 = (-over_segmentation + recall - 1.0) / math.sqrt(2.0)
    return 1.0 - (abs(r1) + abs(r2)) / 2.0


def reference_boundaries(aln: SyllableAlignment) -> np.ndarray:
    """Evaluable boundary times of one utterance, sorted.

    Shared edges count once. Edges of silence tokens and the utterance's
    first and last edge are excluded.
    """
    edges = np.unique(np.concatenate([aln.start_s, aln.end_s]))
    excluded = set(aln.start_s[aln.is_silence].tolist())
    excluded.update(aln.end_s[aln.is_silence].tolist())
    excluded.add(float(edges[0]))
    excluded.add(float(edges[-1]))
    keep = np.array([e not in excluded for e in edges.tolist()], dtype=bool)
    return edges[keep]


def _expanded_silences(aln: SyllableAlignment, tol_s: float) -> list[tuple[float, float]]:
    return [
        (float(s) - tol_s, float(e) + tol_s)
        for s, e, sil in zip(aln.start_s, aln.end_s, aln.is_silence)
        if sil
    ]


def _strictly_inside(t: float, intervals) -> bool:
    return any(lo < t < hi for lo, hi in intervals)


def predicted_interior(boundary_times, shift_s: float, silences) -> np.ndarray:
    """Shift predictions, drop the utterance-edge entries and in-silence ones."""
    times = np.asarray(boundary_times, dtype=np.float64)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("predicted boundary list must include the utterance edges")
    interior = times[1:-1] + shift_s
    if silences:
        keep = [not _strictly_inside(float(t), silences) for t in interior]
        interior = interior[np.asarray(keep, dtype=bool)] if len(keep) else interior
    return interior


def _optimal_match_count(ref: np.ndarray, pred: np.ndarray, tol_s: float) -> int:
    # Maximum matching for interval-compatibility on a line: walk predictions
    # in time order, always consuming the earliest still-matchable reference.
    count = 0
    i = 0
    for p in np.sort(pred):
        while i < ref.size and ref[i] < p - tol_s:
            i += 1
        if i < ref.size and ref[i] <= p + tol_s:
            count += 1
            i += 1
    return count


def match_boundaries(ref, pred, tol_s: float = DEFAULT_TOLERANCE_S) -> int:
    """Greedy one-to-one match count between two boundary time lists.

    Pairs within the tolerance are matched smallest time difference first;
    ties prefer the earlier reference, then the earlier prediction. The
    greedy count can fall below the true maximum matching in contrived
    configurations; when that happens it is still returned (the contract is
    the greedy procedure) but a warning is logged.
    """
    ref = np.sort(np.asarray(ref, dtype=np.float64))
    pred = np.sort(np.asarray(pred, dtype=np.float64))
    if not (tol_s >= 0):
        raise ValueError(f"tolerance must be >= 0, got {tol_s}")
    if ref.size == 0 or pred.size == 0:
        return 0
    candidates = []
    lo = np.searchsorted(pred, ref - tol_s, side="left")
    hi = np.searchsorted(pred, ref + tol_s, side="right")
    for i in range(ref.size):
        for j in range(int(lo[i]), int(hi[i])):
            candidates.append((abs(ref[i] - pred[j]), ref[i], pred[j], i, j))
    candidates.sort()
    ref_used = np.zeros(ref.size, dtype=bool)
    pred_used = np.zeros(pred.size, dtype=bool)
    matched = 0
    for _, _, _, i, j in candidates:
        if not ref_used[i] and not pred_used[j]:
            ref_used[i] = True
            pred_used[j] = True
            matched += 1
    optimal = _optimal_match_count(ref, pred, tol_s)
    if matched != optimal:
        logger.warning(
            "greedy boundary matching found %d pairs where %d are attainable", matched, optimal
        )
    return matched


def _check_aligned_keys(refs, preds):
    missing = sorted(set(refs) - set(preds))
    extra = sorted(set(preds) - set(refs))
    if missing or extra:
        problem = missing[0] if missing else extra[0]
        raise ValueError(f"utterance sets differ between references and predictions: {problem!r}")


def evaluate_boundaries(
    refs: dict[str, SyllableAlignment],
    preds: dict[str, np.ndarray],
    tol_s: float = DEFAULT_TOLERANCE_S,
    shift_s: float = 0.0,
    strict_tokens: bool = False,
) -> BoundaryReport:
    """Corpus-level boundary and token agreement.

    ``preds`` maps utterance ids to full boundary time arrays (with the 0
    and end-of-utterance entries still present). Raises
    :class:`UndefinedMetricError` when no evaluable reference boundary
    exists in the whole corpus. ``strict_tokens`` is forwarded to
    :func:`evaluate_tokens` and leaves the boundary-level fields untouched.
    """
    _check_aligned_keys(refs, preds)
    n_match = n_ref = n_pred = 0
    for utt, aln in refs.items():
        silences = _expanded_silences(aln, tol_s)
        ref = reference_boundaries(aln)
        pred = predicted_interior(preds[utt], shift_s, silences)
        n_match += match_boundaries(ref, pred, tol_s)
        n_ref += ref.size
        n_pred += pred.size
    if n_ref == 0:
        raise UndefinedMetricError("no evaluable reference boundaries in the corpus")
    precision = n_match / n_pred if n_pred else 0.0
    recall = n_match / n_ref
    over = n_pred / n_ref - 1.0
    tp, tr, tf = evaluate_tokens(
        refs, preds, tol_s=tol_s, shift_s=shift_s, strict_tokens=strict_tokens
    )
    return BoundaryReport(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        over_segmentation=over,
        r_value=r_value(recall, over),
        token_precision=tp,
        token_recall=tr,
        token_f1=tf,
        n_ref=n_ref,
        n_pred=n_pred,
        shift_s=shift_s,
    )


def _inside_any(start: float, end: float, intervals) -> bool:
    return any(lo <= start and end <= hi for lo, hi in intervals)


def evaluate_tokens(
    refs: dict[str, SyllableAlignment],
    preds: dict[str, np.ndarray],
    tol_s: float = DEFAULT_TOLERANCE_S,
    shift_s: float = 0.0,
    return_matches: bool = False,
    strict_tokens: bool = False,
):
    """Token precision/recall/F1 with both endpoints within tolerance.

    Predicted segments are consecutive boundary pairs after shifting; those
    lying inside a tolerance-expanded silence interval do not count toward
    precision. Each reference syllable token is creditable once; candidate
    pairs are matched greedily by summed endpoint error, ties preferring the
    earlier reference and then the earlier prediction.

    By default a syllable next to a silence (or at the utterance edge) is
    still scored: its silence-side endpoint takes part in the token match
    even though boundary metrics never evaluate that edge. With
    ``strict_tokens`` such syllables are dropped from the reference token
    set instead, so only syllables whose both edges are evaluable
    boundaries count toward recall.
    """
    _check_aligned_keys(refs, preds)
    hits = 0
    n_pred_tokens = 0
    n_ref_tokens = 0
    matches = []
    for utt, aln in refs.items():
        silences = _expanded_silences(aln, tol_s)
        speech = ~aln.is_silence
        ref_start = aln.start_s[speech]
        ref_end = aln.end_s[speech]
        if strict_tokens and ref_start.size:
            evaluated = set(reference_boundaries(aln).tolist())
            keep = np.array(
                [s in evaluated and e in evaluated
                 for s, e in zip(ref_start.tolist(), ref_end.tolist())],
                dtype=bool,
            )
            ref_start = ref_start[keep]
            ref_end = ref_end[keep]
        n_ref_tokens += ref_start.size

        times = np.asarray(preds[utt], dtype=np.float64) + shift_s
        seg_start, seg_end = times[:-1], times[1:]
        eligible = [
            j for j in range(seg_start.size)
            if not _inside_any(float(seg_start[j]), float(seg_end[j]), silences)
        ]
        n_pred_tokens += len(eligible)

        candidates = []
        for j in eligible:
            ds = np.abs(ref_start - seg_start[j])
            de = np.abs(ref_end - seg_end[j])
            for i in np.flatnonzero((ds <= tol_s) & (de <= tol_s)):
                candidates.append((float(ds[i] + de[i]), float(ref_start[i]), float(seg_start[j]), int(i), j))
        candidates.sort()
        ref_used = set()
        pred_used = set()
        for _, _, _, i, j in candidates:
            if i not in ref_used and j not in pred_used:
                ref_used.add(i)
                pred_used.add(j)
                hits += 1
                if return_matches:
                    matches.append((utt, j, int(i)))
    if n_ref_tokens == 0:
        raise UndefinedMetricError("no evaluable reference syllable tokens in the corpus")
    precision = hits / n_pred_tokens if n_pred_tokens else 0.0
    recall = hits / n_ref_tokens
    result = (precision, recall, f1_score(precision, recall))
    return (*result, matches) if return_matches else result


def tune_shift(
    refs: dict[str, SyllableAlignment],
    preds: dict[str, np.ndarray],
    tol_s: float = DEFAULT_TOLERANCE_S,
    grid=DEFAULT_SHIFT_GRID_S,
) -> float:
    """Pick the constant shift maximizing boundary F1 on held-out data.

    Ties prefer the smallest magnitude, then the smaller (more negative)
    value, so the result is deterministic.
    """
    grid = [float(s) for s in grid]
    if not grid:
        raise ValueError("shift grid must be non-empty")
    best = None
    for shift in grid:
        report = evaluate_boundaries(refs, preds, tol_s=tol_s, shift_s=shift)
        key = (-report.f1, abs(shift), shift)
        if best is None or key < best[0]:
            best = (key, shift)
    return best[1]
