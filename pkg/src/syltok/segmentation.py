"""Training-free syllable boundary detection on framewise speech features.

The per-frame L2 norm of features from a suitable self-supervised encoder
layer rises and falls with syllable-scale structure. Smoothing that signal
with a short moving average and keeping every sufficiently prominent local
maximum yields boundary frames without any training. A second mode runs the
same peak picking on the cosine distance between adjacent frames, which is
the classic change-point baseline.

The prominence of a peak is its height minus the higher of its two base
levels, where each base is the minimum of the signal walking away from the
peak until a strictly higher sample or the signal edge is reached. Peaks on
a plateau are indexed at the plateau's leftmost sample, and the first and
last samples are never peaks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .features import DEFAULT_FRAME_PERIOD_S, FeatureMatrix
from .validation import check_boundary_array, check_frames, check_odd_window

logger = logging.getLogger(__name__)

MODES = ("norm", "cosine")


def norm_signal(frames) -> np.ndarray:
    """Per-frame L2 norm of a T x D frame matrix, as float64 of length T."""
    frames = check_frames(frames)
    return np.linalg.norm(frames.astype(np.float64, copy=False), axis=1)


def cosine_distance_signal(frames) -> np.ndarray:
    """Cosine distance between adjacent frames, as float64 of length T - 1.

    A pair involving a zero-norm frame gets distance 1 (the orthogonal
    convention); such frames are counted in a logged warning. Requires at
    least two frames.
    """
    frames = check_frames(frames).astype(np.float64, copy=False)
    t = frames.shape[0]
    if t < 2:
        raise ValueError(f"cosine distance needs at least 2 frames, got {t}")
    norms = np.linalg.norm(frames, axis=1)
    dots = np.einsum("ij,ij->i", frames[:-1], frames[1:])
    denom = norms[:-1] * norms[1:]
    zero_pair = denom == 0.0
    n_zero = int(np.count_nonzero(norms == 0.0))
    if n_zero:
        logger.warning("%d zero-norm frame(s); affected distances set to 1", n_zero)
    cos = np.ones(t - 1)
    np.divide(dots, denom, out=cos, where=~zero_pair)
    np.clip(cos, -1.0, 1.0, out=cos)
    dist = 1.0 - cos
    dist[zero_pair] = 1.0
    return dist


def smooth(signal, window: int) -> np.ndarray:
    """Centered moving average with the window truncated at the edges.

    ``window`` must be odd; 1 returns the signal unchanged. With window 3,
    ``[0, 3, 0]`` becomes ``[1.5, 1.0, 1.5]``: edge samples average over the
    part of the window that exists.
    """
    window = check_odd_window(window)
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {s.shape}")
    n = s.shape[0]
    if window == 1 or n == 0:
        return s.copy()
    half = window // 2
    csum = np.concatenate(([0.0], np.cumsum(s)))
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def peak_prominences(signal) -> tuple[np.ndarray, np.ndarray]:
    """Find interior local maxima and their prominences.

    Returns ``(indices, prominences)``. A peak is a sample (or the leftmost
    sample of a plateau of equal values) whose nearest differing neighbors on
    both sides are strictly lower; the signal edges never qualify. Equal
    samples do not terminate the base search: the walk continues until a
    strictly higher sample or the edge.
    """
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {s.shape}")
    n = s.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)

    # Run-compress the signal: plateaus become single entries, so equal
    # neighbors cannot hide a peak and the base walks skip whole runs.
    change = np.flatnonzero(s[1:] != s[:-1]) + 1
    starts = np.concatenate(([0], change))
    vals = s[starts]
    m = vals.shape[0]
    if m < 3:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)

    peak_runs = np.flatnonzero(
        (vals[1:-1] > vals[:-2]) & (vals[1:-1] > vals[2:])
    ) + 1

    # One monotonic-stack pass per direction gives, for every run, the
    # minimum value between it and its nearest strictly higher run (or the
    # edge). Entries are (height, min over the span the entry covers).
    def base_levels(values):
        out = np.empty(len(values))
        stack: list[tuple[float, float]] = []
        for k, h in enumerate(values):
            acc = h
            while stack and stack[-1][0] <= h:
                acc = min(acc, stack.pop()[1])
            out[k] = acc
            stack.append((h, acc))
        return out

    vlist = vals.tolist()
    left = base_levels(vlist)
    right = base_levels(vlist[::-1])[::-1]

    heights = vals[peak_runs]
    proms = heights - np.maximum(left[peak_runs], right[peak_runs])
    return starts[peak_runs].astype(np.int64), proms


@dataclass(frozen=True)
class Segmentation:
    """Boundary frame indices of one utterance, always including 0 and T."""

    utterance_id: str
    boundaries: np.ndarray
    frame_period_s: float = DEFAULT_FRAME_PERIOD_S

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64)
        if b.ndim != 1 or b.size < 2:
            raise ValueError(f"{self.utterance_id!r}: need at least boundaries [0, T]")
        if b[0] != 0 or np.any(np.diff(b) <= 0):
            raise ValueError(f"{self.utterance_id!r}: boundaries must start at 0 and strictly increase")
        object.__setattr__(self, "boundaries", b)
        if not (self.frame_period_s > 0):
            raise ValueError(f"frame_period_s must be positive, got {self.frame_period_s}")

    @property
    def n_frames(self) -> int:
        return int(self.boundaries[-1])

    @property
    def n_segments(self) -> int:
        return self.boundaries.size - 1

    @property
    def boundary_times_s(self) -> np.ndarray:
        return self.boundaries * self.frame_period_s


class SyllableSegmenter(BaseEstimator):
    """Prominence-based boundary detector.

    There is nothing to fit; the estimator exists so the detector carries
    its parameters in scikit-learn form (``get_params`` / ``set_params``)
    and drops into pipelines and grid searches.

    Parameters
    ----------
    mode : {"norm", "cosine"}
        Signal to pick peaks on: per-frame L2 norm, or cosine distance
        between adjacent frames. In cosine mode a peak between frames t and
        t + 1 is emitted as boundary t + 1.
    smoothing_window : int
        Odd moving-average width applied before peak picking.
    prominence_factor : float
        A peak becomes a boundary when its prominence is at least
        ``prominence_factor`` times the population standard deviation of the
        raw (pre-smoothing) signal. A constant signal yields no interior
        boundaries.
    frame_period_s : float
        Seconds per frame, used when building :class:`Segmentation` objects
        from plain arrays.
    """

    def __init__(
        self,
        mode: str = "norm",
        smoothing_window: int = 3,
        prominence_factor: float = 0.45,
        frame_period_s: float = DEFAULT_FRAME_PERIOD_S,
    ):
        self.mode = mode
        self.smoothing_window = smoothing_window
        self.prominence_factor = prominence_factor
        self.frame_period_s = frame_period_s

    def _check_params(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        check_odd_window(self.smoothing_window)
        if not (self.prominence_factor >= 0):
            raise ValueError(f"prominence_factor must be >= 0, got {self.prominence_factor}")
        if not (self.frame_period_s > 0):
            raise ValueError(f"frame_period_s must be positive, got {self.frame_period_s}")

    def fit(self, X=None, y=None):
        """No-op apart from parameter validation; returns self."""
        self._check_params()
        return self

    def boundary_signal(self, frames) -> np.ndarray:
        """The raw detection signal for ``frames`` under the current mode."""
        self._check_params()
        if self.mode == "norm":
            return norm_signal(frames)
        return cosine_distance_signal(frames)

    def predict(self, frames) -> np.ndarray:
        """Boundary frame indices for one utterance, including 0 and T."""
        self._check_params()
        frames = check_frames(frames)
        n_frames = frames.shape[0]
        raw = self.boundary_signal(frames)
        # The threshold scale comes from the signal as observed, before
        # smoothing reshapes it.
        sigma = float(np.std(raw))
        if sigma == 0.0:
            interior = np.empty(0, dtype=np.int64)
        else:
            smoothed = smooth(raw, self.smoothing_window)
            idx, prom = peak_prominences(smoothed)
            interior = idx[prom >= self.prominence_factor * sigma]
            if self.mode == "cosine":
                interior = interior + 1
        boundaries = np.concatenate(([0], interior, [n_frames]))
        return check_boundary_array(boundaries, n_frames)

    def segment(self, m: FeatureMatrix) -> Segmentation:
        """Segment one utterance, carrying over its id and frame period."""
        return Segmentation(
            utterance_id=m.utterance_id,
            boundaries=self.predict(m.frames),
            frame_period_s=m.frame_period_s,
        )


def write_segmentation_tsv(segmentations, path) -> None:
    """One line per utterance: id, TAB, space-separated boundary seconds."""
    with open(path, "w", encoding="utf-8") as f:
        for seg in segmentations:
            times = " ".join(f"{t:.6f}" for t in seg.boundary_times_s)
            f.write(f"{seg.utterance_id}\t{times}\n")


def read_segmentation_tsv(path) -> dict[str, np.ndarray]:
    """Boundary times per utterance id, in file order."""
    out: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                utt, times_col = line.split("\t")
            except ValueError:
                raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns") from None
            if utt in out:
                raise ValueError(f"{path}:{lineno}: duplicate utterance_id {utt!r}")
            times = np.array([float(x) for x in times_col.split()], dtype=np.float64)
            if times.size < 2 or np.any(np.diff(times) <= 0):
                raise ValueError(f"{path}:{lineno}: boundary times must be >= 2 and increasing")
            out[utt] = times
    return out


def times_to_frames(times, frame_period_s: float, utterance_id: str = "?") -> np.ndarray:
    """Recover frame indices from boundary seconds written at 6 decimals."""
    t = np.asarray(times, dtype=np.float64)
    idx = np.rint(t / frame_period_s).astype(np.int64)
    if np.max(np.abs(idx * frame_period_s - t)) > 1e-5:
        raise ValueError(
            f"{utterance_id!r}: boundary times do not sit on the frame grid "
            f"(frame_period_s={frame_period_s})"
        )
    return idx
