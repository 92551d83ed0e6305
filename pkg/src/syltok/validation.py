"""Small input-validation helpers used by the estimators and operations."""

from __future__ import annotations

import numpy as np


def check_frames(frames, name: str = "frames") -> np.ndarray:
    """Validate a T x D frame matrix and return it as a 2-D float array.

    Accepts anything array-like; rejects empty axes and non-finite values.
    """
    arr = np.asarray(frames)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (T, D), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one frame and one dimension, got {arr.shape}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float64)
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_odd_window(window: int) -> int:
    if not isinstance(window, (int, np.integer)) or isinstance(window, bool):
        raise ValueError(f"smoothing window must be an integer, got {window!r}")
    if window < 1 or window % 2 == 0:
        raise ValueError(f"smoothing window must be odd and >= 1, got {window}")
    return int(window)


def check_boundary_array(boundaries, n_frames: int, name: str = "boundaries") -> np.ndarray:
    """Validate a full boundary index array: 0 = b_0 < ... < b_J = n_frames."""
    b = np.asarray(boundaries, dtype=np.int64)
    if b.ndim != 1 or b.size < 2:
        raise ValueError(f"{name} must be a 1-D array with at least [0, T]")
    if b[0] != 0:
        raise ValueError(f"{name} must start at 0, got {b[0]}")
    if b[-1] != n_frames:
        raise ValueError(f"{name} must end at T={n_frames}, got {b[-1]}")
    if np.any(np.diff(b) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return b
