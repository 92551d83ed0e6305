"""WAV loading for the encoder: mono float32 at a fixed sample rate."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.io import wavfile
from scipy.signal import resample_poly

TARGET_SR = 16000

# peak magnitude per integer PCM dtype, for scaling into [-1, 1]
_PCM_SCALE = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    if data.dtype in _PCM_SCALE:
        return data.astype(np.float64) / _PCM_SCALE[data.dtype]
    if np.issubdtype(data.dtype, np.floating):
        return data.astype(np.float64)
    raise ValueError(f"unsupported sample dtype {data.dtype}")


def load_waveform(path, target_sr: int = TARGET_SR) -> np.ndarray:
    """Decode a WAV file to mono float32 at ``target_sr``.

    Multi-channel audio is averaged down to one channel. Raises
    :class:`ValueError` for files scipy cannot parse, empty audio, or
    unsupported sample formats, and :class:`OSError` for unreadable paths.
    """
    sr, data = wavfile.read(path)
    if data.size == 0:
        raise ValueError("empty audio")
    wave = _to_float(data)
    if wave.ndim == 2:
        wave = wave.mean(axis=1)
    elif wave.ndim != 1:
        raise ValueError(f"unsupported channel layout with shape {data.shape}")
    if sr != target_sr:
        ratio = Fraction(target_sr, sr)
        wave = resample_poly(wave, ratio.numerator, ratio.denominator)
    return np.asarray(wave, dtype=np.float32)
