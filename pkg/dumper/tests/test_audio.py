import numpy as np
import pytest
from scipy.io import wavfile

from syltok_dumper import load_waveform

from conftest import write_wav


def test_float32_wav_at_target_rate_passes_through(tmp_path):
    path = write_wav(tmp_path / "a.wav", seconds=0.5)
    _, raw = wavfile.read(path)
    wave = load_waveform(path)
    assert wave.dtype == np.float32
    np.testing.assert_array_equal(wave, raw)


# tolerance: one quantum of truncation plus the 32767/32768-style scale gap;
# int32 precision is below float32 resolution, so its bound is the f32 ulp
@pytest.mark.parametrize("dtype, tol", [
    (np.int16, 2 / 32768),
    (np.int32, 2**-23 + 2 / 2**31),
    (np.uint8, 2 / 128),
])
def test_integer_pcm_scales_into_unit_range(tmp_path, dtype, tol):
    path = write_wav(tmp_path / "a.wav", seconds=0.25, dtype=dtype)
    ref = load_waveform(write_wav(tmp_path / "ref.wav", seconds=0.25))
    wave = load_waveform(path)
    assert wave.shape == ref.shape
    assert np.max(np.abs(wave.astype(np.float64) - ref)) <= tol
    assert np.max(np.abs(wave)) <= 1.0


def test_stereo_mixes_down_to_mono(tmp_path):
    sr = 16000
    left = np.linspace(-0.5, 0.5, sr // 4, dtype=np.float32)
    right = np.zeros_like(left)
    path = tmp_path / "st.wav"
    wavfile.write(path, sr, np.stack([left, right], axis=1))
    wave = load_waveform(path)
    np.testing.assert_allclose(wave, left / 2, atol=1e-7)


def test_resamples_to_target_rate(tmp_path):
    path = write_wav(tmp_path / "a.wav", seconds=1.0, sr=8000)
    wave = load_waveform(path)
    assert wave.shape == (16000,)
    path = write_wav(tmp_path / "b.wav", seconds=1.0, sr=22050)
    assert load_waveform(path).shape == (16000,)


def test_empty_audio_rejected(tmp_path):
    path = tmp_path / "e.wav"
    wavfile.write(path, 16000, np.zeros(0, dtype=np.float32))
    with pytest.raises(ValueError, match="empty"):
        load_waveform(path)


def test_garbage_file_rejected(tmp_path):
    path = tmp_path / "g.wav"
    path.write_bytes(b"RIFFgarbage")
    with pytest.raises(ValueError):
        load_waveform(path)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_waveform(tmp_path / "missing.wav")
