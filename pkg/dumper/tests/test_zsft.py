import struct

import numpy as np
import pytest

from syltok_dumper import read_zsft, write_manifest, write_zsft


def test_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    frames = rng.standard_normal((17, 9)).astype(np.float32)
    path = tmp_path / "u.zsft"
    write_zsft(path, frames, 0.02)
    back, period = read_zsft(path)
    assert period == 0.02
    assert back.tobytes() == frames.tobytes()


def test_write_is_deterministic(tmp_path):
    frames = np.linspace(0, 1, 12, dtype=np.float32).reshape(4, 3)
    write_zsft(tmp_path / "a.zsft", frames, 0.01)
    write_zsft(tmp_path / "b.zsft", frames, 0.01)
    assert (tmp_path / "a.zsft").read_bytes() == (tmp_path / "b.zsft").read_bytes()


def test_float64_input_is_stored_as_float32(tmp_path):
    frames = np.array([[1.0, 2.0], [3.0, 4.0]])
    write_zsft(tmp_path / "u.zsft", frames, 0.02)
    back, _ = read_zsft(tmp_path / "u.zsft")
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back, frames.astype(np.float32))


@pytest.mark.parametrize("frames, period", [
    (np.empty((0, 4), dtype=np.float32), 0.02),
    (np.zeros(5, dtype=np.float32), 0.02),
    (np.array([[np.nan, 0.0]], dtype=np.float32), 0.02),
    (np.array([[1, 2]], dtype=np.int32), 0.02),
    (np.ones((2, 2), dtype=np.float32), 0.0),
    (np.ones((2, 2), dtype=np.float32), -0.02),
])
def test_writer_rejects_bad_input(tmp_path, frames, period):
    with pytest.raises(ValueError):
        write_zsft(tmp_path / "u.zsft", frames, period)


def test_reader_rejects_bad_magic(tmp_path):
    path = tmp_path / "u.zsft"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(ValueError, match="magic"):
        read_zsft(path)


def test_reader_rejects_bad_version(tmp_path):
    path = tmp_path / "u.zsft"
    path.write_bytes(struct.pack("<4sIIId", b"ZSFT", 9, 1, 1, 0.02) + bytes(4))
    with pytest.raises(ValueError, match="version"):
        read_zsft(path)


def test_reader_rejects_size_mismatch(tmp_path):
    path = tmp_path / "u.zsft"
    write_zsft(path, np.ones((3, 2), dtype=np.float32), 0.02)
    good = path.read_bytes()
    path.write_bytes(good[:-4])
    with pytest.raises(ValueError, match="size"):
        read_zsft(path)
    path.write_bytes(good + b"xx")
    with pytest.raises(ValueError, match="size"):
        read_zsft(path)


def test_tokenizer_package_reads_our_files(tmp_path):
    syltok = pytest.importorskip("syltok")
    frames = np.random.default_rng(1).standard_normal((30, 8)).astype(np.float32)
    path = tmp_path / "utt.zsft"
    write_zsft(path, frames, 0.02)
    m = syltok.read_features(path, utterance_id="utt")
    assert m.frame_period_s == 0.02
    assert m.frames.tobytes() == frames.tobytes()


def test_manifest_written_in_order(tmp_path):
    path = tmp_path / "manifest.tsv"
    write_manifest(path, [("b", "b.zsft"), ("a", "a.zsft")])
    assert path.read_text() == "b\tb.zsft\na\ta.zsft\n"
