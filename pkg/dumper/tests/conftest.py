import numpy as np
import pytest
import torch
from scipy.io import wavfile
from transformers import WavLMConfig, WavLMModel

from syltok_dumper import FrameEncoder

# Small enough to build in a second, same conv frontend as the real
# checkpoints (stride product 320, so 1 s of 16 kHz audio gives 49 frames).
TINY_CONFIG = dict(
    hidden_size=32,
    num_hidden_layers=4,
    num_attention_heads=2,
    intermediate_size=64,
    conv_dim=(32,) * 7,
    num_feat_extract_layers=7,
)


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    torch.manual_seed(0)
    model = WavLMModel(WavLMConfig(**TINY_CONFIG))
    path = tmp_path_factory.mktemp("encoder") / "tiny"
    model.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def encoder(model_dir):
    return FrameEncoder(model_dir)


def write_wav(path, seconds=1.0, sr=16000, seed=0, channels=1, dtype=np.float32):
    rng = np.random.default_rng(seed)
    shape = (int(seconds * sr), channels) if channels > 1 else int(seconds * sr)
    wave = (rng.standard_normal(shape) * 0.1).astype(np.float64)
    if dtype == np.int16:
        data = (wave * 32767).astype(np.int16)
    elif dtype == np.int32:
        data = (wave * (2**31 - 1)).astype(np.int32)
    elif dtype == np.uint8:
        data = ((wave * 127) + 128).astype(np.uint8)
    else:
        data = wave.astype(dtype)
    wavfile.write(path, sr, data)
    return path
