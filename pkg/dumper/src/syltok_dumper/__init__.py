"""Framewise feature extraction with a frozen pretrained speech encoder.

Reads an audio manifest, runs each utterance through the encoder once, and
writes the hidden states of the requested transformer blocks as binary
feature files the `syltok` tokenizer consumes directly.
"""

__version__ = "0.1.0"

from .audio import TARGET_SR, load_waveform
from .dump import DEFAULT_FRAME_PERIOD_S, DEFAULT_LAYERS, DumpJob, DumpResult, dump, read_audio_manifest
from .encoder import DEFAULT_MODEL, TAP_POINTS, FrameEncoder, check_layers
from .zsft import read_zsft, write_manifest, write_zsft

__all__ = [
    "DEFAULT_FRAME_PERIOD_S",
    "DEFAULT_LAYERS",
    "DEFAULT_MODEL",
    "DumpJob",
    "DumpResult",
    "FrameEncoder",
    "TAP_POINTS",
    "TARGET_SR",
    "check_layers",
    "dump",
    "load_waveform",
    "read_audio_manifest",
    "read_zsft",
    "write_manifest",
    "write_zsft",
]
