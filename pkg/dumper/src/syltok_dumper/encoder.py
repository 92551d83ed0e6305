"""Frozen pretrained speech encoder exposing framewise hidden states.

Layer numbering is 1-based over the transformer blocks: layer 13 means the
thirteenth block, matching how encoder layers are usually cited. Getting
this off by one silently degrades everything downstream, so the mapping to
the underlying hidden-state list is spelled out in :meth:`FrameEncoder.encode`
and covered by tests rather than left to convention.
"""

from __future__ import annotations

import logging

import numpy as np
import torch
from transformers import WavLMModel

logger = logging.getLogger(__name__)

DEFAULT_MODEL = "microsoft/wavlm-large"
TAP_POINTS = ("block", "pre")


def check_layers(layers, depth: int) -> tuple[int, ...]:
    out = []
    for layer in layers:
        if not isinstance(layer, (int, np.integer)) or isinstance(layer, bool):
            raise ValueError(f"layers must be integers, got {layer!r}")
        if not 1 <= layer <= depth:
            raise ValueError(f"layer {layer} outside 1..{depth}")
        out.append(int(layer))
    if not out:
        raise ValueError("at least one layer is required")
    if len(set(out)) != len(out):
        raise ValueError(f"duplicate layers in {out}")
    return tuple(out)


class FrameEncoder:
    """A frozen encoder turning a waveform into per-layer frame matrices.

    ``model`` names a pretrained checkpoint or a local directory. Inference
    runs without gradients on the given device, one utterance at a time, so
    identical input yields bit-identical output.
    """

    def __init__(self, model: str = DEFAULT_MODEL, device: str = "cpu"):
        self.model = WavLMModel.from_pretrained(model).to(device).eval()
        self.model.requires_grad_(False)
        self.device = device
        logger.info("loaded encoder %s (%d blocks, dim %d) on %s",
                    model, self.depth, self.model.config.hidden_size, device)

    @property
    def depth(self) -> int:
        return int(self.model.config.num_hidden_layers)

    def frame_count(self, n_samples: int) -> int:
        """Frames the convolutional frontend yields for ``n_samples``."""
        length = int(n_samples)
        cfg = self.model.config
        for kernel, stride in zip(cfg.conv_kernel, cfg.conv_stride):
            length = (length - kernel) // stride + 1
        return max(length, 0)

    def encode(self, wave: np.ndarray, layers, tap: str = "block") -> dict[int, np.ndarray]:
        """Per-layer (T, D) float32 matrices for one mono 16 kHz waveform.

        ``tap`` picks where in the stack layer L is read: ``"block"`` is the
        output of block L, ``"pre"`` the stream entering it (so layer 1 with
        ``"pre"`` gives the projected convolutional features).
        """
        if tap not in TAP_POINTS:
            raise ValueError(f"tap must be one of {TAP_POINTS}, got {tap!r}")
        layers = check_layers(layers, self.depth)
        wave = np.asarray(wave, dtype=np.float32)
        if wave.ndim != 1 or wave.size == 0:
            raise ValueError("waveform must be a non-empty 1-D array")
        if self.frame_count(wave.size) < 1:
            raise ValueError(f"waveform too short for one frame ({wave.size} samples)")
        batch = torch.from_numpy(wave).to(self.device)[None, :]
        with torch.inference_mode():
            states = self.model(batch, output_hidden_states=True).hidden_states
        offset = 0 if tap == "block" else 1
        out = {}
        for layer in layers:
            frames = states[layer - offset][0].cpu().numpy()
            out[layer] = np.ascontiguousarray(frames, dtype=np.float32)
        sizes = {m.shape[0] for m in out.values()}
        if len(sizes) != 1:
            raise RuntimeError(f"layers disagree on frame count: {sorted(sizes)}")
        return out
