"""Batch extraction: audio manifest in, per-layer feature directories out."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

from .audio import load_waveform
from .encoder import DEFAULT_MODEL, FrameEncoder, check_layers
from .zsft import write_manifest, write_zsft

logger = logging.getLogger(__name__)

DEFAULT_LAYERS = (13, 22)
DEFAULT_FRAME_PERIOD_S = 0.02


@dataclass(frozen=True)
class DumpJob:
    audio_manifest: str
    output_dir: str
    layers: tuple[int, ...] = DEFAULT_LAYERS
    model: str = DEFAULT_MODEL
    device: str = "cpu"
    tap: str = "block"
    frame_period_s: float = DEFAULT_FRAME_PERIOD_S


@dataclass(frozen=True)
class DumpResult:
    manifests: dict[int, str]
    n_written: int
    skipped: tuple[str, ...] = field(default=())


def read_audio_manifest(path) -> list[tuple[str, str]]:
    """``utterance_id<TAB>audio_path`` rows; relative paths resolve against
    the manifest's directory."""
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 2 tab-separated columns")
            utt, audio = parts
            if not utt or os.sep in utt or "/" in utt or ".." in utt:
                raise ValueError(f"{path}:{lineno}: utterance_id {utt!r} is not a safe file name")
            if utt in seen:
                raise ValueError(f"{path}:{lineno}: duplicate utterance_id {utt!r}")
            seen.add(utt)
            rows.append((utt, os.path.normpath(os.path.join(base, audio))))
    if not rows:
        raise ValueError(f"{path}: no utterances")
    return rows


def dump(job: DumpJob, encoder: FrameEncoder | None = None) -> DumpResult:
    """Run the encoder over every manifest entry and write feature files.

    One file per (utterance, layer) lands in ``output_dir/layer<L>/``, and
    each layer directory gets a manifest listing what was written.
    Utterances whose audio cannot be decoded or is too short are logged and
    skipped; everything else is written in manifest order. The per-layer
    manifests only list successes, so a nonzero ``skipped`` means the dump
    is incomplete and the caller should fail loudly.
    """
    entries = read_audio_manifest(job.audio_manifest)
    if encoder is None:
        encoder = FrameEncoder(job.model, device=job.device)
    layers = check_layers(job.layers, encoder.depth)
    if not (job.frame_period_s > 0):
        raise ValueError(f"frame_period_s must be positive, got {job.frame_period_s}")

    layer_dirs = {}
    for layer in layers:
        layer_dirs[layer] = os.path.join(job.output_dir, f"layer{layer}")
        os.makedirs(layer_dirs[layer], exist_ok=True)

    written: list[str] = []
    skipped: list[str] = []
    for utt, audio_path in entries:
        try:
            wave = load_waveform(audio_path)
            frames = encoder.encode(wave, layers, tap=job.tap)
        except (ValueError, OSError) as exc:
            logger.error("skipping %s: %s", utt, exc)
            skipped.append(utt)
            continue
        for layer in layers:
            write_zsft(os.path.join(layer_dirs[layer], f"{utt}.zsft"),
                       frames[layer], job.frame_period_s)
        written.append(utt)
        logger.info("wrote %s (%d frames)", utt, frames[layers[0]].shape[0])

    manifests = {}
    for layer in layers:
        manifest_path = os.path.join(layer_dirs[layer], "manifest.tsv")
        write_manifest(manifest_path, [(utt, f"{utt}.zsft") for utt in written])
        manifests[layer] = manifest_path
    logger.info("dumped %d utterances to %d layer dirs, %d skipped",
                len(written), len(layers), len(skipped))
    return DumpResult(manifests=manifests, n_written=len(written), skipped=tuple(skipped))
