"""Shared fixtures: deterministic synthetic corpora with known answers."""

import numpy as np
import pytest

from syltok import (
    FeatureMatrix,
    Manifest,
    ManifestEntry,
    write_features,
    write_manifest,
)

FRAME_PERIOD_S = 0.02


def build_corpus(
    root,
    n_utts=20,
    n_frames=200,
    n_prototypes=8,
    seed=0,
    d_boundary=8,
    d_semantic=16,
    bump_height=2.0,
    bump_sd=1.2,
    base_noise=0.05,
    proto_noise=0.01,
):
    """Write a synthetic two-layer feature corpus with known structure.

    The boundary layer's frame norms carry Gaussian bumps at known interior
    frames; the semantic layer is piecewise-constant over the true segments,
    one of ``n_prototypes`` unit prototypes plus small noise. Alignments
    label each true segment with its prototype. Returns a dict of paths and
    ground truth.
    """
    rng = np.random.default_rng(seed)
    protos = rng.normal(size=(n_prototypes, d_semantic))
    protos /= np.linalg.norm(protos, axis=1, keepdims=True)

    boundary_dir = root / "boundary"
    semantic_dir = root / "semantic"
    boundary_dir.mkdir(parents=True)
    semantic_dir.mkdir(parents=True)

    direction = np.zeros(d_boundary)
    direction[0] = 1.0
    entries = []
    alignment_lines = []
    true_bumps = {}
    true_labels = {}
    t = np.arange(n_frames)
    for i in range(n_utts):
        utt = f"utt{i:04d}"
        pos = 6 + int(rng.integers(0, 5))
        bumps = []
        while pos <= n_frames - 7:
            bumps.append(pos)
            pos += int(rng.integers(8, 15))
        bumps = np.array(bumps, dtype=np.int64)

        signal = 1.0 + base_noise * rng.random(n_frames)
        for c in bumps:
            signal = signal + bump_height * np.exp(-0.5 * ((t - c) / bump_sd) ** 2)
        write_features(
            FeatureMatrix(utt, np.outer(signal, direction), FRAME_PERIOD_S),
            boundary_dir / f"{utt}.zsft",
        )

        edges = np.concatenate(([0], bumps, [n_frames]))
        labels = rng.integers(0, n_prototypes, size=edges.size - 1)
        frames = np.empty((n_frames, d_semantic))
        for j, lab in enumerate(labels):
            a, b = int(edges[j]), int(edges[j + 1])
            frames[a:b] = protos[lab] + proto_noise * rng.normal(size=(b - a, d_semantic))
        write_features(FeatureMatrix(utt, frames, FRAME_PERIOD_S), semantic_dir / f"{utt}.zsft")

        for j, lab in enumerate(labels):
            alignment_lines.append(
                f"{utt}\t{edges[j] * FRAME_PERIOD_S:.6f}\t{edges[j + 1] * FRAME_PERIOD_S:.6f}"
                f"\ts{lab}\t0\n"
            )
        entries.append(ManifestEntry(utt, f"{utt}.zsft"))
        true_bumps[utt] = bumps
        true_labels[utt] = labels

    for directory in (boundary_dir, semantic_dir):
        write_manifest(Manifest(entries), directory / "manifest.tsv")
    alignments = root / "alignments.tsv"
    alignments.write_text("".join(alignment_lines), encoding="utf-8")

    return {
        "root": root,
        "boundary_dir": boundary_dir,
        "semantic_dir": semantic_dir,
        "alignments": alignments,
        "prototypes": protos,
        "true_bumps": true_bumps,
        "true_labels": true_labels,
        "n_prototypes": n_prototypes,
        "frame_period_s": FRAME_PERIOD_S,
    }


@pytest.fixture
def corpus_factory(tmp_path):
    def make(**kwargs):
        return build_corpus(tmp_path, **kwargs)

    return make
