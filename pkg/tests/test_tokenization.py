import logging

import numpy as np
import pytest

from syltok import (
    SILENCE_ID,
    Codebook,
    FeatureMatrix,
    Segmentation,
    TokenSequence,
    pool_segments,
    quantize,
    read_token_spans,
    stack_embeddings,
    write_token_ids,
    write_token_spans,
)


def _unit(rows):
    a = np.asarray(rows, dtype=np.float64)
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def test_pooling_matches_manual_means():
    rng = np.random.default_rng(0)
    frames = rng.normal(size=(10, 4))
    m = FeatureMatrix("u", frames, frame_period_s=0.02)
    seg = Segmentation("u", [0, 3, 7, 10], frame_period_s=0.02)
    pooled = pool_segments(m, seg)
    assert len(pooled) == 3
    # half-open ranges: [0,3), [3,7), [7,10)
    stored = m.frames.astype(np.float64)
    for emb, (a, b) in zip(pooled, [(0, 3), (3, 7), (7, 10)]):
        expect = stored[a:b].sum(axis=0) / (b - a)
        assert np.allclose(emb.vector, expect, atol=1e-12)
    assert pooled[1].start_s == pytest.approx(0.06)
    assert pooled[1].end_s == pytest.approx(0.14)
    assert [e.segment_index for e in pooled] == [0, 1, 2]


def test_pooling_single_frame_segments():
    m = FeatureMatrix("u", np.diag([1.0, 2.0, 3.0]))
    seg = Segmentation("u", [0, 1, 2, 3])
    pooled = pool_segments(m, seg)
    vecs = np.stack([e.vector for e in pooled])
    assert np.allclose(vecs, np.diag([1.0, 2.0, 3.0]))


def test_pooling_rejects_frame_count_mismatch():
    m = FeatureMatrix("u", np.ones((5, 2)))
    seg = Segmentation("u", [0, 2, 6])
    with pytest.raises(ValueError, match="5"):
        pool_segments(m, seg)


def test_stack_embeddings():
    m = FeatureMatrix("u", np.ones((4, 3)))
    seg = Segmentation("u", [0, 2, 4])
    x = stack_embeddings(pool_segments(m, seg))
    assert x.shape == (2, 3)
    assert x.dtype == np.float64
    with pytest.raises(ValueError, match="no embeddings"):
        stack_embeddings([])


def test_quantize_recovers_prototypes():
    protos = _unit(np.eye(4) + 0.01)
    cb = Codebook(protos)
    # three segments built from prototypes 2, 0, 3
    frames = np.concatenate(
        [np.tile(protos[2], (3, 1)), np.tile(protos[0], (2, 1)), np.tile(protos[3], (4, 1))]
    )
    m = FeatureMatrix("u", frames, frame_period_s=0.02)
    seg = Segmentation("u", [0, 3, 5, 9], frame_period_s=0.02)
    toks = quantize(m, seg, cb)
    assert toks.ids.tolist() == [2, 0, 3]
    assert toks.start_s.tolist() == pytest.approx([0.0, 0.06, 0.10])
    assert toks.end_s.tolist() == pytest.approx([0.06, 0.10, 0.18])
    assert toks.duration_s == pytest.approx(0.18)


def test_quantize_applies_collapse_map():
    protos = _unit(np.eye(3))
    cb = Codebook(protos, collapse_map=np.array([2, 0, 1]), collapsed_vocab_size=3)
    frames = np.concatenate([np.tile(protos[0], (2, 1)), np.tile(protos[1], (2, 1))])
    m = FeatureMatrix("u", frames)
    toks = quantize(m, Segmentation("u", [0, 2, 4]), cb)
    assert toks.ids.tolist() == [2, 0]


def test_quantize_zero_segment_gets_silence_id(caplog):
    protos = _unit(np.eye(2) + 0.3)
    # raw id 0 maps to 1, so the zero segment's silence id must come from
    # the reserved constant, not from collapsing raw 0
    cb = Codebook(protos, collapse_map=np.array([1, 0]), collapsed_vocab_size=2)
    frames = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, 1.0]])
    m = FeatureMatrix("u", frames)
    with caplog.at_level(logging.WARNING, logger="syltok.tokenization"):
        toks = quantize(m, Segmentation("u", [0, 2, 4]), cb)
    assert toks.ids[0] == SILENCE_ID
    assert "zero-norm segment" in caplog.text


def test_quantize_scale_invariant():
    rng = np.random.default_rng(1)
    cb = Codebook(_unit(rng.normal(size=(5, 6))))
    frames = rng.normal(size=(12, 6))
    seg = Segmentation("u", [0, 4, 7, 12])
    a = quantize(FeatureMatrix("u", frames), seg, cb)
    b = quantize(FeatureMatrix("u", frames * 250.0), seg, cb)
    assert a.ids.tolist() == b.ids.tolist()


def test_quantize_tie_prefers_lowest_centroid():
    cb = Codebook(_unit([[1.0, 0.0], [0.0, 1.0]]))
    frames = np.tile(_unit([[1.0, 1.0]])[0], (2, 1))
    toks = quantize(FeatureMatrix("u", frames), Segmentation("u", [0, 2]), cb)
    assert toks.ids.tolist() == [0]


def test_quantize_dim_mismatch():
    cb = Codebook(_unit([[1.0, 0.0]]))
    m = FeatureMatrix("u", np.ones((2, 3)))
    with pytest.raises(ValueError, match="dim"):
        quantize(m, Segmentation("u", [0, 2]), cb)


def test_token_sequence_validation():
    with pytest.raises(ValueError, match="tile"):
        TokenSequence("u", [1, 2], [0.0, 0.6], [0.5, 1.0])
    with pytest.raises(ValueError, match="positive"):
        TokenSequence("u", [1], [0.0], [0.0])
    with pytest.raises(ValueError, match="tile"):
        TokenSequence("u", [1], [0.5], [1.0])
    with pytest.raises(ValueError, match="equal-length"):
        TokenSequence("u", [1, 2], [0.0], [1.0])


def test_token_files_round_trip(tmp_path):
    seqs = [
        TokenSequence("a", [3, 1, 3], [0.0, 0.5, 1.25], [0.5, 1.25, 2.0]),
        TokenSequence("b", [0], [0.0], [0.75]),
    ]
    ids_path = tmp_path / "tokens.txt"
    spans_path = tmp_path / "spans.tsv"
    write_token_ids(seqs, ids_path)
    write_token_spans(seqs, spans_path)

    assert ids_path.read_text().splitlines() == ["a\t3 1 3", "b\t0"]
    back = read_token_spans(spans_path)
    assert set(back) == {"a", "b"}
    assert back["a"].ids.tolist() == [3, 1, 3]
    assert np.allclose(back["a"].start_s, [0.0, 0.5, 1.25])
    assert np.allclose(back["a"].end_s, [0.5, 1.25, 2.0])
    assert back["b"].duration_s == pytest.approx(0.75)


def test_read_token_spans_rejects_bad_rows(tmp_path):
    path = tmp_path / "spans.tsv"
    path.write_text("a\t1\t0.0\n")
    with pytest.raises(ValueError, match="4 tab-separated"):
        read_token_spans(path)
