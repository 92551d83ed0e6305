import logging

import numpy as np
import pytest

from syltok import (
    BoundaryReport,
    SyllableAlignment,
    UndefinedMetricError,
    evaluate_boundaries,
    evaluate_tokens,
    f1_score,
    match_boundaries,
    predicted_interior,
    r_value,
    read_alignments_tsv,
    reference_boundaries,
    tune_shift,
    write_alignments_tsv,
)
from oracles import exhaustive_max_matching


def aln(utt, rows):
    return SyllableAlignment(
        utterance_id=utt,
        start_s=np.array([r[0] for r in rows], dtype=np.float64),
        end_s=np.array([r[1] for r in rows], dtype=np.float64),
        labels=tuple(r[2] for r in rows),
        is_silence=np.array([r[3] for r in rows], dtype=bool),
    )


# ------------------------------------------------------------- primitives


def test_f1_score():
    assert f1_score(1.0, 1.0) == 1.0
    assert f1_score(0.0, 0.0) == 0.0
    assert f1_score(0.5, 1.0) == pytest.approx(2 / 3)


def test_r_value_anchors():
    assert r_value(1.0, 0.0) == 1.0
    assert r_value(0.75, 0.10) == pytest.approx(0.7416271931139916, abs=1e-12)
    # removing every boundary: recall 0, over-segmentation -1
    assert r_value(0.0, -1.0) < 0.3


def test_reference_boundaries_exclusions():
    a = aln(
        "u",
        [
            (0.0, 0.4, "<sil>", 1),
            (0.4, 0.9, "a", 0),
            (0.9, 1.3, "b", 0),
            (1.3, 1.8, "<sil>", 1),
            (1.8, 2.2, "c", 0),
        ],
    )
    # silence edges and the utterance edges go; only the a|b edge remains
    assert reference_boundaries(a).tolist() == [0.9]


def test_reference_boundaries_all_speech():
    a = aln("u", [(0.0, 0.5, "a", 0), (0.5, 1.0, "b", 0), (1.0, 1.5, "c", 0)])
    assert reference_boundaries(a).tolist() == [0.5, 1.0]


def test_predicted_interior():
    out = predicted_interior([0.0, 1.0, 2.0, 3.0], 0.5, [])
    assert out.tolist() == [1.5, 2.5]
    # strictly inside an expanded silence is dropped; the edge value stays
    out = predicted_interior([0.0, 1.0, 1.95, 2.5, 4.0], 0.0, [(1.95, 3.05)])
    assert out.tolist() == [1.0, 1.95]
    with pytest.raises(ValueError, match="utterance edges"):
        predicted_interior([0.5], 0.0, [])


# --------------------------------------------------------------- matching


def test_match_boundaries_simple():
    assert match_boundaries([1.0, 2.0], [1.0, 2.0], 0.05) == 2
    assert match_boundaries([1.0, 2.0], [1.04, 2.2], 0.05) == 1
    assert match_boundaries([], [1.0], 0.05) == 0
    assert match_boundaries([1.0], [], 0.05) == 0
    # one prediction cannot claim two references
    assert match_boundaries([1.0, 1.01], [1.0], 0.05) == 1


def test_match_boundaries_tolerance_edge():
    assert match_boundaries([1.0], [1.5], 0.5) == 1
    assert match_boundaries([1.0], [1.5000001], 0.5) == 0


def test_match_boundaries_known_suboptimal_case(caplog):
    # greedy takes (5, 4) first, stranding both 0 and 9; the optimum pairs
    # 0-4 and 5-9
    with caplog.at_level(logging.WARNING, logger="syltok.boundary_metrics"):
        got = match_boundaries([0.0, 5.0], [4.0, 9.0], 5.0)
    assert got == 1
    assert "2 are attainable" in caplog.text


def test_match_boundaries_against_exhaustive(caplog):
    rng = np.random.default_rng(8)
    suboptimal = 0
    for _ in range(200):
        ref = np.sort(rng.uniform(0, 10, size=int(rng.integers(0, 9))))
        pred = np.sort(rng.uniform(0, 10, size=int(rng.integers(0, 9))))
        tol = float(rng.choice([0.1, 0.5, 1.5]))
        caplog.clear()
        with caplog.at_level(logging.WARNING, logger="syltok.boundary_metrics"):
            got = match_boundaries(ref, pred, tol)
        opt = exhaustive_max_matching(ref.tolist(), pred.tolist(), tol)
        assert got <= opt
        if got < opt:
            suboptimal += 1
            assert "attainable" in caplog.text
        else:
            assert "attainable" not in caplog.text
    # greedy-by-distance is optimal in all but contrived layouts
    assert suboptimal <= 10


# ------------------------------------------------------------- evaluation


def _speech_aln(utt, edges):
    rows = [(edges[i], edges[i + 1], f"t{i}", 0) for i in range(len(edges) - 1)]
    return aln(utt, rows)


def test_perfect_predictions_score_exactly_one():
    refs = {"p": _speech_aln("p", [0.0, 0.5, 1.2, 2.0])}
    preds = {"p": np.array([0.0, 0.5, 1.2, 2.0])}
    rep = evaluate_boundaries(refs, preds)
    assert rep.precision == 1.0
    assert rep.recall == 1.0
    assert rep.f1 == 1.0
    assert rep.over_segmentation == 0.0
    assert rep.r_value == 1.0
    assert rep.token_precision == 1.0
    assert rep.token_recall == 1.0
    assert rep.token_f1 == 1.0
    assert rep.n_ref == 2 and rep.n_pred == 2


def test_micro_average_pools_counts():
    refs = {
        "x": _speech_aln("x", [0.0, 1.0, 2.0, 3.0]),
        "y": _speech_aln("y", [0.0, 1.0, 2.0, 3.0, 4.0]),
    }
    preds = {
        "x": np.array([0.0, 1.0, 2.4, 3.0]),
        "y": np.array([0.0, 1.0, 2.0, 3.0, 4.0]),
    }
    rep = evaluate_boundaries(refs, preds)
    # 1 of 2 matched in x, 3 of 3 in y: pooled 4/5, not the 0.75 mean of
    # the per-utterance recalls
    assert rep.recall == pytest.approx(0.8)
    assert rep.precision == pytest.approx(0.8)
    assert rep.n_ref == 5 and rep.n_pred == 5
    assert rep.over_segmentation == 0.0


def test_silence_interior_predictions_do_not_hurt_precision():
    refs = {
        "u": aln(
            "u",
            [
                (0.0, 1.0, "a", 0),
                (1.0, 2.0, "b", 0),
                (2.0, 3.0, "<sil>", 1),
                (3.0, 4.0, "c", 0),
            ],
        )
    }
    preds = {"u": np.array([0.0, 1.0, 2.5, 4.0])}
    rep = evaluate_boundaries(refs, preds)
    # 2.5 sits strictly inside the expanded silence and is discarded
    assert rep.n_ref == 1 and rep.n_pred == 1
    assert rep.precision == 1.0 and rep.recall == 1.0


def test_shift_parameter_equals_pre_shifted_predictions():
    rng = np.random.default_rng(9)
    refs = {"u": _speech_aln("u", [0.0, 0.7, 1.1, 1.9, 2.6])}
    base = np.array([0.0, 0.68, 1.3, 1.93, 2.6])
    shift = 0.03
    shifted = base.copy()
    shifted[1:-1] += shift
    a = evaluate_boundaries(refs, {"u": base}, shift_s=shift)
    b = evaluate_boundaries(refs, {"u": shifted}, shift_s=0.0)
    for key, val in a.as_dict().items():
        if key == "shift_s":
            continue
        assert val == pytest.approx(b.as_dict()[key]), key
    del rng


def test_no_reference_boundaries_is_undefined():
    refs = {"u": aln("u", [(0.0, 1.0, "<sil>", 1)])}
    with pytest.raises(UndefinedMetricError):
        evaluate_boundaries(refs, {"u": np.array([0.0, 1.0])})
    with pytest.raises(UndefinedMetricError):
        evaluate_tokens(refs, {"u": np.array([0.0, 1.0])})


def test_mismatched_utterance_sets():
    refs = {"u": _speech_aln("u", [0.0, 1.0, 2.0])}
    with pytest.raises(ValueError, match="differ"):
        evaluate_boundaries(refs, {"v": np.array([0.0, 2.0])})


def test_single_syllable_between_silences_counts_for_tokens():
    # boundary metrics are undefined here (every edge touches silence), but
    # the token metrics still see the one speech token
    refs = {
        "u": aln(
            "u",
            [(0.0, 0.5, "<sil>", 1), (0.5, 1.0, "da", 0), (1.0, 1.5, "<sil>", 1)],
        )
    }
    preds = {"u": np.array([0.0, 0.5, 1.0, 1.5])}
    with pytest.raises(UndefinedMetricError):
        evaluate_boundaries(refs, preds)
    tp, tr, tf = evaluate_tokens(refs, preds)
    assert (tp, tr, tf) == (1.0, 1.0, 1.0)


def test_token_metrics_require_both_endpoints():
    refs = {"u": _speech_aln("u", [0.0, 1.0, 2.0])}
    # first segment matches token (0,1); second has its end 0.2 off
    preds = {"u": np.array([0.0, 1.0, 1.8])}
    tp, tr, tf = evaluate_tokens(refs, preds)
    assert tp == 0.5 and tr == 0.5


def test_token_match_is_one_to_one():
    refs = {"u": _speech_aln("u", [0.0, 1.0])}
    preds = {"u": np.array([0.0, 0.98, 1.0])}
    tp, tr, _ = evaluate_tokens(refs, preds, tol_s=1.0)
    # both predicted segments fit the single token; only one may claim it
    assert tr == 1.0
    assert tp == 0.5


def test_evaluate_tokens_return_matches():
    refs = {"u": _speech_aln("u", [0.0, 1.0, 2.0])}
    preds = {"u": np.array([0.0, 1.0, 2.0])}
    tp, tr, tf, matches = evaluate_tokens(refs, preds, return_matches=True)
    assert tf == 1.0
    assert sorted(matches) == [("u", 0, 0), ("u", 1, 1)]


SILENCE_FLANKED = [
    (0.0, 1.0, "<sil>", True),
    (1.0, 2.0, "a", False),
    (2.0, 3.0, "b", False),
    (3.0, 4.0, "c", False),
    (4.0, 5.0, "<sil>", True),
]


def test_strict_tokens_drops_silence_adjacent_syllables():
    refs = {"u": aln("u", SILENCE_FLANKED)}
    preds = {"u": np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])}
    assert evaluate_tokens(refs, preds) == (1.0, 1.0, 1.0)
    tp, tr, tf = evaluate_tokens(refs, preds, strict_tokens=True)
    # only "b" keeps both edges evaluable; "a" and "c" leave the pool while
    # their perfectly placed segments still count against precision
    assert tr == 1.0
    assert tp == pytest.approx(1 / 3)
    assert tf == pytest.approx(0.5)


def test_strict_tokens_can_exhaust_the_reference_pool():
    # every syllable touches a silence, so the strict rule leaves nothing
    # to score even though one boundary (a|b) is still evaluable
    refs = {"u": aln("u", [
        (0.0, 1.0, "<sil>", True),
        (1.0, 2.0, "a", False),
        (2.0, 3.0, "b", False),
        (3.0, 4.0, "<sil>", True),
    ])}
    preds = {"u": np.array([0.0, 1.0, 2.0, 3.0, 4.0])}
    assert evaluate_boundaries(refs, preds).f1 == 1.0
    with pytest.raises(UndefinedMetricError, match="token"):
        evaluate_tokens(refs, preds, strict_tokens=True)
    with pytest.raises(UndefinedMetricError, match="token"):
        evaluate_boundaries(refs, preds, strict_tokens=True)


def test_strict_tokens_leaves_boundary_fields_alone():
    refs = {"u": aln("u", SILENCE_FLANKED)}
    preds = {"u": np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])}
    plain = evaluate_boundaries(refs, preds)
    strict = evaluate_boundaries(refs, preds, strict_tokens=True)
    for field in ("precision", "recall", "f1", "over_segmentation", "r_value",
                  "n_ref", "n_pred", "shift_s"):
        assert getattr(strict, field) == getattr(plain, field)
    assert plain.token_f1 == 1.0
    assert strict.token_recall == 1.0
    assert strict.token_precision == pytest.approx(1 / 3)


def test_tune_shift_recovers_offset():
    refs = {"u": _speech_aln("u", [0.0, 0.3, 0.7, 1.0])}
    pred = np.array([0.0, 0.3, 0.7, 1.0])
    pred[1:-1] += 0.04
    best = tune_shift(refs, {"u": pred}, tol_s=0.005)
    assert best == pytest.approx(-0.04)


def test_tune_shift_tie_prefers_zero():
    refs = {"u": _speech_aln("u", [0.0, 0.3, 0.7, 1.0])}
    preds = {"u": np.array([0.0, 0.3, 0.7, 1.0])}
    assert tune_shift(refs, preds) == 0.0


def test_tune_shift_rejects_empty_grid():
    refs = {"u": _speech_aln("u", [0.0, 0.5, 1.0])}
    with pytest.raises(ValueError, match="grid"):
        tune_shift(refs, {"u": np.array([0.0, 1.0])}, grid=[])


def test_boundary_report_validation():
    with pytest.raises(ValueError, match="precision"):
        BoundaryReport(1.2, 1, 1, 0, 1, 1, 1, 1, 1, 1, 0.0)
    with pytest.raises(ValueError, match="over_segmentation"):
        BoundaryReport(1, 1, 1, -2.0, 1, 1, 1, 1, 1, 1, 0.0)


# ------------------------------------------------------------- alignments


def test_alignments_round_trip(tmp_path):
    a = aln("u", [(0.0, 0.5, "<sil>", 1), (0.5, 1.0, "ka", 0)])
    path = tmp_path / "alignments.tsv"
    write_alignments_tsv([a], path)
    back = read_alignments_tsv(path)
    assert set(back) == {"u"}
    got = back["u"]
    assert got.labels == ("<sil>", "ka")
    assert got.is_silence.tolist() == [True, False]
    assert np.allclose(got.start_s, a.start_s)
    assert np.allclose(got.end_s, a.end_s)


def test_alignments_flag_spellings(tmp_path):
    path = tmp_path / "alignments.tsv"
    path.write_text("u\t0.0\t0.5\tx\ttrue\nu\t0.5\t1.0\ty\t0\n")
    got = read_alignments_tsv(path)["u"]
    assert got.is_silence.tolist() == [True, False]

    path.write_text("u\t0.0\t0.5\tx\tmaybe\n")
    with pytest.raises(ValueError, match="is_silence"):
        read_alignments_tsv(path)


def test_alignments_validation():
    with pytest.raises(ValueError, match="overlap"):
        aln("u", [(0.0, 0.6, "a", 0), (0.5, 1.0, "b", 0)])
    with pytest.raises(ValueError, match="positive"):
        aln("u", [(0.0, 0.0, "a", 0)])
    # gaps are fine
    a = aln("u", [(0.0, 0.4, "a", 0), (0.6, 1.0, "b", 0)])
    assert len(a) == 2


def test_alignments_bad_column_count(tmp_path):
    path = tmp_path / "alignments.tsv"
    path.write_text("u\t0.0\t0.5\tx\n")
    with pytest.raises(ValueError, match="5 tab-separated"):
        read_alignments_tsv(path)
