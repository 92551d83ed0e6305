"""Command-line entry points.

Stages are separate subcommands (``segment``, ``pool``, ``train-kmeans``,
``collapse-silence``, ``quantize``) plus evaluation commands
(``eval-boundaries``, ``eval-discovery``, ``score-pairs``) and a
``pipeline`` command chaining the processing stages over a config file.

Every stage is deterministic: rerunning with unchanged inputs and the same
seed writes byte-identical outputs. The pipeline is resumable; a stage
whose outputs already exist is skipped unless ``--force`` is given.
Utterance-level work fans out over a process pool with ``--jobs``, and
results are written in manifest order regardless of completion order.

Config files for ``pipeline`` are plain ``key = value`` text (``#`` starts
a comment); any key can be overridden by the matching flag, and flags win.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .alignments import read_alignments_tsv
from .boundary_metrics import (
    DEFAULT_SHIFT_GRID_S,
    DEFAULT_TOLERANCE_S,
    evaluate_boundaries,
    tune_shift,
)
from .clustering import SphericalKMeans
from .codebook import Codebook, collapse_silence, read_codebook, write_codebook
from .discovery_metrics import build_contingency, evaluate_discovery, write_contingency_tsv
from .errors import CollapseTieError, FileCorruptionError, FileFormatError, UndefinedMetricError
from .features import read_features, read_manifest
from .pair_scoring import pair_accuracy, read_pairs_tsv
from .reporting import format_table, write_kv
from .segmentation import (
    Segmentation,
    SyllableSegmenter,
    read_segmentation_tsv,
    times_to_frames,
    write_segmentation_tsv,
)
from .tokenization import (
    pool_segments,
    quantize,
    read_token_spans,
    write_token_ids,
    write_token_spans,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# parallel helpers

def _map_ordered(fn, items, jobs: int):
    """Apply ``fn`` over ``items``, preserving input order in the result."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        chunk = max(1, len(items) // (jobs * 4))
        return list(pool.map(fn, items, chunksize=chunk))


_CODEBOOK_CACHE: dict[str, Codebook] = {}


def _cached_codebook(path: str) -> Codebook:
    cb = _CODEBOOK_CACHE.get(path)
    if cb is None:
        cb = read_codebook(path)
        _CODEBOOK_CACHE[path] = cb
    return cb


def _segment_task(task):
    utt, path, params, frame_period = task
    m = read_features(path, utterance_id=utt)
    seg = SyllableSegmenter(**params).segment(m)
    if frame_period is not None:
        seg = Segmentation(utt, seg.boundaries, frame_period_s=frame_period)
    return seg


def _pool_task(task):
    utt, path, times = task
    m = read_features(path, utterance_id=utt)
    bounds = times_to_frames(times, m.frame_period_s, utterance_id=utt)
    seg = Segmentation(utt, bounds, frame_period_s=m.frame_period_s)
    pooled = pool_segments(m, seg)
    vectors = np.stack([e.vector for e in pooled]).astype(np.float32)
    spans = [(e.segment_index, e.start_s, e.end_s) for e in pooled]
    return utt, vectors, spans


def _quantize_task(task):
    utt, path, times, codebook_path = task
    m = read_features(path, utterance_id=utt)
    bounds = times_to_frames(times, m.frame_period_s, utterance_id=utt)
    seg = Segmentation(utt, bounds, frame_period_s=m.frame_period_s)
    return quantize(m, seg, _cached_codebook(codebook_path))


def _manifest_tasks(features_dir: str, manifest_path: str | None):
    if manifest_path is None:
        manifest_path = os.path.join(features_dir, "manifest.tsv")
    manifest = read_manifest(manifest_path)
    return manifest.resolved_paths(os.path.dirname(os.path.abspath(manifest_path)))


def _segments_for(entries, segments_path: str):
    times = read_segmentation_tsv(segments_path)
    for utt, _ in entries:
        if utt not in times:
            raise ValueError(f"{segments_path}: no segmentation for utterance {utt!r}")
    return times


# ---------------------------------------------------------------------------
# stage runners, shared by the stage subcommands and the pipeline

def run_segment(features_dir, manifest, output, mode, smoothing_window, prominence_factor,
                frame_period, jobs) -> None:
    entries = _manifest_tasks(features_dir, manifest)
    params = dict(mode=mode, smoothing_window=smoothing_window,
                  prominence_factor=prominence_factor)
    SyllableSegmenter(**params).fit()
    tasks = [(utt, path, params, frame_period) for utt, path in entries]
    segs = _map_ordered(_segment_task, tasks, jobs)
    write_segmentation_tsv(segs, output)
    logger.info("segmented %d utterance(s) -> %s", len(segs), output)


def run_pool(features_dir, manifest, segments, output_embeddings, output_index, jobs) -> None:
    entries = _manifest_tasks(features_dir, manifest)
    times = _segments_for(entries, segments)
    tasks = [(utt, path, times[utt]) for utt, path in entries]
    results = _map_ordered(_pool_task, tasks, jobs)
    matrix = np.concatenate([vectors for _, vectors, _ in results], axis=0)
    np.save(output_embeddings, matrix)
    with open(output_index, "w", encoding="utf-8") as f:
        for utt, _, spans in results:
            for idx, start, end in spans:
                f.write(f"{utt}\t{idx}\t{start:.6f}\t{end:.6f}\n")
    logger.info("pooled %d segment(s) -> %s", matrix.shape[0], output_embeddings)


def run_train_kmeans(embeddings, k, seed, max_iter, max_embeddings, output) -> None:
    matrix = np.load(embeddings)
    if max_embeddings is not None and max_embeddings < matrix.shape[0]:
        # The budget subsamples uniformly without replacement, seeded by the
        # run seed; kept in input order.
        rng = np.random.default_rng(seed)
        pick = np.sort(rng.choice(matrix.shape[0], size=max_embeddings, replace=False))
        matrix = matrix[pick]
        logger.info("training on %d of the pooled embeddings", max_embeddings)
    km = SphericalKMeans(n_clusters=k, max_iter=max_iter, random_state=seed).fit(matrix)
    write_codebook(Codebook(km.cluster_centers_), output)
    logger.info(
        "trained %d centroid(s) in %d pass(es), objective %.6f -> %s",
        k, km.n_iter_, km.objective_history_[-1], output,
    )


def run_collapse(codebook, output) -> None:
    collapsed = collapse_silence(read_codebook(codebook))
    write_codebook(collapsed, output)
    logger.info(
        "collapsed %d centroid(s) to a vocabulary of %d -> %s",
        collapsed.k, collapsed.collapsed_vocab_size, output,
    )


def run_quantize(features_dir, manifest, segments, codebook, output_ids, output_spans, jobs) -> None:
    entries = _manifest_tasks(features_dir, manifest)
    times = _segments_for(entries, segments)
    tasks = [(utt, path, times[utt], os.path.abspath(codebook)) for utt, path in entries]
    seqs = _map_ordered(_quantize_task, tasks, jobs)
    write_token_ids(seqs, output_ids)
    write_token_spans(seqs, output_spans)
    logger.info("quantized %d utterance(s) -> %s", len(seqs), output_ids)


# ---------------------------------------------------------------------------
# evaluation commands

def _parse_grid(text: str) -> list[float]:
    """A shift grid: either ``start:step:stop`` (inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValueError(f"grid must advance from start to stop, got {text!r}")
        n = int(round((stop - start) / step))
        return [round(start + i * step, 10) for i in range(n + 1)]
    return [float(p) for p in text.split(",")]


def _emit_report(metrics: dict, title: str, report_path: str | None) -> None:
    print(format_table(metrics, title=title))
    if report_path:
        write_kv(metrics, report_path)


def cmd_eval_boundaries(args) -> int:
    refs = read_alignments_tsv(args.alignments)
    preds = read_segmentation_tsv(args.segments)
    shift = args.shift
    if args.tune:
        grid = _parse_grid(args.grid) if args.grid else list(DEFAULT_SHIFT_GRID_S)
        if args.dev_alignments and args.dev_segments:
            dev_refs = read_alignments_tsv(args.dev_alignments)
            dev_preds = read_segmentation_tsv(args.dev_segments)
        else:
            logger.warning("no development set given; tuning the shift on the evaluation data")
            dev_refs, dev_preds = refs, preds
        shift = tune_shift(dev_refs, dev_preds, tol_s=args.tolerance, grid=grid)
        logger.info("tuned shift: %+.3f s", shift)
    report = evaluate_boundaries(refs, preds, tol_s=args.tolerance, shift_s=shift,
                                 strict_tokens=args.strict_tokens)
    _emit_report(report.as_dict(), "boundary agreement", args.report)
    return 0


def cmd_eval_discovery(args) -> int:
    refs = read_alignments_tsv(args.alignments)
    tokens = read_token_spans(args.spans)
    include = not args.exclude_silence
    report = evaluate_discovery(tokens, refs, include_silence=include)
    _emit_report(report.as_dict(), "token discovery", args.report)
    if args.contingency:
        write_contingency_tsv(build_contingency(tokens, refs, include_silence=include),
                              args.contingency)
    return 0


def cmd_score_pairs(args) -> int:
    pairs = read_pairs_tsv(args.pairs)
    acc = pair_accuracy(pairs, normalized=not args.unnormalized)
    _emit_report({"accuracy": acc, "n_pairs": len(pairs)}, "pair accuracy", args.report)
    return 0


# ---------------------------------------------------------------------------
# pipeline

@dataclass
class PipelineConfig:
    """End-to-end run settings; defaults are the standard operating point."""

    boundary_features_dir: str = ""
    semantic_features_dir: str = ""
    manifest: str = ""
    kmeans_train_manifest: str = ""
    out_dir: str = ""
    mode: str = "norm"
    smoothing_window: int = 3
    prominence_factor: float = 0.45
    frame_period_s: float | None = None
    k: int = 10000
    seed: int = 0
    max_iter: int = 300
    max_embeddings: int | None = None
    collapse: bool = True
    jobs: int = 1

    def validate(self):
        for name in ("boundary_features_dir", "semantic_features_dir", "out_dir"):
            if not getattr(self, name):
                raise ValueError(f"pipeline needs {name} (config key or flag)")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")


_BOOL_STRINGS = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def load_config(path) -> dict[str, str]:
    out = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value.strip("\"'")
    return out


def _build_pipeline_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    typed = {f.name: f for f in fields(PipelineConfig)}
    if args.config:
        for key, raw in load_config(args.config).items():
            if key not in typed:
                raise ValueError(f"unknown config key {key!r}")
            if key in ("frame_period_s", "prominence_factor"):
                value = float(raw)
            elif key in ("smoothing_window", "k", "seed", "max_iter", "max_embeddings", "jobs"):
                value = int(raw)
            elif key == "collapse":
                if raw.lower() not in _BOOL_STRINGS:
                    raise ValueError(f"config key 'collapse' must be a boolean, got {raw!r}")
                value = _BOOL_STRINGS[raw.lower()]
            else:
                value = raw
            setattr(cfg, key, value)
    for f in fields(PipelineConfig):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            setattr(cfg, f.name, flag_value)
    cfg.validate()
    return cfg


def _stage_done(paths, force: bool, name: str) -> bool:
    if not force and all(os.path.exists(p) for p in paths):
        logger.info("reusing %s output(s): %s", name, ", ".join(paths))
        return True
    return False


def cmd_pipeline(args) -> int:
    cfg = _build_pipeline_config(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    manifest = cfg.manifest or None
    train_manifest = cfg.kmeans_train_manifest or manifest

    def out(name: str) -> str:
        return os.path.join(cfg.out_dir, name)

    segments = out("segments.tsv")
    if not _stage_done([segments], args.force, "segment"):
        run_segment(cfg.boundary_features_dir, manifest, segments, cfg.mode,
                    cfg.smoothing_window, cfg.prominence_factor, cfg.frame_period_s, cfg.jobs)

    train_segments = segments
    if train_manifest != manifest:
        train_segments = out("segments_train.tsv")
        if not _stage_done([train_segments], args.force, "segment (training set)"):
            run_segment(cfg.boundary_features_dir, train_manifest, train_segments, cfg.mode,
                        cfg.smoothing_window, cfg.prominence_factor, cfg.frame_period_s, cfg.jobs)

    pooled = out("pooled.npy")
    pooled_index = out("pooled_index.tsv")
    if not _stage_done([pooled, pooled_index], args.force, "pool"):
        run_pool(cfg.semantic_features_dir, train_manifest, train_segments,
                 pooled, pooled_index, cfg.jobs)

    codebook = out("codebook.zscb")
    if not _stage_done([codebook], args.force, "train-kmeans"):
        run_train_kmeans(pooled, cfg.k, cfg.seed, cfg.max_iter, cfg.max_embeddings, codebook)

    quantize_codebook = codebook
    if cfg.collapse:
        quantize_codebook = out("codebook_collapsed.zscb")
        if not _stage_done([quantize_codebook], args.force, "collapse-silence"):
            run_collapse(codebook, quantize_codebook)

    tokens = out("tokens.txt")
    spans = out("token_spans.tsv")
    if not _stage_done([tokens, spans], args.force, "quantize"):
        run_quantize(cfg.semantic_features_dir, manifest, segments, quantize_codebook,
                     tokens, spans, cfg.jobs)
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_jobs(p):
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syltok", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="detect syllable boundaries for every manifest entry")
    p.add_argument("--features-dir", required=True)
    p.add_argument("--manifest", help="default: <features-dir>/manifest.tsv")
    p.add_argument("--output", required=True, help="segmentation TSV to write")
    p.add_argument("--mode", choices=("norm", "cosine"), default="norm")
    p.add_argument("--smoothing-window", type=int, default=3)
    p.add_argument("--prominence-factor", type=float, default=0.45)
    p.add_argument("--frame-period", type=float, default=None,
                   help="override the frame period declared in the feature files")
    _add_jobs(p)
    p.set_defaults(func=lambda a: run_segment(a.features_dir, a.manifest, a.output, a.mode,
                                              a.smoothing_window, a.prominence_factor,
                                              a.frame_period, a.jobs) or 0)

    p = sub.add_parser("pool", help="mean-pool semantic frames within segments")
    p.add_argument("--features-dir", required=True)
    p.add_argument("--manifest")
    p.add_argument("--segments", required=True)
    p.add_argument("--output-embeddings", required=True, help=".npy matrix of pooled embeddings")
    p.add_argument("--output-index", required=True, help="TSV: utterance, segment, start, end")
    _add_jobs(p)
    p.set_defaults(func=lambda a: run_pool(a.features_dir, a.manifest, a.segments,
                                           a.output_embeddings, a.output_index, a.jobs) or 0)

    p = sub.add_parser("train-kmeans", help="train a spherical k-means codebook")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--max-embeddings", type=int, default=None,
                   help="train on a seeded subsample this large (default: all)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=lambda a: run_train_kmeans(a.embeddings, a.k, a.seed, a.max_iter,
                                                   a.max_embeddings, a.output) or 0)

    p = sub.add_parser("collapse-silence", help="fold the silence branch of a codebook into id 0")
    p.add_argument("--codebook", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=lambda a: run_collapse(a.codebook, a.output) or 0)

    p = sub.add_parser("quantize", help="turn segments into discrete token sequences")
    p.add_argument("--features-dir", required=True)
    p.add_argument("--manifest")
    p.add_argument("--segments", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--output-ids", required=True)
    p.add_argument("--output-spans", required=True)
    _add_jobs(p)
    p.set_defaults(func=lambda a: run_quantize(a.features_dir, a.manifest, a.segments, a.codebook,
                                               a.output_ids, a.output_spans, a.jobs) or 0)

    p = sub.add_parser("eval-boundaries", help="boundary and token agreement against alignments")
    p.add_argument("--alignments", required=True)
    p.add_argument("--segments", required=True)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE_S)
    p.add_argument("--shift", type=float, default=0.0)
    p.add_argument("--tune", action="store_true", help="grid-search the shift before evaluating")
    p.add_argument("--dev-alignments")
    p.add_argument("--dev-segments")
    p.add_argument("--grid", help="start:step:stop or comma list of shifts, in seconds")
    p.add_argument("--strict-tokens", action="store_true",
                   help="score only syllables whose both edges are evaluable boundaries"
                        " (drop silence-adjacent and utterance-edge syllables)")
    p.add_argument("--report", help="write metrics as key-value lines to this path")
    p.set_defaults(func=cmd_eval_boundaries)

    p = sub.add_parser("eval-discovery", help="cluster quality and rate statistics")
    p.add_argument("--alignments", required=True)
    p.add_argument("--spans", required=True, help="token span TSV from quantize")
    p.add_argument("--exclude-silence", action="store_true",
                   help="drop tokens whose best overlap is a silence interval")
    p.add_argument("--report")
    p.add_argument("--contingency", help="also dump the contingency table TSV")
    p.set_defaults(func=cmd_eval_discovery)

    p = sub.add_parser("score-pairs", help="accuracy over scored minimal pairs")
    p.add_argument("--pairs", required=True)
    p.add_argument("--unnormalized", action="store_true",
                   help="compare total log likelihoods instead of per-token means")
    p.add_argument("--report")
    p.set_defaults(func=cmd_score_pairs)

    p = sub.add_parser("pipeline", help="segment, pool, train, collapse, and quantize in one go")
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--boundary-features-dir")
    p.add_argument("--semantic-features-dir")
    p.add_argument("--manifest")
    p.add_argument("--kmeans-train-manifest")
    p.add_argument("--out-dir")
    p.add_argument("--mode", choices=("norm", "cosine"))
    p.add_argument("--smoothing-window", type=int)
    p.add_argument("--prominence-factor", type=float)
    p.add_argument("--frame-period", type=float, dest="frame_period_s")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--max-embeddings", type=int)
    p.add_argument("--collapse", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--force", action="store_true", help="recompute stages whose outputs exist")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileFormatError, FileCorruptionError, CollapseTieError,
            UndefinedMetricError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
