"""Training-free syllable tokenization of speech features.

The toolkit detects syllable boundaries from prominent peaks in framewise
feature norms, mean-pools a semantic feature layer within each segment,
clusters the pooled embeddings with spherical k-means into a discrete
vocabulary (optionally folding the silence branch of the centroid
dendrogram into one reserved id), and evaluates the result: boundary and
token agreement against reference alignments, cluster purity and
normalized mutual information, bitrate, and minimal-pair accuracy.
"""

from .alignments import SyllableAlignment, read_alignments_tsv, write_alignments_tsv
from .boundary_metrics import (
    DEFAULT_SHIFT_GRID_S,
    DEFAULT_TOLERANCE_S,
    BoundaryReport,
    evaluate_boundaries,
    evaluate_tokens,
    f1_score,
    match_boundaries,
    predicted_interior,
    r_value,
    reference_boundaries,
    tune_shift,
)
from .clustering import SphericalKMeans
from .codebook import (
    SILENCE_ID,
    Codebook,
    collapse_silence,
    read_codebook,
    write_codebook,
)
from .discovery_metrics import (
    SILENCE_LABEL,
    UNMAPPED_LABEL,
    ContingencyTable,
    DiscoveryReport,
    bitrate_and_freq,
    build_contingency,
    evaluate_discovery,
    purity_and_snmi,
)
from .errors import (
    CollapseTieError,
    FileCorruptionError,
    FileFormatError,
    UndefinedMetricError,
)
from .features import (
    DEFAULT_FRAME_PERIOD_S,
    FeatureMatrix,
    Manifest,
    ManifestEntry,
    read_features,
    read_manifest,
    write_features,
    write_manifest,
)
from .pair_scoring import ScoredPair, pair_accuracy, read_pairs_tsv
from .segmentation import (
    Segmentation,
    SyllableSegmenter,
    cosine_distance_signal,
    norm_signal,
    peak_prominences,
    read_segmentation_tsv,
    smooth,
    times_to_frames,
    write_segmentation_tsv,
)
from .tokenization import (
    SegmentEmbedding,
    TokenSequence,
    pool_segments,
    quantize,
    read_token_spans,
    stack_embeddings,
    write_token_ids,
    write_token_spans,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryReport",
    "Codebook",
    "CollapseTieError",
    "ContingencyTable",
    "DEFAULT_FRAME_PERIOD_S",
    "DEFAULT_SHIFT_GRID_S",
    "DEFAULT_TOLERANCE_S",
    "DiscoveryReport",
    "FeatureMatrix",
    "FileCorruptionError",
    "FileFormatError",
    "Manifest",
    "ManifestEntry",
    "ScoredPair",
    "SegmentEmbedding",
    "Segmentation",
    "SILENCE_ID",
    "SILENCE_LABEL",
    "SphericalKMeans",
    "SyllableAlignment",
    "SyllableSegmenter",
    "TokenSequence",
    "UndefinedMetricError",
    "UNMAPPED_LABEL",
    "bitrate_and_freq",
    "build_contingency",
    "collapse_silence",
    "cosine_distance_signal",
    "evaluate_boundaries",
    "evaluate_discovery",
    "evaluate_tokens",
    "f1_score",
    "match_boundaries",
    "norm_signal",
    "pair_accuracy",
    "peak_prominences",
    "pool_segments",
    "predicted_interior",
    "purity_and_snmi",
    "quantize",
    "r_value",
    "read_alignments_tsv",
    "read_codebook",
    "read_features",
    "read_manifest",
    "read_pairs_tsv",
    "read_segmentation_tsv",
    "read_token_spans",
    "reference_boundaries",
    "smooth",
    "stack_embeddings",
    "times_to_frames",
    "tune_shift",
    "write_alignments_tsv",
    "write_codebook",
    "write_features",
    "write_manifest",
    "write_segmentation_tsv",
    "write_token_ids",
    "write_token_spans",
]
