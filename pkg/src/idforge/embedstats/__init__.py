"""Distribution-level statistics over image embeddings: FID and t-SNE."""

from .features import FeatureSet, load_features, save_features, save_features_csv
from .fid import FeatureStats, fid, fid_from_features, matrix_sqrt_psd, stats
from .stub import embed_directory, embed_image
from .tsne import (
    TsneConfig,
    calibrate_perplexity,
    joint_probabilities,
    kl_divergence_and_grad,
    pairwise_sq_distances,
    tsne,
)

__all__ = [
    "FeatureSet",
    "FeatureStats",
    "TsneConfig",
    "calibrate_perplexity",
    "embed_directory",
    "embed_image",
    "fid",
    "fid_from_features",
    "joint_probabilities",
    "kl_divergence_and_grad",
    "load_features",
    "matrix_sqrt_psd",
    "pairwise_sq_distances",
    "save_features",
    "save_features_csv",
    "stats",
    "tsne",
]
