"""Competitive learning quantization of attributed graphs, with a bound-pruned accelerated trainer."""

from .dataset import Dataset, generate_synthetic, load, save
from .evaluation import (
    TrainReport,
    classification_accuracy,
    empirical_distortion,
    silhouette_index,
    speedup,
)
from .graphs import AttributedGraph, pad_to_order, permute, representation_distance
from .matching import (
    Alignment,
    GaParams,
    Matcher,
    brute_force_distance,
    exact_distance,
    graduated_assignment_distance,
    graph_distance,
)
from .quantizer import (
    BoundsState,
    Codebook,
    LearningRate,
    TrainConfig,
    approx_sample_mean,
    classify,
    estimate_bounds,
    init_furthest_first,
    learning_rate,
    train_accelerated,
    train_standard,
    update_bounds,
)

__version__ = "0.1.0"
