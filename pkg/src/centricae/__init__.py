"""Radial anomaly detection: baselines, radial deformation and centric autoencoders."""

__version__ = "0.1.0"

from ._backend import BACKEND, available_backends  # noqa: E402
from .cae import CaeModel, SearchBudget, classify, docae, eicae_sweep, train_cae, train_cpae  # noqa: E402
from .deform import (  # noqa: E402
    AscentConfig,
    BasinHopConfig,
    GreedyConfig,
    RadialScorer,
    angular_ascent,
    basin_hopping,
    greedy_factor_search,
    radial_deformation,
)
from .geometry import Dataset, SplitSpec, generate_artificial, load_csv, split  # noqa: E402
from .metrics import auroc, fraud_rank_sum, roc_curve, tpr_at_fpr  # noqa: E402

__all__ = [
    "BACKEND", "available_backends", "CaeModel", "SearchBudget", "classify", "docae", "eicae_sweep",
    "train_cae", "train_cpae", "AscentConfig", "BasinHopConfig", "GreedyConfig", "RadialScorer",
    "angular_ascent", "basin_hopping", "greedy_factor_search", "radial_deformation", "Dataset",
    "SplitSpec", "generate_artificial", "load_csv", "split", "auroc", "fraud_rank_sum", "roc_curve",
    "tpr_at_fpr",
]
