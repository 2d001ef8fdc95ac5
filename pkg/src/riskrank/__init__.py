"""Multilayer default-risk scoring for loan portfolios."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .errors import ConvergenceError, ValidationError
from .ingest import LoanRecord, RiskySegment, SynthConfig, default_rate, generate_synthetic, parse_records
from .netmodel import MultilayerNetwork, build_network, supra_adjacency
from .pagerank import InfluenceSpec, PageRankParams, PageRankResult, personalized_pagerank
from .tsa import ClusterResult, dtw_distance, dtw_kmeans, elbow_select, pair_comparison
from .windows import WindowSpec, enumerate_windows, run_sequence

__all__ = [
    "BACKEND",
    "ClusterResult",
    "ConvergenceError",
    "InfluenceSpec",
    "LoanRecord",
    "MultilayerNetwork",
    "PageRankParams",
    "PageRankResult",
    "RiskySegment",
    "SynthConfig",
    "ValidationError",
    "WindowSpec",
    "__version__",
    "build_network",
    "default_rate",
    "dtw_distance",
    "dtw_kmeans",
    "elbow_select",
    "enumerate_windows",
    "generate_synthetic",
    "pair_comparison",
    "parse_records",
    "personalized_pagerank",
    "run_sequence",
    "supra_adjacency",
]
