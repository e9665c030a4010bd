"""Pathology-conditioned gait GAN toolkit.

Thin python surface over the C++ core: the full pipeline (ingest, train,
synthesize, evaluate, benchmark) plus a few standalone metrics.
"""

from pgcgan._core import (
    ContractError,
    DivergenceError,
    ValidationError,
    benchmark,
    default_config,
    evaluate,
    ingest,
    make_toy,
    nn_overlap,
    r_squared,
    synthesize,
    train,
)

__all__ = [
    "ContractError",
    "DivergenceError",
    "ValidationError",
    "benchmark",
    "default_config",
    "evaluate",
    "ingest",
    "make_toy",
    "nn_overlap",
    "r_squared",
    "synthesize",
    "train",
    "__version__",
]

__version__ = "0.1.0"
