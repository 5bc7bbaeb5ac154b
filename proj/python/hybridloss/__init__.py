"""Hybrid log/hinge loss toolkit: losses, consistency checks, chain inference."""

from ._core import (
    __version__,
    alpha_threshold,
    chunk_metrics,
    conditional_risk,
    grad_log_loss,
    hinge_loss,
    hybrid_loss,
    is_aligned,
    log_loss,
    log_partition,
    minimize_conditional_risk,
    subgrad_hinge_loss,
    subgrad_hybrid_loss,
    viterbi,
)

__all__ = [
    "__version__",
    "alpha_threshold",
    "chunk_metrics",
    "conditional_risk",
    "grad_log_loss",
    "hinge_loss",
    "hybrid_loss",
    "is_aligned",
    "log_loss",
    "log_partition",
    "minimize_conditional_risk",
    "subgrad_hinge_loss",
    "subgrad_hybrid_loss",
    "viterbi",
]
