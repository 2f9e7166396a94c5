"""Sandwiched Renyi divergence calculus, chain-rule verification, and
leakage penalties for entropy-accumulation security proofs."""

__version__ = "0.1.0"

from .registers import RegisterLayout
from .operators import (
    ClassicalEvent,
    DensityOperator,
    QOperator,
    condition_on_event,
    conditional_state,
    matrix_power,
    partial_trace,
    purified_distance,
    purify,
    tensor_product,
)
from .channels import QuantumChannel, apply_channel
from .divergence import (
    ClassicalDistribution,
    RenyiOrder,
    SmoothingParam,
    block_divergence,
    classical_divergence,
    g_epsilon,
    renyi_divergence,
    smooth_max_divergence_upper,
)

__all__ = [
    "RegisterLayout",
    "QOperator",
    "DensityOperator",
    "ClassicalEvent",
    "QuantumChannel",
    "RenyiOrder",
    "SmoothingParam",
    "ClassicalDistribution",
    "matrix_power",
    "partial_trace",
    "tensor_product",
    "conditional_state",
    "purified_distance",
    "purify",
    "condition_on_event",
    "apply_channel",
    "renyi_divergence",
    "classical_divergence",
    "block_divergence",
    "g_epsilon",
    "smooth_max_divergence_upper",
]
