"""Witness-state constructions behind the divergence chain decompositions.

The common pattern: given a state rho and a PSD reference on a register
group S, form the tilted marginal

    m_S = (rho_S^{1/2} ref_S^{(1-a)/a} rho_S^{1/2})^a / tr[...]

and lift it through the conditional state to the full system,

    ext = m_S^{1/2} rho_{rest|S} m_S^{1/2}.

The tilted extension has the same conditional state on the remaining
registers as rho, reduces to m_S, and turns the divergence against a
product reference into an exact two-term decomposition.  The tripartite
split (reference on two factors) and the bipartite split (reference on
one factor) are the two instantiations used by the verifiers.
"""

from dataclasses import dataclass, field

import numpy as np

from ._linalg import herm, trace_norm
from .channels import apply_channel
from .errors import SingularOperator
from .operators import (
    DensityOperator,
    QOperator,
    conditional_state,
    embed,
    matrix_power,
    partial_trace,
)

TRACE_SLACK = 1e-6


@dataclass
class SplitConstruction:
    """Tilted marginal and its lift to the full register set."""

    marginal: DensityOperator
    extension: DensityOperator
    marginal_labels: tuple
    alpha: float
    diagnostics: dict = field(default_factory=dict)


def tilted_marginal(rho, reference, alpha, labels):
    """Normalized (rho_S^{1/2} ref^{(1-a)/a} rho_S^{1/2})^a on register group S."""
    labels = [lbl for lbl in rho.labels if lbl in set(labels)]
    red = partial_trace(rho, labels)
    ref = reference.permuted(tuple(red.labels)) if reference.labels != tuple(red.labels) \
        else reference
    root = matrix_power(QOperator(red.layout, red.matrix), 0.5)
    mid = matrix_power(QOperator(ref.layout, ref.matrix), (1.0 - alpha) / alpha,
                       use_pseudoinverse=True)
    core = herm(root.matrix @ mid.matrix @ root.matrix)
    powered = matrix_power(QOperator(red.layout, core), alpha)
    tr = float(np.real(np.trace(powered.matrix)))
    if tr <= 1e-14:
        raise SingularOperator("tilted marginal vanished: incompatible supports")
    return DensityOperator(red.layout, powered.matrix / tr)


def tilted_extension(rho, marginal, labels):
    """marginal^{1/2} rho_{rest|S} marginal^{1/2} on the full layout."""
    labels = [lbl for lbl in rho.labels if lbl in set(labels)]
    cond = conditional_state(rho, labels)
    root = embed(matrix_power(QOperator(marginal.layout, marginal.matrix), 0.5),
                 rho.layout)
    mat = herm(root.matrix @ cond.matrix @ root.matrix)
    tr = float(np.real(np.trace(mat)))
    if abs(tr - 1.0) > TRACE_SLACK:
        raise SingularOperator(
            f"tilted extension has trace {tr}: marginal support escapes the state's")
    return DensityOperator(rho.layout, mat / tr)


def build_split(rho, reference, alpha, marginal_labels):
    """Tilted marginal + extension, with the invariant residuals recorded."""
    marginal_labels = tuple(lbl for lbl in rho.labels if lbl in set(marginal_labels))
    marginal = tilted_marginal(rho, reference, alpha, marginal_labels)
    extension = tilted_extension(rho, marginal, marginal_labels)
    back = partial_trace(extension, marginal_labels)
    diag = {
        "trace_residual": abs(extension.trace() - 1.0),
        "reduction_residual": trace_norm(back.matrix - marginal.matrix),
    }
    return SplitConstruction(marginal=marginal, extension=extension,
                             marginal_labels=marginal_labels, alpha=float(alpha),
                             diagnostics=diag)


def conditional_agreement_residual(rho, split):
    """Trace-norm gap between the conditional states of rho and the extension.

    Both conditionals live on the support of their respective marginals, so
    the comparison is restricted to the overlap (the tilted marginal's
    support is contained in the state's)."""
    labels = split.marginal_labels
    a = conditional_state(rho, labels)
    b = conditional_state(split.extension, labels)
    proj = embed(matrix_power(QOperator(split.marginal.layout, split.marginal.matrix),
                              0.0, use_pseudoinverse=True), rho.layout)
    return trace_norm(proj.matrix @ (a.matrix - b.matrix) @ proj.matrix)


def channel_preimage_witness(rho_prime, channel, reference, alpha,
                             marginal_labels):
    """Input state that the channel maps exactly onto the tilted extension.

    ``rho_prime`` lives on (marginal registers + channel input); applying the
    channel gives the state whose split is being certified.  The witness is

        w = m^{1/2} rho_S^{-1/2} rho' rho_S^{-1/2} m^{1/2}

    with m the tilted marginal of the channel output; by construction the
    channel maps w to the tilted extension.  Returns (witness, residuals).
    """
    rho = apply_channel(channel, rho_prime)
    split = build_split(rho, reference, alpha, marginal_labels)
    red = partial_trace(rho, split.marginal_labels)
    inv_root = embed(matrix_power(QOperator(red.layout, red.matrix), -0.5,
                                  use_pseudoinverse=True), rho_prime.layout)
    m_root = embed(matrix_power(QOperator(split.marginal.layout, split.marginal.matrix),
                                0.5), rho_prime.layout)
    sandwich = m_root.matrix @ inv_root.matrix
    mat = herm(sandwich @ rho_prime.matrix @ sandwich.conj().T)
    witness = DensityOperator(rho_prime.layout, mat)
    mapped = apply_channel(channel, witness)
    aligned = mapped.permuted(split.extension.labels)
    residuals = {
        "map_residual": trace_norm(aligned.matrix - split.extension.matrix),
        "trace_residual": abs(witness.trace() - 1.0),
    }
    return witness, split, residuals
