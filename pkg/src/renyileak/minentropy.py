"""Min-entropy and max-information at infinite order, via the dense SDP engine.

2^(-Hmin_up(A|B)) = min{ tr sigma_B : 1_A (x) sigma_B >= rho_AB },
Imax_down(A;B)    = log2 min{ tr sigma'_B : rho_AB <= rho_A (x) sigma'_B },
Imax_none(A:B)    = D_inf(rho_AB || rho_A (x) rho_B)  (generalized top eigenvalue).

Imax_down is solved in twisted form: conjugating the constraint by
rho_A^{-1/2} turns it into the same min-trace program as the min-entropy
SDP, which keeps the barrier well conditioned when rho_A has small
eigenvalues.  The SDP duals double as cross-checks: the dual of the
min-entropy program is the guessing-probability form, and its value is
reported alongside the primal so callers can assert the duality gap.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import herm, power_psd
from .divergence import renyi_divergence
from .errors import NumericalFailure
from .operators import QOperator, partial_trace, tensor_product
from .sdp import SdpBlock, SdpProblem, hermitian_basis, hermitian_coords, \
    matrix_from_coords, solve_sdp


@dataclass
class SdpQuantity:
    """Value in bits plus the SDP evidence behind it."""

    value: float
    witness: QOperator
    sdp_value: float
    dual_value: float
    gap: float
    status: str
    extras: dict = field(default_factory=dict)


def _ordered_bipartite(rho, first, second):
    keep = list(first) + list(second)
    reduced = partial_trace(rho, keep)
    return reduced.permuted(tuple(lbl for lbl in rho.labels if lbl in set(first))
                            + tuple(lbl for lbl in rho.labels if lbl in set(second)))


def _min_trace_covering(target, d_first, d_second, gap_tol):
    """Solve min{tr sigma : 1 (x) sigma >= target} over d_second x d_second sigma."""
    basis = hermitian_basis(d_second)
    eye_f = np.eye(d_first)
    blocks = [
        SdpBlock(np.zeros((d_second, d_second)), list(basis)),
        SdpBlock(target, [np.kron(eye_f, b) for b in basis]),
    ]
    c = np.array([float(np.real(np.trace(b))) for b in basis])
    problem = SdpProblem(c, blocks)
    top = float(np.linalg.eigvalsh(target)[-1])
    x0 = hermitian_coords((max(top, 0.0) + 1.0) * np.eye(d_second), basis)
    sol = solve_sdp(problem, gap_tol=gap_tol, x0=x0)
    if sol.value <= 0:
        raise NumericalFailure("min-trace SDP returned a nonpositive optimum")
    return sol, matrix_from_coords(sol.x, basis)


def hmin_up(rho, target, conditioning, gap_tol=1e-7):
    """H_min^up(target | conditioning) with primal/dual SDP certificates."""
    ordered = _ordered_bipartite(rho, target, conditioning)
    cond_layout = ordered.layout.drop(target)
    d_t = ordered.layout.select(target).total_dim
    d_c = cond_layout.total_dim
    sol, sigma = _min_trace_covering(ordered.matrix, d_t, d_c, gap_tol)
    return SdpQuantity(value=-math.log2(sol.value),
                       witness=QOperator(cond_layout, sigma),
                       sdp_value=sol.value, dual_value=sol.dual_value,
                       gap=sol.gap, status=sol.status,
                       extras={"dual_residual": sol.dual_residual,
                               "guessing_dual": sol.dual_value})


def imax_family(rho, part_a, part_b, variant="I_max_none", gap_tol=1e-7):
    """Max-information variants at order infinity.

    ``I_max_none`` is the closed-form D_inf against the product of marginals;
    ``I_max_down`` optimizes the second marginal by SDP.
    """
    ordered = _ordered_bipartite(rho, part_a, part_b)
    b_layout = ordered.layout.drop(part_a)
    rho_a = partial_trace(ordered, part_a)
    rho_b = partial_trace(ordered, b_layout.labels)

    if variant == "I_max_none":
        second = tensor_product(QOperator(rho_a.layout, rho_a.matrix),
                                QOperator(rho_b.layout, rho_b.matrix))
        value = renyi_divergence(ordered, second, "inf")
        return SdpQuantity(value=value, witness=QOperator(rho_b.layout, rho_b.matrix),
                           sdp_value=2.0**value if math.isfinite(value) else math.inf,
                           dual_value=math.nan, gap=0.0, status="CLOSED_FORM")
    if variant != "I_max_down":
        raise ValueError(f"unknown variant {variant!r}")

    d_a = ordered.layout.select(part_a).total_dim
    d_b = b_layout.total_dim
    # Twist: rho_AB <= rho_A (x) sigma  <=>  rho_A^{-1/2} rho_AB rho_A^{-1/2}
    # <= 1 (x) sigma (pseudoinverse; supp(rho_AB) sits inside supp(rho_A) x B).
    inv_root = np.kron(power_psd(rho_a.matrix, -0.5, pseudo=True), np.eye(d_b))
    twisted = herm(inv_root @ ordered.matrix @ inv_root)
    sol, sigma = _min_trace_covering(twisted, d_a, d_b, gap_tol)
    return SdpQuantity(value=math.log2(sol.value),
                       witness=QOperator(b_layout, sigma),
                       sdp_value=sol.value, dual_value=sol.dual_value,
                       gap=sol.gap, status=sol.status,
                       extras={"dual_residual": sol.dual_residual})
