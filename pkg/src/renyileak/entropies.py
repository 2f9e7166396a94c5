"""Conditional entropies and mutual informations of all arrow variants.

Closed-form quantities evaluate directly through the divergence kernel;
optimized ones dispatch on the order: finite alpha != 1 runs the
Frank-Wolfe engine, alpha = 1 uses the von Neumann closed forms (the
optimum is the actual marginal by Gibbs' inequality), and alpha = inf
routes to the SDP family.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import RenyiOrder, renyi_divergence
from .errors import UnsupportedOrder
from .frankwolfe import DivergenceOptimum, OptimizerConfig, minimize_divergence, \
    random_simplex_start
from .minentropy import hmin_up, imax_family
from .operators import DensityOperator, QOperator, partial_trace, tensor_product
from .sampling import rng_for


@dataclass
class EntropyRequest:
    """One entropic quantity to evaluate on a state.

    ``target_labels`` is the A of H(A|B) or the first slot of a mutual
    information; ``partner_labels`` the conditioning/second slot; for the
    conditional-mutual-information variant, ``conditioning_labels`` holds
    the C of I(A;B|C).
    """

    state: DensityOperator
    target_labels: tuple
    partner_labels: tuple
    order: RenyiOrder
    variant: str = "H_down"
    conditioning_labels: tuple = ()

    VARIANTS = ("H_down", "H_up", "I_plain", "I_down", "I_downdown", "I_diff_cond")

    def __post_init__(self):
        self.order = RenyiOrder(self.order)
        self.target_labels = tuple(self.target_labels)
        self.partner_labels = tuple(self.partner_labels)
        self.conditioning_labels = tuple(self.conditioning_labels)
        if self.variant not in self.VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        groups = (set(self.target_labels), set(self.partner_labels),
                  set(self.conditioning_labels))
        total = set().union(*groups)
        if sum(len(g) for g in groups) != len(total):
            raise ValueError("register groups overlap")
        missing = total - set(self.state.labels)
        if missing:
            raise ValueError(f"labels {sorted(missing)} not in state layout")


@dataclass
class EntropicResult:
    value: float
    witnesses: dict = field(default_factory=dict)
    residual: float = 0.0
    iterations: int = 0
    status: str = "CLOSED_FORM"
    extras: dict = field(default_factory=dict)


def renyi_entropy(rho, labels=None, order=1.0):
    """Unconditional Renyi entropy of the reduced state on ``labels``."""
    order = RenyiOrder(order)
    reduced = partial_trace(rho, labels) if labels is not None else rho
    return -renyi_divergence(reduced, QOperator.identity(reduced.layout), order)


def von_neumann_entropy(rho, labels=None):
    return renyi_entropy(rho, labels, 1.0)


def conditional_entropy_down(rho, target, conditioning, order):
    """H_alpha(target | conditioning) = -D_alpha(rho || 1 (x) rho_cond)."""
    order = RenyiOrder(order)
    keep = list(target) + list(conditioning)
    red = partial_trace(rho, keep)
    if not conditioning:
        return -renyi_divergence(red, QOperator.identity(red.layout), order)
    cond = partial_trace(red, conditioning)
    second = _embedded_product(QOperator.identity(red.layout.select(target)),
                               QOperator(cond.layout, cond.matrix))
    return -renyi_divergence(red, second, order)


def _embedded_product(a, b):
    return tensor_product(a, b)


def _optimized_divergence(rho, omega, opt_labels, order, cfg, initial=None):
    """Dispatch inf_sigma D_alpha(rho || omega (x) sigma_opt) on the order."""
    order = RenyiOrder(order)
    opt_list = [lbl for lbl in rho.labels if lbl in set(opt_labels)]
    if order.is_one:
        sigma = partial_trace(rho, opt_list)
        witness = QOperator(sigma.layout, sigma.matrix / max(sigma.trace(), 1e-300))
        second = _second_argument(rho, omega, witness)
        return DivergenceOptimum(value=renyi_divergence(rho, second, order),
                                 witness=DensityOperator(witness.layout, witness.matrix),
                                 residual=0.0, iterations=0, converged=True,
                                 status="CLOSED_FORM")
    if order.is_inf:
        raise UnsupportedOrder("infinite order is dispatched to the SDP family")
    return minimize_divergence(rho, omega, opt_list, order, cfg, initial=initial)


def _second_argument(rho, omega, sigma):
    second = QOperator(sigma.layout, sigma.matrix)
    if omega is not None:
        second = tensor_product(QOperator(omega.layout, omega.matrix), second)
    else:
        rest = rho.layout.drop(sigma.labels)
        if len(rest):
            second = tensor_product(QOperator.identity(rest), second)
    return second


def conditional_entropy_up(rho, target, conditioning, order, cfg=None):
    """H_alpha^up: conditioning marginal optimized over normalized states."""
    order = RenyiOrder(order)
    keep = list(target) + list(conditioning)
    red = partial_trace(rho, keep)
    if not conditioning:
        return EntropicResult(value=renyi_entropy(red, target, order))
    if order.is_inf:
        q = hmin_up(red, target, conditioning)
        return EntropicResult(value=q.value, witnesses={"sigma": q.witness},
                              residual=q.gap, status=q.status,
                              extras={"dual_value": q.dual_value, "sdp": q})
    opt = _optimized_divergence(red, None, conditioning, order, cfg)
    return EntropicResult(value=-opt.value, witnesses={"sigma": opt.witness},
                          residual=opt.residual, iterations=opt.iterations,
                          status=opt.status)


def mutual_information(rho, first, second, order, variant="I_plain", cfg=None):
    """I_alpha family: plain, one-sided optimized, or doubly optimized."""
    order = RenyiOrder(order)
    cfg = cfg or OptimizerConfig()
    keep = list(first) + list(second)
    red = partial_trace(rho, keep)
    rho_a = partial_trace(red, first)
    rho_b = partial_trace(red, second)

    if variant == "I_plain":
        prod = tensor_product(QOperator(rho_a.layout, rho_a.matrix),
                              QOperator(rho_b.layout, rho_b.matrix))
        return EntropicResult(value=renyi_divergence(red, prod, order))

    if variant == "I_down":
        if order.is_inf:
            q = imax_family(red, first, second, "I_max_down")
            return EntropicResult(value=q.value, witnesses={"sigma": q.witness},
                                  residual=q.gap, status=q.status, extras={"sdp": q})
        opt = _optimized_divergence(red, QOperator(rho_a.layout, rho_a.matrix),
                                    second, order, cfg)
        return EntropicResult(value=opt.value, witnesses={"sigma": opt.witness},
                              residual=opt.residual, iterations=opt.iterations,
                              status=opt.status)

    if variant == "I_downdown":
        return _doubly_optimized(red, first, second, order, cfg)
    raise ValueError(f"unknown mutual-information variant {variant!r}")


def _doubly_optimized(red, first, second, order, cfg):
    """Alternating minimization over both marginals from multiple starts."""
    order = RenyiOrder(order)
    if order.is_one:
        i = mutual_information(red, first, second, order, "I_plain")
        rho_a, rho_b = partial_trace(red, first), partial_trace(red, second)
        i.witnesses = {"omega": rho_a, "sigma": rho_b}
        return i
    if order.is_inf:
        raise UnsupportedOrder("I_downdown at infinite order is not provided")

    d_a = red.layout.select(first).total_dim
    best = None
    values = []
    for restart in range(cfg.restarts):
        rng = rng_for(cfg.seed, 977, restart)
        omega = partial_trace(red, first).matrix if restart == 0 \
            else random_simplex_start(d_a, rng)
        omega = omega / np.real(np.trace(omega))
        val = math.inf
        sig_opt = None
        sigma_warm = None
        for sweep in range(12):
            omega_op = QOperator(red.layout.select(first), omega)
            opt_b = _optimized_divergence(red, omega_op, second, order, cfg,
                                          initial=sigma_warm)
            sig_op = QOperator(opt_b.witness.layout, opt_b.witness.matrix)
            sigma_warm = opt_b.witness.matrix
            opt_a = _optimized_divergence(red, sig_op, first, order, cfg,
                                          initial=omega)
            omega = opt_a.witness.matrix
            improvement = val - opt_a.value
            val = opt_a.value
            sig_opt = sig_op
            if improvement < cfg.tol_objective * 10:
                break
        values.append(val)
        if best is None or val < best[0]:
            best = (val, omega, sig_opt)
    spread = max(values) - min(values)
    status = "OPTIMAL" if spread <= 100 * cfg.tol_objective else "LOCAL"
    val, omega, sig = best
    return EntropicResult(value=val,
                          witnesses={"omega": DensityOperator(red.layout.select(first), omega),
                                     "sigma": DensityOperator(sig.layout, sig.matrix)},
                          residual=spread, status=status)


def cqmi_diff(rho, target, partner, conditioning, order, cfg=None):
    """I_diff(target; partner | conditioning) = I_down(t; p+c) - I_down(t; c)."""
    cfg = cfg or OptimizerConfig()
    joint = mutual_information(rho, target, list(partner) + list(conditioning),
                               order, "I_down", cfg)
    base = mutual_information(rho, target, conditioning, order, "I_down", cfg)
    return EntropicResult(value=joint.value - base.value,
                          witnesses={"joint": joint.witnesses.get("sigma"),
                                     "base": base.witnesses.get("sigma")},
                          residual=joint.residual + base.residual,
                          status=joint.status if joint.status == base.status else "MIXED")


def evaluate_request(req, cfg=None):
    """Evaluate an :class:`EntropyRequest` (used by the CLI compute path)."""
    cfg = cfg or OptimizerConfig()
    v, t, p, c = req.variant, req.target_labels, req.partner_labels, req.conditioning_labels
    if v == "H_down":
        return EntropicResult(value=conditional_entropy_down(req.state, t, p, req.order))
    if v == "H_up":
        return conditional_entropy_up(req.state, t, p, req.order, cfg)
    if v in ("I_plain", "I_down", "I_downdown"):
        return mutual_information(req.state, t, p, req.order, v, cfg)
    return cqmi_diff(req.state, t, p, c, req.order, cfg)


def vn_conditional_entropy(rho, target, conditioning):
    """Von Neumann H(target|conditioning) from entropy differences."""
    joint = renyi_entropy(rho, list(target) + list(conditioning), 1.0)
    if not conditioning:
        return joint
    return joint - renyi_entropy(rho, conditioning, 1.0)


def vn_mutual_information(rho, first, second):
    return (renyi_entropy(rho, first, 1.0) + renyi_entropy(rho, second, 1.0)
            - renyi_entropy(rho, list(first) + list(second), 1.0))


def vn_conditional_mutual_information(rho, a, b, c):
    """I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C)."""
    return (renyi_entropy(rho, list(a) + list(c), 1.0)
            + renyi_entropy(rho, list(b) + list(c), 1.0)
            - renyi_entropy(rho, list(a) + list(b) + list(c), 1.0)
            - renyi_entropy(rho, list(c), 1.0))
