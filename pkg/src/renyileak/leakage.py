"""Probabilistic-leakage model, its closed-form penalty bound, and channel
mutual-information searches.

The leakage channel maps a memory register R into a register L one
dimension larger: with probability 1-delta it emits a flag state |perp>
carrying nothing, otherwise it embeds the input coherently into the
subspace orthogonal to the flag.  For orders in (1, 3/2) the per-round
mutual-information supremum admits the closed-form bound

    (1/(a-1)) * log2( (1-delta) + delta * 2^((a-1) * zeta * log2 m) ),

with m the smaller of the purifier and leak dimensions and zeta = 1 when
either side is classical (2 otherwise); it decreases to
delta * zeta * log2 m as a -> 1.  For general channels the supremum is
estimated by multi-restart gradient search over purified inputs and is
always flagged as a lower estimate.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._gradients import divergence_value_and_grads
from .channels import QuantumChannel, apply_channel
from .divergence import RenyiOrder
from .errors import StalledOptimizer, UnsupportedOrder
from .frankwolfe import OptimizerConfig, minimize_divergence
from .operators import DensityOperator, QOperator, embed, partial_trace
from .registers import RegisterLayout
from .sampling import rng_for

PERP_INDEX = 0  # basis index of the no-leak flag state inside L


@dataclass(frozen=True)
class LeakageModel:
    """Probabilistic leakage: no-leak flag with prob 1-delta, else embed."""

    delta_leak: float
    dim_R: int
    zeta_cq: int = 1
    leak_channel_spec: object = None

    def __post_init__(self):
        if not 0.0 <= self.delta_leak <= 1.0:
            raise ValueError("delta_leak must lie in [0, 1]")
        if self.dim_R < 1:
            raise ValueError("dim_R must be >= 1")
        if self.zeta_cq not in (1, 2):
            raise ValueError("zeta_cq is 1 (one side classical) or 2")

    @property
    def dim_L(self):
        return self.dim_R + 1


def prob_leakage_channel(model, in_label="R", out_label="L"):
    """Kraus realization of the probabilistic-leakage channel R -> L.

    The flag branch sends everything to |perp><perp| (one Kraus operator per
    input basis state, weight sqrt(1-delta)); the leak branch is a single
    coherent embedding into the orthogonal subspace, weight sqrt(delta).
    """
    d = model.dim_R
    delta = model.delta_leak
    kraus = []
    if delta < 1.0:
        for j in range(d):
            k = np.zeros((d + 1, d), dtype=complex)
            k[PERP_INDEX, j] = math.sqrt(1.0 - delta)
            kraus.append(k)
    if delta > 0.0:
        embed_op = np.zeros((d + 1, d), dtype=complex)
        for j in range(d):
            embed_op[j + 1, j] = math.sqrt(delta)
        kraus.append(embed_op)
    return QuantumChannel(RegisterLayout([(in_label, d)]),
                          RegisterLayout([(out_label, d + 1)]), kraus,
                          annotations={"leakage_model": model})


def prob_leakage_bound(model, alpha, dim_Z):
    """Closed-form upper bound on the leaked mutual information, in bits.

    Valid only for orders in (1, 3/2), the range where the mixture step
    combines with the dimension bound; nondecreasing in both the order and
    the leak probability.
    """
    alpha = float(RenyiOrder(alpha))
    if not 1.0 < alpha < 1.5:
        raise UnsupportedOrder(f"closed-form leakage bound needs alpha in (1, 3/2), got {alpha}")
    if dim_Z < 1:
        raise ValueError("dim_Z must be >= 1")
    delta = model.delta_leak
    m = min(dim_Z, model.dim_L)
    exponent = (alpha - 1.0) * model.zeta_cq * math.log2(m)
    return math.log2((1.0 - delta) + delta * 2.0**exponent) / (alpha - 1.0)


def prob_leakage_vn_limit(model, dim_Z):
    """Order -> 1 limit of the bound: delta * zeta * log2 min(dim_Z, dim_L)."""
    if dim_Z < 1:
        raise ValueError("dim_Z must be >= 1")
    m = min(dim_Z, model.dim_L)
    return model.delta_leak * model.zeta_cq * math.log2(m)


@dataclass
class SupEstimate:
    """Search result for a channel mutual-information supremum."""

    value: float
    status: str                  # LOWER_ESTIMATE (always, for searches)
    witness: DensityOperator
    upper_bound: float = math.nan
    restarts_used: int = 0
    per_restart: list = field(default_factory=list)
    converged: bool = True


def _mi_value_and_state_gradient(tau, z_label, l_label, alpha, cfg):
    """I_down(Z;L) of tau plus its gradient with respect to tau's matrix.

    The gradient is returned on tau's full layout: extra output registers
    are traced out for the value, and the corresponding gradient block is
    the identity-padded lift.
    """
    reduced = partial_trace(tau, [z_label, l_label])
    ordered = reduced.permuted((z_label, l_label))
    opt = minimize_divergence(ordered, partial_trace(ordered, [z_label]),
                              [l_label], alpha, cfg)
    sigma = opt.witness
    d_z = ordered.layout.dim_of(z_label)
    d_l = ordered.layout.dim_of(l_label)
    second = np.kron(partial_trace(ordered, [z_label]).matrix, sigma.matrix)
    value, g_rho, g_sigma = divergence_value_and_grads(
        ordered.matrix, second, alpha)
    # Second-argument dependence through tau_Z: contract sigma out of G_sigma.
    g_sig_resh = g_sigma.reshape(d_z, d_l, d_z, d_l)
    w = np.einsum("iajb,ab->ij", g_sig_resh, sigma.matrix.T)
    g_zl = g_rho + np.kron(w, np.eye(d_l))
    g_full = embed(QOperator(ordered.layout, 0.5 * (g_zl + g_zl.conj().T)),
                   tau.layout)
    return value, g_full.matrix, opt


def channel_sup_mi(channel, alpha, cfg=None, dim_Z=None, z_label="Zt"):
    """Estimate sup over inputs of the leaked mutual information.

    Maximizes I_down(Z; L) of (id (x) channel) acting on pure states of
    Z (x) R, where Z is a purifying register of the channel input (its
    dimension suffices by the purification rank argument).  Multi-restart
    L-BFGS with analytic gradients; the result is flagged LOWER_ESTIMATE.
    When the channel carries a probabilistic-leakage annotation and the
    order permits, the closed-form bound is attached for bracketing.
    """
    cfg = cfg or OptimizerConfig()
    alpha = float(RenyiOrder(alpha))
    if alpha <= 1.0 or math.isinf(alpha):
        raise UnsupportedOrder("channel search implemented for finite alpha > 1")
    d_r = channel.in_layout.total_dim
    d_z = dim_Z or d_r
    if len(channel.out_layout) != 1:
        raise ValueError("channel must output a single leak register")
    l_label = channel.out_layout.labels[0]
    in_lay = RegisterLayout([(z_label, d_z)]).concat(channel.in_layout)

    inner_cfg = OptimizerConfig(max_iters=cfg.max_iters,
                                tol_objective=max(cfg.tol_objective, 1e-10),
                                restarts=1, seed=cfg.seed,
                                use_fixed_point=cfg.use_fixed_point)

    def split_real(v):
        n = v.shape[0] // 2
        return v[:n] + 1j * v[n:]

    def value_and_grad(x):
        v = split_real(x)
        norm = np.linalg.norm(v)
        psi = v / norm
        rho_in = DensityOperator.pure(in_lay, psi)
        tau = apply_channel(channel, rho_in)
        try:
            val, g_tau, lay = _mi_value_and_state_gradient(tau, z_label, l_label,
                                                           alpha, inner_cfg)
        except StalledOptimizer as stal:
            return -float(stal.best_value), np.zeros_like(x)
        # Pull the gradient back through the padded Kraus action and the
        # normalization of psi.
        g_psi = np.zeros(in_lay.total_dim, dtype=complex)
        d_rest = 1
        for k in channel.kraus:
            kk = np.kron(np.eye(d_z), k)
            g_psi += 2.0 * (kk.conj().T @ g_tau @ kk) @ psi
        g_v = (g_psi - np.real(np.vdot(psi, g_psi)) * psi) / norm
        gx = np.concatenate([np.real(g_v), np.imag(g_v)])
        return -val, -gx

    d_total = in_lay.total_dim
    seeds = []
    ent = np.zeros(d_total, dtype=complex)
    for j in range(min(d_z, d_r)):
        e = np.zeros(d_total)
        e[j * d_r + j] = 1.0
        ent += e
    seeds.append(ent / np.linalg.norm(ent))
    rng = rng_for(cfg.seed, 4242)
    while len(seeds) < cfg.restarts:
        v = rng.standard_normal(d_total) + 1j * rng.standard_normal(d_total)
        seeds.append(v / np.linalg.norm(v))

    best_val, best_psi = -math.inf, None
    per_restart = []
    for psi0 in seeds:
        x0 = np.concatenate([np.real(psi0), np.imag(psi0)])
        res = minimize(value_and_grad, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 150, "ftol": 1e-14, "gtol": 1e-10})
        val = -float(res.fun)
        per_restart.append(val)
        if val > best_val:
            best_val, best_psi = val, split_real(res.x)

    witness = DensityOperator.pure(in_lay, best_psi / np.linalg.norm(best_psi))
    upper = math.nan
    model = channel.annotations.get("leakage_model")
    if model is not None and 1.0 < alpha < 1.5:
        upper = prob_leakage_bound(model, alpha, d_z)
    return SupEstimate(value=best_val, status="LOWER_ESTIMATE", witness=witness,
                       upper_bound=upper, restarts_used=len(seeds),
                       per_restart=per_restart)


def classical_reduction_check(channel, alpha, cfg=None, z_label="Zt"):
    """Compare the general-input supremum against classically correlated inputs.

    For channels that begin with a computational-basis pinching, the
    supremum is attained by a classical input sum_j lam_j |jj><jj|; this
    returns both search values and their gap.
    """
    cfg = cfg or OptimizerConfig()
    alpha = float(RenyiOrder(alpha))
    d_r = channel.in_layout.total_dim
    l_label = channel.out_layout.labels[0]
    in_lay = RegisterLayout([(z_label, d_r)]).concat(channel.in_layout)
    general = channel_sup_mi(channel, alpha, cfg, dim_Z=d_r, z_label=z_label)

    inner_cfg = OptimizerConfig(max_iters=cfg.max_iters,
                                tol_objective=max(cfg.tol_objective, 1e-10),
                                restarts=1, seed=cfg.seed)

    basis_states = []
    for j in range(d_r):
        e = np.zeros(d_r * d_r)
        e[j * d_r + j] = 1.0
        basis_states.append(DensityOperator.pure(in_lay, e))
    outputs = [apply_channel(channel, b) for b in basis_states]

    def mi_of_lambda(lam):
        mat = sum(l * o.matrix for l, o in zip(lam, outputs))
        tau = DensityOperator(outputs[0].layout, mat)
        val, g_tau, _ = _mi_value_and_state_gradient(tau, z_label, l_label,
                                                     alpha, inner_cfg)
        grads = np.array([float(np.real(np.trace(g_tau @ o.permuted((z_label, l_label)).matrix)))
                          for o in outputs])
        return val, grads

    def neg_soft(y):
        y = y - np.max(y)
        lam = np.exp(y)
        lam /= lam.sum()
        val, grads = mi_of_lambda(lam)
        # softmax chain rule
        g_y = lam * (grads - float(lam @ grads))
        return -val, -g_y

    best_classical = -math.inf
    best_lam = None
    rng = rng_for(cfg.seed, 777)
    starts = [np.zeros(d_r)] + [rng.standard_normal(d_r) for _ in range(cfg.restarts - 1)]
    for y0 in starts:
        res = minimize(neg_soft, y0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 200, "ftol": 1e-15, "gtol": 1e-11})
        val = -float(res.fun)
        if val > best_classical:
            best_classical = val
            y = res.x - np.max(res.x)
            best_lam = np.exp(y) / np.exp(y).sum()
    return {
        "general": general.value,
        "classical": best_classical,
        "gap": abs(general.value - best_classical),
        "lambda": best_lam,
        "general_estimate": general,
    }
