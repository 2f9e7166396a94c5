"""Sandwiched Renyi divergence with all support branches and limits.

All logarithms are base 2.  The order parameter alpha lives in
(0,1) u (1,inf) u {1, inf}: alpha = 1 is the Umegaki branch, alpha = inf the
max-divergence.  Orders within ``NEAR_ONE_EPS`` of 1 snap to the Umegaki
branch instead of evaluating an ill-conditioned quotient; alpha = 0 is
rejected outright.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._linalg import EIG_FLOOR, eigh_fixed, herm, power_psd, support_mask
from .errors import DivergentCorrection, UnsupportedOrder, ZeroState
from .operators import aligned_matrices

NEAR_ONE_EPS = 1e-6
LN2 = math.log(2.0)


@dataclass(frozen=True)
class RenyiOrder:
    """Validated Renyi order with limit handling."""

    alpha: float

    def __init__(self, alpha):
        if isinstance(alpha, RenyiOrder):
            alpha = alpha.alpha
        if isinstance(alpha, str):
            if alpha.lower() in ("inf", "infinity", "max"):
                alpha = math.inf
            else:
                alpha = float(alpha)
        alpha = float(alpha)
        if math.isnan(alpha) or alpha <= 0.0:
            raise UnsupportedOrder(f"Renyi order must be positive, got {alpha}")
        if abs(alpha - 1.0) <= NEAR_ONE_EPS:
            alpha = 1.0
        object.__setattr__(self, "alpha", alpha)

    @property
    def is_one(self):
        return self.alpha == 1.0

    @property
    def is_inf(self):
        return math.isinf(self.alpha)

    def __float__(self):
        return self.alpha

    def __repr__(self):
        return f"RenyiOrder({self.alpha})"


@dataclass(frozen=True)
class SmoothingParam:
    """Purified-distance smoothing radius epsilon in [0, 1)."""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")


def _support_spaces(mat):
    vals, vecs = eigh_fixed(mat)
    keep = support_mask(vals)
    return vals, vecs, keep


def _supp_contained(rho, sigma_vecs, sigma_keep):
    """tr[rho (1 - Pi_sigma)] relative to tr[rho], small iff supp containment."""
    v = sigma_vecs[:, ~sigma_keep]
    if v.shape[1] == 0:
        return 0.0
    leak = float(np.real(np.trace(v.conj().T @ rho @ v)))
    return leak / max(float(np.real(np.trace(rho))), 1e-300)


def _not_orthogonal(rho, sigma):
    """Orthogonality test tr(Pi_rho Pi_sigma) > EIG_FLOOR."""
    _, vr, kr = _support_spaces(rho)
    _, vs, ks = _support_spaces(sigma)
    a = vr[:, kr]
    b = vs[:, ks]
    overlap = float(np.real(np.sum(np.abs(a.conj().T @ b) ** 2)))
    return overlap > EIG_FLOOR


def _umegaki(rho, sigma):
    """tr[rho(log rho - log sigma)] / tr rho, +inf outside supp containment."""
    svals, svecs, skeep = _support_spaces(sigma)
    if _supp_contained(rho, svecs, skeep) > EIG_FLOOR:
        return math.inf
    tr_rho = float(np.real(np.trace(rho)))
    rvals, rvecs, rkeep = _support_spaces(rho)
    ent = float(np.sum(rvals[rkeep] * np.log2(rvals[rkeep])))
    weights = np.real(np.einsum("ij,jk,ki->i", svecs.conj().T, rho, svecs))
    cross = float(np.sum(weights[skeep] * np.log2(svals[skeep])))
    return (ent - cross) / tr_rho


def _max_divergence(rho, sigma):
    """log of the smallest lam with rho <= lam sigma."""
    svals, svecs, skeep = _support_spaces(sigma)
    if _supp_contained(rho, svecs, skeep) > EIG_FLOOR:
        return math.inf
    inv_root = power_psd(sigma, -0.5, pseudo=True)
    middle = herm(inv_root @ rho @ inv_root)
    top = float(np.linalg.eigvalsh(middle)[-1])
    if top <= 0.0:
        return -math.inf
    return math.log2(top)


def sandwiched_quotient(rho, sigma, alpha):
    """tr[(sigma^((1-a)/2a) rho sigma^((1-a)/2a))^a] on matrices, no checks."""
    beta = (1.0 - alpha) / (2.0 * alpha)
    s_beta = power_psd(sigma, beta, pseudo=True)
    core = herm(s_beta @ rho @ s_beta)
    vals = np.linalg.eigvalsh(core)
    keep = support_mask(vals)
    return float(np.sum(np.power(vals[keep], alpha)))


def renyi_divergence(rho, sigma, order):
    """Sandwiched Renyi divergence D_alpha(rho || sigma) in bits.

    ``rho`` must have nonzero trace; ``sigma`` is any PSD operator on the
    same registers.  Finite for alpha < 1 iff rho is not orthogonal to
    sigma, for alpha > 1 iff supp(rho) is contained in supp(sigma);
    +inf otherwise.
    """
    order = RenyiOrder(order)
    r, s, _ = aligned_matrices(rho, sigma)
    tr_rho = float(np.real(np.trace(r)))
    if tr_rho <= 0.0:
        raise ZeroState("divergence undefined: tr(rho) = 0")

    if order.is_one:
        return _umegaki(r, s)
    if order.is_inf:
        return _max_divergence(r, s)

    alpha = order.alpha
    if alpha < 1.0:
        if not _not_orthogonal(r, s):
            return math.inf
    else:
        _, svecs, skeep = _support_spaces(s)
        if _supp_contained(r, svecs, skeep) > EIG_FLOOR:
            return math.inf
    q = sandwiched_quotient(r, s, alpha)
    if q <= 0.0:
        return math.inf if alpha > 1.0 else -math.inf
    return (math.log2(q) - math.log2(tr_rho)) / (alpha - 1.0)


class ClassicalDistribution:
    """Nonnegative weights over a finite alphabet, possibly subnormalized."""

    def __init__(self, weights, tol=1e-9):
        if hasattr(weights, "items"):
            self.alphabet = tuple(weights.keys())
            w = [weights[k] for k in self.alphabet]
        else:
            w = list(weights)
            self.alphabet = tuple(range(len(w)))
        self.weights = np.asarray([float(x) for x in w], dtype=float)
        self._exact = {k: v for k, v in zip(self.alphabet, w)}
        if np.any(self.weights < -tol):
            raise ValueError("negative weight in distribution")
        self.weights = np.clip(self.weights, 0.0, None)
        if self.weights.sum() > 1.0 + tol:
            raise ValueError(f"weights sum to {self.weights.sum()} > 1")

    @property
    def support(self):
        return np.flatnonzero(self.weights > 0.0)

    def total(self):
        return float(self.weights.sum())

    def exact_weight(self, key):
        """Weight as originally supplied (e.g. a Fraction from freq counts)."""
        return self._exact[key]

    def __len__(self):
        return len(self.weights)


def classical_divergence(p, q, order):
    """D_alpha between distributions, matching the diagonal-matrix path."""
    order = RenyiOrder(order)
    pw, qw = np.asarray(p.weights, float), np.asarray(q.weights, float)
    if len(pw) != len(qw):
        raise ValueError("distributions live on different alphabets")
    tr_p = pw.sum()
    if tr_p <= 0.0:
        raise ZeroState("divergence undefined: p = 0")
    p_supp = pw > 0.0
    q_supp = qw > 0.0

    if order.is_one:
        if np.any(p_supp & ~q_supp):
            return math.inf
        m = p_supp
        return float(np.sum(pw[m] * (np.log2(pw[m]) - np.log2(qw[m]))) / tr_p)
    if order.is_inf:
        if np.any(p_supp & ~q_supp):
            return math.inf
        m = p_supp
        return float(np.log2(np.max(pw[m] / qw[m])))

    alpha = order.alpha
    if alpha > 1.0 and np.any(p_supp & ~q_supp):
        return math.inf
    m = p_supp & q_supp
    if not np.any(m):
        return math.inf  # alpha < 1 with orthogonal supports
    q_val = float(np.sum(pw[m] ** alpha * qw[m] ** (1.0 - alpha)))
    return (math.log2(q_val) - math.log2(tr_p)) / (alpha - 1.0)


def block_divergence(blocks, order):
    """Divergence of block-diagonal operators from per-block data.

    ``blocks`` is a list of (p_rho, p_sigma, d_block) triples where d_block
    is the Renyi divergence between the normalized block states, or a list
    of (p_rho, p_sigma, rho_block, sigma_block) from which it is computed.
    Evaluates the direct-sum mixture formula; equals the divergence of the
    assembled block-diagonal operators.
    """
    order = RenyiOrder(order)
    rows = []
    for blk in blocks:
        if len(blk) == 3:
            p, q, d = blk
        else:
            p, q, rho_c, sigma_c = blk
            d = renyi_divergence(rho_c, sigma_c, order)
        rows.append((float(p), float(q), float(d)))

    if order.is_one:
        total = 0.0
        for p, q, d in rows:
            if p == 0.0:
                continue
            if q == 0.0 or math.isinf(d):
                return math.inf
            total += p * (math.log2(p / q) + d)
        return total
    if order.is_inf:
        best = -math.inf
        for p, q, d in rows:
            if p == 0.0:
                continue
            if q == 0.0 or math.isinf(d):
                return math.inf
            best = max(best, math.log2(p / q) + d)
        return best

    alpha = order.alpha
    acc = 0.0
    for p, q, d in rows:
        if p == 0.0:
            continue
        if (q == 0.0 or math.isinf(d)) and alpha > 1.0:
            return math.inf
        if q == 0.0 or math.isinf(d):
            continue  # alpha < 1: orthogonal block contributes nothing
        acc += p**alpha * q ** (1.0 - alpha) * 2.0 ** ((alpha - 1.0) * d)
    if acc <= 0.0:
        return math.inf
    return math.log2(acc) / (alpha - 1.0)


def g_epsilon(eps):
    """Smoothing correction g(eps) = log2(1 - sqrt(1 - eps^2)), always < 0."""
    if isinstance(eps, SmoothingParam):
        eps = eps.epsilon
    if eps == 0.0:
        raise DivergentCorrection("g(eps) diverges to -inf at eps = 0")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    # 1 - sqrt(1-e^2) loses precision for small eps; use e^2/(1+sqrt(1-e^2)).
    val = eps * eps / (1.0 + math.sqrt(max(0.0, 1.0 - eps * eps)))
    return math.log2(val)


def smooth_max_divergence_upper(rho, sigma, eps, order):
    """Upper bound D_alpha(rho||sigma) + g(eps)/(alpha-1) on the smoothed
    max-divergence (not the exact smoothed value)."""
    order = RenyiOrder(order)
    if not order.alpha > 1.0:
        raise UnsupportedOrder("smooth-to-Renyi conversion needs alpha > 1")
    d = renyi_divergence(rho, sigma, order)
    if math.isinf(d):
        return math.inf
    if order.is_inf:
        return d  # g(eps)/(alpha-1) -> 0
    return d + g_epsilon(eps) / (order.alpha - 1.0)
