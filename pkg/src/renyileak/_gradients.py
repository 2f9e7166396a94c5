"""Frechet derivatives of the sandwiched trace functional.

For Q(rho, sigma) = tr[(sigma^b rho sigma^b)^a] with b = (1-a)/(2a), the
derivative with respect to sigma goes through the matrix power sigma^b and
is evaluated with the Daleckii-Krein divided-difference formula in sigma's
eigenbasis.  Everything here works on plain ndarrays; all matrices are
Hermitian PSD and gradients are returned hermitized.
"""

import math

import numpy as np

from ._linalg import eigh_fixed, herm, power_divided_diff, power_psd, support_mask

LN2 = math.log(2.0)


def _power_from_eigs(vecs, vals, exponent):
    keep = support_mask(vals)
    fv = np.zeros_like(vals)
    fv[keep] = np.power(vals[keep], exponent)
    return (vecs * fv) @ vecs.conj().T


def kron_small(a, b):
    """Broadcast Kronecker product; much faster than np.kron at desk scale."""
    da, db = a.shape[0], b.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(da * db, da * db)


def psd_power_fast(mat, exponent):
    """power_psd without the phase-fixing pass (hot loops only)."""
    vals, vecs = np.linalg.eigh(mat)
    return _power_from_eigs(vecs, vals, exponent)


def quotient_and_grads(rho, sigma, alpha, need_rho_grad=True, need_sigma_grad=True):
    """Q and its gradients: dQ = tr[G_rho drho] + tr[G_sigma dsigma].

    Returns (Q, G_rho, G_sigma); unset gradients come back as None.
    """
    beta = (1.0 - alpha) / (2.0 * alpha)
    svals, svecs = eigh_fixed(sigma)
    s_beta = _power_from_eigs(svecs, svals, beta)
    core = herm(s_beta @ rho @ s_beta)
    tvals, tvecs = eigh_fixed(core)
    keep = support_mask(tvals)
    q = float(np.sum(np.power(tvals[keep], alpha)))

    t_am1 = _power_from_eigs(tvecs, tvals, alpha - 1.0)
    g_rho = alpha * herm(s_beta @ t_am1 @ s_beta) if need_rho_grad else None

    g_sigma = None
    if need_sigma_grad:
        k = rho @ s_beta @ t_am1
        k = k + k.conj().T
        table = power_divided_diff(svals, beta)
        k_eig = svecs.conj().T @ k @ svecs
        g_sigma = alpha * herm(svecs @ (table * k_eig) @ svecs.conj().T)
    return q, g_rho, g_sigma


def divergence_value_and_grads(rho, sigma, alpha, need_rho_grad=True, need_sigma_grad=True):
    """D_alpha in bits plus gradients dD = tr[G_r drho] + tr[G_s dsigma].

    Only finite alpha != 1; callers handle the Umegaki and max branches.
    """
    tr_rho = float(np.real(np.trace(rho)))
    q, g_rho, g_sigma = quotient_and_grads(rho, sigma, alpha,
                                           need_rho_grad, need_sigma_grad)
    scale = 1.0 / ((alpha - 1.0) * LN2 * q)
    value = (math.log2(q) - math.log2(tr_rho)) / (alpha - 1.0)
    if g_rho is not None:
        g_rho = g_rho * scale - np.eye(rho.shape[0]) / ((alpha - 1.0) * LN2 * tr_rho)
    if g_sigma is not None:
        g_sigma = g_sigma * scale
    return value, g_rho, g_sigma


def factored_quotient_and_grad(rho, omega_beta, sigma, alpha):
    """Q and its sigma-gradient when the second argument factors as Omega x sigma.

    ``rho`` and ``omega_beta`` = Omega^((1-a)/2a) live on the full space of
    dimension d_R * d_B with sigma acting on the trailing d_B factor.
    Returns (Q, grad_sigma, aux) where aux carries the eigen-data needed by
    the fixed-point acceleration step.
    """
    d = rho.shape[0]
    d_b = sigma.shape[0]
    d_r = d // d_b
    beta = (1.0 - alpha) / (2.0 * alpha)

    svals, svecs = np.linalg.eigh(sigma)
    s_beta = _power_from_eigs(svecs, svals, beta)
    x_beta = kron_small(omega_beta, s_beta)
    core = x_beta @ rho @ x_beta
    tvals, tvecs = np.linalg.eigh(core)
    keep = support_mask(tvals)
    q = float(np.sum(np.power(tvals[keep], alpha)))

    t_am1 = _power_from_eigs(tvecs, tvals, alpha - 1.0)
    k = rho @ x_beta @ t_am1
    k = k + k.conj().T
    c = k @ np.kron(omega_beta, np.eye(d_b))
    c_b = np.trace(c.reshape(d_r, d_b, d_r, d_b), axis1=0, axis2=2)

    table = power_divided_diff(svals, beta)
    c_eig = svecs.conj().T @ c_b @ svecs
    grad = alpha * herm(svecs @ (table * c_eig) @ svecs.conj().T)

    aux = {"tvals": tvals, "tvecs": tvecs, "x_beta": x_beta,
           "svals": svals, "svecs": svecs, "d_r": d_r, "d_b": d_b}
    return q, grad, aux


def factored_quotient(rho, omega_beta, sigma_beta, alpha):
    """Q alone (line-search evaluations)."""
    x_beta = kron_small(omega_beta, sigma_beta)
    core = x_beta @ rho @ x_beta
    vals = np.linalg.eigvalsh(core)
    keep = support_mask(vals)
    return float(np.sum(np.power(vals[keep], alpha)))


def batched_factored_quotient(rho, omega_beta, sigmas, alpha):
    """Q for a stack of sigma candidates in one shot (batched eigh)."""
    beta = (1.0 - alpha) / (2.0 * alpha)
    svals, svecs = np.linalg.eigh(sigmas)
    scale = np.max(np.abs(svals), axis=1, keepdims=True)
    fv = np.where(svals > 1e-10 * np.maximum(scale, 1e-300),
                  np.power(np.clip(svals, 1e-300, None), beta), 0.0)
    s_beta = np.einsum("nij,nj,nkj->nik", svecs, fv, svecs.conj())
    d_r, d_b = omega_beta.shape[0], sigmas.shape[-1]
    x_beta = (omega_beta[None, :, None, :, None]
              * s_beta[:, None, :, None, :]).reshape(-1, d_r * d_b, d_r * d_b)
    core = x_beta @ rho @ x_beta
    tvals = np.linalg.eigvalsh(core)
    tscale = np.max(np.abs(tvals), axis=1, keepdims=True)
    keep = tvals > 1e-10 * np.maximum(tscale, 1e-300)
    return np.sum(np.where(keep, np.power(np.clip(tvals, 1e-300, None), alpha), 0.0),
                  axis=1)


def fixed_point_candidate(rho, omega_beta, sigma, alpha, aux):
    """Stationarity-inspired update: (s^(a-1)/2 tr_R[T^a] s^(a-1)/2)^(1/a).

    Exact in one step for commuting instances; used only as a candidate that
    must improve the objective to be accepted.
    """
    tvals, tvecs = aux["tvals"], aux["tvecs"]
    d_r, d_b = aux["d_r"], aux["d_b"]
    t_a = _power_from_eigs(tvecs, tvals, alpha)
    t_a_b = np.trace(t_a.reshape(d_r, d_b, d_r, d_b), axis1=0, axis2=2)
    half = psd_power_fast(sigma, (alpha - 1.0) / 2.0)
    mid = herm(half @ t_a_b @ half)
    cand = psd_power_fast(mid, 1.0 / alpha)
    tr = float(np.real(np.trace(cand)))
    if tr <= 0.0 or not np.isfinite(tr):
        return None
    return cand / tr
