"""Independent brute-force oracles used by the test suite.

These deliberately avoid the library's optimized code paths: divergences are
evaluated with raw batched numpy on explicit grids, entropies via eigenvalue
sums, so that agreement with the library is a genuine two-route check.
"""

import numpy as np


def bloch_point(x, y, z):
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]])


def _batched_power(mats, p):
    vals, vecs = np.linalg.eigh(mats)
    vals = np.clip(vals, 0.0, None)
    fv = np.zeros_like(vals)
    pos = vals > 1e-14
    fv[pos] = vals[pos] ** p
    return np.einsum("nij,nj,nkj->nik", vecs, fv, vecs.conj())

def _batched_quotient(rho, omega, sigmas, alpha):
    """tr[((omega (x) sigma)^b rho (omega (x) sigma)^b)^a] for a batch of sigmas."""
    beta = (1.0 - alpha) / (2.0 * alpha)
    wv, wU = np.linalg.eigh(omega)
    wv = np.clip(wv, 0.0, None)
    fw = np.where(wv > 1e-14, wv ** beta, 0.0)
    omega_b = (wU * fw) @ wU.conj().T
    sig_b = _batched_power(sigmas, beta)
    xb = np.einsum("ij,nkl->nikjl", omega_b, sig_b)
    d = rho.shape[0]
    xb = xb.reshape(-1, d, d)
    core = xb @ rho @ xb
    core = 0.5 * (core + np.conj(np.transpose(core, (0, 2, 1))))
    tv = np.linalg.eigvalsh(core)
    tv = np.clip(tv, 0.0, None)
    return np.sum(np.where(tv > 1e-16, tv ** alpha, 0.0), axis=1)


def _ball_grid(step, center=(0.0, 0.0, 0.0), radius=1.0, open_ball=False):
    c = np.asarray(center)
    axes = [np.arange(c[i] - radius, c[i] + radius + step / 2, step) for i in range(3)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    cap = 1.0 - 1e-9 if open_ball else 1.0 + 1e-12
    return pts[np.sum(pts**2, axis=1) <= cap]

def _sigmas_from_points(pts):
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    sig = np.empty((len(pts), 2, 2), dtype=complex)
    sig[:, 0, 0] = (1 + z) / 2
    sig[:, 1, 1] = (1 - z) / 2
    sig[:, 0, 1] = (x - 1j * y) / 2
    sig[:, 1, 0] = (x + 1j * y) / 2
    return sig


def grid_min_divergence(rho, omega, alpha, coarse=0.05, fine=0.01, chunk=20000):
    """min over qubit sigma of D_alpha(rho || omega (x) sigma) by grid search.

    Two-stage scan of the Bloch ball: full scan at ``coarse`` resolution,
    then a full local scan at ``fine`` resolution around the coarse winner.
    The objective is quasi-convex (monotone transform of a convex trace
    functional), so the coarse winner localizes the global basin and the
    refinement is sound at resolution ``fine``.
    """
    tr_rho = float(np.real(np.trace(rho)))
    sign = 1.0 if alpha > 1.0 else -1.0  # minimize D == optimize Q accordingly
    # For alpha > 1 the divergence is +inf on rank-deficient sigma (support
    # condition), so sphere-boundary points are excluded from the scan.
    open_ball = alpha > 1.0

    def best_over(pts):
        best_q, best_pt = None, None
        for i in range(0, len(pts), chunk):
            qs = _batched_quotient(rho, omega, _sigmas_from_points(pts[i:i + chunk]), alpha)
            j = int(np.argmin(sign * qs))
            if best_q is None or sign * qs[j] < sign * best_q:
                best_q, best_pt = qs[j], pts[i + j]
        return best_q, best_pt

    q1, p1 = best_over(_ball_grid(coarse, open_ball=open_ball))
    pts = _ball_grid(fine, center=tuple(p1), radius=coarse * 1.2, open_ball=open_ball)
    q2, p2 = best_over(pts)
    q, p = (q2, p2) if sign * q2 < sign * q1 else (q1, p1)

    # Sub-lattice refinement: quadratic fit through the sampled 3x3x3
    # neighborhood of the winning lattice point, one extra evaluation at the
    # fitted minimum.  The bare 0.01 lattice has discretization error around
    # 1e-4 * curvature, which this brings below 1e-6.
    offs = np.array(np.meshgrid([-1, 0, 1], [-1, 0, 1], [-1, 0, 1],
                                indexing="ij")).reshape(3, -1).T * fine
    neigh = p + offs
    inside = np.sum(neigh**2, axis=1) <= (1.0 - 1e-9 if open_ball else 1.0)
    neigh = neigh[inside]
    qs = _batched_quotient(rho, omega, _sigmas_from_points(neigh), alpha)
    d = neigh - p
    design = np.column_stack([
        np.ones(len(d)), d[:, 0], d[:, 1], d[:, 2],
        d[:, 0]**2, d[:, 1]**2, d[:, 2]**2,
        d[:, 0] * d[:, 1], d[:, 0] * d[:, 2], d[:, 1] * d[:, 2],
    ])
    coef, *_ = np.linalg.lstsq(design, sign * qs, rcond=None)
    grad = coef[1:4]
    hess = np.array([
        [2 * coef[4], coef[7], coef[8]],
        [coef[7], 2 * coef[5], coef[9]],
        [coef[8], coef[9], 2 * coef[6]],
    ])
    try:
        step = -np.linalg.solve(hess, grad)
    except np.linalg.LinAlgError:
        step = np.zeros(3)
    if np.linalg.norm(step) <= 2 * fine and np.linalg.eigvalsh(hess)[0] > 0:
        cand = p + step
        if np.sum(cand**2) < (1.0 - 1e-9 if open_ball else 1.0):
            qc = _batched_quotient(rho, omega, _sigmas_from_points(cand[None, :]), alpha)[0]
            if sign * qc < sign * q:
                q = qc
    return (np.log2(q) - np.log2(tr_rho)) / (alpha - 1.0)


def vn_entropy(mat):
    vals = np.linalg.eigvalsh(mat)
    vals = vals[vals > 1e-14]
    return float(-np.sum(vals * np.log2(vals)))


def renyi_entropy_eigs(mat, alpha):
    vals = np.linalg.eigvalsh(mat)
    vals = vals[vals > 1e-14]
    if alpha == 1:
        return float(-np.sum(vals * np.log2(vals)))
    return float(np.log2(np.sum(vals**alpha)) / (1 - alpha))
