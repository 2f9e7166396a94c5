"""Self-contained dense semidefinite programming for desk-scale problems.

Problems are given in linear-matrix-inequality form:

    minimize    c . x
    subject to  sum_i x_i F_i^(j)  >=  G^(j)      (one PSD block per j)

over real variables x, with Hermitian F, G.  The solver follows the central
path of the log-det barrier with damped Newton steps; at an approximately
centered point the scaled inverses Z_j = S_j^{-1}/t are dual feasible up to
the Newton residual, which yields a duality-gap certificate without any
external dependency.  Dimensions are capped at desk scale (<= 64 per block).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._linalg import herm
from .errors import DimensionLimit, Infeasible, NumericalFailure, Unbounded

MAX_BLOCK_DIM = 64
DEFAULT_GAP_TOL = 1e-7
DEFAULT_FEAS_TOL = 1e-8


@dataclass
class SdpBlock:
    """One PSD constraint sum_i x_i coeffs[i] - const >= 0."""

    const: np.ndarray
    coeffs: list

    def __post_init__(self):
        self.const = herm(np.asarray(self.const, dtype=complex))
        self.coeffs = [herm(np.asarray(f, dtype=complex)) for f in self.coeffs]
        n = self.const.shape[0]
        if n > MAX_BLOCK_DIM:
            raise DimensionLimit(f"SDP block dimension {n} exceeds {MAX_BLOCK_DIM}")
        for f in self.coeffs:
            if f.shape != (n, n):
                raise ValueError("coefficient block shape mismatch")

    @property
    def dim(self):
        return self.const.shape[0]

    def evaluate(self, x):
        s = -self.const.copy()
        for xi, f in zip(x, self.coeffs):
            s += xi * f
        return herm(s)


@dataclass
class SdpProblem:
    objective: np.ndarray
    blocks: list

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        m = len(self.objective)
        for b in self.blocks:
            if len(b.coeffs) != m:
                raise ValueError("block has wrong number of coefficient matrices")

    @property
    def num_vars(self):
        return len(self.objective)


@dataclass
class SdpSolution:
    x: np.ndarray
    value: float
    dual_value: float
    gap: float
    status: str
    dual_blocks: list = field(default_factory=list)
    dual_residual: float = 0.0
    primal_residual: float = 0.0
    iterations: int = 0


def _min_eig(mat):
    return float(np.linalg.eigvalsh(mat)[0])


def _is_pd(mat):
    try:
        np.linalg.cholesky(mat)
        return True
    except np.linalg.LinAlgError:
        return False


def _newton_center(problem, x, t, tol=1e-11, max_steps=60, stop_when=None):
    """Damped Newton minimization of t*c.x - sum log det S_j(x)."""
    m = problem.num_vars
    x = x.copy()
    for step in range(max_steps):
        grads = t * problem.objective.copy()
        hess = np.zeros((m, m))
        for blk in problem.blocks:
            s = blk.evaluate(x)
            try:
                chol = np.linalg.cholesky(s)
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure("lost positive definiteness while centering") from exc
            inv = np.linalg.inv(chol)
            w = np.stack([inv @ f @ inv.conj().T for f in blk.coeffs])
            grads -= np.real(np.einsum("kii->k", w))
            flat = w.reshape(len(blk.coeffs), -1)
            hess += np.real(flat @ flat.conj().T)
        try:
            dx = np.linalg.solve(hess, -grads)
            decrement = float(-grads @ dx)
        except np.linalg.LinAlgError:
            decrement = -1.0
        if decrement < 0:
            # Flat directions (e.g. phase-I slack cancellation): regularize.
            scale = max(float(np.trace(hess)) / m, 1.0)
            dx = np.linalg.solve(hess + 1e-10 * scale * np.eye(m), -grads)
            decrement = float(-grads @ dx)
        # Backtrack into the PD cone (Cholesky check, matching the next
        # iteration's factorization), then take the step.
        step_len = 1.0
        for _ in range(60):
            cand = x + step_len * dx
            if all(_is_pd(blk.evaluate(cand)) for blk in problem.blocks):
                break
            step_len *= 0.5
        else:
            return x, float(np.linalg.norm(grads, np.inf))
        x = x + step_len * dx
        if stop_when is not None and stop_when(x):
            return x, float(np.linalg.norm(grads, np.inf))
        if decrement < tol:
            break
    grad_norm = _grad_norm(problem, x, t)
    return x, grad_norm


def _grad_norm(problem, x, t):
    g = t * problem.objective.copy()
    for blk in problem.blocks:
        s = blk.evaluate(x)
        try:
            s_inv = np.linalg.inv(s)
        except np.linalg.LinAlgError:
            s_inv = np.linalg.pinv(s)
        g -= np.array([float(np.real(np.trace(s_inv @ f))) for f in blk.coeffs])
    return float(np.linalg.norm(g, np.inf))


def _strictly_feasible_start(problem, margin=1e-6):
    """Phase I: drive the slack in S_j(x) + s*I >= 0 below zero.

    The slack is bounded below (s >= -1) so the auxiliary problem stays
    bounded; the search exits as soon as any strictly feasible x appears.
    """
    m = problem.num_vars
    x0 = np.zeros(m)
    worst = min(_min_eig(blk.evaluate(x0)) for blk in problem.blocks)
    if worst > margin:
        return x0
    aug_blocks = []
    for blk in problem.blocks:
        eye = np.eye(blk.dim)
        aug_blocks.append(SdpBlock(blk.const, list(blk.coeffs) + [eye]))
    zeros = [np.zeros((1, 1)) for _ in range(m)]
    aug_blocks.append(SdpBlock(-np.eye(1), zeros + [np.eye(1)]))  # s >= -1
    aug = SdpProblem(np.concatenate([np.zeros(m), [1.0]]), aug_blocks)
    xs = np.concatenate([x0, [-worst + 1.0]])

    def feasible(point):
        return all(_min_eig(blk.evaluate(point[:m])) > margin for blk in problem.blocks)

    t = 1.0
    for _ in range(40):
        xs, _ = _newton_center(aug, xs, t, stop_when=feasible)
        if feasible(xs):
            return xs[:m]
        nu = sum(blk.dim for blk in aug_blocks)
        if nu / t < margin / 4:
            raise Infeasible(f"no strictly feasible point (phase-I level {xs[-1]:.3e})")
        t *= 20.0
    raise NumericalFailure("phase-I did not converge")


def solve_sdp(problem, gap_tol=DEFAULT_GAP_TOL, feas_tol=DEFAULT_FEAS_TOL,
              x0=None, x_cap=1e9):
    """Barrier path-following solve; OPTIMAL requires a certified gap.

    Returns an :class:`SdpSolution` whose ``dual_blocks`` witness the gap:
    they are PSD and satisfy the dual equality constraints up to
    ``dual_residual``.
    """
    if x0 is None:
        x = _strictly_feasible_start(problem)
    else:
        x = np.asarray(x0, dtype=float).copy()
        if min(_min_eig(blk.evaluate(x)) for blk in problem.blocks) <= 0:
            x = _strictly_feasible_start(problem)

    nu = sum(blk.dim for blk in problem.blocks)
    # Large-norm constant blocks inflate the dual-correction slop, so the
    # centering target scales with the problem norm.
    scale = max([1.0] + [float(np.linalg.norm(blk.const, 2)) for blk in problem.blocks])
    t_stop = 2.0 * nu * scale / gap_tol
    t = max(1.0, nu / max(abs(float(problem.objective @ x)), 1.0))
    iterations = 0
    while True:
        x, _ = _newton_center(problem, x, t)
        iterations += 1
        if float(np.linalg.norm(x, np.inf)) > x_cap:
            raise Unbounded("iterates diverging; objective unbounded below")
        if t >= t_stop:
            break
        # Long steps early; shorter steps through the ill-conditioned endgame
        # keep the warm starts close enough for Newton to stay quadratic.
        mu = 25.0 if t < 1e-2 * t_stop else 5.0
        t = min(t * mu, t_stop)
    # One extra tight centering round at the final t.
    try:
        x, _ = _newton_center(problem, x, t, tol=1e-16, max_steps=15)
    except NumericalFailure:
        pass

    dual_blocks = [herm(np.linalg.inv(blk.evaluate(x)) / t) for blk in problem.blocks]
    dual_blocks = _project_dual(problem, dual_blocks)

    dual_value = 0.0
    dual_eq = -problem.objective.copy()
    primal_residual = 0.0
    psd_violation = 0.0
    for blk, z in zip(problem.blocks, dual_blocks):
        s = blk.evaluate(x)
        primal_residual = max(primal_residual, max(0.0, -_min_eig(s)))
        psd_violation = max(psd_violation, max(0.0, -_min_eig(z)))
        dual_value += float(np.real(np.trace(blk.const @ z)))
        dual_eq += np.array([float(np.real(np.trace(z @ f))) for f in blk.coeffs])
    dual_residual = float(np.linalg.norm(dual_eq, np.inf))
    value = float(problem.objective @ x)
    # Certified duality gap: feasible primal value minus feasible dual value.
    gap = max(value - dual_value, 0.0)

    ok = (gap <= gap_tol and dual_residual <= feas_tol
          and primal_residual <= feas_tol and psd_violation <= feas_tol)
    status = "OPTIMAL" if ok else "INACCURATE"
    return SdpSolution(x=x, value=value, dual_value=dual_value, gap=gap,
                       status=status, dual_blocks=dual_blocks,
                       dual_residual=dual_residual, primal_residual=primal_residual,
                       iterations=iterations)


def _project_dual(problem, dual_blocks, rounds=6):
    """Alternate equality projection and PSD clipping on the dual candidate.

    The equality step is a least-norm Gram solve onto the affine subspace
    sum_j tr[Z_j F_ji] = c_i; the clip zeroes negative eigenvalues.  Both
    violations start at the centering-residual scale and shrink together.
    """
    m = problem.num_vars
    gram = np.zeros((m, m))
    flats = []
    for blk in problem.blocks:
        flat = np.stack([f.reshape(-1) for f in blk.coeffs])
        flats.append(flat)
        gram += np.real(flat @ flat.conj().T)
    blocks = [z.copy() for z in dual_blocks]
    for _ in range(rounds):
        resid = problem.objective.copy()
        for blk, z in zip(problem.blocks, blocks):
            resid -= np.array([float(np.real(np.trace(z @ f))) for f in blk.coeffs])
        try:
            y = np.linalg.solve(gram, resid)
        except np.linalg.LinAlgError:
            y, *_ = np.linalg.lstsq(gram, resid, rcond=None)
        blocks = [herm(z + sum(yi * f for yi, f in zip(y, blk.coeffs)))
                  for blk, z in zip(problem.blocks, blocks)]
        worst = min(_min_eig(z) for z in blocks)
        if worst >= 0.0:
            break
        clipped = []
        for z in blocks:
            vals, vecs = np.linalg.eigh(z)
            clipped.append(herm((vecs * np.clip(vals, 0.0, None)) @ vecs.conj().T))
        blocks = clipped
    return blocks


def hermitian_basis(dim):
    """Orthonormal basis of Hermitian dim x dim matrices (trace inner product)."""
    basis = []
    for k in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[k, k] = 1.0
        basis.append(e)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for k in range(dim):
        for l in range(k + 1, dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[k, l] = inv_sqrt2
            e[l, k] = inv_sqrt2
            basis.append(e)
            f = np.zeros((dim, dim), dtype=complex)
            f[k, l] = -1j * inv_sqrt2
            f[l, k] = 1j * inv_sqrt2
            basis.append(f)
    return basis


def hermitian_coords(mat, basis):
    return np.array([float(np.real(np.trace(b.conj().T @ mat))) for b in basis])


def matrix_from_coords(x, basis):
    out = np.zeros_like(basis[0])
    for xi, b in zip(x, basis):
        out = out + xi * b
    return herm(out)
