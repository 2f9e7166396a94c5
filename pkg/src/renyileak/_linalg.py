"""Dense Hermitian linear-algebra kernels.

Everything here operates on plain complex ndarrays.  Support decisions
(pseudoinverses, projectors, orthogonality tests) all key off the single
relative eigenvalue floor ``EIG_FLOOR`` so that no two operations can
disagree about what counts as the support of an operator.
"""

import numpy as np

from .errors import SingularOperator

# Relative eigenvalue floor: eigenvalues below EIG_FLOOR * spectral norm are
# treated as exact zeros everywhere (support projectors, pseudoinverses,
# orthogonality tests).
EIG_FLOOR = 1e-10


def herm(mat):
    """Hermitian part (M + M^dag) / 2."""
    return 0.5 * (mat + mat.conj().T)


def is_hermitian(mat, tol=1e-9):
    return np.max(np.abs(mat - mat.conj().T)) <= tol


def eigh_fixed(mat):
    """Deterministic Hermitian eigendecomposition.

    Eigenvalues ascending (LAPACK order); each eigenvector's phase is fixed
    by making its largest-magnitude component real and positive, so repeated
    runs on identical input give bit-identical output.

    Returns
    -------
    (eigvals, eigvecs) : ndarray, ndarray
        ``mat == eigvecs @ diag(eigvals) @ eigvecs.conj().T``.
    """
    vals, vecs = np.linalg.eigh(herm(mat))
    anchor = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[anchor, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(lead) > 0, lead / np.maximum(np.abs(lead), 1e-300), 1.0)
    return vals, vecs / phases


def support_mask(eigvals):
    """Boolean mask of eigenvalues belonging to the support."""
    eigvals = np.asarray(eigvals)
    scale = np.max(np.abs(eigvals)) if eigvals.size else 0.0
    if scale == 0.0:
        return np.zeros_like(eigvals, dtype=bool)
    return eigvals > EIG_FLOOR * scale


def support_projector(mat):
    """Projector onto the support (eigenvalues above the floor)."""
    vals, vecs = eigh_fixed(mat)
    keep = support_mask(vals)
    v = vecs[:, keep]
    return v @ v.conj().T


def rank_psd(mat):
    vals, _ = eigh_fixed(mat)
    return int(np.count_nonzero(support_mask(vals)))


def _power_eigvals(vals, exponent, pseudo):
    """Apply t -> t**exponent to floored eigenvalues, 0 -> 0 on the kernel."""
    keep = support_mask(vals)
    if exponent < 0 and not pseudo and not keep.all():
        raise SingularOperator(
            f"negative power {exponent} of a singular operator without pseudoinverse"
        )
    out = np.zeros_like(vals, dtype=float)
    out[keep] = np.power(vals[keep].astype(float), exponent)
    return out


def power_psd(mat, exponent, pseudo=False):
    """Fractional/negative power of a Hermitian PSD matrix.

    Eigenvalues below the floor are treated as exact zeros; with ``pseudo``
    they are mapped to zero for negative exponents (Moore-Penrose on the
    support), otherwise a negative exponent on a singular input raises
    :class:`SingularOperator`.  ``exponent == 0`` yields the support
    projector.
    """
    vals, vecs = eigh_fixed(mat)
    fvals = _power_eigvals(vals, exponent, pseudo)
    return (vecs * fvals) @ vecs.conj().T


def sqrt_psd(mat):
    return power_psd(mat, 0.5)


def inv_sqrt_psd(mat):
    """Pseudoinverse square root."""
    return power_psd(mat, -0.5, pseudo=True)


def trace_norm(mat):
    """Schatten 1-norm (sum of singular values)."""
    return float(np.sum(np.linalg.svd(mat, compute_uv=False)))


def fidelity_root_term(rho, sigma):
    """|| sqrt(rho) sqrt(sigma) ||_1 for PSD rho, sigma."""
    return trace_norm(sqrt_psd(rho) @ sqrt_psd(sigma))


def power_divided_diff(eigvals, exponent):
    """First divided differences of t -> t**exponent on an eigenvalue grid.

    Entry (i, j) is (a_i^p - a_j^p) / (a_i - a_j), with the limit
    p * a^(p-1) on the diagonal/degenerate pairs and the pseudoinverse
    convention (value 0) when both eigenvalues sit on the kernel.  Used for
    Frechet derivatives of matrix powers (Daleckii-Krein).
    """
    vals = np.asarray(eigvals, dtype=float)
    keep = support_mask(vals)
    fvals = np.zeros_like(vals)
    fvals[keep] = np.power(vals[keep], exponent)

    a = vals[:, None]
    b = vals[None, :]
    fa = fvals[:, None]
    fb = fvals[None, :]
    diff = a - b
    # Pairs are "degenerate" when their gap is tiny relative to the scale.
    scale = np.max(np.abs(vals)) if vals.size else 1.0
    degenerate = np.abs(diff) <= 1e-12 * max(scale, 1e-300)

    table = np.zeros_like(diff)
    nz = ~degenerate
    table[nz] = (fa - fb)[nz] / diff[nz]

    # Degenerate on-support pairs get the derivative; kernel pairs stay 0.
    deriv = np.zeros_like(vals)
    deriv[keep] = exponent * np.power(vals[keep], exponent - 1.0)
    on_support = keep[:, None] & keep[None, :]
    dd = degenerate & on_support
    table[dd] = (0.5 * (deriv[:, None] + deriv[None, :]))[dd]

    # Mixed kernel/support degenerate pairs (near-floor): fall back to the
    # two-sided difference against 0, matching the pseudoinverse convention.
    mixed = degenerate & (keep[:, None] ^ keep[None, :])
    if np.any(mixed):
        safe = np.where(np.abs(diff) > 0, diff, 1.0)
        table[mixed] = ((fa - fb) / safe)[mixed]
    return table
