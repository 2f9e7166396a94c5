"""Register-aware dense Hermitian operators and the core state calculus.

Operators are immutable value objects: a :class:`RegisterLayout` plus a dense
complex matrix.  All operations are pure functions; randomness never enters
here.  Binary operations canonicalize register order lexicographically before
touching the matrices.
"""

import numpy as np

from ._linalg import (
    EIG_FLOOR,
    eigh_fixed,
    fidelity_root_term,
    herm,
    power_psd,
    support_mask,
)
from .errors import (
    ClassicalityError,
    LayoutError,
    NormalizationError,
    SingularOperator,
    ZeroProbabilityEvent,
)
from .registers import RegisterLayout, permute_matrix

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-8
TRACE_TOL = 1e-8


class QOperator:
    """Dense Hermitian operator over a register layout."""

    def __init__(self, layout, matrix, hermitian_tol=HERMITIAN_TOL):
        if not isinstance(layout, RegisterLayout):
            layout = RegisterLayout(layout)
        matrix = np.asarray(matrix, dtype=complex)
        d = layout.total_dim
        if matrix.shape != (d, d):
            raise LayoutError(f"matrix shape {matrix.shape} does not match layout dim {d}")
        dev = float(np.max(np.abs(matrix - matrix.conj().T))) if d else 0.0
        if dev > hermitian_tol:
            raise ValueError(f"matrix is not Hermitian within {hermitian_tol} (max dev {dev:.3e})")
        self.layout = layout
        self.matrix = herm(matrix)
        self.matrix.setflags(write=False)
        self.hermitian_tol = hermitian_tol

    @classmethod
    def identity(cls, layout):
        if not isinstance(layout, RegisterLayout):
            layout = RegisterLayout(layout)
        return cls(layout, np.eye(layout.total_dim))

    @property
    def labels(self):
        return self.layout.labels

    @property
    def dim(self):
        return self.layout.total_dim

    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def eigvals(self):
        return eigh_fixed(self.matrix)[0]

    def permuted(self, new_order):
        mat, lay = permute_matrix(self.matrix, self.layout, new_order)
        return self._rewrap(lay, mat)

    def canonical(self):
        """Same operator with registers in lexicographic label order."""
        return self.permuted(self.layout.canonical().labels)

    def _rewrap(self, layout, matrix):
        return QOperator(layout, matrix, hermitian_tol=self.hermitian_tol)

    def __repr__(self):
        regs = ",".join(f"{l}:{d}" for l, d in self.layout.factors)
        return f"<{type(self).__name__} [{regs}] dim={self.dim}>"


class DensityOperator(QOperator):
    """PSD operator with trace in (0, 1]; ``normalized`` pins trace to 1."""

    def __init__(self, layout, matrix, normalized=True, psd_tol=PSD_TOL,
                 trace_tol=TRACE_TOL, hermitian_tol=HERMITIAN_TOL):
        super().__init__(layout, matrix, hermitian_tol=hermitian_tol)
        vals = np.linalg.eigvalsh(self.matrix)
        if vals.size and vals[0] < -psd_tol:
            raise ValueError(f"not PSD within {psd_tol}: min eigenvalue {vals[0]:.3e}")
        tr = self.trace()
        if not 0.0 < tr <= 1.0 + trace_tol:
            raise ValueError(f"trace {tr} outside (0, 1]")
        if normalized and abs(tr - 1.0) > trace_tol:
            raise NormalizationError(f"normalized state has trace {tr}")
        self.normalized = bool(normalized)

    @classmethod
    def pure(cls, layout, vector):
        if not isinstance(layout, RegisterLayout):
            layout = RegisterLayout(layout)
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if v.shape[0] != layout.total_dim:
            raise LayoutError("state vector length does not match layout")
        v = v / np.linalg.norm(v)
        return cls(layout, np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, layout):
        if not isinstance(layout, RegisterLayout):
            layout = RegisterLayout(layout)
        d = layout.total_dim
        return cls(layout, np.eye(d) / d)

    def _rewrap(self, layout, matrix):
        return DensityOperator(layout, matrix, normalized=self.normalized,
                               hermitian_tol=self.hermitian_tol)

    def subnormalized(self):
        return DensityOperator(self.layout, self.matrix, normalized=False)


class ClassicalEvent:
    """A subset of computational-basis outcomes on one register."""

    def __init__(self, register_label, accepted_indices):
        accepted = tuple(sorted(set(int(i) for i in accepted_indices)))
        if not accepted:
            raise ValueError("event must accept at least one basis index")
        self.register_label = str(register_label)
        self.accepted_indices = accepted

    def complement(self, dim):
        rest = [i for i in range(dim) if i not in self.accepted_indices]
        return ClassicalEvent(self.register_label, rest)

    def __repr__(self):
        return f"ClassicalEvent({self.register_label!r}, {set(self.accepted_indices)})"


def matrix_power(op, exponent, use_pseudoinverse=False):
    """U f(Lambda) U^dag with eigenvalues below the floor treated as zero.

    Negative exponents on singular operators require ``use_pseudoinverse``
    (Moore-Penrose on the support) and raise :class:`SingularOperator`
    otherwise.
    """
    mat = power_psd(op.matrix, float(exponent), pseudo=use_pseudoinverse)
    return QOperator(op.layout, mat)


def partial_trace(op, keep):
    """Trace out every register not in ``keep``; kept factors keep their order."""
    keep = set(keep)
    layout = op.layout
    keep_pos = layout.positions(keep)
    drop_pos = tuple(i for i in range(len(layout)) if i not in keep_pos)
    dims = layout.dims
    tens = op.matrix.reshape(dims + dims)
    n = len(dims)
    for offset, i in enumerate(sorted(drop_pos)):
        ax = i - offset
        tens = np.trace(tens, axis1=ax, axis2=ax + (n - offset))
    new_layout = layout.select(keep)
    d = new_layout.total_dim
    mat = tens.reshape(d, d)
    if isinstance(op, DensityOperator):
        return DensityOperator(new_layout, mat, normalized=op.normalized)
    return QOperator(op.layout.select(keep), mat)


def tensor_product(a, b):
    """Kronecker product; operands are canonicalized, layouts concatenate."""
    a = a.canonical()
    b = b.canonical()
    layout = a.layout.concat(b.layout)
    mat = np.kron(a.matrix, b.matrix)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(layout, mat, normalized=a.normalized and b.normalized)
    return QOperator(layout, mat)


def embed(op, target_layout):
    """Extend ``op`` by identity factors to ``target_layout`` (label-aligned)."""
    missing = [f for f in target_layout.factors if f[0] not in op.labels]
    for lbl in op.labels:
        if lbl not in target_layout.labels:
            raise LayoutError(f"operator label {lbl!r} absent from target layout")
        if op.layout.dim_of(lbl) != target_layout.dim_of(lbl):
            raise LayoutError(f"dimension mismatch on register {lbl!r}")
    big = op
    if missing:
        big = tensor_product(QOperator(op.layout, op.matrix), QOperator.identity(missing))
    mat, _ = permute_matrix(big.matrix, big.layout, target_layout.labels)
    return QOperator(target_layout, mat)


def aligned_matrices(a, b):
    """Canonicalize both operands to a common register order; return matrices."""
    if not a.layout.same_registers(b.layout):
        raise LayoutError(f"layouts differ: {a.layout.factors} vs {b.layout.factors}")
    a = a.canonical()
    b = b.canonical()
    return a.matrix, b.matrix, a.layout


def conditional_state(rho, given):
    """Sandwich-normalized conditional state on the complement of ``given``.

    Returns rho_B^{-1/2} rho rho_B^{-1/2} (pseudoinverse square roots) with
    rho_B the reduced state on ``given``, embedded back on the full layout.
    """
    given = list(given)
    reduced = partial_trace(rho, given)
    vals = np.linalg.eigvalsh(reduced.matrix)
    if not np.any(support_mask(vals)):
        raise SingularOperator("reduced state on the conditioning registers is zero")
    inv_root = embed(matrix_power(QOperator(reduced.layout, reduced.matrix), -0.5,
                                  use_pseudoinverse=True), rho.layout)
    mat = inv_root.matrix @ rho.matrix @ inv_root.matrix
    return QOperator(rho.layout, herm(mat))


def purified_distance(rho, sigma):
    """sqrt(1 - F^2) with the generalized (subnormalized) fidelity F."""
    a, b, _ = aligned_matrices(rho, sigma)
    f = fidelity_root_term(a, b)
    f += np.sqrt(max(0.0, 1.0 - rho.trace()) * max(0.0, 1.0 - sigma.trace()))
    f = min(f, 1.0)
    return float(np.sqrt(max(0.0, 1.0 - f * f)))


def purify(rho, purifier_label):
    """Pure extension on ``layout + purifier`` whose reduction recovers rho.

    The purifier dimension equals the rank of rho.
    """
    if not rho.normalized:
        raise NormalizationError("purification requires a normalized state")
    if purifier_label in rho.labels:
        raise LayoutError(f"purifier label {purifier_label!r} already in layout")
    vals, vecs = eigh_fixed(rho.matrix)
    keep = np.flatnonzero(support_mask(vals))
    rank = len(keep)
    layout = rho.layout.concat(RegisterLayout([(purifier_label, rank)]))
    psi = np.zeros(rho.dim * rank, dtype=complex)
    for slot, idx in enumerate(keep[::-1]):  # descending eigenvalues
        psi += np.sqrt(max(vals[idx], 0.0)) * np.kron(vecs[:, idx], _unit(rank, slot))
    return DensityOperator.pure(layout, psi)


def _unit(dim, k):
    e = np.zeros(dim)
    e[k] = 1.0
    return e


def _classical_blocks(rho, register_label, tol=1e-9):
    """View the matrix as blocks indexed by the classical register's basis."""
    layout = rho.layout
    d_c = layout.dim_of(register_label)
    rest = [lbl for lbl in layout.labels if lbl != register_label]
    ordered = rho.permuted((register_label, *rest))
    d_q = ordered.layout.total_dim // d_c
    blocks = ordered.matrix.reshape(d_c, d_q, d_c, d_q)
    off_diag = 0.0
    for c in range(d_c):
        for cp in range(d_c):
            if c != cp:
                off_diag = max(off_diag, float(np.max(np.abs(blocks[c, :, cp, :]))))
    if off_diag > tol:
        raise ClassicalityError(
            f"register {register_label!r} is not classical (off-diagonal {off_diag:.3e})"
        )
    return ordered, blocks, d_c, d_q


def condition_on_event(rho, event, mode="partial"):
    """Partial state (zero out rejected outcomes) or rescaled conditional state.

    ``partial`` keeps the accepted diagonal blocks, so the trace equals the
    event probability; ``conditional`` rescales by tr(rho)/tr(partial).
    """
    if mode not in ("partial", "conditional"):
        raise ValueError(f"unknown mode {mode!r}")
    ordered, blocks, d_c, d_q = _classical_blocks(rho, event.register_label)
    for idx in event.accepted_indices:
        if not 0 <= idx < d_c:
            raise LayoutError(f"event index {idx} out of range for {event.register_label!r}")
    new = np.zeros_like(blocks)
    for c in event.accepted_indices:
        new[c, :, c, :] = blocks[c, :, c, :]
    d = ordered.layout.total_dim
    mat = new.reshape(d, d)
    p = float(np.real(np.trace(mat)))
    if mode == "conditional":
        if p <= 0.0:
            raise ZeroProbabilityEvent(f"event on {event.register_label!r} has probability 0")
        mat = mat * (rho.trace() / p)  # conditional keeps the input's trace
    normalized = mode == "conditional" and rho.normalized
    out = DensityOperator(ordered.layout, mat, normalized=normalized)
    return out.permuted(rho.labels)


def event_probability(rho, event):
    return condition_on_event(rho, event, "partial").trace()
