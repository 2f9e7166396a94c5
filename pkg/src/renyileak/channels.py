"""Completely positive trace-preserving maps as Kraus lists between layouts.

Channels act on any state whose layout contains the channel's input labels;
identity padding on untouched registers is implicit.  The ``annotations``
dict carries structural metadata (e.g. leakage-model parameters) that some
bounds can exploit; it never affects the channel action.
"""

import numpy as np

from ._linalg import herm
from .errors import LayoutError
from .operators import DensityOperator, QOperator
from .registers import RegisterLayout

CPTP_TOL = 1e-9


class QuantumChannel:
    """CPTP map given by rectangular Kraus operators (d_out x d_in)."""

    def __init__(self, in_layout, out_layout, kraus, annotations=None, cptp_tol=CPTP_TOL):
        if not isinstance(in_layout, RegisterLayout):
            in_layout = RegisterLayout(in_layout)
        if not isinstance(out_layout, RegisterLayout):
            out_layout = RegisterLayout(out_layout)
        d_in, d_out = in_layout.total_dim, out_layout.total_dim
        kraus = [np.asarray(k, dtype=complex) for k in kraus]
        if not kraus:
            raise ValueError("channel needs at least one Kraus operator")
        for k in kraus:
            if k.shape != (d_out, d_in):
                raise LayoutError(f"Kraus shape {k.shape} != ({d_out}, {d_in})")
        total = sum(k.conj().T @ k for k in kraus)
        dev = float(np.max(np.abs(total - np.eye(d_in))))
        if dev > cptp_tol:
            raise ValueError(f"Kraus operators are not trace-preserving (dev {dev:.3e})")
        self.in_layout = in_layout
        self.out_layout = out_layout
        self.kraus = kraus
        self.annotations = dict(annotations or {})

    @classmethod
    def identity(cls, layout):
        if not isinstance(layout, RegisterLayout):
            layout = RegisterLayout(layout)
        return cls(layout, layout, [np.eye(layout.total_dim)])

    @classmethod
    def from_isometry(cls, in_layout, out_layout, isometry):
        return cls(in_layout, out_layout, [np.asarray(isometry, dtype=complex)])

    @classmethod
    def replacer(cls, in_layout, target):
        """Discard the input and prepare the fixed state ``target``."""
        if not isinstance(in_layout, RegisterLayout):
            in_layout = RegisterLayout(in_layout)
        vals, vecs = np.linalg.eigh(herm(target.matrix))
        d_in = in_layout.total_dim
        ops = []
        for j, v in enumerate(vals):
            if v <= 0:
                continue
            for i in range(d_in):
                bra = np.zeros((1, d_in))
                bra[0, i] = 1.0
                ops.append(np.sqrt(v) * np.outer(vecs[:, j], bra))
        return cls(in_layout, target.layout, ops,
                   annotations={"kind": "replacer"})

    @classmethod
    def pinching(cls, layout):
        """Dephase every register of ``layout`` in the computational basis."""
        if not isinstance(layout, RegisterLayout):
            layout = RegisterLayout(layout)
        d = layout.total_dim
        ops = []
        for i in range(d):
            p = np.zeros((d, d))
            p[i, i] = 1.0
            ops.append(p)
        return cls(layout, layout, ops, annotations={"kind": "pinching"})

    @classmethod
    def classical_copy(cls, in_label, dim, copy_label):
        """Read a classical register and append a basis copy of it."""
        in_layout = RegisterLayout([(in_label, dim)])
        out_layout = RegisterLayout([(in_label, dim), (copy_label, dim)])
        ops = []
        for i in range(dim):
            k = np.zeros((dim * dim, dim))
            k[i * dim + i, i] = 1.0
            ops.append(k)
        return cls(in_layout, out_layout, ops, annotations={"kind": "classical-copy"})

    def then(self, other):
        """Composition ``other after self`` on matching layouts."""
        if not self.out_layout.same_registers(other.in_layout):
            raise LayoutError("composition layouts do not match")
        if self.out_layout.labels != other.in_layout.labels:
            bridge = _basis_change(self.out_layout, other.in_layout)
        else:
            bridge = np.eye(self.out_layout.total_dim)
        ops = [k2 @ bridge @ k1 for k2 in other.kraus for k1 in self.kraus]
        return QuantumChannel(self.in_layout, other.out_layout, ops)

    def adjoint_apply(self, mat):
        """Heisenberg-picture action sum_k K^dag M K (on out-layout operators)."""
        return sum(k.conj().T @ mat @ k for k in self.kraus)

    def __repr__(self):
        src = ",".join(l for l in self.in_layout.labels)
        dst = ",".join(l for l in self.out_layout.labels)
        return f"<QuantumChannel {src or '1'} -> {dst or '1'} ({len(self.kraus)} Kraus)>"


def _basis_change(from_layout, to_layout):
    """Unitary permutation matrix mapping from_layout order to to_layout order."""
    if not from_layout.same_registers(to_layout):
        raise LayoutError("layouts contain different registers")
    d = from_layout.total_dim
    perm = [from_layout.labels.index(lbl) for lbl in to_layout.labels]
    dims = from_layout.dims
    mat = np.zeros((d, d))
    for idx in range(d):
        multi = np.unravel_index(idx, dims)
        new_multi = tuple(multi[p] for p in perm)
        new_idx = np.ravel_multi_index(new_multi, tuple(dims[p] for p in perm))
        mat[new_idx, idx] = 1.0
    return mat


def _padded_action(channel, op):
    """Raw Kraus action with identity padding; returns (out_layout, matrix)."""
    in_labels = channel.in_layout.labels
    for lbl in in_labels:
        if lbl not in op.labels:
            raise LayoutError(f"channel input register {lbl!r} absent from state")
        if op.layout.dim_of(lbl) != channel.in_layout.dim_of(lbl):
            raise LayoutError(f"dimension mismatch on register {lbl!r}")
    rest = [lbl for lbl in op.labels if lbl not in in_labels]
    clash = set(channel.out_layout.labels) & set(rest)
    if clash:
        raise LayoutError(f"channel output labels collide with idle registers: {sorted(clash)}")

    ordered = op.permuted(tuple(in_labels) + tuple(rest))
    d_rest = ordered.layout.drop(in_labels).total_dim
    pad = np.eye(d_rest)
    out_dim = channel.out_layout.total_dim * d_rest
    mat = np.zeros((out_dim, out_dim), dtype=complex)
    for k in channel.kraus:
        kk = np.kron(k, pad)
        mat += kk @ ordered.matrix @ kk.conj().T
    out_layout = channel.out_layout.concat(ordered.layout.drop(in_labels))
    return out_layout, herm(mat)


def apply_channel(channel, rho):
    """Apply with implicit identity padding on registers the channel ignores."""
    out_layout, mat = _padded_action(channel, rho)
    normalized = rho.normalized if isinstance(rho, DensityOperator) else False
    return DensityOperator(out_layout, mat, normalized=normalized)


def apply_to_operator(channel, op):
    """Channel action on an arbitrary Hermitian operator (no PSD validation)."""
    out_layout, mat = _padded_action(channel, op)
    return QOperator(out_layout, mat)
