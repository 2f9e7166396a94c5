"""Named tensor-factor layouts.

A :class:`RegisterLayout` is the addressing scheme for every multipartite
operator in the toolkit: an ordered list of (label, dimension) factors.
All subsystem selection is by label, never by position, and binary
operations elsewhere canonicalize label order lexicographically so that
register-order bugs cannot arise silently.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LayoutError


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named tensor factors with dimensions."""

    factors: tuple

    def __init__(self, factors):
        factors = tuple((str(lbl), int(dim)) for lbl, dim in factors)
        labels = [lbl for lbl, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate register labels in {labels}")
        for lbl, dim in factors:
            if dim < 1:
                raise LayoutError(f"register {lbl!r} has dimension {dim} < 1")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_dims(cls, **dims):
        """Layout from keyword labels, e.g. ``RegisterLayout.from_dims(A=2, B=3)``."""
        return cls(tuple(dims.items()))

    @property
    def labels(self):
        return tuple(lbl for lbl, _ in self.factors)

    @property
    def dims(self):
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self):
        return int(np.prod(self.dims, dtype=np.int64)) if self.factors else 1

    def __len__(self):
        return len(self.factors)

    def dim_of(self, label):
        for lbl, dim in self.factors:
            if lbl == label:
                return dim
        raise LayoutError(f"unknown register label {label!r}")

    def positions(self, labels):
        """Factor positions of ``labels``, order-preserving in the layout."""
        labels = set(labels)
        unknown = labels - set(self.labels)
        if unknown:
            raise LayoutError(f"unknown register labels {sorted(unknown)}")
        return tuple(i for i, (lbl, _) in enumerate(self.factors) if lbl in labels)

    def select(self, labels):
        """Sub-layout of ``labels`` keeping their original order."""
        pos = self.positions(labels)
        return RegisterLayout(tuple(self.factors[i] for i in pos))

    def drop(self, labels):
        keep = [lbl for lbl in self.labels if lbl not in set(labels)]
        return self.select(keep)

    def concat(self, other):
        collision = set(self.labels) & set(other.labels)
        if collision:
            raise LayoutError(f"register label collision: {sorted(collision)}")
        return RegisterLayout(self.factors + other.factors)

    def canonical(self):
        """Layout with factors sorted lexicographically by label."""
        return RegisterLayout(tuple(sorted(self.factors)))

    def dim_product(self, labels):
        return int(np.prod([self.dim_of(lbl) for lbl in labels], dtype=np.int64)) if labels else 1

    def same_registers(self, other):
        return sorted(self.factors) == sorted(other.factors)


def permute_matrix(mat, layout, new_order):
    """Reorder the tensor factors of a dense operator.

    ``new_order`` is a sequence of labels that must be a permutation of
    ``layout.labels``.  Returns (permuted matrix, permuted layout).
    """
    new_order = tuple(new_order)
    if sorted(new_order) != sorted(layout.labels):
        raise LayoutError(f"{new_order} is not a permutation of {layout.labels}")
    if new_order == layout.labels:
        return mat, layout
    n = len(layout)
    perm = [layout.labels.index(lbl) for lbl in new_order]
    dims = layout.dims
    tens = mat.reshape(dims + dims)
    tens = tens.transpose(tuple(perm) + tuple(n + p for p in perm))
    new_layout = RegisterLayout(tuple(layout.factors[p] for p in perm))
    d = new_layout.total_dim
    return np.ascontiguousarray(tens.reshape(d, d)), new_layout


def basis_index(layout, assignment):
    """Flat basis index for a computational-basis assignment {label: index}."""
    idx = 0
    for lbl, dim in layout.factors:
        k = int(assignment[lbl])
        if not 0 <= k < dim:
            raise LayoutError(f"basis index {k} out of range for register {lbl!r}")
        idx = idx * dim + k
    return idx
