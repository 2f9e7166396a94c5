"""Seeded random states and channels for the verification harness.

States are drawn by partial-tracing Haar-random pure states on a doubled
system, channels by Stinespring dilation with Haar-random isometries; both
give full-support instances with probability one, so bulk property tests
never trip over support edge cases (those get dedicated deterministic
trials).  Every function takes an explicit ``rng``.
"""

import numpy as np

from .channels import QuantumChannel
from .operators import DensityOperator
from .registers import RegisterLayout


def rng_for(seed, *spawn):
    """Deterministic generator derived from (master seed, trial indices)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(spawn)))


def _ginibre(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_vector(dim, rng):
    v = _ginibre(rng, dim, 1).ravel()
    return v / np.linalg.norm(v)


def haar_isometry(d_in, d_out, rng):
    """Columns of a Haar-random unitary: V^dag V = 1 on the input space."""
    if d_out < d_in:
        raise ValueError("isometry needs d_out >= d_in")
    g = _ginibre(rng, d_out, d_in)
    q, r = np.linalg.qr(g)
    # Fix phases so the distribution is Haar and the output deterministic.
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return q


def random_pure(layout, rng):
    if not isinstance(layout, RegisterLayout):
        layout = RegisterLayout(layout)
    return DensityOperator.pure(layout, haar_vector(layout.total_dim, rng))


def random_density(layout, rng, purifier_dim=None):
    """Reduced state of a Haar pure state on layout x purifier."""
    if not isinstance(layout, RegisterLayout):
        layout = RegisterLayout(layout)
    d = layout.total_dim
    k = purifier_dim or d
    psi = haar_vector(d * k, rng).reshape(d, k)
    rho = psi @ psi.conj().T
    return DensityOperator(layout, rho)


def random_channel(in_layout, out_layout, rng, env_dim=None):
    """CPTP map from a Haar-random Stinespring isometry."""
    if not isinstance(in_layout, RegisterLayout):
        in_layout = RegisterLayout(in_layout)
    if not isinstance(out_layout, RegisterLayout):
        out_layout = RegisterLayout(out_layout)
    d_in, d_out = in_layout.total_dim, out_layout.total_dim
    env = env_dim or max(2, int(np.ceil(d_in / d_out)) + 1)
    v = haar_isometry(d_in, d_out * env, rng)
    kraus = [v.reshape(d_out, env, d_in)[:, e, :] for e in range(env)]
    return QuantumChannel(in_layout, out_layout, kraus)


def random_classical_quantum(classical_label, classical_dim, quantum_layout, rng):
    """State classical on one register: sum_c p(c) |c><c| x rho_c."""
    if not isinstance(quantum_layout, RegisterLayout):
        quantum_layout = RegisterLayout(quantum_layout)
    p = rng.dirichlet(np.ones(classical_dim))
    dq = quantum_layout.total_dim
    blocks = [random_density(quantum_layout, rng).matrix for _ in range(classical_dim)]
    mat = np.zeros((classical_dim * dq, classical_dim * dq), dtype=complex)
    for c in range(classical_dim):
        mat[c * dq:(c + 1) * dq, c * dq:(c + 1) * dq] = p[c] * blocks[c]
    layout = RegisterLayout([(classical_label, classical_dim)]).concat(quantum_layout)
    return DensityOperator(layout, mat)


def random_probability(dim, rng):
    return rng.dirichlet(np.ones(dim))
