"""Tests for the sandwiched Renyi divergence kernel."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from renyileak import (
    ClassicalDistribution,
    DensityOperator,
    QOperator,
    RegisterLayout,
    RenyiOrder,
    block_divergence,
    classical_divergence,
    g_epsilon,
    renyi_divergence,
    smooth_max_divergence_upper,
    tensor_product,
)
from renyileak.channels import apply_channel, apply_to_operator
from renyileak.divergence import SmoothingParam
from renyileak.errors import DivergentCorrection, UnsupportedOrder, ZeroState
from renyileak.sampling import haar_isometry, random_channel, random_density, rng_for

ALPHAS = [0.6, 0.9, 1.0, 1.3, 2.0, 5.0, math.inf]


class TestOrder:
    def test_alpha_zero_rejected(self):
        with pytest.raises(UnsupportedOrder):
            RenyiOrder(0.0)

    def test_negative_rejected(self):
        with pytest.raises(UnsupportedOrder):
            RenyiOrder(-1.0)

    def test_near_one_snaps_to_umegaki(self):
        assert RenyiOrder(1.0 + 1e-7).is_one
        assert RenyiOrder(1.0 - 1e-7).is_one
        assert not RenyiOrder(1.0 + 1e-4).is_one

    def test_inf_parsing(self):
        assert RenyiOrder("inf").is_inf
        assert RenyiOrder(math.inf).is_inf


class TestDivergence:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_self_divergence_zero(self, alpha):
        rng = rng_for(300)
        rho = random_density(RegisterLayout([("A", 3)]), rng)
        assert abs(renyi_divergence(rho, rho, alpha)) < 1e-10

    @pytest.mark.parametrize("alpha", [0.7, 1.0, 1.5, 2.0, math.inf])
    def test_scaling_identity(self, alpha):
        # D(rho || t sigma) = D(rho || sigma) - log t
        rng = rng_for(301)
        rho = random_density(RegisterLayout([("A", 3)]), rng)
        sigma = random_density(RegisterLayout([("A", 3)]), rng)
        for t in (0.2, 0.7):
            scaled = QOperator(sigma.layout, t * sigma.matrix)
            lhs = renyi_divergence(rho, scaled, alpha)
            rhs = renyi_divergence(rho, sigma, alpha) - math.log2(t)
            assert abs(lhs - rhs) < 1e-9

    def test_max_divergence_scalar_example(self):
        rho = DensityOperator([("A", 2)], np.diag([0.8, 0.2]))
        sigma = QOperator([("A", 2)], np.diag([0.5, 0.5]))
        # brute force: smallest lam with rho <= lam sigma over a fine grid
        lams = np.linspace(1.0, 2.0, 100001)
        feasible = lams[[np.all(np.linalg.eigvalsh(l * sigma.matrix - rho.matrix) > -1e-12)
                         for l in lams]]
        assert abs(renyi_divergence(rho, sigma, math.inf) - math.log2(feasible[0])) < 1e-4
        assert abs(renyi_divergence(rho, sigma, math.inf) - math.log2(1.6)) < 1e-12

    def test_zero_state_raises(self):
        zero = QOperator([("A", 2)], np.zeros((2, 2)))
        sigma = QOperator([("A", 2)], np.diag([0.5, 0.5]))
        with pytest.raises(ZeroState):
            renyi_divergence(zero, sigma, 2)

    def test_support_branch_alpha_above_one(self):
        rho = DensityOperator([("A", 2)], np.diag([0.5, 0.5]))
        sigma = QOperator([("A", 2)], np.diag([1.0, 0.0]))
        assert renyi_divergence(rho, sigma, 2) == math.inf
        assert renyi_divergence(rho, sigma, math.inf) == math.inf
        assert renyi_divergence(rho, sigma, 1.0) == math.inf

    def test_orthogonal_branch_alpha_below_one(self):
        rho = DensityOperator([("A", 2)], np.diag([1.0, 0.0]))
        sigma = QOperator([("A", 2)], np.diag([0.0, 1.0]))
        assert renyi_divergence(rho, sigma, 0.6) == math.inf
        # non-orthogonal singular pair stays finite for alpha < 1
        tau = QOperator([("A", 2)], np.diag([1.0, 0.0]))
        assert math.isfinite(renyi_divergence(rho, tau, 0.6))

    def test_monotone_in_alpha(self):
        rng = rng_for(302)
        for _ in range(20):
            rho = random_density(RegisterLayout([("A", 3)]), rng)
            sigma = random_density(RegisterLayout([("A", 3)]), rng)
            vals = [renyi_divergence(rho, sigma, a) for a in ALPHAS]
            for lo, hi in zip(vals, vals[1:]):
                assert hi >= lo - 1e-8

    def test_alpha_one_continuity(self):
        rng = rng_for(303)
        for _ in range(10):
            rho = random_density(RegisterLayout([("A", 3)]), rng)
            sigma = random_density(RegisterLayout([("A", 3)]), rng)
            d1 = renyi_divergence(rho, sigma, 1.0)
            for a in (1 - 1e-4, 1 + 1e-4):
                assert abs(renyi_divergence(rho, sigma, a) - d1) <= 1e-2

    @pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 2.0, math.inf])
    def test_data_processing(self, alpha):
        rng = rng_for(304)
        for _ in range(8):
            rho = random_density(RegisterLayout([("A", 3)]), rng)
            sigma = random_density(RegisterLayout([("A", 3)]), rng)
            ch = random_channel([("A", 3)], [("B", 2)], rng)
            before = renyi_divergence(rho, sigma, alpha)
            after = renyi_divergence(apply_channel(ch, rho),
                                     apply_to_operator(ch, sigma), alpha)
            assert before >= after - 1e-8

    @pytest.mark.parametrize("alpha", [0.6, 1.0, 2.0, math.inf])
    def test_isometric_invariance(self, alpha):
        rng = rng_for(305)
        rho = random_density(RegisterLayout([("A", 3)]), rng)
        sigma = random_density(RegisterLayout([("A", 3)]), rng)
        v = haar_isometry(3, 5, rng)
        lift = lambda m: QOperator([("B", 5)], v @ m @ v.conj().T)
        before = renyi_divergence(rho, sigma, alpha)
        after = renyi_divergence(
            DensityOperator([("B", 5)], v @ rho.matrix @ v.conj().T),
            lift(sigma.matrix), alpha)
        assert abs(before - after) < 1e-9


class TestClassical:
    def test_self_zero(self):
        p = ClassicalDistribution([0.3, 0.7])
        assert abs(classical_divergence(p, p, 1.7)) < 1e-12

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0, math.inf])
    def test_point_mass_vs_uniform(self, alpha):
        p = ClassicalDistribution([1.0, 0.0])
        q = ClassicalDistribution([0.5, 0.5])
        assert abs(classical_divergence(p, q, alpha) - 1.0) < 1e-12

    @pytest.mark.parametrize("alpha", [0.6, 1.0, 2.0, math.inf])
    def test_matches_diagonal_matrix_path(self, alpha):
        rng = rng_for(306)
        for _ in range(10):
            pw = rng.dirichlet(np.ones(4))
            qw = rng.dirichlet(np.ones(4))
            scalar = classical_divergence(ClassicalDistribution(pw),
                                          ClassicalDistribution(qw), alpha)
            lay = RegisterLayout([("C", 4)])
            matrix = renyi_divergence(DensityOperator(lay, np.diag(pw)),
                                      QOperator(lay, np.diag(qw)), alpha)
            assert abs(scalar - matrix) < 1e-10


class TestBlockDivergence:
    def test_single_block(self):
        rng = rng_for(307)
        rho = random_density(RegisterLayout([("Q", 2)]), rng)
        sigma = random_density(RegisterLayout([("Q", 2)]), rng)
        d = renyi_divergence(rho, sigma, 1.8)
        assert abs(block_divergence([(1.0, 1.0, rho, sigma)], 1.8) - d) < 1e-12

    def test_two_identical_blocks(self):
        rng = rng_for(308)
        rho = random_density(RegisterLayout([("Q", 2)]), rng)
        sigma = random_density(RegisterLayout([("Q", 2)]), rng)
        d = renyi_divergence(rho, sigma, 2.5)
        got = block_divergence([(0.5, 0.5, rho, sigma), (0.5, 0.5, rho, sigma)], 2.5)
        assert abs(got - d) < 1e-12

    @pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 3.0])
    def test_assembled_matrix_oracle(self, alpha):
        rng = rng_for(309)
        lay = RegisterLayout([("Q", 2)])
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(3))
        rhos = [random_density(lay, rng) for _ in range(3)]
        sigmas = [random_density(lay, rng) for _ in range(3)]
        blocks = [(p[c], q[c], rhos[c], sigmas[c]) for c in range(3)]
        got = block_divergence(blocks, alpha)
        big = RegisterLayout([("C", 3), ("Q", 2)])
        rho_mat = np.zeros((6, 6), dtype=complex)
        sig_mat = np.zeros((6, 6), dtype=complex)
        for c in range(3):
            rho_mat[2 * c:2 * c + 2, 2 * c:2 * c + 2] = p[c] * rhos[c].matrix
            sig_mat[2 * c:2 * c + 2, 2 * c:2 * c + 2] = q[c] * sigmas[c].matrix
        expected = renyi_divergence(DensityOperator(big, rho_mat),
                                    QOperator(big, sig_mat), alpha)
        assert abs(got - expected) < 1e-9


class TestSmoothing:
    def test_g_epsilon_value(self):
        assert abs(g_epsilon(0.1) - math.log2(1 - math.sqrt(0.99))) < 1e-12
        assert g_epsilon(0.1) < 0
        assert abs(g_epsilon(0.1) + 7.639) < 5e-3

    def test_g_epsilon_monotone_and_limit(self):
        grid = np.linspace(0.01, 0.999, 60)
        vals = [g_epsilon(e) for e in grid]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert abs(g_epsilon(1 - 1e-12)) < 1e-5

    def test_g_zero_raises(self):
        with pytest.raises(DivergentCorrection):
            g_epsilon(0.0)

    def test_smoothing_param_range(self):
        with pytest.raises(ValueError):
            SmoothingParam(1.0)
        SmoothingParam(0.0)

    def test_upper_bound_reduces_to_divergence(self):
        rng = rng_for(310)
        rho = random_density(RegisterLayout([("A", 2)]), rng)
        sigma = random_density(RegisterLayout([("A", 2)]), rng)
        d = renyi_divergence(rho, sigma, 2.0)
        assert abs(smooth_max_divergence_upper(rho, sigma, 1 - 1e-12, 2.0) - d) < 1e-4

    def test_equal_states_give_pure_correction(self):
        rng = rng_for(311)
        rho = random_density(RegisterLayout([("A", 2)]), rng)
        got = smooth_max_divergence_upper(rho, rho, 0.1, 2.0)
        assert abs(got - g_epsilon(0.1)) < 1e-9

    def test_bound_dominates_max_divergence_band(self):
        # D_inf^eps <= D_alpha + g(eps)/(alpha-1); sanity band vs unsmoothed D_inf
        rng = rng_for(312)
        for _ in range(10):
            rho = random_density(RegisterLayout([("A", 2)]), rng)
            sigma = random_density(RegisterLayout([("A", 2)]), rng)
            up = smooth_max_divergence_upper(rho, sigma, 0.1, 2.0)
            d2 = renyi_divergence(rho, sigma, 2.0)
            assert abs(up - (d2 + g_epsilon(0.1))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.4, 0.95), st.floats(1.05, 6.0), st.integers(0, 10_000))
def test_divergence_nonnegative_for_states_property(alo, ahi, seed):
    rng = rng_for(seed)
    rho = random_density(RegisterLayout([("A", 2)]), rng)
    sigma = random_density(RegisterLayout([("A", 2)]), rng)
    for a in (alo, ahi):
        assert renyi_divergence(rho, sigma, a) >= -1e-10
