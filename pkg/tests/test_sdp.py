"""Tests for the dense SDP engine and the infinite-order quantities."""

import math

import numpy as np
import pytest

from renyileak import DensityOperator, RegisterLayout, tensor_product
from renyileak.errors import Infeasible, Unbounded
from renyileak.minentropy import hmin_up, imax_family
from renyileak.sampling import random_density, rng_for
from renyileak.sdp import SdpBlock, SdpProblem, hermitian_basis, solve_sdp


def min_trace_problem(lower):
    """min tr sigma subject to sigma >= lower, sigma >= 0."""
    d = lower.shape[0]
    basis = hermitian_basis(d)
    blocks = [SdpBlock(np.zeros((d, d)), list(basis)), SdpBlock(lower, list(basis))]
    c = np.array([float(np.real(np.trace(b))) for b in basis])
    return SdpProblem(c, blocks)


class TestEngine:
    def test_componentwise_example(self):
        sol = solve_sdp(min_trace_problem(np.diag([0.3, 0.7])))
        assert sol.status == "OPTIMAL"
        assert abs(sol.value - 1.0) < 1e-6
        assert sol.gap <= 1e-7
        assert sol.dual_residual <= 1e-8

    def test_non_diagonal_lower_bound(self):
        rng = rng_for(400)
        m = random_density(RegisterLayout([("A", 3)]), rng).matrix * 2.0
        sol = solve_sdp(min_trace_problem(m))
        # optimum is sigma = PSD part of m, here m itself
        assert abs(sol.value - np.trace(m).real) < 1e-6

    def test_strong_duality_on_random_instances(self):
        rng = rng_for(401)
        for _ in range(10):
            m = random_density(RegisterLayout([("A", 3)]), rng).matrix
            sol = solve_sdp(min_trace_problem(m))
            assert sol.status == "OPTIMAL"
            assert abs(sol.value - sol.dual_value) <= 1e-7
            for z in sol.dual_blocks:
                assert np.linalg.eigvalsh(z)[0] >= -1e-8

    def test_grid_oracle_small_sdp(self):
        # min x s.t. x*I >= diag(0.2, 0.9): brute force over a fine grid
        basis = [np.eye(2)]
        prob = SdpProblem(np.array([1.0]),
                          [SdpBlock(np.diag([0.2, 0.9]), basis),
                           SdpBlock(np.zeros((2, 2)), basis)])
        sol = solve_sdp(prob)
        xs = np.linspace(0.0, 2.0, 200001)
        feas = xs[xs >= 0.9]
        assert abs(sol.value - feas[0]) < 1e-5

    def test_infeasible_detected(self):
        # sigma >= diag(1,1) and -sigma >= 0 cannot both hold
        d = 2
        basis = hermitian_basis(d)
        blocks = [SdpBlock(np.eye(d), list(basis)),
                  SdpBlock(np.zeros((d, d)), [-b for b in basis])]
        c = np.array([float(np.real(np.trace(b))) for b in basis])
        with pytest.raises(Infeasible):
            solve_sdp(SdpProblem(c, blocks))

    def test_unbounded_detected(self):
        # maximize tr sigma with only sigma >= 0: objective -tr unbounded below
        d = 2
        basis = hermitian_basis(d)
        blocks = [SdpBlock(np.zeros((d, d)), list(basis))]
        c = -np.array([float(np.real(np.trace(b))) for b in basis])
        with pytest.raises(Unbounded):
            solve_sdp(SdpProblem(c, blocks), x_cap=1e6)


class TestHmin:
    def test_uniform_bit_trivial_conditioning(self):
        rho = DensityOperator([("A", 2)], np.diag([0.5, 0.5]))
        r = hmin_up(rho, ["A"], [])
        assert abs(r.value - 1.0) < 1e-6
        assert abs(r.sdp_value - 0.5) < 1e-7

    def test_bell_state(self):
        bell = DensityOperator.pure([("A", 2), ("B", 2)], [1, 0, 0, 1])
        r = hmin_up(bell, ["A"], ["B"])
        assert abs(r.value - (-1.0)) < 1e-6
        assert r.gap <= 1e-7
        # dual witness: guessing value equals primal within the gap
        assert abs(r.sdp_value - r.dual_value) <= 1e-7

    def test_product_state_ignores_conditioning(self):
        rng = rng_for(402)
        a = random_density(RegisterLayout([("A", 2)]), rng)
        b = random_density(RegisterLayout([("B", 3)]), rng)
        r1 = hmin_up(tensor_product(a, b), ["A"], ["B"])
        r2 = hmin_up(a, ["A"], [])
        assert abs(r1.value - r2.value) < 1e-6

    def test_classical_guessing_probability(self):
        # Hmin(A) = -log max_a p(a); conditioning on a copy gives 0
        p = np.array([0.5, 0.3, 0.2])
        lay = RegisterLayout([("A", 3)])
        rho = DensityOperator(lay, np.diag(p))
        r = hmin_up(rho, ["A"], [])
        assert abs(r.value - (-math.log2(0.5))) < 1e-6
        mat = np.zeros((9, 9))
        for i, pi in enumerate(p):
            mat[i * 3 + i, i * 3 + i] = pi
        copy = DensityOperator(RegisterLayout([("A", 3), ("B", 3)]), mat)
        assert abs(hmin_up(copy, ["A"], ["B"]).value) < 1e-6

    def test_duality_gap_on_random_instances(self):
        rng = rng_for(403)
        for _ in range(15):
            rho = random_density(RegisterLayout([("S", 2), ("E", 2)]), rng)
            r = hmin_up(rho, ["S"], ["E"])
            assert r.status == "OPTIMAL"
            assert r.gap <= 1e-7


class TestImax:
    def test_product_state_zero_both(self):
        rng = rng_for(404)
        a = random_density(RegisterLayout([("A", 2)]), rng)
        b = random_density(RegisterLayout([("B", 2)]), rng)
        prod = tensor_product(a, b)
        assert abs(imax_family(prod, ["A"], ["B"], "I_max_none").value) < 1e-7
        assert abs(imax_family(prod, ["A"], ["B"], "I_max_down").value) < 1e-6

    def test_correlated_bits_give_one(self):
        corr = DensityOperator(RegisterLayout([("A", 2), ("B", 2)]),
                               np.diag([0.5, 0, 0, 0.5]))
        # generalized-eigenvalue brute force for I_max_none
        prod = np.diag([0.25, 0.25, 0.25, 0.25])
        inv = np.diag(1 / np.sqrt(np.diag(prod)))
        top = np.linalg.eigvalsh(inv @ corr.matrix @ inv)[-1]
        assert abs(math.log2(top) - 1.0) < 1e-12
        assert abs(imax_family(corr, ["A"], ["B"], "I_max_none").value - 1.0) < 1e-9
        assert abs(imax_family(corr, ["A"], ["B"], "I_max_down").value - 1.0) < 1e-6

    def test_down_never_exceeds_none(self):
        rng = rng_for(405)
        for _ in range(20):
            rho = random_density(RegisterLayout([("A", 2), ("B", 2)]), rng)
            none = imax_family(rho, ["A"], ["B"], "I_max_none").value
            down = imax_family(rho, ["A"], ["B"], "I_max_down").value
            assert down <= none + 1e-8

    def test_rank_deficient_marginal(self):
        pure = DensityOperator.pure([("A", 2), ("B", 2)], [1, 0, 0, 0])
        assert abs(imax_family(pure, ["A"], ["B"], "I_max_down").value) < 1e-6
