"""Exact transport LP solver: NW corner, simplex pivots, certificates."""

import numpy as np
import pytest

from conftest import random_transport_instance
from oracles import lp_transport_value, vertex_minimum_value
from otecon import (
    CostMatrix,
    DiscreteMeasure,
    DomainError,
    DualPotentials,
    InfeasibleError,
    NonAssignmentError,
    TransportPlan,
    extract_assignment,
    northwest_corner,
    solve_discrete_ot,
    verify_optimality,
)


def measures(mu, nu):
    return DiscreteMeasure(mu), DiscreteMeasure(nu)


class TestNorthwestCorner:
    def test_single_pair(self):
        plan = northwest_corner(*measures([1.0], [1.0]))
        assert plan.mass.tolist() == [[1.0]]

    def test_hand_trace_2x2(self):
        plan = northwest_corner(*measures([0.7, 0.3], [0.4, 0.6]))
        assert np.allclose(plan.mass, [[0.4, 0.3], [0.0, 0.3]], atol=1e-15)

    def test_hand_trace_2x3(self):
        plan = northwest_corner(*measures([0.5, 0.5], [0.25, 0.25, 0.5]))
        assert plan.mass.tolist() == [[0.25, 0.25, 0.0], [0.0, 0.0, 0.5]]

    def test_mass_mismatch(self):
        with pytest.raises(InfeasibleError):
            northwest_corner(*measures([0.7, 0.3], [0.4, 0.7]))

    def test_basis_size_under_degeneracy(self, rng):
        # simultaneous row/column exhaustion must still leave M+N-1 edges
        for _ in range(50):
            m, n = rng.integers(1, 6, size=2)
            mu, nu, _ = random_transport_instance(rng, m, n, rational=True)
            plan = northwest_corner(mu, nu)
            assert len(plan.basis_edges) == m + n - 1
            assert plan.marginal_residual(mu, nu) < 1e-12


class TestSolve:
    def test_zero_cost_diagonal(self):
        mu, nu = measures([0.5, 0.5], [0.5, 0.5])
        plan, pots, value = solve_discrete_ot(mu, nu, CostMatrix([[0.0, 1.0], [1.0, 0.0]]))
        assert value == 0.0
        assert np.allclose(plan.mass, np.diag([0.5, 0.5]))

    def test_two_vertex_polytope(self):
        mu, nu = measures([0.5, 0.5], [0.5, 0.5])
        plan, pots, value = solve_discrete_ot(mu, nu, CostMatrix([[1.0, 3.0], [2.0, 1.0]]))
        assert value == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(plan.mass, np.diag([0.5, 0.5]))

    def test_identical_supports_quadratic(self):
        x = np.array([1.0, 2.0])
        cost = CostMatrix((x[:, None] - x[None, :]) ** 2)
        mu, nu = measures([0.5, 0.5], [0.5, 0.5])
        plan, pots, value = solve_discrete_ot(mu, nu, cost)
        assert value == pytest.approx(0.0, abs=1e-15)
        assert np.allclose(plan.mass, np.diag([0.5, 0.5]))

    def test_matches_lp_oracle(self, rng):
        for _ in range(30):
            m, n = rng.integers(1, 7, size=2)
            mu, nu, cost = random_transport_instance(rng, m, n)
            plan, pots, value = solve_discrete_ot(mu, nu, cost)
            assert value == pytest.approx(
                lp_transport_value(mu.weights, nu.weights, cost.entries), abs=1e-9
            )

    def test_matches_vertex_enumeration(self, rng):
        # full basic-solution enumeration stays cheap up to m + n = 7
        for _ in range(15):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(1, 8 - m))
            mu, nu, cost = random_transport_instance(rng, m, n, rational=True)
            _, _, value = solve_discrete_ot(mu, nu, cost)
            oracle = vertex_minimum_value(mu.weights, nu.weights, cost.entries)
            assert value == pytest.approx(oracle, abs=1e-9)

    def test_primal_equals_dual(self, rng):
        for _ in range(25):
            m, n = rng.integers(1, 7, size=2)
            mu, nu, cost = random_transport_instance(rng, m, n, rational=bool(rng.integers(2)))
            plan, pots, value = solve_discrete_ot(mu, nu, cost)
            assert value == pytest.approx(pots.objective(mu, nu), abs=1e-9)
            assert verify_optimality(plan, pots, cost)
            assert plan.marginal_residual(mu, nu) < 1e-9

    def test_support_bounded_by_tree_size(self, rng):
        for _ in range(20):
            m, n = rng.integers(2, 7, size=2)
            mu, nu, cost = random_transport_instance(rng, m, n, rational=True)
            plan, _, _ = solve_discrete_ot(mu, nu, cost)
            assert int(np.sum(plan.mass > 1e-9)) <= m + n - 1

    def test_monotone_support_submodular(self, rng):
        # quadratic cost on the line: optimal support has no crossing pairs
        for _ in range(10):
            m, n = rng.integers(2, 7, size=2)
            mu, nu, _ = random_transport_instance(rng, m, n)
            x = np.sort(rng.normal(size=m))
            y = np.sort(rng.normal(size=n))
            cost = CostMatrix((x[:, None] - y[None, :]) ** 2)
            plan, _, _ = solve_discrete_ot(mu, nu, cost)
            support = np.argwhere(plan.mass > 1e-9)
            for i, j in support:
                for k, l in support:
                    assert (x[i] - x[k]) * (y[j] - y[l]) >= -1e-12

    def test_plan_invariant_to_potential_shifts(self, rng):
        mu, nu, cost = random_transport_instance(rng, 4, 5)
        plan, _, value = solve_discrete_ot(mu, nu, cost)
        a = rng.normal(size=4)
        b = rng.normal(size=5)
        shifted = CostMatrix(cost.entries + a[:, None] + b[None, :])
        plan2, _, value2 = solve_discrete_ot(mu, nu, shifted)
        assert np.allclose(plan.mass, plan2.mass, atol=1e-12)
        expected = value + float(mu.weights @ a) + float(nu.weights @ b)
        assert value2 == pytest.approx(expected, abs=1e-12)

    def test_non_finite_cost_rejected(self):
        mu, nu = measures([1.0], [1.0])
        with pytest.raises(DomainError):
            solve_discrete_ot(mu, nu, CostMatrix([[np.inf]]))


class TestVerify:
    def test_solver_output_certifies(self, rng):
        mu, nu, cost = random_transport_instance(rng, 3, 4)
        plan, pots, _ = solve_discrete_ot(mu, nu, cost)
        assert verify_optimality(plan, pots, cost)

    def test_zero_potentials_certify_diagonal(self):
        cost = CostMatrix([[0.0, 1.0], [1.0, 0.0]])
        plan = TransportPlan(np.diag([0.5, 0.5]), frozenset({(0, 0), (1, 1), (0, 1)}))
        pots = DualPotentials([0.0, 0.0], [0.0, 0.0])
        assert verify_optimality(plan, pots, cost)

    def test_antidiagonal_has_no_certificate(self):
        cost = CostMatrix([[0.0, 1.0], [1.0, 0.0]])
        plan = TransportPlan(
            np.array([[0.0, 0.5], [0.5, 0.0]]), frozenset({(0, 1), (1, 0), (0, 0)})
        )
        pots = DualPotentials([0.0, 0.0], [0.0, 0.0])
        assert not verify_optimality(plan, pots, cost)

    def test_shape_mismatch(self):
        plan = TransportPlan(np.array([[1.0]]), frozenset({(0, 0)}))
        pots = DualPotentials([0.0], [0.0])
        with pytest.raises(DomainError):
            verify_optimality(plan, pots, CostMatrix([[0.0, 1.0]]))


class TestExtractAssignment:
    def test_identity(self):
        plan = TransportPlan(np.diag([0.5, 0.5]), frozenset({(0, 0), (1, 1), (0, 1)}))
        assert extract_assignment(plan).tolist() == [0, 1]

    def test_swap(self):
        plan = TransportPlan(
            np.array([[0.0, 0.5], [0.5, 0.0]]), frozenset({(0, 1), (1, 0), (1, 1)})
        )
        assert extract_assignment(plan).tolist() == [1, 0]

    def test_split_row_rejected(self):
        plan = TransportPlan(
            np.array([[0.5, 0.0], [0.25, 0.25]]),
            frozenset({(0, 0), (1, 0), (1, 1)}),
        )
        with pytest.raises(NonAssignmentError):
            extract_assignment(plan)


class TestTransportPlanInvariants:
    def test_basis_must_span(self):
        with pytest.raises(DomainError):
            TransportPlan(np.diag([0.5, 0.5]), frozenset({(0, 0), (1, 1), (0, 0)}))

    def test_support_outside_basis_rejected(self):
        with pytest.raises(DomainError):
            TransportPlan(
                np.array([[0.5, 0.0], [0.25, 0.25]]),
                frozenset({(0, 0), (0, 1), (1, 1)}),
            )
