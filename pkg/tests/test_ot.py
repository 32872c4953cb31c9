import numpy as np
import pytest

from otseg.errors import TransportError
from otseg.ot import (
    Histogram,
    TransportProblem,
    fractional_assignment,
    pairwise_sq_dists,
    solve_transportation,
    wasserstein2_sq,
    wasserstein2_sq_weights,
)

from oracles import min_cost_by_vertex_enumeration, wasserstein2_sq_bruteforce


def random_balanced(rng, a, b, denom_max=40):
    num = rng.integers(1, denom_max, size=a).astype(np.float64)
    den = rng.integers(1, denom_max, size=b).astype(np.float64)
    w = den * num.sum() / den.sum()
    cost = np.round(rng.random((a, b)) * denom_max) / 7.0
    return num, w, cost


class TestSolveTransportation:
    def test_single_cell(self):
        plan = solve_transportation(TransportProblem([1.0], [1.0], [[3.0]]))
        assert plan.entries == ((0, 0, 1.0),)
        assert plan.objective == 3.0

    def test_forced_by_marginals(self):
        plan = solve_transportation(
            TransportProblem([1.0, 0.0], [0.0, 1.0], [[0.0, 5.0], [7.0, 0.0]])
        )
        assert plan.entries == ((0, 1, 1.0),)
        assert plan.objective == 5.0

    def test_2x2_diagonal(self):
        v = np.array([0.5, 0.5])
        cost = np.array([[0.0, 1.0], [1.0, 0.0]])
        oracle = min_cost_by_vertex_enumeration(v, v, cost)
        assert oracle == 0.0
        plan = solve_transportation(TransportProblem(v, v, cost))
        assert plan.objective == pytest.approx(oracle, abs=1e-12)
        assert set(plan.entries) == {(0, 0, 0.5), (1, 1, 0.5)}

    def test_oracle_equivalence_random(self, rng):
        for _ in range(60):
            a = int(rng.integers(1, 6))
            b = int(rng.integers(1, 6))
            v, w, cost = random_balanced(rng, a, b)
            plan = solve_transportation(TransportProblem(v, w, cost))
            oracle = min_cost_by_vertex_enumeration(v, w, cost)
            assert plan.objective == pytest.approx(oracle, rel=1e-9, abs=1e-12)

    def test_mass_conservation(self, rng):
        for _ in range(30):
            a = int(rng.integers(1, 6))
            b = int(rng.integers(1, 6))
            v, w, cost = random_balanced(rng, a, b)
            plan = solve_transportation(TransportProblem(v, w, cost))
            mat = plan.as_matrix((a, b))
            np.testing.assert_allclose(mat.sum(axis=1), v, atol=1e-9 * v.sum())
            np.testing.assert_allclose(mat.sum(axis=0), w, atol=1e-9 * v.sum())

    def test_basic_plan_entry_count(self, rng):
        for _ in range(20):
            a = int(rng.integers(1, 6))
            b = int(rng.integers(1, 6))
            v, w, cost = random_balanced(rng, a, b)
            plan = solve_transportation(TransportProblem(v, w, cost))
            assert len(plan.entries) <= a + b - 1

    def test_imbalance_rejected(self):
        with pytest.raises(TransportError, match="unbalanced"):
            TransportProblem([1.0], [2.0], [[1.0]])

    def test_negative_rejected(self):
        with pytest.raises(TransportError, match="negative"):
            TransportProblem([-1.0, 2.0], [1.0], [[1.0], [1.0]])

    def test_nonfinite_cost_rejected(self):
        with pytest.raises(TransportError, match="finite"):
            TransportProblem([1.0], [1.0], [[np.inf]])

    def test_zero_entries_dropped_from_plan(self):
        plan = solve_transportation(
            TransportProblem([1.0, 0.0, 2.0], [3.0, 0.0], [[1.0, 9.0]] * 3)
        )
        for i, j, p in plan.entries:
            assert p > 0
            assert i in (0, 2) and j == 0


class TestWasserstein:
    def test_identity_zero(self, rng):
        for _ in range(10):
            k = int(rng.integers(1, 7))
            w = rng.random(k) + 0.01
            w = w / w.sum()
            h = Histogram(w, count=5)
            centers = rng.random((k, 2))
            assert wasserstein2_sq(h, h, centers) == 0.0

    def test_one_hot_pair(self):
        u = Histogram([1.0, 0.0])
        v = Histogram([0.0, 1.0])
        centers = np.array([[0.0, 0.0], [2.0, 0.0]])
        assert wasserstein2_sq(u, v, centers) == pytest.approx(4.0, abs=1e-12)

    def test_three_bin_case_frozen_oracle(self):
        # brute-force over transportation-polytope vertices on centers
        # {0, 1, 2}: optimal plan moves 0.5 mass 0->1 and 0.5 mass 1->2
        u = np.array([0.5, 0.5, 0.0])
        v = np.array([0.0, 0.5, 0.5])
        centers = np.array([0.0, 1.0, 2.0])
        oracle = wasserstein2_sq_bruteforce(u, v, centers)
        assert oracle == pytest.approx(1.0, abs=1e-12)
        got = wasserstein2_sq(Histogram(u), Histogram(v), centers)
        assert got == pytest.approx(oracle, rel=1e-9)

    def test_symmetry_exact(self, rng):
        centers = rng.random((5, 3))
        cost = pairwise_sq_dists(centers)
        for _ in range(30):
            wu = rng.random(5)
            wu /= wu.sum()
            wv = rng.random(5)
            wv /= wv.sum()
            assert wasserstein2_sq_weights(wu, wv, cost) == wasserstein2_sq_weights(
                wv, wu, cost
            )

    def test_triangle_inequality(self, rng):
        for _ in range(40):
            k = int(rng.integers(2, 7))
            centers = rng.random((k, 2))
            ws = []
            for _ in range(3):
                w = rng.random(k) + 1e-3
                ws.append(w / w.sum())
            hs = [Histogram(w) for w in ws]
            d01 = np.sqrt(wasserstein2_sq(hs[0], hs[1], centers))
            d12 = np.sqrt(wasserstein2_sq(hs[1], hs[2], centers))
            d02 = np.sqrt(wasserstein2_sq(hs[0], hs[2], centers))
            assert d02 <= d01 + d12 + 1e-9

    def test_scale_covariance(self, rng):
        k = 4
        centers = rng.random((k, 2))
        wu = rng.random(k)
        wu /= wu.sum()
        wv = rng.random(k)
        wv /= wv.sum()
        base = wasserstein2_sq(Histogram(wu), Histogram(wv), centers)
        for s in (0.5, 2.0, 7.0):
            scaled = wasserstein2_sq(Histogram(wu), Histogram(wv), centers * s)
            assert scaled == pytest.approx(s * s * base, rel=1e-9)

    def test_against_enumeration(self, rng):
        # vertex enumeration is tractable for supports up to 5x5
        for _ in range(40):
            k = int(rng.integers(1, 6))
            centers = rng.random((k, 2))
            wu = rng.random(k)
            wu /= wu.sum()
            wv = rng.random(k)
            wv /= wv.sum()
            got = wasserstein2_sq(Histogram(wu), Histogram(wv), centers)
            want = wasserstein2_sq_bruteforce(wu, wv, centers)
            assert got == pytest.approx(want, rel=1e-9, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(TransportError):
            wasserstein2_sq(Histogram([1.0]), Histogram([0.5, 0.5]), [[0.0], [1.0]])


class TestFractionalAssignment:
    def test_forced_optimum(self):
        mu, plan = fractional_assignment(
            np.array([[0.0, 9.0], [9.0, 0.0]]), np.array([1.0, 1.0])
        )
        assert plan.objective == 0.0
        assert set(plan.entries) == {(0, 0, 1.0), (1, 1, 1.0)}

    def test_single_demand(self, rng):
        costs = rng.random((3, 1))
        mu, plan = fractional_assignment(costs, np.array([3.0]))
        assert plan.objective == pytest.approx(costs.sum(), rel=1e-12)
        assert all(j == 0 for _, j, _ in plan.entries)

    def test_four_by_two_enumerated(self):
        # all 6 ways to pick which two rows go to column 0 were enumerated by
        # hand: {0,1}->0 and {2,3}->1 is the unique zero-cost assignment
        costs = np.array([[0.0, 1.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
        mu, plan = fractional_assignment(costs, np.array([2.0, 2.0]))
        assert plan.objective == pytest.approx(0.0, abs=1e-12)

    def test_strong_duality(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(1, 5))
            costs = rng.random((n, m))
            w = rng.random(m) + 0.2
            w = w * n / w.sum()
            mu, plan = fractional_assignment(costs, w)
            u = (costs - mu[None, :]).min(axis=1)
            dual_value = u.sum() + float(w @ mu)
            assert dual_value == pytest.approx(plan.objective, rel=1e-9, abs=1e-9)

    def test_capacity_imbalance(self):
        with pytest.raises(TransportError):
            fractional_assignment(np.zeros((3, 2)), np.array([1.0, 1.0]))

    def test_against_vertex_oracle(self, rng):
        for _ in range(20):
            n = int(rng.integers(1, 6))
            m = int(rng.integers(1, 5))
            costs = np.round(rng.random((n, m)) * 50) / 9.0
            w = rng.integers(1, 4, size=m).astype(np.float64)
            w = w * n / w.sum()
            mu, plan = fractional_assignment(costs, w)
            oracle = min_cost_by_vertex_enumeration(np.ones(n), w, costs)
            assert plan.objective == pytest.approx(oracle, rel=1e-9, abs=1e-12)
