"""Tail bound and deterministic difference bound."""

import math

import numpy as np
import pytest

from spcarec.bounds import tail_bound_value, tau, tail_bound_montecarlo, masking_difference_check
from spcarec.errors import Disconnected, IrregularityUndefined
from spcarec.graph import (
    ObservationGraph,
    bipartite_from_mask,
    random_graph,
)
from spcarec.numerics import SymMatrix


def _complete_with_loops(n):
    return ObservationGraph(n, [(i, j) for i in range(n) for j in range(i, n)])


class TestTau:
    def test_identity(self):
        assert tau(SymMatrix(np.eye(5))) == pytest.approx(1.0)

    def test_spike(self):
        u = np.zeros(4)
        u[0] = 1.0
        assert tau(SymMatrix(np.outer(u, u))) == pytest.approx(1.0)

    def test_uniform_spike(self):
        n = 6
        u = np.ones(n) / np.sqrt(n)
        assert tau(SymMatrix(np.outer(u, u))) == pytest.approx(1.0 / n)

    def test_zero_matrix(self):
        assert tau(SymMatrix(np.zeros((3, 3)))) == 0.0

    def test_range(self):
        rng = np.random.default_rng(80)
        for _ in range(20):
            a = rng.standard_normal((5, 5))
            t = tau(SymMatrix(a + a.T))
            assert 0.0 < t <= 1.0 + 1e-12

    def test_scale_invariant(self):
        rng = np.random.default_rng(81)
        a = rng.standard_normal((5, 5))
        y = SymMatrix(a + a.T)
        for c in (-3.0, 0.5, 7.0):
            assert tau(SymMatrix(c * y.a)) == pytest.approx(tau(y), rel=1e-10)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(82)
        a = rng.standard_normal((6, 6))
        y = SymMatrix(a + a.T)
        perm = rng.permutation(6)
        yp = SymMatrix(y.a[np.ix_(perm, perm)])
        assert tau(yp) == pytest.approx(tau(y), rel=1e-10)


class TestTheorem3:
    def test_complete_graph_zero_both_sides(self):
        rng = np.random.default_rng(83)
        a = rng.standard_normal((5, 5))
        lhs, rhs, holds = masking_difference_check(SymMatrix(a + a.T), _complete_with_loops(5))
        assert lhs == pytest.approx(0.0, abs=1e-12)
        assert rhs == pytest.approx(0.0, abs=1e-12)
        assert holds

    def test_path_with_loops_rank_one(self):
        rng = np.random.default_rng(84)
        u = rng.standard_normal(3)
        y = SymMatrix(np.outer(u, u))
        g = ObservationGraph(3, [(0, 1), (1, 2), (0, 0), (1, 1), (2, 2)])
        lhs, rhs, holds = masking_difference_check(y, g)
        assert holds
        assert lhs <= rhs + 1e-8 * max(1.0, rhs)

    def test_random_sweep(self):
        rng = np.random.default_rng(85)
        done = 0
        while done < 100:
            n = int(rng.integers(3, 10))
            g = random_graph(n, int(rng.integers(n, n * n + 1)), int(rng.integers(1e9)))
            a = rng.standard_normal((n, n))
            try:
                _, _, holds = masking_difference_check(SymMatrix(a + a.T), g)
            except (Disconnected, IrregularityUndefined):
                continue
            assert holds
            done += 1

    def test_disconnected_rejected(self):
        with pytest.raises(Disconnected):
            masking_difference_check(SymMatrix(np.eye(4)), ObservationGraph(4, [(0, 1)]))


class TestTailBoundValue:
    def test_monotone_in_t(self):
        values = [tail_bound_value(5, 5, 1.0, 5, t) for t in (0.0, 1.0, 2.0, 5.0)]
        assert all(b <= a for a, b in zip(values, values[1:]))

    def test_monotone_in_sigma(self):
        values = [tail_bound_value(5, 5, s, 5, 3.0) for s in (0.5, 1.0, 2.0)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_empty_pattern(self):
        assert tail_bound_value(4, 4, 1.0, 0, 1.0) == 0.0
        assert tail_bound_value(4, 4, 1.0, 0, 0.0) == 16.0


class TestTheorem2MonteCarlo:
    def test_t_zero_trivial(self):
        pattern = bipartite_from_mask(np.ones((3, 3), dtype=bool))
        check = tail_bound_montecarlo(1.0, pattern, 0.0, 1000, 0)
        assert check.empirical == 1.0
        assert check.bound >= 1.0
        assert check.holds

    def test_far_tail(self):
        pattern = bipartite_from_mask(np.ones((5, 5), dtype=bool))
        check = tail_bound_montecarlo(1.0, pattern, 20.0, 1000, 1)
        assert check.empirical == 0.0
        assert check.holds

    def test_reference_level(self):
        # at t = 2 sigma sqrt(Dmax log(m+n)) the bound collapses to 2/(m+n)
        m = n = 4
        sigma = 1.0
        pattern = bipartite_from_mask(np.ones((m, n), dtype=bool))
        dmax = pattern.max_degree()
        t = 2.0 * sigma * math.sqrt(dmax * math.log(m + n))
        check = tail_bound_montecarlo(sigma, pattern, t, 2000, 2)
        assert check.bound == pytest.approx(2.0 / (m + n), rel=1e-12)
        se = math.sqrt(check.empirical * (1 - check.empirical) / check.trials)
        assert check.empirical <= check.bound + 3 * se
        assert check.holds

    def test_empty_pattern(self):
        pattern = bipartite_from_mask(np.zeros((3, 2), dtype=bool))
        check = tail_bound_montecarlo(1.0, pattern, 0.5, 1000, 3)
        assert check.empirical == 0.0
        assert check.holds

    def test_schedule_independent(self):
        pattern = bipartite_from_mask(np.ones((3, 3), dtype=bool))
        a = tail_bound_montecarlo(1.0, pattern, 3.0, 1000, 4)
        b = tail_bound_montecarlo(1.0, pattern, 3.0, 1000, 4)
        assert a == b

    def test_validation(self):
        pattern = bipartite_from_mask(np.ones((2, 2), dtype=bool))
        with pytest.raises(ValueError):
            tail_bound_montecarlo(0.0, pattern, 1.0, 1000, 0)
        with pytest.raises(ValueError):
            tail_bound_montecarlo(1.0, pattern, 1.0, 999, 0)
