"""Penalized spectrahedron solver, KKT diagnostics, witness certificate."""

import numpy as np
import pytest

from spcarec.graph import ObservationGraph, random_graph
from spcarec.numerics import SymMatrix, eigh
from spcarec.sdp import (
    kkt_report,
    solve_restricted,
    solve_sdp,
    support_of,
    witness_certificate,
)


def _complete_with_loops(n):
    return ObservationGraph(n, [(i, j) for i in range(n) for j in range(i, n)])


def _random_sym(rng, d):
    a = rng.standard_normal((d, d))
    return SymMatrix(a + a.T)


def _simple_top(rng, d, min_gap=0.5):
    """Random symmetric matrix whose top eigenvalue is simple by at least min_gap."""
    m = _random_sym(rng, d)
    vals, vecs = np.linalg.eigh(m.a)
    gap = vals[-1] - vals[-2]
    if gap < min_gap:
        m = SymMatrix(m.a + (min_gap - gap) * np.outer(vecs[:, -1], vecs[:, -1]))
    return m


class TestSolveSdp:
    def test_diagonal_unpenalized(self):
        sol = solve_sdp(SymMatrix(np.diag([3.0, 1.0])), 0.0)
        assert sol.converged
        np.testing.assert_allclose(sol.x_hat.a, np.diag([1.0, 0.0]), atol=1e-4)

    def test_leading_eigenvector(self):
        sol = solve_sdp(SymMatrix([[2.0, 1.0], [1.0, 2.0]]), 0.0)
        v = np.array([1.0, 1.0]) / np.sqrt(2.0)
        np.testing.assert_allclose(sol.x_hat.a, np.outer(v, v), atol=1e-4)

    def test_penalized_against_brute_force(self):
        # exhaust the 2x2 spectrahedron: X = w v v' + (1-w) v_perp v_perp'
        m = np.diag([3.0, 1.0])
        rho = 0.5
        thetas = np.arange(0.0, np.pi, 1e-3)
        ws = np.arange(0.0, 1.0 + 1e-12, 1e-3)
        c, s = np.cos(thetas)[:, None], np.sin(thetas)[:, None]
        w = ws[None, :]
        x11 = w * c**2 + (1 - w) * s**2
        x22 = w * s**2 + (1 - w) * c**2
        x12 = (2 * w - 1) * c * s
        obj = 3 * x11 + x22 - rho * (np.abs(x11) + np.abs(x22) + 2 * np.abs(x12))
        assert obj.max() == pytest.approx(2.5, abs=1e-3)
        sol = solve_sdp(SymMatrix(m), rho)
        assert sol.objective == pytest.approx(2.5, abs=1e-6)
        np.testing.assert_allclose(sol.x_hat.a, np.diag([1.0, 0.0]), atol=1e-4)

    def test_feasibility_exact(self):
        rng = np.random.default_rng(20)
        for _ in range(20):
            m = _random_sym(rng, int(rng.integers(2, 12)))
            sol = solve_sdp(m, float(rng.uniform(0, 0.8)))
            assert np.linalg.eigvalsh(sol.x_hat.a)[0] >= -1e-6
            assert abs(np.trace(sol.x_hat.a) - 1.0) <= 1e-6

    def test_rank_one_accuracy(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            d = int(rng.integers(2, 15))
            m = _simple_top(rng, d)
            u1 = eigh(m).vectors[:, 0]
            sol = solve_sdp(m, 0.0)
            assert np.linalg.norm(sol.x_hat.a - np.outer(u1, u1)) <= 1e-3

    def test_merit_tail_flat(self):
        rng = np.random.default_rng(22)
        tol = 1e-7
        for _ in range(10):
            m = _random_sym(rng, int(rng.integers(3, 12)))
            sol = solve_sdp(m, float(rng.uniform(0.05, 0.6)), tol=tol)
            assert sol.converged
            tail = sol.merit_history[-50:]
            assert tail.max() - tail.min() <= 10 * tol

    def test_not_converged_flag(self):
        sol = solve_sdp(SymMatrix(np.diag([3.0, 1.0])), 0.3, max_iter=3)
        assert not sol.converged
        assert sol.iterations == 3

    def test_deterministic(self):
        rng = np.random.default_rng(23)
        m = _random_sym(rng, 7)
        a = solve_sdp(m, 0.2)
        b = solve_sdp(m, 0.2)
        assert np.array_equal(a.x_hat.a, b.x_hat.a)
        assert a.iterations == b.iterations

    def test_invalid_args(self):
        m = SymMatrix(np.eye(2))
        with pytest.raises(ValueError):
            solve_sdp(m, -0.1)
        with pytest.raises(ValueError):
            solve_sdp(m, 0.1, tol=0.0)


class TestSolveRestricted:
    def test_full_support_matches_unrestricted(self):
        rng = np.random.default_rng(24)
        m = _random_sym(rng, 6)
        full = solve_sdp(m, 0.3)
        rest = solve_restricted(m, 0.3, range(6))
        assert abs(full.objective - rest.objective) <= 1e-6
        np.testing.assert_allclose(full.x_hat.a, rest.x_hat.a, atol=1e-5)

    def test_singleton(self):
        rng = np.random.default_rng(25)
        m = _random_sym(rng, 5)
        sol = solve_restricted(m, 0.4, [0])
        expected = np.zeros((5, 5))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(sol.x_hat.a, expected, atol=1e-8)
        assert sol.objective == pytest.approx(m.a[0, 0] - 0.4, abs=1e-8)

    def test_excluded_coordinate_ignored(self):
        sol = solve_restricted(SymMatrix(np.diag([3.0, 2.0, 10.0])), 0.0, [0, 1])
        expected = np.zeros((3, 3))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(sol.x_hat.a, expected, atol=1e-4)

    def test_objective_never_beats_unrestricted(self):
        rng = np.random.default_rng(26)
        for _ in range(10):
            d = int(rng.integers(3, 9))
            m = _random_sym(rng, d)
            rho = float(rng.uniform(0, 0.6))
            k = int(rng.integers(1, d))
            full = solve_sdp(m, rho)
            rest = solve_restricted(m, rho, range(k))
            assert rest.objective <= full.objective + 1e-6

    def test_empty_support_rejected(self):
        with pytest.raises(ValueError):
            solve_restricted(SymMatrix(np.eye(3)), 0.1, [])


class TestSupportOf:
    def test_rank_one(self):
        x = np.zeros((3, 3))
        x[0, 0] = 1.0
        assert support_of(SymMatrix(x)) == {0}

    def test_uniform(self):
        assert support_of(SymMatrix(np.eye(4) / 4)) == {0, 1, 2, 3}

    def test_threshold_semantics(self):
        x = np.diag([0.999, 1e-9, 1e-12])
        x = x / np.trace(x)
        assert support_of(SymMatrix(x), 1e-4) == {0}

    def test_zero_diagonal(self):
        assert support_of(SymMatrix(np.zeros((3, 3)))) == frozenset()

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            support_of(SymMatrix(np.eye(2)), 0.0)


class TestKktReport:
    def test_converged_diagonal(self):
        m = SymMatrix(np.diag([3.0, 1.0]))
        sol = solve_sdp(m, 0.5)
        rep = kkt_report(m, 0.5, sol.x_hat, sol.z_dual)
        assert rep.stationarity_residual <= 1e-6
        assert rep.trace_violation <= 1e-6
        assert rep.min_eigenvalue >= -1e-6
        assert rep.mu_hat == pytest.approx(2.5, abs=1e-6)

    def test_zero_data(self):
        d = 4
        rep = kkt_report(SymMatrix(np.zeros((d, d))), 0.0, SymMatrix(np.eye(d) / d))
        assert rep.stationarity_residual == 0.0
        assert rep.trace_violation == 0.0

    def test_infeasible_detected(self):
        rng = np.random.default_rng(27)
        x = rng.standard_normal((4, 4))
        rep = kkt_report(SymMatrix(np.eye(4)), 0.1, SymMatrix(x + x.T))
        assert rep.trace_violation > 1e-3 or rep.min_eigenvalue < -1e-3

    def test_heuristic_subgradient_matches_solver_dual(self):
        rng = np.random.default_rng(28)
        m = _simple_top(rng, 6)
        sol = solve_sdp(m, 0.3)
        with_dual = kkt_report(m, 0.3, sol.x_hat, sol.z_dual)
        heuristic = kkt_report(m, 0.3, sol.x_hat)
        assert with_dual.stationarity_residual <= 1e-6
        assert heuristic.stationarity_residual <= 1e-4


class TestWitnessCertificate:
    def test_hand_evaluated_2x2(self):
        m_star = SymMatrix(np.diag([2.0, 0.5]))
        g = _complete_with_loops(2)
        rep = witness_certificate(m_star, g, m_star, 0.5, [0])
        assert rep.cond_sign
        assert rep.cond_offblock and rep.offblock_max == pytest.approx(0.0)
        assert rep.cond_eig
        assert rep.lambda1_restricted == pytest.approx(1.5)
        assert rep.lambda1_full == pytest.approx(1.5)
        assert rep.cond_gap
        assert rep.certified

    def test_large_rho_breaks_eigenvalue_condition(self):
        m_star = SymMatrix(np.diag([2.0, 0.5]))
        g = _complete_with_loops(2)
        rep = witness_certificate(m_star, g, m_star, 1.6, [0])
        assert rep.lambda1_restricted == pytest.approx(0.4)
        assert rep.lambda1_full == pytest.approx(0.5)
        assert not rep.cond_eig
        assert not rep.certified

    def test_rank_one_certified_and_solver_agrees(self):
        rng = np.random.default_rng(29)
        d, s = 8, 3
        idx = np.sort(rng.choice(d, s, replace=False))
        u = np.zeros(d)
        u[idx] = rng.choice([-1.0, 1.0], s) / np.sqrt(s)
        m_star = SymMatrix(5.0 * np.outer(u, u))
        g = _complete_with_loops(d)
        rho = 0.2
        rep = witness_certificate(m_star, g, m_star, rho, idx)
        assert rep.certified
        sol = solve_sdp(m_star, rho)
        assert sol.support == frozenset(int(i) for i in idx)

    def test_zero_rho_rejected(self):
        m_star = SymMatrix(np.diag([2.0, 0.5]))
        with pytest.raises(ValueError):
            witness_certificate(m_star, _complete_with_loops(2), m_star, 0.0, [0])

    def test_wrong_support_rejected(self):
        m_star = SymMatrix(np.diag([2.0, 0.5]))
        g = _complete_with_loops(2)
        with pytest.raises(ValueError):
            witness_certificate(m_star, g, m_star, 0.5, [1])

    def test_full_support_trivial_blocks(self):
        rng = np.random.default_rng(30)
        u = rng.standard_normal(4)
        u /= np.linalg.norm(u)
        m_star = SymMatrix(3.0 * np.outer(u, u))
        g = _complete_with_loops(4)
        rep = witness_certificate(m_star, g, m_star, 0.1, range(4))
        assert rep.offblock_max == 0.0
        assert rep.tailblock_max == 0.0


class TestCertificateSoundness:
    def test_certified_implies_recovery(self):
        # a smaller in-module version of the acceptance sweep
        rng = np.random.default_rng(31)
        certified = 0
        trials = 0
        while certified < 25 and trials < 300:
            trials += 1
            d = int(rng.integers(5, 11))
            s = int(rng.integers(1, 4))
            idx = np.sort(rng.choice(d, s, replace=False))
            u = np.zeros(d)
            u[idx] = rng.choice([-1.0, 1.0], s) / np.sqrt(s)
            gap = float(rng.uniform(2.0, 6.0))
            rest = 0.3 * rng.standard_normal(d - 1)
            basis = np.column_stack([u, rng.standard_normal((d, d - 1))])
            q, _ = np.linalg.qr(basis)
            q[:, 0] = u
            lams = np.concatenate([[np.max(rest) + gap], np.sort(rest)[::-1]])
            m_star = SymMatrix((q * lams) @ q.T)
            g = random_graph(d, int(0.9 * d * d), int(rng.integers(1e9)))
            m = SymMatrix(adjacency_mask(g) * m_star.a)
            rho = float(rng.uniform(0.15, 0.5))
            try:
                rep = witness_certificate(m_star, g, m, rho, idx)
            except ValueError:
                continue
            if not rep.certified:
                continue
            certified += 1
            sol = solve_sdp(m, rho)
            assert sol.converged
            assert sol.support == frozenset(int(i) for i in idx)
        assert certified == 25


def adjacency_mask(g):
    from spcarec.graph import adjacency

    return adjacency(g).a
