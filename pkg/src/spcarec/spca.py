"""Support recovery, tuning of the penalty, and theoretical diagnostics.

The user-facing entry point is recover_support / tune_rho.  The remaining
functions evaluate the theory-side quantities (theoretical penalty choice,
rescaled difficulty parameter, sufficient-condition report) and need the
ground truth, the observation graph and the noise level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBaseline, Disconnected
from .graph import (
    ObservationGraph,
    adjacency,
    bipartite_block,
    block_quantities,
    degrees,
    induced_subgraph,
)
from .numerics import SymMatrix, eigh, spectral_norm
from .sdp import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SdpSolution,
    _support_arrays,
    leading_eigenvector_checked,
    solve_sdp,
)

__all__ = [
    "TuningTrace",
    "InequalityRecord",
    "ConditionReport",
    "recover_support",
    "criterion",
    "tune_rho",
    "theoretical_rho",
    "rescaled_parameter",
    "sufficient_conditions_report",
    "DEFAULT_RHO_GRID",
]

# step-0.025 grid from 0.025 to 1.0 inclusive
DEFAULT_RHO_GRID = tuple(round(0.025 * k, 6) for k in range(1, 41))


def recover_support(
    m: SymMatrix,
    rho: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[frozenset, SdpSolution]:
    """Solve the penalized problem and read the support off the diagonal.

    An identically zero observation carries no signal and returns the
    empty support.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    sol = solve_sdp(m, rho, tol=tol, max_iter=max_iter)
    if not np.any(m.a):
        return frozenset(), sol
    return sol.support, sol


def _explained(m: np.ndarray, x: np.ndarray) -> float:
    return float((m * x).sum())


def _criterion_value(
    explained_rho: float, baseline: float, support_size: int, d: int, a: float
) -> float:
    return (1.0 - a) * explained_rho / baseline + a * (1.0 - support_size / d)


def criterion(
    m: SymMatrix,
    rho: float,
    a: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Tuning criterion: explained-variance ratio traded against sparsity.

    C = (1-a) <M, X_rho> / <M, X_0> + a (1 - |supp(diag(X_rho))| / d).
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if not 0.0 < a < 1.0:
        raise ValueError("weight a must lie strictly between 0 and 1")
    base_sol = solve_sdp(m, 0.0, tol=tol, max_iter=max_iter)
    baseline = _explained(m.a, base_sol.x_hat.a)
    if abs(baseline) <= 1e-15 * (1.0 + float(np.abs(m.a).max())):
        raise DegenerateBaseline("unpenalized solution explains zero variance")
    sol = solve_sdp(m, rho, tol=tol, max_iter=max_iter, warm_start=base_sol)
    return _criterion_value(
        _explained(m.a, sol.x_hat.a), baseline, len(sol.support), m.dim, a
    )


@dataclass(frozen=True)
class TuningTrace:
    """Grid search record; grid is stored in ascending order."""

    grid: tuple[float, ...]
    criteria: tuple[float, ...]
    chosen_rho: float
    a: float
    supports: tuple[frozenset, ...]
    explained: tuple[float, ...]
    baseline: float

    @property
    def chosen_support(self) -> frozenset:
        return self.supports[self.grid.index(self.chosen_rho)]


def tune_rho(
    m: SymMatrix,
    grid,
    a: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> TuningTrace:
    """Evaluate the criterion over a grid of penalties and pick the best.

    Ties are broken toward the larger penalty.  Successive solves are
    warm-started from the previous grid point, which does not change the
    converged solutions but cuts the iteration count considerably.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if not 0.0 < a < 1.0:
        raise ValueError("weight a must lie strictly between 0 and 1")
    grid = tuple(sorted(float(r) for r in grid))
    if not grid:
        raise ValueError("grid must be nonempty")
    if grid[0] < 0 or not all(np.isfinite(grid)):
        raise ValueError("grid values must be nonnegative finite reals")

    base_sol = solve_sdp(m, 0.0, tol=tol, max_iter=max_iter)
    baseline = _explained(m.a, base_sol.x_hat.a)
    if abs(baseline) <= 1e-15 * (1.0 + float(np.abs(m.a).max())):
        raise DegenerateBaseline("unpenalized solution explains zero variance")

    criteria = []
    supports = []
    explained = []
    prev = base_sol
    for rho in grid:
        sol = (
            base_sol
            if rho == 0.0
            else solve_sdp(m, rho, tol=tol, max_iter=max_iter, warm_start=prev)
        )
        prev = sol
        expl = _explained(m.a, sol.x_hat.a)
        criteria.append(_criterion_value(expl, baseline, len(sol.support), m.dim, a))
        supports.append(sol.support)
        explained.append(expl)

    best = 0
    for k in range(1, len(grid)):
        if criteria[k] >= criteria[best]:
            best = k
    return TuningTrace(
        grid=grid,
        criteria=tuple(criteria),
        chosen_rho=grid[best],
        a=a,
        supports=tuple(supports),
        explained=tuple(explained),
        baseline=baseline,
    )


def _block_max_degrees(
    g: ObservationGraph, idx: np.ndarray, comp: np.ndarray
) -> tuple[int, int, int]:
    """(max degree of G_JJ, of the bipartite block G_{J,Jc}, of G_{JcJc})."""
    d_jj = int(degrees(induced_subgraph(g, idx)).max()) if idx.size else 0
    if comp.size:
        d_cross = bipartite_block(g, idx).max_degree()
        d_cc = int(degrees(induced_subgraph(g, comp)).max())
    else:
        d_cross = 0
        d_cc = 0
    return d_jj, d_cross, d_cc


def theoretical_rho(
    m_star: SymMatrix, g: ObservationGraph, sigma: float, support
) -> float:
    """Penalty level suggested by the theory (natural logarithm).

    2 sigma sqrt(max{Dmax(G_{J,Jc}), Dmax(G_{JcJc})} log d) + ||M*_{Jc,J}||_max.
    """
    if not isinstance(m_star, SymMatrix):
        m_star = SymMatrix(m_star)
    idx, comp = _support_arrays(m_star.dim, support)
    if comp.size == 0:
        raise ValueError("support must be a proper subset")
    _, d_cross, d_cc = _block_max_degrees(g, idx, comp)
    cross_max = float(np.abs(m_star.a[np.ix_(comp, idx)]).max(initial=0.0))
    return 2.0 * sigma * math.sqrt(max(d_cross, d_cc) * math.log(g.n)) + cross_max


def _condition_ingredients(m_star: SymMatrix, g: ObservationGraph, support):
    """Shared geometry for the rescaled parameter and the condition report."""
    if g.n != m_star.dim:
        raise ValueError("graph and matrix dimension mismatch")
    u1 = leading_eigenvector_checked(m_star, support)
    idx, comp = _support_arrays(m_star.dim, support)
    dec = eigh(m_star)
    if m_star.dim < 2:
        raise ValueError("need dimension at least 2 for a spectral gap")
    gap = float(dec.values[0] - dec.values[1])
    min_u1 = float(np.abs(u1[idx]).min())
    phi, psi = block_quantities(g, idx)
    if phi <= 0.0:
        raise Disconnected("support block of the observation graph is disconnected")
    d_jj, d_cross, d_cc = _block_max_degrees(g, idx, comp)
    a_sub = m_star.a[np.ix_(idx, idx)]
    a_cross = m_star.a[np.ix_(comp, idx)] if comp.size else np.zeros((0, idx.size))
    a_cc = m_star.a[np.ix_(comp, comp)] if comp.size else np.zeros((0, 0))
    return {
        "idx": idx,
        "comp": comp,
        "s": idx.size,
        "d": m_star.dim,
        "gap": gap,
        "min_u1": min_u1,
        "phi": phi,
        "psi": psi,
        "deg_jj": d_jj,
        "deg_cross": d_cross,
        "deg_cc": d_cc,
        "norm_jj": spectral_norm(a_sub),
        "norm_cross": spectral_norm(a_cross) if a_cross.size else 0.0,
        "norm_cc": spectral_norm(a_cc) if a_cc.size else 0.0,
        "max_cross": float(np.abs(a_cross).max(initial=0.0)),
    }


def rescaled_parameter(
    m_star: SymMatrix, g: ObservationGraph, sigma: float, support
) -> float:
    """Difficulty measure: recovery-condition left side over its constant-free
    right side.  Smaller values predict easier support recovery."""
    if not isinstance(m_star, SymMatrix):
        m_star = SymMatrix(m_star)
    q = _condition_ingredients(m_star, g, support)
    s = q["s"]
    lhs = (
        q["norm_jj"] * q["psi"]
        + sigma * math.sqrt(q["deg_jj"] * math.log(s))
        + s * q["norm_cross"]
        + q["norm_cc"] / math.sqrt(s)
        + sigma * s * math.sqrt(max(q["deg_cross"], q["deg_cc"]) * math.log(q["d"]))
    )
    denom = q["phi"] * q["gap"] * q["min_u1"] / s
    return lhs / denom


def _xi_constant(m_star: SymMatrix, g: ObservationGraph, q) -> float:
    """Smallest nonnegative xi with ||A o B||_2 <= (1 + xi) ||B||_2 for both
    off-support blocks; blocks with exactly zero norm are skipped."""
    comp, idx = q["comp"], q["idx"]
    if comp.size == 0:
        return 0.0
    masked = adjacency(g).a * m_star.a
    xi = 0.0
    if q["norm_cross"] != 0.0:
        xi = max(
            xi, spectral_norm(masked[np.ix_(comp, idx)]) / q["norm_cross"] - 1.0
        )
    if q["norm_cc"] != 0.0:
        xi = max(xi, spectral_norm(masked[np.ix_(comp, comp)]) / q["norm_cc"] - 1.0)
    return max(xi, 0.0)


@dataclass(frozen=True)
class InequalityRecord:
    name: str
    lhs: float
    rhs: float
    strict: bool
    holds: bool


@dataclass(frozen=True)
class ConditionReport:
    """Numeric evaluation of the five recovery inequalities."""

    ineq: tuple[InequalityRecord, ...]
    xi: float
    rescaled: float
    spectral_gap: float
    min_abs_u1: float

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.ineq)


def _record(name: str, lhs: float, rhs: float, strict: bool) -> InequalityRecord:
    holds = lhs < rhs if strict else lhs <= rhs
    return InequalityRecord(name=name, lhs=lhs, rhs=rhs, strict=strict, holds=holds)


def sufficient_conditions_report(
    m_star: SymMatrix,
    g: ObservationGraph,
    sigma: float,
    rho: float,
    support,
) -> ConditionReport:
    """Evaluate the five sufficient inequalities for unique recovery at (rho, sigma).

    The spectral gap of the full matrix is used throughout (it lower-bounds
    the gap of the support block, so the evaluation is conservative).
    """
    if not isinstance(m_star, SymMatrix):
        m_star = SymMatrix(m_star)
    q = _condition_ingredients(m_star, g, support)
    s, d = q["s"], q["d"]
    gap, min_u1, phi, psi = q["gap"], q["min_u1"], q["phi"], q["psi"]
    xi = _xi_constant(m_star, g, q)
    sq2 = math.sqrt(2.0)

    noise_jj = 2.0 * sigma * math.sqrt(q["deg_jj"] * math.log(s))
    noise_cross = 2.0 * sigma * math.sqrt(q["deg_cross"] * math.log(d))
    noise_cc = 2.0 * sigma * math.sqrt(q["deg_cc"] * math.log(d))

    records = (
        _record(
            "sign_agreement",
            q["norm_jj"] * psi + noise_jj + s * rho,
            phi * gap * min_u1 / (2.0 * sq2 * s),
            strict=False,
        ),
        _record(
            "cross_dual_max",
            noise_cross + q["max_cross"],
            rho,
            strict=True,
        ),
        _record(
            "cross_block_norm",
            (1.0 + xi) * (noise_cross + q["norm_cross"]) * (1.0 + math.sqrt(s)),
            phi * gap * (1.0 - min_u1 / sq2) / (2.0 * s),
            strict=False,
        ),
        _record(
            "tail_block_norm",
            (1.0 + xi) * q["norm_cc"],
            phi * gap * (1.0 - min_u1 / (2.0 * sq2)) / (2.0 * s),
            strict=False,
        ),
        _record(
            "tail_dual_max",
            noise_cc,
            rho,
            strict=True,
        ),
    )
    return ConditionReport(
        ineq=records,
        xi=xi,
        rescaled=rescaled_parameter(m_star, g, sigma, support),
        spectral_gap=gap,
        min_abs_u1=min_u1,
    )
