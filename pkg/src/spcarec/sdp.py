"""Semidefinite relaxation solver and optimality certificates.

The problem solved is

    maximize  <M, X> - rho * ||X||_{1,1}   over  X >= 0, tr(X) = 1,

by two-block ADMM on the equivalent split form with X constrained to the
spectrahedron and an auxiliary copy Y carrying the l1 term.  Both proximal
maps are exact: the X-update is a spectrahedron projection, the Y-update is
entrywise soft thresholding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import ObservationGraph, adjacency
from .numerics import (
    SymMatrix,
    _eigh_descending,
    _project_spectrahedron_arr,
    _soft_threshold_arr,
    eigh,
)

__all__ = [
    "SdpSolution",
    "KktReport",
    "WitnessReport",
    "solve_sdp",
    "solve_restricted",
    "support_of",
    "kkt_report",
    "witness_certificate",
    "DEFAULT_TOL",
    "DEFAULT_MAX_ITER",
    "SUPPORT_THRESHOLD",
]

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 20000
SUPPORT_THRESHOLD = 1e-4
# strictness margin for the certificate's strict inequalities
_STRICT_MARGIN = 1e-10
# convergence requires the residual test to hold this many consecutive
# iterations; guards against single-iteration flukes and leaves a flat
# merit tail behind every converged run
_CONVERGENCE_HOLD = 50


@dataclass(eq=False)
class SdpSolution:
    """Solver output: optimizer, diagnostics, and the recovered support."""

    x_hat: SymMatrix
    objective: float
    iterations: int
    primal_residual: float
    dual_residual: float
    support: frozenset
    converged: bool
    merit_history: np.ndarray
    # exact l1 subgradient extracted from the scaled dual variable
    # (None when rho == 0, where the subgradient is immaterial)
    z_dual: np.ndarray | None = field(default=None, repr=False)
    # internal warm-start state (x, y, u, beta)
    _state: tuple = field(default=None, repr=False)


def _frob(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def _admm(
    m: np.ndarray,
    rho: float,
    tol: float,
    max_iter: int,
    state: tuple | None = None,
) -> SdpSolution:
    d = m.shape[0]
    if state is None:
        x = np.eye(d) / d
        y = x.copy()
        u = np.zeros((d, d))
        beta = 1.0
    else:
        x, y, u, beta = state
        x, y, u = x.copy(), y.copy(), u.copy()

    merit: list[float] = []
    rn = sn = math.inf
    converged = False
    iterations = 0
    hold = 0
    for iterations in range(1, max_iter + 1):
        x = _project_spectrahedron_arr(y - u + m / beta)
        y_old = y
        y = _soft_threshold_arr(x + u, rho / beta)
        u = u + x - y

        r = _frob(x - y)
        s = beta * _frob(y - y_old)
        rn = r / max(1.0, _frob(x), _frob(y))
        sn = s / max(1.0, beta * _frob(u))
        merit.append(
            -float((m * x).sum())
            + rho * float(np.abs(y).sum())
            + 0.5 * beta * _frob(x - y + u) ** 2
            - 0.5 * beta * _frob(u) ** 2
        )
        if max(rn, sn) <= tol:
            hold += 1
            if hold >= _CONVERGENCE_HOLD:
                converged = True
                break
        else:
            hold = 0
        # rebalance the penalty while far from convergence; freezing it near
        # the solution keeps the merit tail smooth
        if max(rn, sn) >= 100.0 * tol:
            if rn > 10.0 * sn and beta < 1e6:
                beta *= 2.0
                u /= 2.0
            elif sn > 10.0 * rn and beta > 1e-6:
                beta /= 2.0
                u *= 2.0

    x_hat = SymMatrix(x)
    objective = float((m * x_hat.a).sum()) - rho * float(np.abs(x_hat.a).sum())
    z_dual = None
    if rho > 0:
        z_dual = np.clip(beta * u / rho, -1.0, 1.0)
    return SdpSolution(
        x_hat=x_hat,
        objective=objective,
        iterations=iterations,
        primal_residual=rn,
        dual_residual=sn,
        support=support_of(x_hat),
        converged=converged,
        merit_history=np.asarray(merit),
        z_dual=z_dual,
        _state=(x, y, u, beta),
    )


def _check_solver_args(rho: float, tol: float, max_iter: int) -> None:
    if not np.isfinite(rho) or rho < 0:
        raise ValueError("rho must be a nonnegative finite real")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")


def solve_sdp(
    m: SymMatrix,
    rho: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: SdpSolution | None = None,
) -> SdpSolution:
    """Solve the l1-penalized spectrahedron problem.

    Residuals are Frobenius norms normalized by the iterate scale;
    convergence means max(primal, dual) <= tol.  A run that hits max_iter
    is returned with converged=False rather than raising.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    _check_solver_args(rho, tol, max_iter)
    state = warm_start._state if warm_start is not None else None
    return _admm(m.a, float(rho), tol, max_iter, state)


def solve_restricted(
    m: SymMatrix,
    rho: float,
    support,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SdpSolution:
    """Solve with the optimizer constrained to support x support.

    Solves the |J| x |J| subproblem and embeds the optimizer back into the
    full dimension.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    _check_solver_args(rho, tol, max_iter)
    idx = np.asarray(sorted(set(int(i) for i in support)), dtype=int)
    if idx.size == 0:
        raise ValueError("support must be nonempty")
    if idx[0] < 0 or idx[-1] >= m.dim:
        raise ValueError("support index out of range")
    sub = _admm(m.a[np.ix_(idx, idx)], float(rho), tol, max_iter, None)
    x = np.zeros((m.dim, m.dim))
    x[np.ix_(idx, idx)] = sub.x_hat.a
    x_hat = SymMatrix(x)
    return SdpSolution(
        x_hat=x_hat,
        objective=sub.objective,
        iterations=sub.iterations,
        primal_residual=sub.primal_residual,
        dual_residual=sub.dual_residual,
        support=support_of(x_hat),
        converged=sub.converged,
        merit_history=sub.merit_history,
        z_dual=None,
        _state=None,
    )


def support_of(x_hat: SymMatrix, threshold: float = SUPPORT_THRESHOLD) -> frozenset:
    """Indices whose diagonal exceeds threshold times the max diagonal entry."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    if not isinstance(x_hat, SymMatrix):
        x_hat = SymMatrix(x_hat)
    dg = np.diag(x_hat.a)
    mx = float(dg.max(initial=0.0))
    if mx <= 0.0:
        return frozenset()
    return frozenset(int(i) for i in np.nonzero(dg > threshold * mx)[0])


@dataclass(frozen=True)
class KktReport:
    """Stationarity/feasibility residuals of a candidate optimizer."""

    mu_hat: float
    stationarity_residual: float
    trace_violation: float
    min_eigenvalue: float
    dual_min_eigenvalue: float


def kkt_report(
    m: SymMatrix,
    rho: float,
    x_hat: SymMatrix,
    z_hat: np.ndarray | None = None,
) -> KktReport:
    """Evaluate the first-order optimality system at x_hat.

    A subgradient Z of the l1 term is taken from `z_hat` when provided
    (e.g. the solver's dual variable); otherwise it is reconstructed as
    sign(x) on the numerically nonzero entries and clip(m/rho, -1, 1)
    elsewhere.  The report contains mu = lambda_1(M - rho Z), the
    stationarity residual ||(M - rho Z) X - mu X||_max, the feasibility
    violations of X, and the smallest eigenvalue of mu I - M + rho Z.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if not isinstance(x_hat, SymMatrix):
        x_hat = SymMatrix(x_hat)
    rho = float(rho)
    x = x_hat.a
    if z_hat is not None:
        z = np.clip(np.asarray(z_hat, dtype=float), -1.0, 1.0)
    elif rho > 0:
        cutoff = 1e-8 * max(1.0, float(np.abs(x).max(initial=0.0)))
        z = np.where(np.abs(x) > cutoff, np.sign(x), np.clip(m.a / rho, -1.0, 1.0))
        z = 0.5 * (z + z.T)
    else:
        z = np.zeros_like(x)
    a = m.a - rho * z
    vals = np.linalg.eigvalsh(a)
    mu = float(vals[-1])
    stationarity = float(np.abs(a @ x - mu * x).max(initial=0.0))
    trace_violation = abs(float(np.trace(x)) - 1.0)
    min_eig = float(np.linalg.eigvalsh(x)[0])
    dual_min_eig = float(mu - vals[-1])  # zero by construction of mu
    return KktReport(
        mu_hat=mu,
        stationarity_residual=stationarity,
        trace_violation=trace_violation,
        min_eigenvalue=min_eig,
        dual_min_eigenvalue=dual_min_eig,
    )


@dataclass(frozen=True)
class WitnessReport:
    """Primal-dual witness evaluation for a claimed support.

    The four conditions are, in order: sign agreement between the
    restricted leading eigenvector and the true one; max-norm of the
    constructed off-support dual block strictly below 1; the restricted
    top eigenvalue being the global one together with the tail dual block
    strictly below 1 in max-norm; and a positive eigengap in the
    restricted penalized block.  `certified` is their conjunction and
    implies the solver's optimum is unique with the claimed support.
    """

    cond_sign: bool
    cond_offblock: bool
    offblock_max: float
    cond_eig: bool
    lambda1_restricted: float
    lambda1_full: float
    tailblock_max: float
    cond_gap: bool
    eigengap: float
    certified: bool


def _support_arrays(d: int, support) -> tuple[np.ndarray, np.ndarray]:
    idx = np.asarray(sorted(set(int(i) for i in support)), dtype=int)
    if idx.size == 0:
        raise ValueError("support must be nonempty")
    if idx[0] < 0 or idx[-1] >= d:
        raise ValueError("support index out of range")
    comp = np.asarray([i for i in range(d) if i not in set(idx.tolist())], dtype=int)
    return idx, comp


def leading_eigenvector_checked(m_star: SymMatrix, support) -> np.ndarray:
    """Leading eigenvector of m_star, validated to be supported on `support`."""
    u1 = eigh(m_star).vectors[:, 0]
    idx, comp = _support_arrays(m_star.dim, support)
    tol = 1e-8 * float(np.abs(u1).max())
    if np.any(np.abs(u1[idx]) <= tol) or (
        comp.size and np.any(np.abs(u1[comp]) > tol)
    ):
        raise ValueError(
            "support does not match the nonzero pattern of the leading eigenvector"
        )
    return u1


def witness_certificate(
    m_star: SymMatrix,
    g: ObservationGraph,
    m: SymMatrix,
    rho: float,
    support,
) -> WitnessReport:
    """Construct the primal-dual witness for support J and test its conditions.

    This is an oracle-side diagnostic: the tail dual block needs the
    expected observation A o M*, hence the ground truth.  Requires rho > 0
    since the off-support dual block divides by rho * ||x||_1.
    """
    if not isinstance(m_star, SymMatrix):
        m_star = SymMatrix(m_star)
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if m_star.dim != m.dim or g.n != m.dim:
        raise ValueError("dimension mismatch between matrices and graph")
    rho = float(rho)
    if not rho > 0:
        raise ValueError("rho must be positive for the witness construction")

    d = m.dim
    u1 = leading_eigenvector_checked(m_star, support)
    idx, comp = _support_arrays(d, support)
    s = idx.size

    z = np.sign(u1[idx])
    b = m.a[np.ix_(idx, idx)] - rho * np.outer(z, z)
    bvals, bvecs = _eigh_descending(b)
    x = bvecs[:, 0]
    if float(z @ x) < 0:
        x = -x

    cond_sign = bool(np.all(np.sign(x) == z))
    lam1_restricted = float(bvals[0])
    eigengap = float(bvals[0] - bvals[1]) if s >= 2 else math.inf
    cond_gap = eigengap > _STRICT_MARGIN

    if comp.size:
        w = (m.a[np.ix_(comp, idx)] @ x) / (rho * float(np.abs(x).sum()))
        offblock_max = float(np.abs(w).max())
        expected = adjacency(g).a * m_star.a
        zcc = (m.a[np.ix_(comp, comp)] - expected[np.ix_(comp, comp)]) / rho
        tailblock_max = float(np.abs(zcc).max(initial=0.0))
        z_full = np.zeros((d, d))
        z_full[np.ix_(idx, idx)] = np.outer(z, z)
        z_full[np.ix_(comp, idx)] = np.outer(w, z)
        z_full[np.ix_(idx, comp)] = np.outer(z, w)
        z_full[np.ix_(comp, comp)] = zcc
        lam1_full = float(np.linalg.eigvalsh(m.a - rho * z_full)[-1])
    else:
        offblock_max = 0.0
        tailblock_max = 0.0
        lam1_full = lam1_restricted

    cond_offblock = offblock_max < 1.0 - _STRICT_MARGIN
    eig_equal = (lam1_full - lam1_restricted) <= 1e-9 * (1.0 + abs(lam1_restricted))
    cond_eig = bool(eig_equal and tailblock_max < 1.0 - _STRICT_MARGIN)

    return WitnessReport(
        cond_sign=cond_sign,
        cond_offblock=cond_offblock,
        offblock_max=offblock_max,
        cond_eig=cond_eig,
        lambda1_restricted=lam1_restricted,
        lambda1_full=lam1_full,
        tailblock_max=tailblock_max,
        cond_gap=cond_gap,
        eigengap=eigengap,
        certified=bool(cond_sign and cond_offblock and cond_eig and cond_gap),
    )
