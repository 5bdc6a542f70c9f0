"""Comparison methods: diagonal thresholding, thresholded power iteration,
and nuclear-norm completion followed by the penalized spectrahedron solver.

Missing entries are treated as zero by the thresholding baselines; the
completion baseline instead fills them by nuclear-norm minimization before
solving.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ThresholdTooLarge
from .graph import ObservationGraph, adjacency
from .numerics import SymMatrix
from .sdp import SdpSolution, solve_sdp, support_of

__all__ = [
    "BaselineMethod",
    "BaselineResult",
    "dtspca",
    "itspca",
    "complete_nuclear",
    "mc_then_sdp",
]


class BaselineMethod(str, Enum):
    DTSPCA = "dtspca"
    ITSPCA = "itspca"
    MC_SDP = "mc_sdp"


@dataclass(frozen=True)
class BaselineResult:
    method: BaselineMethod
    support: frozenset
    diagnostics: dict


def dtspca(m: SymMatrix, k: int) -> BaselineResult:
    """Support = indices of the k largest diagonal entries; ties go to the
    lowest index."""
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if not 1 <= k <= m.dim:
        raise ValueError(f"k must be in [1, {m.dim}]")
    diag = np.diag(m.a)
    # lexsort: primary key descending diagonal, secondary ascending index
    order = np.lexsort((np.arange(m.dim), -diag))
    support = frozenset(int(i) for i in order[:k])
    return BaselineResult(
        method=BaselineMethod.DTSPCA,
        support=support,
        diagnostics={"k": k, "kth_value": float(diag[order[k - 1]])},
    )


def itspca(
    m: SymMatrix,
    threshold: float,
    max_iter: int = 1000,
    tol: float = 1e-8,
    rng_seed: int | None = None,
) -> BaselineResult:
    """Power iteration with entrywise soft thresholding of the iterate.

    Starts from the normalized all-ones vector, or from a random unit
    vector when rng_seed is given.  Raises ThresholdTooLarge if the
    iterate collapses to zero.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    d = m.dim
    if rng_seed is None:
        v = np.ones(d) / np.sqrt(d)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
    delta = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        w = m.a @ v
        w = np.sign(w) * np.maximum(np.abs(w) - threshold, 0.0)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise ThresholdTooLarge(
                f"iterate collapsed to zero at threshold {threshold}"
            )
        w /= nw
        delta = np.linalg.norm(w - v)
        v = w
        if delta <= tol:
            break
    support = frozenset(int(i) for i in np.nonzero(v)[0])
    return BaselineResult(
        method=BaselineMethod.ITSPCA,
        support=support,
        diagnostics={"threshold": threshold, "iterations": it, "delta": float(delta)},
    )


def _svt(b: np.ndarray, t: float) -> np.ndarray:
    u, s, vt = np.linalg.svd(b, full_matrices=False)
    return (u * np.maximum(s - t, 0.0)) @ vt


def _complete_nuclear(
    m: np.ndarray,
    mask: np.ndarray,
    tol: float,
    max_iter: int,
    beta: float = 1.0,
) -> tuple[np.ndarray, dict]:
    """ADMM with singular-value thresholding for
    min ||W||_*  s.t.  W symmetric, W agrees with m on the mask."""
    observed = mask.astype(bool)
    y = np.where(observed, m, 0.0)
    u = np.zeros_like(y)
    residual = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        w = _svt(y - u, 1.0 / beta)
        # projection onto {symmetric, observed entries pinned}
        y_new = 0.5 * ((w + u) + (w + u).T)
        y_new[observed] = m[observed]
        u = u + w - y_new
        residual = max(
            float(np.abs(w - y_new).max()), float(np.abs(y_new - y).max())
        )
        y = y_new
        if residual <= tol:
            break
    info = {
        "iterations": it,
        "residual": residual,
        "converged": residual <= tol,
        "observed_violation": float(np.abs((y - m)[observed]).max(initial=0.0)),
    }
    return y, info


def complete_nuclear(
    m: SymMatrix,
    g: ObservationGraph,
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> SymMatrix:
    """Fill the unobserved entries by nuclear-norm minimization.

    The returned matrix is symmetric and agrees exactly with the observed
    entries of m.
    """
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if not g.edges:
        raise ValueError("observation graph has no edges")
    if g.n != m.dim:
        raise ValueError("graph and matrix dimension mismatch")
    y, _ = _complete_nuclear(m.a, adjacency(g).a, tol, max_iter)
    return SymMatrix(y)


def mc_then_sdp(
    m: SymMatrix,
    g: ObservationGraph,
    rho: float,
    tol: float = 1e-6,
    max_iter: int = 5000,
) -> BaselineResult:
    """Nuclear-norm completion followed by the penalized spectrahedron solve."""
    if not isinstance(m, SymMatrix):
        m = SymMatrix(m)
    if not g.edges:
        raise ValueError("observation graph has no edges")
    if g.n != m.dim:
        raise ValueError("graph and matrix dimension mismatch")
    y, info = _complete_nuclear(m.a, adjacency(g).a, tol, max_iter)
    sol: SdpSolution = solve_sdp(SymMatrix(y), rho)
    return BaselineResult(
        method=BaselineMethod.MC_SDP,
        support=support_of(sol.x_hat),
        diagnostics={
            "completion_iterations": info["iterations"],
            "completion_residual": info["residual"],
            "completion_converged": info["converged"],
            "solver_iterations": sol.iterations,
            "solver_converged": sol.converged,
        },
    )
