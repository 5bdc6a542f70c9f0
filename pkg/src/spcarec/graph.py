"""Observation graphs and their structural quantities.

An observation graph records which entries of a symmetric d x d matrix are
observed: nodes are row/column indices 0..n-1, an edge {i, j} means entries
(i, j) and (j, i) are observed, and a loop {i, i} means the diagonal entry
is observed.  Degrees count loops once, i.e. degree(i) is the number of
observed entries in row i.  Laplacians are built from the loopless graph
(loops cancel in D - A), so algebraic connectivity has its usual meaning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BucketExhausted, IrregularityUndefined
from .numerics import SymMatrix

__all__ = [
    "ObservationGraph",
    "BipartiteSubgraph",
    "adjacency",
    "degrees",
    "algebraic_connectivity",
    "complement",
    "irregularity",
    "induced_subgraph",
    "bipartite_block",
    "block_quantities",
    "random_graph",
    "random_graph_bucketed",
    "graph_from_mask",
    "bipartite_from_mask",
]

_EIG_ZERO_TOL = 1e-8


class ObservationGraph:
    """Undirected graph on nodes 0..n-1; loops allowed, no duplicate edges."""

    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges=()):
        if n < 1:
            raise ValueError("node count must be positive")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i},{j}) out of range for n={n}")
            canon.add((i, j) if i <= j else (j, i))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(canon))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ObservationGraph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"ObservationGraph(n={self.n}, edges={len(self.edges)})"


@dataclass(frozen=True)
class BipartiteSubgraph:
    """Edges between two disjoint node sets (the block G_{L,R} of a graph)."""

    left: tuple[int, ...]
    right: tuple[int, ...]
    edges: frozenset

    def __post_init__(self):
        ls, rs = set(self.left), set(self.right)
        if ls & rs:
            raise ValueError("left and right node sets must be disjoint")
        for l, r in self.edges:
            if l not in ls or r not in rs:
                raise ValueError(f"edge ({l},{r}) endpoints not in declared sides")

    def max_degree(self) -> int:
        """Max incident-edge count over all vertices on both sides."""
        if not self.edges:
            return 0
        counts: dict[int, int] = {}
        for l, r in self.edges:
            counts[l] = counts.get(l, 0) + 1
            counts[r] = counts.get(r, 0) + 1
        return max(counts.values())

    def pattern(self) -> np.ndarray:
        """Boolean |left| x |right| mask, rows/columns in declared order."""
        li = {v: k for k, v in enumerate(self.left)}
        ri = {v: k for k, v in enumerate(self.right)}
        mask = np.zeros((len(self.left), len(self.right)), dtype=bool)
        for l, r in self.edges:
            mask[li[l], ri[r]] = True
        return mask


def bipartite_from_mask(mask) -> BipartiteSubgraph:
    """Build a bipartite pattern from an m x n boolean/0-1 array.

    Left nodes are 0..m-1 and right nodes are m..m+n-1 so the sides are
    disjoint.
    """
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-d")
    m, n = mask.shape
    edges = frozenset(
        (int(i), int(m + j)) for i, j in zip(*np.nonzero(mask))
    )
    return BipartiteSubgraph(
        left=tuple(range(m)), right=tuple(range(m, m + n)), edges=edges
    )


def adjacency(g: ObservationGraph) -> SymMatrix:
    """0/1 adjacency matrix; A_ii = 1 iff the loop {i,i} is present."""
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        a[i, j] = 1.0
        a[j, i] = 1.0
    return SymMatrix(a)


def degrees(g: ObservationGraph) -> np.ndarray:
    """Number of observed entries per row; a loop counts once."""
    deg = np.zeros(g.n, dtype=int)
    for i, j in g.edges:
        deg[i] += 1
        if i != j:
            deg[j] += 1
    return deg


def _loopless_laplacian(g: ObservationGraph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for i, j in g.edges:
        if i != j:
            a[i, j] = 1.0
            a[j, i] = 1.0
    return np.diag(a.sum(axis=1)) - a


def algebraic_connectivity(g: ObservationGraph) -> float:
    """Second-smallest Laplacian eigenvalue; 0 iff the graph is disconnected."""
    if g.n < 2:
        raise ValueError("algebraic connectivity needs at least 2 nodes")
    vals = np.linalg.eigvalsh(_loopless_laplacian(g))
    phi = float(vals[1])
    return phi if phi > _EIG_ZERO_TOL else 0.0


def complement(g: ObservationGraph) -> ObservationGraph:
    """Complement within the full universe of pairs including loops."""
    universe = {(i, j) for i in range(g.n) for j in range(i, g.n)}
    return ObservationGraph(g.n, universe - g.edges)


def irregularity(g: ObservationGraph) -> float:
    """max over g and its complement of (max degree - algebraic connectivity).

    Undefined (raises IrregularityUndefined) when either difference is
    negative, e.g. for the complete graph without loops.
    """
    gc = complement(g)
    d1 = float(degrees(g).max()) - algebraic_connectivity(g)
    d2 = float(degrees(gc).max()) - algebraic_connectivity(gc)
    if d1 < -_EIG_ZERO_TOL or d2 < -_EIG_ZERO_TOL:
        raise IrregularityUndefined(
            f"max degree below connectivity (diffs {d1:.3g}, {d2:.3g})"
        )
    return max(max(d1, 0.0), max(d2, 0.0))


def induced_subgraph(g: ObservationGraph, nodes) -> ObservationGraph:
    """Subgraph on `nodes`, relabeled 0..k-1 preserving the sorted order."""
    nodes = sorted(set(int(v) for v in nodes))
    if not nodes:
        raise ValueError("node set must be nonempty")
    if nodes[0] < 0 or nodes[-1] >= g.n:
        raise ValueError("node index out of range")
    relabel = {v: k for k, v in enumerate(nodes)}
    keep = set(nodes)
    edges = [
        (relabel[i], relabel[j]) for i, j in g.edges if i in keep and j in keep
    ]
    return ObservationGraph(len(nodes), edges)


def bipartite_block(g: ObservationGraph, left) -> BipartiteSubgraph:
    """Edges of g with exactly one endpoint in `left` (the block G_{J,J^c})."""
    left = sorted(set(int(v) for v in left))
    if not left:
        raise ValueError("left set must be nonempty")
    if left[0] < 0 or left[-1] >= g.n:
        raise ValueError("node index out of range")
    lset = set(left)
    if len(lset) == g.n:
        raise ValueError("left set must be a proper subset of the nodes")
    right = tuple(v for v in range(g.n) if v not in lset)
    edges = set()
    for i, j in g.edges:
        if (i in lset) != (j in lset):
            l, r = (i, j) if i in lset else (j, i)
            edges.add((l, r))
    return BipartiteSubgraph(left=tuple(left), right=right, edges=frozenset(edges))


def block_quantities(g: ObservationGraph, nodes) -> tuple[float, float]:
    """(algebraic connectivity, irregularity) of the induced block.

    A disconnected block returns (0, nan) without attempting the
    irregularity; callers treat that case separately.  A single-node block
    is trivially connected and regular: the complete graph with loops on k
    nodes has connectivity k and irregularity 0, so the k = 1 limit is
    taken as (1, 0) regardless of whether the loop is observed.
    """
    nodes = sorted(set(int(v) for v in nodes))
    if len(nodes) == 1:
        return 1.0, 0.0
    sub = induced_subgraph(g, nodes)
    phi = algebraic_connectivity(sub)
    if phi <= 0.0:
        return 0.0, float("nan")
    return phi, irregularity(sub)


def _pair_universe(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(n)
    weights = np.where(rows == cols, 1, 2)
    return rows, cols, weights


def _random_graph(n: int, budget: int, rng: np.random.Generator) -> ObservationGraph:
    rows, cols, weights = _pair_universe(n)
    if budget == 0:
        return ObservationGraph(n, ())
    perm = rng.permutation(rows.size)
    cum = np.cumsum(weights[perm])
    k = int(np.searchsorted(cum, budget, side="left"))
    sel = perm[: k + 1]
    return ObservationGraph(n, zip(rows[sel].tolist(), cols[sel].tolist()))


def random_graph(n: int, budget: int, rng_seed: int) -> ObservationGraph:
    """Uniformly sample pairs/loops until the ordered-entry count reaches budget.

    An off-diagonal pair contributes 2 to the count (both (i,j) and (j,i)),
    a loop contributes 1, so the final count lands in [budget, budget + 1].
    """
    if not (0 <= budget <= n * n):
        raise ValueError(f"budget must be in [0, n^2], got {budget}")
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    return _random_graph(n, budget, rng)


def random_graph_bucketed(
    n: int,
    budget: int,
    support,
    ratio_lo: float,
    ratio_hi: float,
    max_tries: int,
    rng_seed: int,
) -> ObservationGraph:
    """Rejection-sample random graphs until psi/phi of the support block
    lands in [ratio_lo, ratio_hi) with the block connected.

    Draws with a disconnected block or undefined irregularity are rejected.
    Raises BucketExhausted after max_tries rejections.
    """
    if not ratio_lo < ratio_hi:
        raise ValueError("need ratio_lo < ratio_hi")
    support = sorted(set(int(v) for v in support))
    if not support:
        raise ValueError("support must be nonempty")
    if support[0] < 0 or support[-1] >= n:
        raise ValueError("support index out of range")
    for attempt in range(max_tries):
        rng = np.random.default_rng(np.random.SeedSequence((rng_seed, attempt)))
        g = _random_graph(n, budget, rng)
        try:
            phi, psi = block_quantities(g, support)
        except IrregularityUndefined:
            continue
        if phi <= 0.0:
            continue
        if ratio_lo <= psi / phi < ratio_hi:
            return g
    raise BucketExhausted(
        f"no graph with ratio in [{ratio_lo}, {ratio_hi}) after {max_tries} tries"
    )


def graph_from_mask(mask) -> ObservationGraph:
    """Observation graph from a symmetric 0/1 mask matrix."""
    mask = np.asarray(mask)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise ValueError("mask must be square")
    if not np.array_equal(mask, mask.T):
        raise ValueError("mask must be symmetric")
    edges = [
        (int(i), int(j)) for i, j in zip(*np.nonzero(mask)) if i <= j
    ]
    return ObservationGraph(mask.shape[0], edges)
