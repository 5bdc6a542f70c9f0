"""Synthetic instance generation, CSV ingestion, and experiment runners.

Randomness is counter based: every (bucket, repetition) pair derives its
own integer seeds from the master seed, so results are bit-identical no
matter how repetitions are scheduled across worker threads.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import _complete_nuclear, dtspca, itspca
from .errors import BucketExhausted, MatrixParseError, ThresholdTooLarge
from .graph import ObservationGraph, adjacency, graph_from_mask, random_graph_bucketed
from .numerics import SymMatrix
from .spca import DEFAULT_RHO_GRID, rescaled_parameter, tune_rho

__all__ = [
    "ProblemInstance",
    "ExperimentRow",
    "gen_instance",
    "run_bucket_experiment",
    "pitprops_experiment",
    "load_matrix_csv",
    "emit_csv",
    "parse_rows_csv",
    "write_matrix_csv",
    "write_mask_csv",
    "PITPROPS_VARIABLES",
    "PITPROPS_SUPPORT_NAMES",
    "DEFAULT_MAX_TRIES",
]

DEFAULT_MAX_TRIES = 100_000
# harness solves use a slightly looser tolerance than the library default;
# support extraction is insensitive at this level and the sweep is ~3x faster
_EXPERIMENT_TOL = 1e-6

PITPROPS_VARIABLES = (
    "topdiam",
    "length",
    "moist",
    "testsg",
    "ovensg",
    "ringtop",
    "ringbut",
    "bowmax",
    "bowdist",
    "whorls",
    "clear",
    "knots",
    "diaknot",
)
PITPROPS_SUPPORT_NAMES = (
    "topdiam",
    "length",
    "ringbut",
    "bowmax",
    "bowdist",
    "whorls",
)

_ITSPCA_DEFAULT_THRESHOLDS = tuple(round(0.05 * k, 6) for k in range(1, 21))


@dataclass(frozen=True)
class ProblemInstance:
    """Ground truth plus its observed, zero-imputed realization."""

    m_star: SymMatrix
    support: frozenset
    sigma: float
    graph: ObservationGraph
    m: SymMatrix
    seed: int


@dataclass(frozen=True)
class ExperimentRow:
    bucket_lo: float
    bucket_hi: float
    spectral_gap: float
    sigma: float
    reps: int
    exact_recovery_rate: float
    mean_rescaled: float
    skipped: bool = False


def _child_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(tuple(parts)).generate_state(1)[0])


def gen_instance(
    d: int,
    s: int,
    gap: float,
    sigma: float,
    graph: ObservationGraph,
    rng_seed: int,
    support=None,
) -> ProblemInstance:
    """Generate a planted-support instance.

    The leading eigenvector has s entries equal to 1/sqrt(s) on a uniformly
    chosen support (or the given one); the remaining eigenvectors are a
    random orthonormal completion.  Trailing eigenvalues are standard
    normal draws sorted descending, and the top one sits `gap` above the
    second.  Noise is N(0, sigma^2), drawn once per unordered pair, and
    only observed entries are kept (zero imputation elsewhere).
    """
    if not 1 <= s <= d:
        raise ValueError("need 1 <= s <= d")
    if not gap > 0:
        raise ValueError("spectral gap must be positive")
    if graph.n != d:
        raise ValueError("graph node count must equal d")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    if support is None:
        idx = np.sort(rng.choice(d, size=s, replace=False))
    else:
        idx = np.asarray(sorted(set(int(i) for i in support)), dtype=int)
        if idx.size != s or idx[0] < 0 or idx[-1] >= d:
            raise ValueError("support must contain s valid indices")
    u1 = np.zeros(d)
    u1[idx] = 1.0 / math.sqrt(s)
    basis = np.column_stack([u1, rng.standard_normal((d, d - 1))])
    q, _ = np.linalg.qr(basis)
    q[:, 0] = u1  # QR preserves the first column only up to sign
    lam_rest = np.sort(rng.standard_normal(d - 1))[::-1] if d > 1 else np.array([])
    lam1 = (lam_rest[0] if d > 1 else 0.0) + gap
    lams = np.concatenate([[lam1], lam_rest])
    m_star = SymMatrix((q * lams) @ q.T)

    mask = adjacency(graph).a
    noisy = m_star.a
    if sigma > 0:
        upper = np.triu(rng.standard_normal((d, d)) * sigma)
        noise = upper + np.triu(upper, 1).T
        noisy = m_star.a + noise
    m = SymMatrix(mask * noisy)
    return ProblemInstance(
        m_star=m_star,
        support=frozenset(int(i) for i in idx),
        sigma=float(sigma),
        graph=graph,
        m=m,
        seed=int(rng_seed),
    )


def _sdp_recoveries(inst: ProblemInstance, rho_grid, a: float) -> tuple[bool, ...]:
    trace = tune_rho(inst.m, rho_grid, a, tol=_EXPERIMENT_TOL)
    return (trace.chosen_support == inst.support,)


def _mc_sdp_recoveries(inst: ProblemInstance, rho_grid, a: float) -> tuple[bool, ...]:
    y, _ = _complete_nuclear(inst.m.a, adjacency(inst.graph).a, 1e-6, 5000)
    trace = tune_rho(SymMatrix(y), rho_grid, a, tol=_EXPERIMENT_TOL)
    return (trace.chosen_support == inst.support,)


def _dtspca_recoveries(inst: ProblemInstance, ks) -> tuple[bool, ...]:
    return tuple(dtspca(inst.m, k).support == inst.support for k in ks)


def _itspca_recoveries(inst: ProblemInstance, thresholds) -> tuple[bool, ...]:
    out = []
    for t in thresholds:
        try:
            out.append(itspca(inst.m, t).support == inst.support)
        except ThresholdTooLarge:
            out.append(False)
    return tuple(out)


def _rep_task(
    d: int,
    s: int,
    gap: float,
    sigma: float,
    budget: int,
    bucket: tuple[float, float],
    bucket_idx: int,
    rep: int,
    rho_grid,
    a: float,
    rng_seed: int,
    max_tries: int,
    method: str,
    fixed_m_star: SymMatrix | None,
    fixed_support,
    baseline_params,
):
    rng = np.random.default_rng(
        np.random.SeedSequence((rng_seed, bucket_idx, rep, 0))
    )
    if fixed_support is None:
        support = np.sort(rng.choice(d, size=s, replace=False))
    else:
        support = np.asarray(sorted(fixed_support), dtype=int)
    graph = random_graph_bucketed(
        d,
        budget,
        support,
        bucket[0],
        bucket[1],
        max_tries,
        _child_seed(rng_seed, bucket_idx, rep, 1),
    )
    inst_seed = _child_seed(rng_seed, bucket_idx, rep, 2)
    if fixed_m_star is None:
        inst = gen_instance(d, s, gap, sigma, graph, inst_seed, support=support)
    else:
        inst = _observe_fixed(fixed_m_star, support, sigma, graph, inst_seed)

    if method == "sdp":
        successes = _sdp_recoveries(inst, rho_grid, a)
    elif method == "mc_sdp":
        successes = _mc_sdp_recoveries(inst, rho_grid, a)
    elif method == "dtspca":
        successes = _dtspca_recoveries(inst, baseline_params)
    elif method == "itspca":
        successes = _itspca_recoveries(inst, baseline_params)
    else:
        raise ValueError(f"unknown method {method!r}")
    rescaled = rescaled_parameter(inst.m_star, graph, sigma, inst.support)
    return successes, rescaled


def _observe_fixed(
    m_star: SymMatrix, support, sigma: float, graph: ObservationGraph, rng_seed: int
) -> ProblemInstance:
    """Noisy masked observation of a fixed ground-truth matrix."""
    d = m_star.dim
    rng = np.random.default_rng(np.random.SeedSequence(rng_seed))
    mask = adjacency(graph).a
    noisy = m_star.a
    if sigma > 0:
        upper = np.triu(rng.standard_normal((d, d)) * sigma)
        noisy = m_star.a + upper + np.triu(upper, 1).T
    return ProblemInstance(
        m_star=m_star,
        support=frozenset(int(i) for i in support),
        sigma=float(sigma),
        graph=graph,
        m=SymMatrix(mask * noisy),
        seed=int(rng_seed),
    )


def _run_buckets(
    d: int,
    s: int,
    gap: float,
    sigma: float,
    budget: int,
    buckets,
    reps: int,
    rho_grid,
    a: float,
    rng_seed: int,
    max_tries: int,
    workers: int,
    method: str,
    fixed_m_star: SymMatrix | None,
    fixed_support,
    baseline_params,
) -> list[ExperimentRow]:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    rows = []
    for b, (lo, hi) in enumerate(buckets):
        def task(rep, _b=b, _lo=lo, _hi=hi):
            return _rep_task(
                d, s, gap, sigma, budget, (_lo, _hi), _b, rep, rho_grid, a,
                rng_seed, max_tries, method, fixed_m_star, fixed_support,
                baseline_params,
            )

        try:
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(task, range(reps)))
            else:
                results = [task(rep) for rep in range(reps)]
        except BucketExhausted:
            rows.append(
                ExperimentRow(
                    bucket_lo=float(lo),
                    bucket_hi=float(hi),
                    spectral_gap=float(gap),
                    sigma=float(sigma),
                    reps=reps,
                    exact_recovery_rate=math.nan,
                    mean_rescaled=math.nan,
                    skipped=True,
                )
            )
            continue
        # rate = best over the method's tuning grid of the per-value rate
        n_params = len(results[0][0])
        rate = max(
            sum(res[0][p] for res in results) / reps for p in range(n_params)
        )
        mean_rescaled = sum(res[1] for res in results) / reps
        rows.append(
            ExperimentRow(
                bucket_lo=float(lo),
                bucket_hi=float(hi),
                spectral_gap=float(gap),
                sigma=float(sigma),
                reps=reps,
                exact_recovery_rate=rate,
                mean_rescaled=mean_rescaled,
            )
        )
    return rows


def run_bucket_experiment(
    d: int,
    s: int,
    gap: float,
    sigma: float,
    budget: int,
    buckets,
    reps: int,
    rho_grid=None,
    a: float = 0.5,
    rng_seed: int = 0,
    max_tries: int = DEFAULT_MAX_TRIES,
    workers: int = 1,
) -> list[ExperimentRow]:
    """Monte-Carlo recovery rates over irregularity/connectivity buckets.

    Per repetition: draw a support, rejection-sample an observation graph
    whose support block lands in the bucket, generate the instance, tune
    the penalty on the criterion, and score exact support recovery
    (set equality, no partial credit).  A bucket that exhausts its
    rejection budget yields a row marked skipped with NaN rate.
    """
    if rho_grid is None:
        rho_grid = DEFAULT_RHO_GRID
    return _run_buckets(
        d, s, gap, sigma, budget, buckets, reps, rho_grid, a, rng_seed,
        max_tries, workers, "sdp", None, None, None,
    )


def pitprops_experiment(
    matrix_path,
    budget: int,
    buckets,
    sigma: float = 0.1,
    reps: int = 50,
    rho_grid=None,
    a: float = 0.4,
    rng_seed: int = 0,
    method: str = "sdp",
    max_tries: int = DEFAULT_MAX_TRIES,
    workers: int = 1,
    baseline_params=None,
) -> list[ExperimentRow]:
    """Recovery-rate experiment on the 13-variable pitprops covariance matrix.

    The loaded matrix is the fixed ground truth; missingness and noise are
    synthesized per repetition.  The true support is the classical
    six-variable set, located by name when the file has a header row and
    by the standard variable ordering otherwise.  For the thresholding
    baselines the rate reported per bucket is the best over their tuning
    grid, mirroring how such methods are usually scored.
    """
    m_star, graph, names = _load_matrix(matrix_path, None)
    if m_star.dim != 13:
        raise MatrixParseError(f"expected a 13x13 matrix, got {m_star.dim}")
    if len(graph.edges) != 13 * 14 // 2:
        raise MatrixParseError("pitprops matrix must be complete (no NA cells)")
    if names is not None:
        lowered = [n.lower() for n in names]
        missing = [v for v in PITPROPS_SUPPORT_NAMES if v not in lowered]
        if missing:
            raise MatrixParseError(f"header lacks expected variables: {missing}")
        support = tuple(lowered.index(v) for v in PITPROPS_SUPPORT_NAMES)
    else:
        support = tuple(
            PITPROPS_VARIABLES.index(v) for v in PITPROPS_SUPPORT_NAMES
        )
    if rho_grid is None:
        rho_grid = tuple(round(0.05 * k, 6) for k in range(1, 21))
    if baseline_params is None:
        baseline_params = (
            tuple(range(1, 14)) if method == "dtspca" else _ITSPCA_DEFAULT_THRESHOLDS
        )
    gap_val = _spectral_gap(m_star)
    return _run_buckets(
        13, len(support), gap_val, sigma, budget, buckets, reps, rho_grid, a,
        rng_seed, max_tries, workers, method, m_star, support, baseline_params,
    )


def _spectral_gap(m: SymMatrix) -> float:
    vals = np.linalg.eigvalsh(m.a)
    return float(vals[-1] - vals[-2])


# ---------------------------------------------------------------------------
# CSV input/output


def _parse_cell(token: str, row: int, col: int) -> float | None:
    token = token.strip()
    if token == "NA":
        return None
    try:
        return float(token)
    except ValueError:
        raise MatrixParseError(
            f"row {row}, column {col}: cannot parse {token!r}"
        ) from None


def _read_rows(path) -> tuple[list[list[str]], list[str] | None]:
    with open(path, newline="") as fh:
        raw = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not raw:
        raise MatrixParseError("file is empty")
    names = None
    first = raw[0]

    def numeric_or_na(tok: str) -> bool:
        tok = tok.strip()
        if tok == "NA":
            return True
        try:
            float(tok)
            return True
        except ValueError:
            return False

    if not all(numeric_or_na(tok) for tok in first):
        names = [tok.strip() for tok in first]
        raw = raw[1:]
    return raw, names


def _load_matrix(path, mask_path):
    raw, names = _read_rows(path)
    d = len(raw)
    values = np.zeros((d, d))
    observed = np.zeros((d, d), dtype=bool)
    for i, row in enumerate(raw):
        if len(row) != d:
            raise MatrixParseError(
                f"row {i}: expected {d} columns, found {len(row)}"
            )
        for j, tok in enumerate(row):
            cell = _parse_cell(tok, i, j)
            if cell is not None:
                values[i, j] = cell
                observed[i, j] = True
    if names is not None and len(names) != d:
        raise MatrixParseError("header length does not match matrix dimension")

    if mask_path is not None:
        mraw, _ = _read_rows(mask_path)
        if len(mraw) != d:
            raise MatrixParseError("mask dimension does not match matrix")
        mask = np.zeros((d, d), dtype=bool)
        for i, row in enumerate(mraw):
            if len(row) != d:
                raise MatrixParseError(
                    f"mask row {i}: expected {d} columns, found {len(row)}"
                )
            for j, tok in enumerate(row):
                cell = _parse_cell(tok, i, j)
                if cell not in (0.0, 1.0):
                    raise MatrixParseError(
                        f"mask row {i}, column {j}: entries must be 0 or 1"
                    )
                mask[i, j] = bool(cell)
        # NA cells, if any, must sit outside the mask
        bad = np.argwhere(mask & ~observed)
        if bad.size:
            i, j = bad[0]
            raise MatrixParseError(
                f"mask marks ({i}, {j}) observed but the matrix file has NA there"
            )
        observed = mask

    bad = np.argwhere(observed != observed.T)
    if bad.size:
        i, j = bad[0]
        raise MatrixParseError(
            f"observation pattern is asymmetric at ({i}, {j})"
        )
    sym_err = np.abs(np.where(observed, values, 0.0) - np.where(observed, values, 0.0).T)
    bad = np.argwhere(sym_err > 1e-9)
    if bad.size:
        i, j = bad[0]
        raise MatrixParseError(
            f"values are asymmetric at ({i}, {j}): |difference| = {sym_err[i, j]:.3g}"
        )
    m = SymMatrix(np.where(observed, values, 0.0))
    return m, graph_from_mask(observed), names


def load_matrix_csv(path, mask_path=None) -> tuple[SymMatrix, ObservationGraph]:
    """Read a symmetric matrix CSV; NA cells (or a 0/1 mask file) define the
    unobserved pattern.  Unobserved entries are zero-imputed."""
    m, g, _ = _load_matrix(path, mask_path)
    return m, g


def write_matrix_csv(path, m: SymMatrix, graph: ObservationGraph | None = None,
                     names=None) -> None:
    """Write a matrix CSV, with NA at entries the graph marks unobserved."""
    observed = adjacency(graph).a.astype(bool) if graph is not None else None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if names is not None:
            writer.writerow(list(names))
        for i in range(m.dim):
            row = []
            for j in range(m.dim):
                if observed is not None and not observed[i, j]:
                    row.append("NA")
                else:
                    row.append(repr(float(m.a[i, j])))
            writer.writerow(row)


def write_mask_csv(path, graph: ObservationGraph) -> None:
    mask = adjacency(graph).a.astype(int)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i in range(graph.n):
            writer.writerow(mask[i].tolist())


_ROW_HEADER = ["bucket_lo", "bucket_hi", "gap", "sigma", "reps", "rate", "mean_rescaled"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_csv(rows, path) -> None:
    """Write experiment rows (6 significant digits, ordered by bucket_lo)."""
    ordered = sorted(rows, key=lambda r: (r.bucket_lo, r.bucket_hi, r.spectral_gap))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_ROW_HEADER)
        for r in ordered:
            writer.writerow(
                [
                    _fmt(r.bucket_lo),
                    _fmt(r.bucket_hi),
                    _fmt(r.spectral_gap),
                    _fmt(r.sigma),
                    str(r.reps),
                    _fmt(r.exact_recovery_rate),
                    _fmt(r.mean_rescaled),
                ]
            )


def parse_rows_csv(path) -> list[ExperimentRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _ROW_HEADER:
            raise MatrixParseError(f"unexpected header {header}")
        rows = []
        for rec in reader:
            lo, hi, gap, sigma, reps, rate, mean_rescaled = rec
            rows.append(
                ExperimentRow(
                    bucket_lo=float(lo),
                    bucket_hi=float(hi),
                    spectral_gap=float(gap),
                    sigma=float(sigma),
                    reps=int(reps),
                    exact_recovery_rate=float(rate),
                    mean_rescaled=float(mean_rescaled),
                    skipped=math.isnan(float(rate)),
                )
            )
    return rows
