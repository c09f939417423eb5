"""Data-driven structure learning.

Pairwise and conditional mutual information feed a skeleton pruner in the
spirit of information-based inductive causation (threshold tests only, no
orientation); BIC scoring with Laplace-smoothed CPT estimates drives a
deterministic greedy hill-climb over add/delete/reverse moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .data import DataTable
from .errors import ConditioningTooSparseError, NodeNotInDataError
from .graph import Dag

DEFAULT_MI_THRESHOLD = 0.01  # bits
DEFAULT_MAX_CONDITION_SIZE = 2
DEFAULT_LATENT_MARGIN = 0.1  # bits of MI increase under conditioning
DEFAULT_SMOOTHING = 1.0
SCORE_EPS = 1e-10  # an improving move must beat this margin


@dataclass
class ContingencyCounts:
    """Dense joint occurrence counts for a subset of columns."""

    variables: tuple[str, ...]
    dims: tuple[int, ...]
    counts: np.ndarray
    total: int


def contingency(data: DataTable, variables: list[str] | tuple[str, ...]) -> ContingencyCounts:
    dims = tuple(len(data.levels(v)) for v in variables)
    cols = np.stack([data.codes_for(v) for v in variables], axis=0)
    flat = np.ravel_multi_index(cols, dims)
    counts = np.bincount(flat, minlength=int(np.prod(dims))).reshape(dims)
    return ContingencyCounts(tuple(variables), dims, counts, data.n_rows)


def _mi_from_counts(joint: np.ndarray) -> float:
    """I(X;Y) in bits from a 2-D count table."""
    n = joint.sum()
    p_xy = joint / n
    p_x = p_xy.sum(axis=1, keepdims=True)
    p_y = p_xy.sum(axis=0, keepdims=True)
    mask = p_xy > 0
    terms = p_xy[mask] * np.log2(p_xy[mask] / (p_x @ p_y)[mask])
    return max(float(terms.sum()), 0.0)


def mutual_information(data: DataTable, x: str, y: str) -> float:
    """Empirical I(X;Y) in bits; symmetric, non-negative, I(X;X) = H(X)."""
    if x == y:
        counts = np.bincount(data.codes_for(x), minlength=len(data.levels(x)))
        p = counts[counts > 0] / data.n_rows
        return max(float(-(p * np.log2(p)).sum()), 0.0)
    ct = contingency(data, [x, y])
    return _mi_from_counts(ct.counts)


def conditional_mutual_information(
    data: DataTable, x: str, y: str, given: list[str] | tuple[str, ...] = ()
) -> float:
    """I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z) in bits; empty strata get weight 0."""
    given = tuple(given)
    if not given:
        return mutual_information(data, x, y)
    z_dims = tuple(len(data.levels(z)) for z in given)
    z_cols = np.stack([data.codes_for(z) for z in given], axis=0)
    z_flat = np.ravel_multi_index(z_cols, z_dims)
    x_codes, y_codes = data.codes_for(x), data.codes_for(y)
    nx, ny = len(data.levels(x)), len(data.levels(y))

    total = 0.0
    n = data.n_rows
    nonempty = 0
    for z in np.unique(z_flat):
        sel = z_flat == z
        n_z = int(sel.sum())
        if n_z == 0:
            continue
        nonempty += 1
        joint = np.bincount(x_codes[sel] * ny + y_codes[sel], minlength=nx * ny).reshape(nx, ny)
        total += (n_z / n) * _mi_from_counts(joint)
    if nonempty == 0:
        raise ConditioningTooSparseError(f"no rows in any stratum of {given}")
    return max(total, 0.0)


@dataclass
class SkeletonResult:
    """Undirected skeleton plus bookkeeping from the pruning passes."""

    edges: set[tuple[str, str]]  # pairs stored sorted
    latent_suspects: set[tuple[str, str]]
    removed: dict[tuple[str, str], tuple[str, ...]] = field(default_factory=dict)

    def has(self, a: str, b: str) -> bool:
        return tuple(sorted((a, b))) in self.edges


def miic_skeleton(
    data: DataTable,
    mi_threshold: float = DEFAULT_MI_THRESHOLD,
    max_condition_size: int = DEFAULT_MAX_CONDITION_SIZE,
    latent_margin: float = DEFAULT_LATENT_MARGIN,
    variables: list[str] | None = None,
) -> SkeletonResult:
    """Information-based skeleton pruning in three passes.

    1. Drop pairs whose pairwise MI is at or below the threshold.
    2. For growing conditioning-set sizes, drop a pair when some subset of
       its current neighborhood renders it conditionally independent.
    3. Flag surviving pairs whose MI *rises* under conditioning by more
       than ``latent_margin`` bits as latent-confounder suspects.
    """
    if mi_threshold < 0:
        raise ValueError("mi_threshold must be >= 0")
    cols = list(variables) if variables is not None else list(data.names)
    pairs = [tuple(sorted(p)) for p in combinations(cols, 2)]

    adjacency: dict[str, set[str]] = {c: set(cols) - {c} for c in cols}
    removed: dict[tuple[str, str], tuple[str, ...]] = {}
    mi_cache: dict[tuple[str, str], float] = {}

    for a, b in sorted(pairs):
        mi = mutual_information(data, a, b)
        mi_cache[(a, b)] = mi
        if mi <= mi_threshold:
            adjacency[a].discard(b)
            adjacency[b].discard(a)
            removed[(a, b)] = ()

    max_rise: dict[tuple[str, str], float] = {}
    for size in range(1, max_condition_size + 1):
        for a, b in sorted(pairs):
            if (a, b) in removed:
                continue
            neighbors = sorted((adjacency[a] | adjacency[b]) - {a, b})
            for z in combinations(neighbors, size):
                cmi = conditional_mutual_information(data, a, b, z)
                rise = cmi - mi_cache[(a, b)]
                if rise > max_rise.get((a, b), 0.0):
                    max_rise[(a, b)] = rise
                if cmi <= mi_threshold:
                    adjacency[a].discard(b)
                    adjacency[b].discard(a)
                    removed[(a, b)] = z
                    break

    surviving = {p for p in pairs if p not in removed}
    suspects = {p for p in surviving if max_rise.get(p, 0.0) > latent_margin}
    return SkeletonResult(edges=surviving, latent_suspects=suspects, removed=removed)


# --- BIC scoring -------------------------------------------------------------

@dataclass
class ScoredStructure:
    dag: Dag
    score: float  # -2 log L + k log n, lower is better
    log_likelihood: float
    k: int
    n: int


def _check_nodes(data: DataTable, nodes: tuple[str, ...]) -> None:
    for node in nodes:
        if node not in data.names:
            raise NodeNotInDataError(node)


def family_log_likelihood(
    data: DataTable, child: str, parents: list[str] | tuple[str, ...],
    smoothing: float = DEFAULT_SMOOTHING,
) -> float:
    """Multinomial log likelihood (natural log) of one node given its
    parents, with probabilities estimated by Laplace-smoothed counts."""
    r = len(data.levels(child))
    child_codes = data.codes_for(child)
    if parents:
        p_dims = tuple(len(data.levels(p)) for p in parents)
        p_cols = np.stack([data.codes_for(p) for p in parents], axis=0)
        cfg = np.ravel_multi_index(p_cols, p_dims)
        n_cfg = int(np.prod(p_dims))
    else:
        cfg = np.zeros(data.n_rows, dtype=np.int64)
        n_cfg = 1
    counts = np.bincount(cfg * r + child_codes, minlength=n_cfg * r).reshape(n_cfg, r)
    cfg_totals = counts.sum(axis=1, keepdims=True)
    probs = (counts + smoothing) / (cfg_totals + smoothing * r)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_p = np.where(counts > 0, np.log(np.where(probs > 0, probs, 1.0)), 0.0)
    return float((counts * log_p).sum())


def family_param_count(data: DataTable, child: str, parents: list[str] | tuple[str, ...]) -> int:
    r = len(data.levels(child))
    q = 1
    for p in parents:
        q *= len(data.levels(p))
    return (r - 1) * q


def bic_score(data: DataTable, dag: Dag, smoothing: float = DEFAULT_SMOOTHING) -> ScoredStructure:
    """BIC = -2 log L + k log n over the Laplace-smoothed CPT estimates;
    decomposes as a sum of per-node family terms."""
    _check_nodes(data, dag.nodes)
    log_l = 0.0
    k = 0
    for node in dag.nodes:
        parents = dag.parents(node)
        log_l += family_log_likelihood(data, node, parents, smoothing)
        k += family_param_count(data, node, parents)
    n = data.n_rows
    return ScoredStructure(dag=dag, score=-2.0 * log_l + k * math.log(n),
                           log_likelihood=log_l, k=k, n=n)


_ADD, _DELETE, _REVERSE = "add", "delete", "reverse"
_MOVE_RANK = {_ADD: 0, _DELETE: 1, _REVERSE: 2}


def hill_climb(
    data: DataTable,
    init: Dag,
    max_iters: int = 100,
    smoothing: float = DEFAULT_SMOOTHING,
) -> ScoredStructure:
    """Greedy local search over add/delete/reverse single-edge moves.

    Each iteration applies the single best score-lowering move; moves that
    would create a cycle are skipped. Near-equal deltas are broken
    lexicographically on (parent, child) with add < delete < reverse, so
    runs are reproducible. Family scores are cached per (child, parents)
    because the BIC total decomposes over families.
    """
    _check_nodes(data, init.nodes)
    nodes = init.nodes
    log_n = math.log(data.n_rows)
    cache: dict[tuple[str, tuple[str, ...]], float] = {}

    def family_score(child: str, parents: tuple[str, ...]) -> float:
        """-2 log L + k log n contribution of one family."""
        key = (child, tuple(sorted(parents)))
        if key not in cache:
            cache[key] = (
                -2.0 * family_log_likelihood(data, child, parents, smoothing)
                + family_param_count(data, child, parents) * log_n
            )
        return cache[key]

    current = init.copy()

    for _ in range(max_iters):
        candidates: list[tuple[float, str, str, int]] = []

        for parent in nodes:
            for child in nodes:
                if parent == child:
                    continue
                child_parents = tuple(current.parents(child))
                if not current.has_edge(parent, child):
                    if current.has_path(child, parent):
                        continue  # adding would close a cycle
                    delta = family_score(child, child_parents + (parent,)) - family_score(
                        child, child_parents
                    )
                    candidates.append((delta, parent, child, _MOVE_RANK[_ADD]))
                else:
                    dropped = tuple(p for p in child_parents if p != parent)
                    base = family_score(child, child_parents)
                    delete_delta = family_score(child, dropped) - base
                    candidates.append((delete_delta, parent, child, _MOVE_RANK[_DELETE]))

                    probe = current.copy()
                    probe.remove_edge(parent, child)
                    if not probe.has_path(parent, child):
                        parent_parents = tuple(current.parents(parent))
                        reverse_delta = delete_delta + family_score(
                            parent, parent_parents + (child,)
                        ) - family_score(parent, parent_parents)
                        candidates.append((reverse_delta, parent, child, _MOVE_RANK[_REVERSE]))

        improving = [c for c in candidates if c[0] < -SCORE_EPS]
        if not improving:
            break
        best_delta = min(c[0] for c in improving)
        tied = [c for c in improving if c[0] - best_delta <= SCORE_EPS]
        _, parent, child, rank = min(tied, key=lambda c: (c[1], c[2], c[3]))

        if rank == _MOVE_RANK[_ADD]:
            current.add_edge(parent, child)
        elif rank == _MOVE_RANK[_DELETE]:
            current.remove_edge(parent, child)
        else:
            current.remove_edge(parent, child)
            current.add_edge(child, parent)

    return bic_score(data, current, smoothing)
