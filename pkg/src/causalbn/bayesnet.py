"""Discrete Bayesian networks: CPT estimation with Laplace smoothing and
exact posterior inference by variable elimination."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DataTable
from .errors import (
    InconsistentEvidenceError,
    MissingFileError,
    NodeNotInDataError,
    StructureFormatError,
    UnknownLevelError,
    UnknownNodeError,
    ZeroCountNoSmoothingError,
)
from .graph import Dag, StructureFile

PROB_ATOL = 1e-9


@dataclass(eq=False)
class Cpt:
    """P(child | parents): one row per parent configuration.

    Row order is the mixed-radix index over parent levels with the first
    parent varying slowest, i.e. ``np.ravel_multi_index`` over the parent
    codes in `parents` order. Columns follow the child's level order.
    """

    child: str
    parents: tuple[str, ...]
    table: np.ndarray  # shape (n_parent_configs, n_child_levels)

    def __post_init__(self):
        self.table = np.asarray(self.table, dtype=float)
        if self.table.ndim != 2:
            raise ValueError("CPT table must be 2-D")
        if (self.table < 0).any():
            raise ValueError(f"negative probability in CPT for {self.child!r}")
        if not np.allclose(self.table.sum(axis=1), 1.0, atol=PROB_ATOL, rtol=0):
            raise ValueError(f"CPT rows for {self.child!r} do not sum to 1")

    @property
    def n_configs(self) -> int:
        return int(self.table.shape[0])

    @property
    def n_levels(self) -> int:
        return int(self.table.shape[1])


@dataclass(eq=False)
class Evidence:
    """Observed assignments, node name -> level label."""

    assignments: dict[str, str] = field(default_factory=dict)

    def __contains__(self, node: str) -> bool:
        return node in self.assignments

    def items(self):
        return self.assignments.items()

    def __len__(self) -> int:
        return len(self.assignments)

    @staticmethod
    def of(**assignments: str) -> "Evidence":
        return Evidence(dict(assignments))


@dataclass(eq=False)
class Posterior:
    node: str
    levels: tuple[str, ...]
    distribution: np.ndarray  # aligned with levels, sums to 1

    def __post_init__(self):
        self.distribution = np.asarray(self.distribution, dtype=float)
        if self.distribution.shape != (len(self.levels),):
            raise ValueError("distribution length must match level count")

    def probability(self, level: str) -> float:
        if level not in self.levels:
            raise UnknownLevelError(f"{self.node!r} has no level {level!r}")
        return float(self.distribution[self.levels.index(level)])

    def entropy_bits(self) -> float:
        p = self.distribution[self.distribution > 0]
        return max(float(-(p * np.log2(p)).sum()), 0.0)

    def as_dict(self) -> dict[str, float]:
        return {lvl: float(p) for lvl, p in zip(self.levels, self.distribution)}


@dataclass(eq=False)
class BayesNet:
    """Immutable after fitting; queries share no mutable state."""

    dag: Dag
    cpts: dict[str, Cpt]
    level_names: dict[str, tuple[str, ...]]
    name: str = "model"
    provenance: str = "manual"

    def __post_init__(self):
        for node in self.dag.nodes:
            if node not in self.cpts:
                raise ValueError(f"missing CPT for {node!r}")
            cpt = self.cpts[node]
            if list(cpt.parents) != self.dag.parents(node):
                raise ValueError(f"CPT parents for {node!r} disagree with the graph")
            expect_cols = len(self.level_names[node])
            expect_rows = 1
            for p in cpt.parents:
                expect_rows *= len(self.level_names[p])
            if cpt.table.shape != (expect_rows, expect_cols):
                raise ValueError(f"CPT for {node!r} has shape {cpt.table.shape}, "
                                 f"expected {(expect_rows, expect_cols)}")

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.dag.nodes

    def levels(self, node: str) -> tuple[str, ...]:
        if node not in self.level_names:
            raise UnknownNodeError(node)
        return self.level_names[node]

    def _check_evidence(self, evidence: Evidence) -> dict[str, int]:
        """Evidence as node -> level index, validated."""
        out = {}
        for node, label in evidence.items():
            levels = self.levels(node)
            if label not in levels:
                raise UnknownLevelError(f"{node!r} has no level {label!r}")
            out[node] = levels.index(label)
        return out

    def to_json_dict(self) -> dict:
        structure = StructureFile.from_dag(self.dag, self.name, self.provenance)
        return {
            "structure": structure.to_json_dict(),
            "level_names": {n: list(self.level_names[n]) for n in self.nodes},
            "cpts": {
                n: {
                    "parents": list(self.cpts[n].parents),
                    "table": self.cpts[n].table.tolist(),
                }
                for n in self.nodes
            },
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @staticmethod
    def from_json_dict(doc: dict) -> "BayesNet":
        try:
            structure = StructureFile.from_json_dict(doc["structure"])
            level_names = {n: tuple(ls) for n, ls in doc["level_names"].items()}
            cpts = {
                n: Cpt(child=n, parents=tuple(c["parents"]), table=np.array(c["table"]))
                for n, c in doc["cpts"].items()
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureFormatError(f"malformed model document: {exc}") from exc
        return BayesNet(dag=structure.to_dag(), cpts=cpts, level_names=level_names,
                        name=structure.name, provenance=structure.provenance)

    @staticmethod
    def load(path: str | Path) -> "BayesNet":
        p = Path(path)
        if not p.exists():
            raise MissingFileError(str(p))
        return BayesNet.from_json_dict(json.loads(p.read_text()))


def fit_cpts(
    data: DataTable,
    dag: Dag,
    smoothing: float = 1.0,
    name: str = "model",
    provenance: str = "manual",
) -> BayesNet:
    """Estimate every CPT from counts.

    P(x | pa) = (N(x, pa) + s) / (N(pa) + s * levels(x)); with s > 0 an
    unobserved parent configuration yields a uniform row, with s = 0 it is
    0/0 and raises instead.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be >= 0")
    for node in dag.nodes:
        if node not in data.names:
            raise NodeNotInDataError(node)

    cpts: dict[str, Cpt] = {}
    for node in dag.nodes:
        parents = tuple(dag.parents(node))
        r = len(data.levels(node))
        if parents:
            dims = tuple(len(data.levels(p)) for p in parents)
            cols = np.stack([data.codes_for(p) for p in parents], axis=0)
            cfg = np.ravel_multi_index(cols, dims)
            n_cfg = int(np.prod(dims))
        else:
            cfg = np.zeros(data.n_rows, dtype=np.int64)
            n_cfg = 1
        counts = np.bincount(cfg * r + data.codes_for(node), minlength=n_cfg * r)
        counts = counts.reshape(n_cfg, r).astype(float)
        totals = counts.sum(axis=1, keepdims=True)
        if smoothing == 0 and (totals == 0).any():
            raise ZeroCountNoSmoothingError(
                f"unobserved parent configuration for {node!r} with smoothing 0"
            )
        table = (counts + smoothing) / (totals + smoothing * r)
        cpts[node] = Cpt(child=node, parents=parents, table=table)

    level_names = {n: tuple(data.levels(n)) for n in dag.nodes}
    return BayesNet(dag=dag.copy(), cpts=cpts, level_names=level_names,
                    name=name, provenance=provenance)


# --- variable elimination ----------------------------------------------------

@dataclass(eq=False)
class _Factor:
    vars: tuple[str, ...]
    values: np.ndarray  # one axis per var, in vars order


def _cpt_factor(bn: BayesNet, node: str) -> _Factor:
    cpt = bn.cpts[node]
    axes = cpt.parents + (node,)
    dims = tuple(len(bn.levels(v)) for v in axes)
    return _Factor(vars=axes, values=cpt.table.reshape(dims))


def _restrict(f: _Factor, var: str, idx: int) -> _Factor:
    axis = f.vars.index(var)
    values = np.take(f.values, idx, axis=axis)
    return _Factor(vars=f.vars[:axis] + f.vars[axis + 1:], values=values)


def _multiply(a: _Factor, b: _Factor) -> _Factor:
    out_vars = a.vars + tuple(v for v in b.vars if v not in a.vars)

    def aligned(f: _Factor) -> np.ndarray:
        member = [v for v in out_vars if v in f.vars]
        arr = np.transpose(f.values, [f.vars.index(v) for v in member])
        shape = [arr.shape[member.index(v)] if v in f.vars else 1 for v in out_vars]
        return arr.reshape(shape)

    return _Factor(vars=out_vars, values=aligned(a) * aligned(b))


def _sum_out(f: _Factor, var: str) -> _Factor:
    axis = f.vars.index(var)
    return _Factor(vars=f.vars[:axis] + f.vars[axis + 1:],
                   values=f.values.sum(axis=axis))


def _min_degree_order(hidden: set[str], factors: list[_Factor]) -> list[str]:
    """Eliminate the variable touching the fewest distinct others first;
    ties go to the lexicographically smaller name."""
    var_sets = [set(f.vars) for f in factors]
    remaining = set(hidden)
    order = []
    while remaining:
        def degree(v: str) -> int:
            neighbors: set[str] = set()
            for s in var_sets:
                if v in s:
                    neighbors |= s
            neighbors.discard(v)
            return len(neighbors)

        pick = min(sorted(remaining), key=degree)
        order.append(pick)
        remaining.discard(pick)
        merged: set[str] = set()
        kept = []
        for s in var_sets:
            if pick in s:
                merged |= s
            else:
                kept.append(s)
        merged.discard(pick)
        if merged:
            kept.append(merged)
        var_sets = kept
    return order


def _eliminate(bn: BayesNet, targets: tuple[str, ...], evidence_idx: dict[str, int],
               order: str) -> _Factor:
    factors = [_cpt_factor(bn, node) for node in bn.nodes]
    for var, idx in evidence_idx.items():
        factors = [_restrict(f, var, idx) if var in f.vars else f for f in factors]

    hidden = set(bn.nodes) - set(targets) - set(evidence_idx)
    if order == "min_degree":
        elim = _min_degree_order(hidden, factors)
    elif order == "topological":
        elim = [n for n in bn.dag.topological_order() if n in hidden]
    else:
        raise ValueError(f"unknown elimination order {order!r}")

    for var in elim:
        touching = [f for f in factors if var in f.vars]
        rest = [f for f in factors if var not in f.vars]
        product = touching[0]
        for f in touching[1:]:
            product = _multiply(product, f)
        factors = rest + [_sum_out(product, var)]

    result = factors[0]
    for f in factors[1:]:
        result = _multiply(result, f)
    return result


def posterior(bn: BayesNet, target: str, evidence: Evidence | None = None,
              order: str = "min_degree") -> Posterior:
    """Exact P(target | evidence) by variable elimination.

    A target that is itself observed returns the indicator vector at its
    observed level; evidence with probability 0 under the network raises
    InconsistentEvidenceError rather than returning NaNs.
    """
    if target not in bn.level_names:
        raise UnknownNodeError(target)
    evidence = evidence or Evidence()
    evidence_idx = bn._check_evidence(evidence)
    levels = bn.levels(target)

    if target in evidence_idx:
        # still reject evidence that is jointly impossible
        rest = {k: v for k, v in evidence_idx.items() if k != target}
        marginal = _eliminate(bn, (target,), rest, order)
        z = float(marginal.values[evidence_idx[target]])
        if z <= 0.0:
            raise InconsistentEvidenceError(
                f"evidence has probability 0 (at {target!r})"
            )
        dist = np.zeros(len(levels))
        dist[evidence_idx[target]] = 1.0
        return Posterior(node=target, levels=levels, distribution=dist)

    factor = _eliminate(bn, (target,), evidence_idx, order)
    if factor.vars != (target,):
        raise AssertionError(f"elimination left axes {factor.vars}")
    values = factor.values
    z = float(values.sum())
    if z <= 0.0:
        raise InconsistentEvidenceError("evidence has probability 0 under the network")
    return Posterior(node=target, levels=levels, distribution=values / z)


def all_marginals(bn: BayesNet, evidence: Evidence | None = None,
                  order: str = "min_degree") -> dict[str, Posterior]:
    """Posterior for every node under the same evidence; observed nodes
    come back as indicator vectors."""
    evidence = evidence or Evidence()
    return {node: posterior(bn, node, evidence, order=order) for node in bn.nodes}


def log_joint(bn: BayesNet, assignment: dict[str, str]) -> float:
    """log P(full assignment) under the fitted network (chain rule)."""
    if set(assignment) != set(bn.nodes):
        missing = sorted(set(bn.nodes) - set(assignment))
        raise UnknownNodeError(f"assignment must cover every node; missing {missing}")
    total = 0.0
    for node in bn.nodes:
        cpt = bn.cpts[node]
        levels = bn.levels(node)
        if assignment[node] not in levels:
            raise UnknownLevelError(f"{node!r} has no level {assignment[node]!r}")
        col = levels.index(assignment[node])
        if cpt.parents:
            dims = tuple(len(bn.levels(p)) for p in cpt.parents)
            idx = [bn.levels(p).index(assignment[p]) for p in cpt.parents]
            row = int(np.ravel_multi_index(idx, dims))
        else:
            row = 0
        p = float(cpt.table[row, col])
        if p <= 0.0:
            return -math.inf
        total += math.log(p)
    return total
