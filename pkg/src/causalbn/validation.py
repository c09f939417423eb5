"""Structure validation and cross-method comparison.

Three independent lenses on a candidate structure: per-edge regression
(estimate, t, p), per-node posterior entropy, and per-edge mutual
information. A comparison table lines up entropy summaries across methods.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import betainc

from .bayesnet import BayesNet, Evidence, all_marginals
from .data import DataTable
from .discovery import mutual_information
from .errors import (
    MissingFileError,
    NodeNotInDataError,
    RankDeficientError,
    TooFewRowsError,
)
from .graph import Dag

DEFAULT_ALPHA = 0.05


def student_t_two_sided_p(t_stat: float, df: int) -> float:
    """P(|T| >= |t|) for T ~ t(df), via the regularized incomplete beta
    identity p = I_{df/(df+t^2)}(df/2, 1/2)."""
    if df <= 0:
        raise ValueError("df must be positive")
    if math.isinf(t_stat):
        return 0.0
    return float(betainc(df / 2.0, 0.5, df / (df + t_stat * t_stat)))


@dataclass(frozen=True)
class PathEntry:
    child: str
    parent: str
    estimate: float
    std_error: float
    t_stat: float
    p_value: float
    significant: bool


@dataclass
class PathReport:
    """One regression row per (child, parent) edge of the validated graph."""

    entries: list[PathEntry]
    alpha: float = DEFAULT_ALPHA
    n_rows: int = 0

    def entry(self, child: str, parent: str) -> PathEntry:
        for e in self.entries:
            if e.child == child and e.parent == parent:
                return e
        raise KeyError((child, parent))

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_rows": self.n_rows,
            "entries": [
                {
                    "child": e.child,
                    "parent": e.parent,
                    "estimate": e.estimate,
                    "std_error": e.std_error,
                    "t_stat": e.t_stat,
                    "p_value": e.p_value,
                    "significant": e.significant,
                }
                for e in self.entries
            ],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "PathReport":
        entries = [PathEntry(**e) for e in doc["entries"]]
        return PathReport(entries=entries, alpha=doc["alpha"], n_rows=doc.get("n_rows", 0))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    def render_text(self) -> str:
        w_child = max([len("child")] + [len(e.child) for e in self.entries])
        w_parent = max([len("parent")] + [len(e.parent) for e in self.entries])
        header = (f"{'child':<{w_child}}  {'parent':<{w_parent}}  "
                  f"{'estimate':>9}  {'std_err':>8}  {'t':>8}  {'p_value':>8}  sig")
        lines = [header, "-" * len(header)]
        for e in self.entries:
            lines.append(
                f"{e.child:<{w_child}}  {e.parent:<{w_parent}}  "
                f"{e.estimate:>9.4f}  {e.std_error:>8.4f}  {e.t_stat:>8.3f}  "
                f"{e.p_value:>8.4f}  {'*' if e.significant else ''}"
            )
        return "\n".join(lines) + "\n"


def _ols(x: np.ndarray, y: np.ndarray, child: str) -> tuple[np.ndarray, np.ndarray, int]:
    """Coefficients, standard errors, and residual df for y ~ x."""
    n, k = x.shape
    if n <= k:
        raise TooFewRowsError(f"{n} rows cannot fit {k} coefficients for {child!r}")
    if np.linalg.matrix_rank(x) < k:
        raise RankDeficientError(child)
    xtx = x.T @ x
    beta = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ beta
    df = n - k
    sigma2 = float(resid @ resid) / df
    cov = sigma2 * np.linalg.inv(xtx)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return beta, se, df


def sem_validate(data: DataTable, dag: Dag, alpha: float = DEFAULT_ALPHA) -> PathReport:
    """Regress each child on all of its parents (ordinal 0..k-1 encoding
    plus intercept) and report every parent's coefficient with a two-sided
    t-test at the given alpha. Childless-of-parents nodes contribute no
    rows."""
    for node in dag.nodes:
        if node not in data.names:
            raise NodeNotInDataError(node)
    entries: list[PathEntry] = []
    for child in dag.nodes:
        parents = dag.parents(child)
        if not parents:
            continue
        y = data.codes_for(child).astype(float)
        x = np.column_stack(
            [np.ones(data.n_rows)] + [data.codes_for(p).astype(float) for p in parents]
        )
        beta, se, df = _ols(x, y, child)
        for j, parent in enumerate(parents, start=1):
            if se[j] > 0:
                t = float(beta[j] / se[j])
            else:
                t = math.inf if beta[j] != 0 else 0.0
            p = student_t_two_sided_p(t, df)
            entries.append(PathEntry(
                child=child, parent=parent,
                estimate=float(beta[j]), std_error=float(se[j]),
                t_stat=t, p_value=p, significant=bool(p < alpha),
            ))
    return PathReport(entries=entries, alpha=alpha, n_rows=data.n_rows)


# --- entropy ------------------------------------------------------------------

SUMMARY_STATS = ("mean", "min", "q25", "median", "q75", "max")


def _summary(values: list[float]) -> dict[str, float]:
    arr = np.array(values, dtype=float)
    q25, median, q75 = np.percentile(arr, [25.0, 50.0, 75.0])  # linear interpolation
    return {
        "mean": float(arr.mean()),
        "min": float(arr.min()),
        "q25": float(q25),
        "median": float(median),
        "q75": float(q75),
        "max": float(arr.max()),
    }


@dataclass
class EntropyReport:
    per_node: dict[str, float]  # bits
    summary: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.summary:
            self.summary = _summary(list(self.per_node.values()))

    def to_json_dict(self) -> dict:
        return {"per_node": dict(self.per_node), "summary": dict(self.summary)}

    @staticmethod
    def from_json_dict(doc: dict) -> "EntropyReport":
        return EntropyReport(per_node=dict(doc["per_node"]),
                             summary=dict(doc["summary"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @staticmethod
    def load(path: str | Path) -> "EntropyReport":
        p = Path(path)
        if not p.exists():
            raise MissingFileError(str(p))
        return EntropyReport.from_json_dict(json.loads(p.read_text()))

    def render_text(self) -> str:
        w = max([len("node")] + [len(n) for n in self.per_node])
        lines = [f"{'node':<{w}}  {'H_bits':>8}", "-" * (w + 10)]
        for node, h in self.per_node.items():
            lines.append(f"{node:<{w}}  {h:>8.4f}")
        lines.append("-" * (w + 10))
        for stat in SUMMARY_STATS:
            lines.append(f"{stat:<{w}}  {self.summary[stat]:>8.4f}")
        return "\n".join(lines) + "\n"


def node_entropies(bn: BayesNet, evidence: Evidence | None = None) -> EntropyReport:
    """Shannon entropy (bits) of each node's posterior marginal; with no
    evidence these are the prior marginals. Observed nodes have entropy 0."""
    marginals = all_marginals(bn, evidence)
    per_node = {node: marginals[node].entropy_bits() for node in bn.nodes}
    return EntropyReport(per_node=per_node)


def raw_frequency_entropies(data: DataTable, nodes: list[str] | None = None) -> EntropyReport:
    """Entropy of the unsmoothed empirical marginal of each column; the
    alternative to smoothed-CPT marginals when fidelity to the observed
    frequencies matters more than regularization."""
    names = list(nodes) if nodes is not None else list(data.names)
    per_node = {}
    for name in names:
        counts = np.bincount(data.codes_for(name), minlength=len(data.levels(name)))
        p = counts[counts > 0] / data.n_rows
        per_node[name] = max(float(-(p * np.log2(p)).sum()), 0.0)
    return EntropyReport(per_node=per_node)


def arc_mutual_information(data: DataTable, dag: Dag) -> dict[tuple[str, str], float]:
    """Pairwise empirical MI (bits) per edge, usable as DOT edge weights."""
    return {(p, c): mutual_information(data, p, c) for p, c in dag.edges()}


# --- method comparison --------------------------------------------------------

ARGMIN_TOL = 1e-12


@dataclass
class MethodComparison:
    """Entropy summaries side by side, with per-statistic argmin labels
    (ties keep every tied label)."""

    labels: list[str]
    values: dict[str, dict[str, float]]  # stat -> label -> value
    argmin: dict[str, list[str]]

    def to_json_dict(self) -> dict:
        return {"labels": list(self.labels), "values": self.values, "argmin": self.argmin}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    def render_text(self) -> str:
        w_stat = max(len("statistic"), max(len(s) for s in SUMMARY_STATS))
        w_col = max([10] + [len(lbl) + 2 for lbl in self.labels])
        header = f"{'statistic':<{w_stat}}" + "".join(f"  {lbl:>{w_col}}" for lbl in self.labels)
        lines = [header, "-" * len(header)]
        for stat in SUMMARY_STATS:
            cells = []
            for lbl in self.labels:
                mark = "*" if lbl in self.argmin[stat] else " "
                cells.append(f"  {self.values[stat][lbl]:>{w_col - 1}.4f}{mark}")
            lines.append(f"{stat:<{w_stat}}" + "".join(cells))
        lines.append("(* = lowest value in row; ties all marked)")
        return "\n".join(lines) + "\n"


def compare_methods(reports: list[tuple[str, EntropyReport]]) -> MethodComparison:
    """Line up the six summary statistics across labeled reports and mark
    the per-statistic minimum; column order follows the input order."""
    if len(reports) < 2:
        raise ValueError("compare_methods needs at least two reports")
    labels = [label for label, _ in reports]
    if len(set(labels)) != len(labels):
        raise ValueError("report labels must be unique")
    values: dict[str, dict[str, float]] = {}
    argmin: dict[str, list[str]] = {}
    for stat in SUMMARY_STATS:
        row = {label: report.summary[stat] for label, report in reports}
        best = min(row.values())
        values[stat] = row
        argmin[stat] = [lbl for lbl in labels if row[lbl] - best <= ARGMIN_TOL]
    return MethodComparison(labels=labels, values=values, argmin=argmin)
