"""Directed acyclic graph core: structure, mutation with acyclicity
enforcement, JSON serialization, and DOT export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CycleError,
    MissingFileError,
    MissingWeightError,
    SelfLoopError,
    StructureFormatError,
    UnknownNodeError,
)

PROVENANCES = ("expert", "bic", "miic", "llm", "manual")


class Dag:
    """Directed acyclic graph over variable names.

    Node order is declaration order and edge order is insertion order;
    every derived ordering (parents, topological sort) is deterministic so
    downstream numbers are reproducible. Edge insertion runs a DFS from
    child to parent and rejects anything that would close a cycle.
    """

    def __init__(self, nodes: list[str] | tuple[str, ...] = ()):
        self._nodes: list[str] = []
        self._parents: dict[str, list[str]] = {}
        self._children: dict[str, list[str]] = {}
        self._edges: list[tuple[str, str]] = []
        for n in nodes:
            self.add_node(n)

    def add_node(self, name: str) -> None:
        if not name:
            raise ValueError("node name must be non-empty")
        if name in self._parents:
            return
        self._nodes.append(name)
        self._parents[name] = []
        self._children[name] = []

    @property
    def nodes(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    def edges(self) -> list[tuple[str, str]]:
        return list(self._edges)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def has_node(self, name: str) -> bool:
        return name in self._parents

    def has_edge(self, parent: str, child: str) -> bool:
        return self.has_node(parent) and child in self._children[parent]

    def _require(self, name: str) -> None:
        if name not in self._parents:
            raise UnknownNodeError(name)

    def _directed_path(self, src: str, dst: str) -> list[str] | None:
        """Nodes along a directed path src -> ... -> dst, if one exists."""
        stack = [(src, [src])]
        seen = {src}
        while stack:
            node, path = stack.pop()
            if node == dst:
                return path
            for ch in self._children[node]:
                if ch not in seen:
                    seen.add(ch)
                    stack.append((ch, path + [ch]))
        return None

    def has_path(self, src: str, dst: str) -> bool:
        """True when a directed path src -> ... -> dst exists (src == dst counts)."""
        self._require(src)
        self._require(dst)
        return self._directed_path(src, dst) is not None

    def add_edge(self, parent: str, child: str) -> None:
        self._require(parent)
        self._require(child)
        if parent == child:
            raise SelfLoopError(parent)
        if child in self._children[parent]:
            return
        path = self._directed_path(child, parent)
        if path is not None:
            raise CycleError(path)
        self._children[parent].append(child)
        self._parents[child].append(parent)
        self._edges.append((parent, child))

    def remove_edge(self, parent: str, child: str) -> None:
        self._require(parent)
        self._require(child)
        if child not in self._children[parent]:
            raise UnknownNodeError(f"no edge {parent} -> {child}")
        self._children[parent].remove(child)
        self._parents[child].remove(parent)
        self._edges.remove((parent, child))

    def parents(self, node: str) -> list[str]:
        self._require(node)
        return list(self._parents[node])

    def children(self, node: str) -> list[str]:
        self._require(node)
        return list(self._children[node])

    def topological_order(self) -> list[str]:
        """Kahn's algorithm; ties broken by node declaration order, so an
        edgeless graph comes back in declaration order."""
        indeg = {n: len(self._parents[n]) for n in self._nodes}
        order = []
        ready = [n for n in self._nodes if indeg[n] == 0]
        while ready:
            node = ready.pop(0)
            order.append(node)
            for ch in self._children[node]:
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    # keep declaration order among newly ready nodes
                    ready.append(ch)
            ready.sort(key=self._nodes.index)
        if len(order) != len(self._nodes):
            raise AssertionError("cycle in Dag; invariant violated")
        return order

    def copy(self) -> "Dag":
        g = Dag(self._nodes)
        for node in self._nodes:
            g._children[node] = list(self._children[node])
            g._parents[node] = list(self._parents[node])
        g._edges = list(self._edges)
        return g

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return self.nodes == other.nodes and set(self.edges()) == set(other.edges())

    def __repr__(self) -> str:
        return f"Dag(nodes={len(self._nodes)}, edges={self.n_edges})"


@dataclass
class StructureFile:
    """On-disk carrier for a Dag: {name, provenance, nodes, edges}."""

    name: str
    provenance: str
    nodes: list[str]
    edges: list[tuple[str, str]]

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise StructureFormatError(f"unknown provenance {self.provenance!r}")

    def to_dag(self) -> Dag:
        dag = Dag(self.nodes)
        for p, c in self.edges:
            dag.add_edge(p, c)
        return dag

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "provenance": self.provenance,
            "nodes": list(self.nodes),
            "edges": [{"parent": p, "child": c} for p, c in self.edges],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "StructureFile":
        try:
            sf = StructureFile(
                name=doc["name"],
                provenance=doc["provenance"],
                nodes=list(doc["nodes"]),
                edges=[(e["parent"], e["child"]) for e in doc["edges"]],
            )
        except (KeyError, TypeError) as exc:
            raise StructureFormatError(f"malformed structure document: {exc}") from exc
        sf.to_dag()  # fail loudly on cycles / unknown endpoints
        return sf

    @staticmethod
    def from_dag(dag: Dag, name: str, provenance: str) -> "StructureFile":
        return StructureFile(name=name, provenance=provenance,
                             nodes=list(dag.nodes), edges=dag.edges())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @staticmethod
    def load(path: str | Path) -> "StructureFile":
        p = Path(path)
        if not p.exists():
            raise MissingFileError(str(p))
        return StructureFile.from_json_dict(json.loads(p.read_text()))


# --- DOT export -------------------------------------------------------------

PENWIDTH_MIN = 0.5
PENWIDTH_MAX = 4.0


def _dot_id(name: str) -> str:
    if name.replace("_", "").isalnum() and not name[0].isdigit():
        return name
    return '"' + name.replace('"', '\\"') + '"'


def to_dot(
    dag: Dag,
    node_weights: dict[str, float] | None = None,
    edge_weights: dict[tuple[str, str], float] | None = None,
    graph_name: str = "causal",
) -> str:
    """Render the graph as Graphviz DOT.

    Edge weights map linearly to penwidth over [0.5, 4.0]: a weight of 0
    gets the 0.5 floor and the top of the scale is max(1.0, largest
    weight), so weights already in [0, 1] span the full range. Node
    weights darken the fill on the same normalized scale.
    """
    if node_weights is not None:
        missing = [n for n in dag.nodes if n not in node_weights]
        if missing:
            raise MissingWeightError(f"node weights missing for {missing}")
    if edge_weights is not None:
        missing_e = [e for e in dag.edges() if e not in edge_weights]
        if missing_e:
            raise MissingWeightError(f"edge weights missing for {missing_e}")

    lines = [f"digraph {graph_name} {{"]
    if node_weights is not None:
        scale = max(1.0, max(node_weights.values(), default=1.0))
        lines.append("  node [style=filled];")
        for n in dag.nodes:
            t = max(0.0, node_weights[n]) / scale
            gray = 95 - int(round(55 * t))  # heavier weight -> darker fill
            lines.append(f'  {_dot_id(n)} [fillcolor="gray{gray}", label="{n}\\n{node_weights[n]:.3f}"];')
    else:
        for n in dag.nodes:
            lines.append(f"  {_dot_id(n)};")

    e_scale = 1.0
    if edge_weights is not None:
        e_scale = max(1.0, max(edge_weights.values(), default=1.0))
    for p, c in dag.edges():
        if edge_weights is None:
            lines.append(f"  {_dot_id(p)} -> {_dot_id(c)};")
        else:
            w = max(0.0, edge_weights[(p, c)])
            pen = PENWIDTH_MIN + (PENWIDTH_MAX - PENWIDTH_MIN) * (w / e_scale)
            lines.append(
                f'  {_dot_id(p)} -> {_dot_id(c)} [penwidth={pen:.3f}, label="{w:.3f}"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
