"""Slow but obviously-correct reference implementations used as test oracles.

Everything here is written with plain loops over explicit enumerations so a
bug in the library's vectorized code cannot hide in a shared shortcut.
"""

import itertools
import math

import numpy as np

from causalbn.bayesnet import BayesNet, Cpt
from causalbn.graph import Dag


def enumerate_joint(bn: BayesNet):
    """Full joint as {assignment tuple: probability}, nodes in bn.nodes order."""
    nodes = list(bn.nodes)
    pos = {n: i for i, n in enumerate(nodes)}
    sizes = [len(bn.levels(n)) for n in nodes]

    families = []
    for n in nodes:
        cpt = bn.cpts[n]
        parent_pos = [pos[p] for p in cpt.parents]
        dims = [len(bn.levels(p)) for p in cpt.parents]
        strides = []
        acc = 1
        for d in reversed(dims):
            strides.append(acc)
            acc *= d
        strides.reverse()
        families.append((pos[n], cpt.table, parent_pos, strides))

    joint = {}
    for assign in itertools.product(*[range(s) for s in sizes]):
        prob = 1.0
        for node_pos, table, parent_pos, strides in families:
            cfg = 0
            for pp, stride in zip(parent_pos, strides):
                cfg += assign[pp] * stride
            prob *= float(table[cfg, assign[node_pos]])
        joint[assign] = prob
    return nodes, joint


def brute_posterior(bn: BayesNet, target: str, evidence_labels: dict[str, str],
                    joint=None, nodes=None):
    """P(target | evidence) by summing the enumerated joint."""
    if joint is None:
        nodes, joint = enumerate_joint(bn)
    pos = {n: i for i, n in enumerate(nodes)}
    fixed = {pos[n]: bn.levels(n).index(lvl) for n, lvl in evidence_labels.items()}
    t = pos[target]
    dist = np.zeros(len(bn.levels(target)))
    for assign, p in joint.items():
        if all(assign[i] == v for i, v in fixed.items()):
            dist[assign[t]] += p
    z = dist.sum()
    if z <= 0:
        raise ZeroDivisionError("evidence has probability zero")
    return dist / z


def random_network(rng: np.random.Generator, max_nodes: int = 8,
                   max_levels: int = 3, edge_prob: float = 0.4) -> BayesNet:
    """Random DAG with random strictly-positive CPTs."""
    n = int(rng.integers(2, max_nodes + 1))
    names = [f"v{i}" for i in range(n)]
    order = [int(i) for i in rng.permutation(n)]
    dag = Dag(names)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < edge_prob:
                dag.add_edge(names[order[a]], names[order[b]])

    levels = {
        name: tuple(f"l{k}" for k in range(int(rng.integers(2, max_levels + 1))))
        for name in names
    }
    cpts = {}
    for name in names:
        parents = tuple(dag.parents(name))
        rows = 1
        for p in parents:
            rows *= len(levels[p])
        raw = rng.random((rows, len(levels[name]))) + 0.05  # keep cells off zero
        cpts[name] = Cpt(child=name, parents=parents,
                         table=raw / raw.sum(axis=1, keepdims=True))
    return BayesNet(dag=dag, cpts=cpts, level_names=levels,
                    name="random", provenance="manual")


def random_evidence(rng: np.random.Generator, bn: BayesNet,
                    max_observed: int | None = None) -> dict[str, str]:
    nodes = list(bn.nodes)
    cap = len(nodes) - 1 if max_observed is None else max_observed
    k = int(rng.integers(0, cap + 1))
    chosen = rng.choice(len(nodes), size=k, replace=False)
    out = {}
    for i in chosen:
        name = nodes[int(i)]
        lvls = bn.levels(name)
        out[name] = lvls[int(rng.integers(0, len(lvls)))]
    return out


def brute_mi(data, x: str, y: str) -> float:
    """I(X;Y) in bits by looping over every level pair."""
    n = data.n_rows
    xc = data.codes_for(x)
    yc = data.codes_for(y)
    total = 0.0
    for i in range(len(data.levels(x))):
        for j in range(len(data.levels(y))):
            n_xy = int(((xc == i) & (yc == j)).sum())
            if n_xy == 0:
                continue
            p_xy = n_xy / n
            p_x = int((xc == i).sum()) / n
            p_y = int((yc == j).sum()) / n
            total += p_xy * math.log2(p_xy / (p_x * p_y))
    return total


def brute_cmi(data, x: str, y: str, given) -> float:
    """I(X;Y|Z) = sum_z p(z) I(X;Y|Z=z), strata enumerated explicitly."""
    given = tuple(given)
    if not given:
        return brute_mi(data, x, y)
    n = data.n_rows
    xc = data.codes_for(x)
    yc = data.codes_for(y)
    z_cols = [data.codes_for(z) for z in given]
    z_levels = [range(len(data.levels(z))) for z in given]

    total = 0.0
    for combo in itertools.product(*z_levels):
        sel = np.ones(n, dtype=bool)
        for col, val in zip(z_cols, combo):
            sel &= col == val
        n_z = int(sel.sum())
        if n_z == 0:
            continue
        sub_x = xc[sel]
        sub_y = yc[sel]
        inner = 0.0
        for i in range(len(data.levels(x))):
            for j in range(len(data.levels(y))):
                n_xy = int(((sub_x == i) & (sub_y == j)).sum())
                if n_xy == 0:
                    continue
                p_xy = n_xy / n_z
                p_x = int((sub_x == i).sum()) / n_z
                p_y = int((sub_y == j).sum()) / n_z
                inner += p_xy * math.log2(p_xy / (p_x * p_y))
        total += (n_z / n) * inner
    return total


def entropy_bits_from_codes(codes: np.ndarray, n_levels: int) -> float:
    n = len(codes)
    total = 0.0
    for i in range(n_levels):
        c = int((codes == i).sum())
        if c:
            p = c / n
            total -= p * math.log2(p)
    return total


def two_node_structures(a: str, b: str) -> list[Dag]:
    """The complete structure space over two nodes."""
    empty = Dag([a, b])
    forward = Dag([a, b])
    forward.add_edge(a, b)
    backward = Dag([a, b])
    backward.add_edge(b, a)
    return [empty, forward, backward]
