"""Spanning trees, planar maximally filtered graphs and threshold networks."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np
import planarity

from ._kernels import prim_mst
from .correlation import CorrelationMatrix, to_distance

__all__ = [
    "EdgeNetwork",
    "DisjointSet",
    "mst",
    "mst_kruskal",
    "pmfg",
    "threshold_network",
    "is_planar",
]


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True)
class EdgeNetwork:
    """Undirected simple graph on nodes ``0..n_nodes-1``.

    ``edges`` are stored as sorted ``(i, j)`` pairs with ``i < j``, in
    ascending order; ``weights`` (optional) is aligned with ``edges``.
    """

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        pairs = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < self.n_nodes and 0 <= b < self.n_nodes):
                raise ValueError(f"edge ({a}, {b}) outside 0..{self.n_nodes - 1}")
            pairs.append((min(a, b), max(a, b)))
        weights = self.weights
        if weights is not None:
            if len(weights) != len(pairs):
                raise ValueError("weights must align with edges")
            order = sorted(range(len(pairs)), key=pairs.__getitem__)
            pairs = [pairs[k] for k in order]
            weights = tuple(float(weights[k]) for k in order)
        else:
            pairs.sort()
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate edge")
        object.__setattr__(self, "edges", tuple(pairs))
        object.__setattr__(self, "weights", weights)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    @cached_property
    def adjacency(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n_nodes)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_nodes, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def non_isolated_nodes(self) -> list[int]:
        return [int(v) for v in np.flatnonzero(self.degrees())]

    def n_components(self) -> int:
        ds = DisjointSet(self.n_nodes)
        merged = sum(ds.union(a, b) for a, b in self.edges)
        return self.n_nodes - merged

    def is_connected(self) -> bool:
        return self.n_components() == 1

    def is_tree(self) -> bool:
        return self.n_edges == self.n_nodes - 1 and self.is_connected()

    def is_planar(self) -> bool:
        return is_planar(self.edges)

    def to_networkx(self, labels=None) -> nx.Graph:
        g = nx.Graph()
        names = list(range(self.n_nodes)) if labels is None else list(labels)
        g.add_nodes_from(names)
        for k, (a, b) in enumerate(self.edges):
            if self.weights is None:
                g.add_edge(names[a], names[b])
            else:
                g.add_edge(names[a], names[b], weight=self.weights[k])
        return g

    def summary(self) -> dict:
        return {
            "nodes": self.n_nodes,
            "non_isolated_nodes": len(self.non_isolated_nodes()),
            "edges": self.n_edges,
            "is_tree": self.is_tree(),
            "is_planar": self.is_planar(),
        }


def is_planar(edges) -> bool:
    """Boyer-Myrvold planarity test (C implementation)."""
    edges = list(edges)
    if len(edges) < 9:
        return True
    return bool(planarity.is_planar(edges))


def _check_distance(distance) -> np.ndarray:
    D = np.ascontiguousarray(distance, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"distance matrix must be square, got {D.shape}")
    if D.shape[0] < 2:
        raise ValueError("need at least 2 nodes")
    if not np.all(np.isfinite(D)):
        raise ValueError("distance matrix has non-finite entries")
    return D


def _tree_weights(D, pairs):
    return tuple(float(D[a, b]) for a, b in pairs)


def mst(distance) -> EdgeNetwork:
    """Minimum spanning tree; ties broken by ascending ``(d, i, j)``.

    Weights on the returned edges are distances.
    """
    D = _check_distance(distance)
    pairs = [tuple(p) for p in prim_mst(D).tolist()]
    return EdgeNetwork(D.shape[0], tuple(pairs), _tree_weights(D, pairs))


def mst_edges(D: np.ndarray) -> np.ndarray:
    """Unvalidated ``(n-1, 2)`` edge array; used inside the replica loop."""
    return prim_mst(D)


def _sorted_pairs(D):
    n = D.shape[0]
    iu, ju = np.triu_indices(n, 1)
    order = np.lexsort((ju, iu, D[iu, ju]))
    return iu[order], ju[order]


def mst_kruskal(distance) -> EdgeNetwork:
    """Greedy edge-sorting MST with union-find; same tie rule as :func:`mst`."""
    D = _check_distance(distance)
    n = D.shape[0]
    ds = DisjointSet(n)
    pairs = []
    for a, b in zip(*(x.tolist() for x in _sorted_pairs(D))):
        if ds.union(a, b):
            pairs.append((a, b))
            if len(pairs) == n - 1:
                break
    return EdgeNetwork(n, tuple(pairs), _tree_weights(D, pairs))


def pmfg(corr) -> EdgeNetwork:
    """Planar maximally filtered graph of a correlation matrix.

    Pairs are visited from most to least correlated (ties by ``(i, j)``); a
    pair is kept when the graph stays planar. Stops at ``3(n-2)`` edges.
    Weights are correlations.
    """
    C = corr.values if isinstance(corr, CorrelationMatrix) else np.asarray(corr, dtype=np.float64)
    n = C.shape[0]
    if n < 3:
        raise ValueError(f"PMFG needs at least 3 nodes, got {n}")
    D = to_distance(C)
    target = 3 * (n - 2)
    ds = DisjointSet(n)
    kept: list[tuple[int, int]] = []
    for a, b in zip(*(x.tolist() for x in _sorted_pairs(D))):
        # joining two components can never break planarity
        if ds.union(a, b) or is_planar(kept + [(a, b)]):
            kept.append((a, b))
            if len(kept) == target:
                break
    return EdgeNetwork(n, tuple(kept), tuple(float(C[a, b]) for a, b in kept))


def threshold_network(tally, threshold: int, inclusive: bool = False) -> EdgeNetwork:
    """Links whose bootstrap value is higher than ``threshold``.

    With ``inclusive=True`` the comparison is ``>=``. Weights are counts;
    all ``n`` nodes are kept, isolated ones included.
    """
    if not 0 <= threshold <= tally.replicas:
        raise ValueError(f"threshold {threshold} outside [0, {tally.replicas}]")
    if inclusive:
        kept = [(p, c) for p, c in tally.counts.items() if c >= threshold]
    else:
        kept = [(p, c) for p, c in tally.counts.items() if c > threshold]
    return EdgeNetwork(tally.n_nodes, tuple(p for p, _ in kept), tuple(c for _, c in kept))
