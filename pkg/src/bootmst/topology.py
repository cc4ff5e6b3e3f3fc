"""Components, cliques, overlaps and row-vs-pair comparisons of threshold networks."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .bootstrap import BootstrapTally
from .data import SectorMap
from .filtering import DisjointSet, EdgeNetwork, threshold_network

__all__ = [
    "Components",
    "CliqueReport",
    "ScatterPoint",
    "ScatterResult",
    "components",
    "count_cliques",
    "clique_pmfg_inclusion",
    "mst_overlap_curve",
    "threshold_scan",
    "histogram",
    "scatter",
]


@dataclass(frozen=True)
class Components:
    """Connected components over the non-isolated nodes."""

    blocks: tuple[tuple[int, ...], ...]
    isolated: tuple[int, ...]

    def labels(self) -> dict[int, int]:
        return {v: k for k, block in enumerate(self.blocks) for v in block}


def components(net: EdgeNetwork) -> Components:
    ds = DisjointSet(net.n_nodes)
    for a, b in net.edges:
        ds.union(a, b)
    deg = net.degrees()
    groups: dict[int, list[int]] = {}
    for v in range(net.n_nodes):
        if deg[v]:
            groups.setdefault(ds.find(v), []).append(v)
    blocks = sorted(tuple(g) for g in groups.values())
    isolated = tuple(v for v in range(net.n_nodes) if not deg[v])
    return Components(tuple(blocks), isolated)


def count_cliques(net: EdgeNetwork, size: int = 3) -> list[tuple[int, ...]]:
    """All ``size``-cliques (3 or 4) as sorted tuples, in lexicographic order."""
    if size not in (3, 4):
        raise ValueError("clique size must be 3 or 4")
    adj = net.adjacency
    found = []
    for a, b in net.edges:
        # extend only with larger vertices so each clique is produced once
        common = sorted(w for w in adj[a] & adj[b] if w > b)
        if size == 3:
            found.extend((a, b, w) for w in common)
        else:
            for k, w in enumerate(common):
                found.extend((a, b, w, x) for x in common[k + 1:] if x in adj[w])
    found.sort()
    return found


@dataclass(frozen=True)
class CliqueReport:
    threshold: int
    clique_size: int
    total: int
    in_pmfg: int

    @property
    def percent_in_pmfg(self) -> float | None:
        return None if self.total == 0 else 100.0 * self.in_pmfg / self.total

    def percent_str(self) -> str:
        p = self.percent_in_pmfg
        return "--" if p is None else f"{p:.1f}"


def clique_pmfg_inclusion(
    tally: BootstrapTally,
    pmfg: EdgeNetwork,
    thresholds: Iterable[int],
    size: int = 3,
    inclusive: bool = False,
) -> list[CliqueReport]:
    """Cliques of each threshold network and how many lie wholly in ``pmfg``."""
    pmfg_edges = pmfg.edge_set
    reports = []
    for t in thresholds:
        cliques = count_cliques(threshold_network(tally, t, inclusive), size)
        inside = sum(
            all((c[x], c[y]) in pmfg_edges for x in range(size) for y in range(x + 1, size))
            for c in cliques
        )
        reports.append(CliqueReport(t, size, len(cliques), inside))
    return reports


def mst_overlap_curve(
    tally: BootstrapTally,
    original_mst: EdgeNetwork,
    thresholds: Iterable[int],
    inclusive: bool = False,
) -> list[tuple[int, int]]:
    """Links shared by each threshold network and the original MST."""
    mst_edges = original_mst.edge_set
    return [
        (t, len(threshold_network(tally, t, inclusive).edge_set & mst_edges))
        for t in thresholds
    ]


def threshold_scan(tally: BootstrapTally, thresholds: Iterable[int], inclusive: bool = False):
    """``(threshold, non_isolated_nodes, edges)`` per threshold."""
    rows = []
    for t in thresholds:
        net = threshold_network(tally, t, inclusive)
        rows.append((t, len(net.non_isolated_nodes()), net.n_edges))
    return rows


def histogram(tally: BootstrapTally) -> list[tuple[int, int]]:
    """``(bootstrap value, number of links)`` for every observed value, ascending."""
    return sorted(Counter(tally.counts.values()).items())


@dataclass(frozen=True)
class ScatterPoint:
    pair: tuple[int, int]
    row_value: int
    pair_value: int
    same_sector: bool | None


@dataclass(frozen=True)
class ScatterResult:
    points: tuple[ScatterPoint, ...]

    @property
    def both_positive(self) -> int:
        return sum(1 for p in self.points if p.row_value > 0 and p.pair_value > 0)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def scatter(
    row_tally: BootstrapTally,
    pair_tally: BootstrapTally,
    sectors: SectorMap | None = None,
    elements: Sequence[str] | None = None,
) -> ScatterResult:
    """Row and pair bootstrap values of every link seen by either method.

    ``same_sector`` is filled from ``sectors`` (which needs ``elements`` to map
    node indices to identifiers); otherwise it is ``None``.
    """
    if row_tally.n_nodes != pair_tally.n_nodes or row_tally.replicas != pair_tally.replicas:
        raise ValueError("tallies differ in node count or replica count")
    labels = None
    if sectors is not None:
        if elements is None or len(elements) != row_tally.n_nodes:
            raise ValueError("elements must list one identifier per node")
        labels = sectors.labels(elements, "sector")
    points = []
    for a, b in sorted(set(row_tally.counts) | set(pair_tally.counts)):
        same = None if labels is None else labels[a] == labels[b]
        points.append(ScatterPoint((a, b), row_tally.value(a, b), pair_tally.value(a, b), same))
    return ScatterResult(tuple(points))
