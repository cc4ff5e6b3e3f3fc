"""Partition agreement (ARI, adjusted Wallace) and the sector-association test."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .bootstrap import BootstrapTally
from .data import SectorMap
from .filtering import threshold_network
from .topology import ScatterPoint, components

__all__ = [
    "Partition",
    "ContingencySummary",
    "contingency",
    "ari",
    "awi",
    "MetricPoint",
    "metric_curves",
    "matched_points",
    "fisher_exact_two_sided",
    "AssociationReport",
    "sector_association_test",
]


@dataclass(frozen=True)
class Partition:
    """Assignment of each member of a universe to one block label."""

    labels: Mapping[Hashable, Hashable]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("partition needs at least one member")
        object.__setattr__(self, "labels", dict(self.labels))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[Hashable]]) -> "Partition":
        labels = {}
        for k, block in enumerate(blocks):
            for m in block:
                if m in labels:
                    raise ValueError(f"member {m!r} in more than one block")
                labels[m] = k
        return cls(labels)

    @classmethod
    def from_labels(cls, members: Sequence[Hashable], labels: Sequence[Hashable]) -> "Partition":
        if len(members) != len(labels):
            raise ValueError("members and labels differ in length")
        return cls(dict(zip(members, labels)))

    @property
    def universe(self) -> frozenset:
        return frozenset(self.labels)

    @property
    def n_blocks(self) -> int:
        return len(set(self.labels.values()))

    def restrict(self, members: Iterable[Hashable]) -> "Partition":
        return Partition({m: self.labels[m] for m in members})


@dataclass(frozen=True)
class ContingencySummary:
    table: np.ndarray  # test blocks x reference blocks
    row_sums: np.ndarray
    col_sums: np.ndarray
    total: int


def contingency(test: Partition, reference: Partition) -> ContingencySummary:
    if test.universe != reference.universe:
        raise ValueError("partitions cover different universes")
    members = sorted(test.universe, key=repr)
    t_codes = {lab: k for k, lab in enumerate(dict.fromkeys(test.labels[m] for m in members))}
    r_codes = {lab: k for k, lab in enumerate(dict.fromkeys(reference.labels[m] for m in members))}
    table = np.zeros((len(t_codes), len(r_codes)), dtype=np.int64)
    for m in members:
        table[t_codes[test.labels[m]], r_codes[reference.labels[m]]] += 1
    return ContingencySummary(table, table.sum(axis=1), table.sum(axis=0), len(members))


def _pairs(counts) -> int:
    return sum(comb(int(c), 2) for c in np.ravel(counts))


def ari(test: Partition, reference: Partition) -> float:
    """Hubert-Arabie adjusted Rand index, evaluated in exact rationals."""
    cs = contingency(test, reference)
    if cs.total < 2:
        raise ValueError("ARI needs at least 2 members")
    index = _pairs(cs.table)
    a, b = _pairs(cs.row_sums), _pairs(cs.col_sums)
    expected = Fraction(a * b, comb(cs.total, 2))
    max_index = Fraction(a + b, 2)
    if max_index == expected:
        # only when both partitions are all-singletons or both one block
        return 1.0
    return float((index - expected) / (max_index - expected))


def awi(test: Partition, reference: Partition) -> float | None:
    """Adjusted Wallace index of ``test`` against ``reference``.

    ``W`` is the share of pairs co-blocked in ``test`` that are also
    co-blocked in ``reference``; it is rescaled so that chance level
    ``p = sum_j C(b_j, 2) / C(N, 2)`` maps to 0 and perfect precision to 1.
    Returns ``None`` when ``test`` has no co-blocked pair or ``reference``
    is a single block.
    """
    cs = contingency(test, reference)
    if cs.total < 2:
        raise ValueError("AWI needs at least 2 members")
    test_pairs = _pairs(cs.row_sums)
    if test_pairs == 0:
        return None
    p = Fraction(_pairs(cs.col_sums), comb(cs.total, 2))
    if p == 1:
        return None
    w = Fraction(_pairs(cs.table), test_pairs)
    return float((w - p) / (1 - p))


@dataclass(frozen=True)
class MetricPoint:
    threshold: int
    nodes: int
    ari: float | None
    awi: float | None
    degenerate: bool


def metric_curves(
    tally: BootstrapTally,
    sectors: SectorMap,
    elements: Sequence[str],
    level: str = "sector",
    thresholds: Iterable[int] = (),
    inclusive: bool = False,
) -> list[MetricPoint]:
    """ARI and AWI between threshold-network components and expert labels.

    Only non-isolated nodes take part. A point is flagged ``degenerate``
    when either partition is a single block or all singletons.
    """
    if len(elements) != tally.n_nodes:
        raise ValueError("elements must list one identifier per node")
    expert = Partition.from_labels(range(tally.n_nodes), sectors.labels(elements, level))
    out = []
    for t in thresholds:
        if not 0 <= t <= tally.replicas:
            raise ValueError(f"threshold {t} outside [0, {tally.replicas}]")
        comps = components(threshold_network(tally, t, inclusive))
        members = [v for block in comps.blocks for v in block]
        if len(members) < 2:
            out.append(MetricPoint(t, len(members), None, None, True))
            continue
        test = Partition.from_blocks(comps.blocks)
        ref = expert.restrict(members)
        degenerate = any(p.n_blocks in (1, len(members)) for p in (test, ref))
        out.append(MetricPoint(t, len(members), ari(test, ref), awi(test, ref), degenerate))
    return out


def matched_points(
    curve: Sequence[MetricPoint], other: Sequence[MetricPoint], metric: str = "ari"
) -> list[tuple[int, float, float]]:
    """Compare two curves at equal non-isolated node counts.

    ``other`` is linearly interpolated in node count at each point of
    ``curve`` lying inside its node range. Returns ``(nodes, value,
    other_value)`` triples.
    """
    def usable(points):
        by_nodes: dict[int, list[float]] = {}
        for p in points:
            v = getattr(p, metric)
            if v is not None and not p.degenerate:
                by_nodes.setdefault(p.nodes, []).append(v)
        return {k: float(np.mean(v)) for k, v in sorted(by_nodes.items())}

    ref = usable(other)
    if len(ref) < 2:
        return []
    xs = np.array(list(ref), dtype=float)
    ys = np.array(list(ref.values()))
    out = []
    for nodes, value in usable(curve).items():
        if xs[0] <= nodes <= xs[-1]:
            out.append((nodes, value, float(np.interp(nodes, xs, ys))))
    return out


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def fisher_exact_two_sided(table) -> float:
    """Two-sided Fisher exact p-value of a 2x2 table.

    Sums the hypergeometric probabilities of all tables with the observed
    margins that are no more likely than the observed one (relative slack
    1e-7 absorbs rounding between equally likely tables).
    """
    (a, b), (c, d) = ((int(x) for x in row) for row in table)
    if min(a, b, c, d) < 0:
        raise ValueError("table entries must be non-negative")
    r1, c1, n = a + b, a + c, a + b + c + d
    lo, hi = max(0, c1 - (n - r1)), min(r1, c1)
    k = np.arange(lo, hi + 1)
    logp = _log_comb(c1, k) + _log_comb(n - c1, r1 - k)
    p = np.exp(logp - logp.max())
    observed = p[a - lo]
    return float(min(1.0, p[p <= observed * (1 + 1e-7)].sum() / p.sum()))


@dataclass(frozen=True)
class AssociationReport:
    """2x2 table: rows (row > pair, pair > row), columns (same, different sector)."""

    table: tuple[tuple[int, int], tuple[int, int]]
    p_value: float | None
    odds_ratio: float | None
    direction: str
    alpha: float
    reject: bool
    defined: bool

    @property
    def row_dominant_cross_sector(self) -> bool:
        return self.direction == "row_dominant_cross_sector"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def sector_association_test(points: Iterable[ScatterPoint], alpha: float = 0.01) -> AssociationReport:
    """Fisher exact test of link dominance (row vs pair) against sector sharing.

    Links with equal row and pair values are left out.
    """
    t = [[0, 0], [0, 0]]
    for p in points:
        if p.same_sector is None:
            raise ValueError("scatter points carry no sector information")
        if p.row_value == p.pair_value:
            continue
        t[0 if p.row_value > p.pair_value else 1][0 if p.same_sector else 1] += 1
    table = (tuple(t[0]), tuple(t[1]))
    margins = [sum(t[0]), sum(t[1]), t[0][0] + t[1][0], t[0][1] + t[1][1]]
    if min(margins) == 0:
        return AssociationReport(table, None, None, "undefined", alpha, False, False)
    p_value = fisher_exact_two_sided(t)
    bc = t[0][1] * t[1][0]
    odds = None if bc == 0 else t[0][0] * t[1][1] / bc
    cross_row = Fraction(t[0][1], margins[0])
    cross_pair = Fraction(t[1][1], margins[1])
    if cross_row > cross_pair:
        direction = "row_dominant_cross_sector"
    elif cross_row < cross_pair:
        direction = "row_dominant_same_sector"
    else:
        direction = "none"
    return AssociationReport(table, float(p_value), odds, direction, alpha, bool(p_value < alpha), True)


METRICS_HEADER = ["method", "level", "threshold", "nodes", "ari", "awi"]


def _fmt(v) -> str:
    return "" if v is None else repr(float(v))


def write_metrics(rows, path) -> None:
    """``rows``: iterable of ``(method, level, MetricPoint)``."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for method, level, p in rows:
            w.writerow([method, level, p.threshold, p.nodes, _fmt(p.ari), _fmt(p.awi)])
