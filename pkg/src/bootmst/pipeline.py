"""End-to-end analysis: every table and figure analog written to one directory."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bootstrap import BootstrapMethod, BootstrapTally, ReplicaSeedPolicy, run_bootstrap, write_tally
from .correlation import pearson, to_distance, write_matrix
from .data import ReturnsPanel, SectorMap, SynthSpec, load_panel, load_sectors, synthesize_panel
from .exceptions import BootMSTError
from .filtering import EdgeNetwork, mst, pmfg
from .partitions import metric_curves, sector_association_test, write_metrics
from .topology import clique_pmfg_inclusion, histogram, mst_overlap_curve, scatter, threshold_scan
from .validation import check_thresholds, default_thresholds

log = logging.getLogger("bootmst")

__all__ = ["RunConfig", "StageError", "load_inputs", "run_analysis", "write_network"]


class StageError(BootMSTError):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@dataclass
class RunConfig:
    panel: str | None = None
    sectors: str | None = None
    synthetic: SynthSpec | None = None
    methods: tuple[str, ...] = ("row", "pair")
    replicas: int = 1000
    seed: int = 0
    thresholds: list[int] | None = None
    out: str = "out"
    workers: int | None = None
    inclusive: bool = False
    require_metrics: bool = False

    def __post_init__(self):
        if not self.methods:
            raise ValueError("select at least one bootstrap method")
        self.methods = tuple(BootstrapMethod(m).value for m in self.methods)
        if (self.panel is None) == (self.synthetic is None):
            raise ValueError("give exactly one of a panel file or a synthetic spec")
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.thresholds is None:
            self.thresholds = default_thresholds(self.replicas)
        self.thresholds = check_thresholds(self.thresholds, self.replicas)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["synthetic"] = None if self.synthetic is None else asdict(self.synthetic)
        d["methods"] = list(self.methods)
        return d


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_inputs(config: RunConfig) -> tuple[ReturnsPanel, SectorMap | None]:
    if config.synthetic is not None:
        return synthesize_panel(config.synthetic)
    panel = load_panel(config.panel)
    sectors = None
    if config.sectors is not None:
        sectors = load_sectors(config.sectors)
        sectors.check_covers(panel.elements)
    return panel, sectors


def _writer(path):
    fh = Path(path).open("w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_network(net: EdgeNetwork, stem, labels: Sequence[str]) -> None:
    """``<stem>.csv`` edge list (``element_i,element_j,weight``) and ``<stem>.json`` summary."""
    stem = Path(stem)
    fh, w = _writer(stem.with_suffix(".csv"))
    with fh:
        w.writerow(["element_i", "element_j", "weight"])
        for k, (a, b) in enumerate(net.edges):
            weight = "" if net.weights is None else f"{net.weights[k]:.17g}"
            w.writerow([labels[a], labels[b], weight])
    stem.with_suffix(".json").write_text(json.dumps(net.summary(), indent=2) + "\n")


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc


def run_analysis(config: RunConfig) -> dict:
    """Run the full pipeline; returns the manifest (also written to disk)."""
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def rel(name):
        written.append(name)
        return out / name

    with _Stage("load"):
        panel, sectors = load_inputs(config)
        if config.require_metrics and sectors is None:
            raise ValueError("sector map required")
    labels = panel.elements
    ths = config.thresholds

    with _Stage("correlation"):
        corr = pearson(panel)
        write_matrix(corr, rel("correlation.csv"), labels)
    with _Stage("mst"):
        tree = mst(to_distance(corr))
        write_network(tree, out / "mst", labels)
        written += ["mst.csv", "mst.json"]
    with _Stage("pmfg"):
        graph = pmfg(corr) if panel.n >= 3 else None
        if graph is not None:
            write_network(graph, out / "pmfg", labels)
            written += ["pmfg.csv", "pmfg.json"]

    tallies: dict[str, BootstrapTally] = {}
    policy = ReplicaSeedPolicy(config.seed)
    for method in config.methods:
        with _Stage(f"bootstrap-{method}"):
            tallies[method] = run_bootstrap(panel, method, config.replicas, policy, config.workers)
            write_tally(tallies[method], rel(f"tally_{method}.csv"), labels)

    with _Stage("histogram"):
        fh, w = _writer(rel("histogram.csv"))
        with fh:
            w.writerow(["method", "bootstrap_value", "links"])
            for method, tally in tallies.items():
                w.writerows([method, v, c] for v, c in histogram(tally))

    with _Stage("threshold-scan"):
        fh, w = _writer(rel("threshold_scan.csv"))
        with fh:
            w.writerow(["method", "threshold", "non_isolated_nodes", "edges"])
            for method, tally in tallies.items():
                w.writerows([method, *row] for row in threshold_scan(tally, ths, config.inclusive))

    with _Stage("mst-overlap"):
        fh, w = _writer(rel("mst_overlap.csv"))
        with fh:
            w.writerow(["method", "threshold", "common_links", "mst_links"])
            for method, tally in tallies.items():
                for t, common in mst_overlap_curve(tally, tree, ths, config.inclusive):
                    w.writerow([method, t, common, tree.n_edges])

    if graph is not None:
        with _Stage("cliques"):
            for size, name, col in ((3, "cliques.csv", "n_3cliques"), (4, "cliques4.csv", "n_4cliques")):
                fh, w = _writer(rel(name))
                with fh:
                    w.writerow(["threshold", "method", col, "in_pmfg", "percent"])
                    for method, tally in tallies.items():
                        for r in clique_pmfg_inclusion(tally, graph, ths, size, config.inclusive):
                            w.writerow([r.threshold, method, r.total, r.in_pmfg, r.percent_str()])

    if sectors is not None:
        with _Stage("metrics"):
            rows = []
            for method, tally in tallies.items():
                for level in ("sector", "subsector"):
                    for p in metric_curves(tally, sectors, labels, level, ths, config.inclusive):
                        rows.append((method, level, p))
            write_metrics(rows, rel("metrics.csv"))

    if len(tallies) == 2:
        with _Stage("scatter"):
            points = scatter(tallies["row"], tallies["pair"], sectors, labels if sectors else None)
            fh, w = _writer(rel("scatter.csv"))
            with fh:
                w.writerow(["element_i", "element_j", "row_value", "pair_value", "same_sector"])
                for p in points:
                    same = "" if p.same_sector is None else int(p.same_sector)
                    w.writerow([labels[p.pair[0]], labels[p.pair[1]], p.row_value, p.pair_value, same])
        if sectors is not None:
            with _Stage("association-test"):
                report = sector_association_test(points)
                payload = {
                    "table": [list(r) for r in report.table],
                    "rows": ["row_gt_pair", "pair_gt_row"],
                    "columns": ["same_sector", "different_sector"],
                    "p_value": report.p_value,
                    "odds_ratio": report.odds_ratio,
                    "direction": report.direction,
                    "alpha": report.alpha,
                    "reject": report.reject,
                    "both_positive_links": points.both_positive,
                }
                rel("association_test.json").write_text(json.dumps(payload, indent=2) + "\n")

    manifest = _manifest(config, panel, tallies, written)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _manifest(config, panel, tallies, written) -> dict:
    import joblib
    import networkx
    import numba
    import scipy
    import sklearn

    inputs = {}
    for key in ("panel", "sectors"):
        path = getattr(config, key)
        if path is not None:
            inputs[key] = {"path": str(path), "sha256": _sha256(path)}
    return {
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "config": config.to_dict(),
        "inputs": inputs,
        "n_elements": panel.n,
        "n_observations": panel.T,
        "distinct_links": {m: len(t.counts) for m, t in tallies.items()},
        "possible_links": panel.n * (panel.n - 1) // 2,
        "outputs": sorted(written + ["manifest.json"]),
        "versions": {
            "bootmst": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "numba": numba.__version__,
            "scipy": scipy.__version__,
            "networkx": networkx.__version__,
            "scikit-learn": sklearn.__version__,
            "joblib": joblib.__version__,
        },
    }
