"""Command line interface: ``bootmst <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bootstrap import BootstrapMethod, ReplicaSeedPolicy, read_tally, replica_matrix, run_bootstrap, write_tally
from .correlation import shrink_to_psd, spectrum, pearson, to_distance
from .data import SynthSpec, returns_from_prices, write_panel, write_sectors
from .exceptions import BootMSTError, PanelError
from .filtering import mst, pmfg
from .partitions import metric_curves, write_metrics
from .pipeline import RunConfig, StageError, load_inputs, run_analysis, write_network
from .validation import parse_thresholds

log = logging.getLogger("bootmst")

SYNTH_KEYS = {
    "n": "n_elements",
    "sectors": "n_sectors",
    "T": "T",
    "m": "market_loading",
    "s": "sector_loading",
    "noise": "noise_scale",
    "seed": "seed",
}


class UsageError(Exception):
    pass


def parse_synthetic(text: str, default_seed: int) -> SynthSpec:
    """``n=50,sectors=5,T=250,m=0.3,s=0.5[,noise=0.01][,seed=7]``."""
    kwargs = {"seed": default_seed}
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in SYNTH_KEYS:
            raise UsageError(f"bad synthetic field {item!r}; keys are {', '.join(SYNTH_KEYS)}")
        field = SYNTH_KEYS[key]
        kwargs[field] = float(value) if field in ("market_loading", "sector_loading", "noise_scale") else int(value)
    try:
        return SynthSpec(**kwargs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _methods(text: str) -> tuple[str, ...]:
    try:
        return tuple(BootstrapMethod(m.strip()).value for m in text.split(",") if m.strip())
    except ValueError as exc:
        raise UsageError(f"unknown method in {text!r}") from exc


def _config(args, **overrides) -> RunConfig:
    if (args.panel is None) == (args.synthetic is None):
        raise UsageError("give exactly one of --panel or --synthetic")
    synth = None if args.synthetic is None else parse_synthetic(args.synthetic, args.seed)
    replicas = getattr(args, "replicas", 1000)
    try:
        thresholds = parse_thresholds(getattr(args, "thresholds", None), replicas)
        fields = dict(
            panel=args.panel,
            sectors=args.sectors,
            synthetic=synth,
            methods=_methods(getattr(args, "methods", "row,pair")),
            replicas=replicas,
            seed=args.seed,
            thresholds=thresholds,
            out=args.out,
            workers=getattr(args, "workers", None),
            inclusive=getattr(args, "inclusive", False),
        )
        fields.update(overrides)
        return RunConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_analyze(args) -> int:
    if args.metrics and args.sectors is None and args.synthetic is None:
        raise UsageError("sector map required (--sectors) when --metrics is requested")
    config = _config(args, require_metrics=args.metrics)
    manifest = run_analysis(config)
    log.info("wrote %d files to %s", len(manifest["outputs"]), config.out)
    return 0


def cmd_network(args) -> int:
    config = _config(args, methods=("row",))
    panel, _ = load_inputs(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corr = pearson(panel)
    net = mst(to_distance(corr)) if args.command == "mst" else pmfg(corr)
    write_network(net, out / args.command, panel.elements)
    return 0


def cmd_bootstrap(args) -> int:
    config = _config(args)
    panel, _ = load_inputs(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for method in config.methods:
        log.info("stage bootstrap-%s", method)
        tally = run_bootstrap(panel, method, config.replicas, ReplicaSeedPolicy(config.seed), config.workers)
        write_tally(tally, out / f"tally_{method}.csv", panel.elements)
    return 0


def cmd_spectrum(args) -> int:
    if args.method != "pair":
        raise UsageError("spectrum needs --method pair: row replicas are positive semidefinite")
    config = _config(args, methods=("pair",))
    panel, _ = load_inputs(config)
    seed = ReplicaSeedPolicy(config.seed).replica_seed(args.replica_index)
    corr = replica_matrix(panel, "pair", seed)
    raw = spectrum(corr)
    alpha = None
    if args.shrink:
        corr, alpha = shrink_to_psd(corr, args.floor)
    spec = spectrum(corr)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "spectrum.csv").open("w", encoding="utf-8") as fh:
        fh.write("index,eigenvalue\n")
        for k, lam in enumerate(spec.eigenvalues):
            fh.write(f"{k},{lam:.17g}\n")
    summary = {
        "method": "pair",
        "replica_index": args.replica_index,
        "seed": config.seed,
        "n_negative": spec.n_negative,
        "n_negative_before_shrink": raw.n_negative,
        "min_eigenvalue": spec.min,
        "shrink_alpha": alpha,
        "floor": args.floor if args.shrink else None,
    }
    (out / "spectrum.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"negative eigenvalues: {spec.n_negative}")
    return 0


def cmd_metrics(args) -> int:
    config = _config(args)
    panel, sectors = load_inputs(config)
    if sectors is None:
        raise UsageError("sector map required (--sectors)")
    rows = []
    for path in args.tally:
        tally = read_tally(path, panel.elements)
        ths = parse_thresholds(args.thresholds, tally.replicas)
        for level in ("sector", "subsector"):
            for p in metric_curves(tally, sectors, panel.elements, level, ths, args.inclusive):
                rows.append((tally.method.value, level, p))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics(rows, out / "metrics.csv")
    return 0


def cmd_returns(args) -> int:
    panel = returns_from_prices(args.open, args.close)
    write_panel(panel, args.out)
    return 0


def cmd_synth(args) -> int:
    spec = parse_synthetic(args.synthetic, args.seed)
    panel, sectors = load_inputs(RunConfig(synthetic=spec, replicas=1, out=args.out))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_panel(panel, out / "panel.csv")
    write_sectors(sectors, out / "sectors.csv", panel.elements)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bootmst", description=__doc__)
    parser.add_argument("-q", "--quiet", action="store_true", help="only report errors")
    sub = parser.add_subparsers(dest="command", required=True)

    inputs = argparse.ArgumentParser(add_help=False)
    inputs.add_argument("--panel", help="wide CSV of returns (time rows, element columns)")
    inputs.add_argument("--sectors", help="CSV element,sector,subsector")
    inputs.add_argument("--synthetic", help="synthetic spec, e.g. n=50,sectors=5,T=250,m=0.3,s=0.5")
    inputs.add_argument("--seed", type=int, default=0, help="master seed (also the synthetic seed)")
    inputs.add_argument("--out", default="out", help="output directory")

    boot = argparse.ArgumentParser(add_help=False)
    boot.add_argument("--methods", default="row,pair", help="comma list of row,pair")
    boot.add_argument("--replicas", type=int, default=1000, help="bootstrap replicas B")
    boot.add_argument("--workers", type=int, default=None,
                      help="worker processes (default $BOOTMST_WORKERS or 1)")

    thresh = argparse.ArgumentParser(add_help=False)
    thresh.add_argument("--thresholds", help="start:stop:step or comma list (default B-B/50 .. B/50)")
    thresh.add_argument("--inclusive", action="store_true", help="keep links with value == threshold")

    p = sub.add_parser("analyze", parents=[inputs, boot, thresh], help="full pipeline")
    p.add_argument("--metrics", action="store_true", help="require ARI/AWI metrics (needs sectors)")
    p.set_defaults(func=cmd_analyze)

    for name in ("mst", "pmfg"):
        p = sub.add_parser(name, parents=[inputs], help=f"{name.upper()} of the sample correlation")
        p.set_defaults(func=cmd_network)

    p = sub.add_parser("bootstrap", parents=[inputs, boot], help="bootstrap tallies only")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("spectrum", parents=[inputs], help="eigenvalues of one pair replica")
    p.add_argument("--method", default="pair")
    p.add_argument("--replica-index", type=int, default=0)
    p.add_argument("--shrink", action="store_true", help="shrink towards the identity first")
    p.add_argument("--floor", type=float, default=1e-10)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("metrics", parents=[inputs, thresh], help="ARI/AWI curves from tally files")
    p.add_argument("--tally", action="append", required=True, help="tally CSV (repeatable)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("returns", help="log(close/open) returns from two price files")
    p.add_argument("--open", required=True)
    p.add_argument("--close", required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("synth", help="write a synthetic panel and its sector map")
    p.add_argument("--synthetic", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (UsageError, PanelError) as exc:
        print(f"bootmst: error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"bootmst: error: {exc}", file=sys.stderr)
        return 1
    except (BootMSTError, ValueError, OSError) as exc:
        print(f"bootmst: error in {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
