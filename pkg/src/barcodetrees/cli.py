"""Command-line surface.

Subcommands: tmd, tns, trn, enumerate, cayley, exp-transposition,
exp-bottleneck, exp-trn-hist, exp-type-dist, exp-death-switch,
exp-diversity, exp-bio.

Experiment options can come from a flat ``key = value`` config file
(``--config``); command-line flags override file values, and the BF_SEED
environment variable overrides the master seed from either source.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields
from pathlib import Path

from .barcodes import (diagram_csv, dump_barcode_text, make_strict,
                       parse_barcode_text)
from .experiments import (ExperimentConfig, exp_bio, exp_bottleneck,
                          exp_bottleneck_gapsweep, exp_death_switch,
                          exp_diversity, exp_transposition,
                          exp_trn_histogram, exp_type_distribution)
from .realization import cayley_graph, enumerate_attachments, realize_tree, trn
from .tmd import tmd
from .tns import TNSParams, synthesize
from .trees import dump_swc, parse_swc

_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}
_GRID_KEYS = {"lambda_grid", "bottleneck_lambda_grid", "epsilon_grid"}
_INT_KEYS = {"master_seed", "trials", "workers", "delta_points"}
_FLOAT_KEYS = {"lam", "rho", "tau", "mu", "step"}


def load_config_file(path) -> dict:
    """Flat 'key = value' format, '#' comments; grids are comma-separated."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = val
    return values


def _coerce(key: str, val: str):
    if key in _GRID_KEYS:
        return tuple(float(v) for v in val.split(",") if v.strip())
    if key in _INT_KEYS:
        return int(val)
    if key in _FLOAT_KEYS:
        return float(val)
    return val


def build_config(args) -> ExperimentConfig:
    values: dict = {}
    if getattr(args, "config", None):
        for key, val in load_config_file(args.config).items():
            values[key] = _coerce(key, val)
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = _coerce(key, flag) if isinstance(flag, str) else flag
    env_seed = os.environ.get("BF_SEED")
    if env_seed is not None:
        values["master_seed"] = int(env_seed)
    return ExperimentConfig(**values)


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--delta-points", dest="delta_points", type=int)
    p.add_argument("--lambda-grid", dest="lambda_grid")
    p.add_argument("--bottleneck-lambda-grid", dest="bottleneck_lambda_grid")
    p.add_argument("--epsilon-grid", dest="epsilon_grid")
    p.add_argument("--lam", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--outdir")


def _write(config: ExperimentConfig, table, filename: str):
    path = table.write(Path(config.outdir) / filename)
    print(path)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="barcodetrees", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tmd", help="barcode of an SWC tree")
    p.add_argument("swc")
    p.add_argument("--mode", choices=["radial", "path"], default="path")
    p.add_argument("--binarize", action="store_true",
                   help="split multifurcations into zero-length cascades")
    p.add_argument("--diagram", action="store_true",
                   help="emit the persistence diagram CSV instead")

    p = sub.add_parser("tns", help="synthesize a tree from a barcode")
    p.add_argument("barcode")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.3)
    p.add_argument("--tau", type=float, default=0.4)
    p.add_argument("--mu", type=float, default=0.3)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output SWC path (default: stdout)")

    p = sub.add_parser("trn", help="tree-realization number of a barcode")
    p.add_argument("barcode")

    p = sub.add_parser("enumerate", help="enumerate attachment maps")
    p.add_argument("barcode")
    p.add_argument("--cap", type=int, default=100_000)
    p.add_argument("--emit-trees", dest="emit_trees",
                   help="directory for one SWC per realization")

    p = sub.add_parser("cayley", help="annotated Cayley graph of S_n")
    p.add_argument("n", type=int)
    p.add_argument("--cap", type=int, default=7)
    p.add_argument("--dot", help="output DOT path (default: stdout)")

    for cmd in ("exp-transposition", "exp-bottleneck", "exp-trn-hist",
                "exp-type-dist", "exp-death-switch", "exp-diversity", "exp-bio"):
        p = sub.add_parser(cmd, help=f"experiment: {cmd[4:]}")
        _add_config_flags(p)
        if cmd == "exp-trn-hist":
            p.add_argument("--n-max", dest="n_max", type=int, default=8)
        elif cmd == "exp-death-switch":
            p.add_argument("barcode")
            p.add_argument("--bar-i", dest="bar_i", type=int, required=True)
            p.add_argument("--bar-j", dest="bar_j", type=int, required=True)
        elif cmd == "exp-diversity":
            p.add_argument("swc")
        elif cmd == "exp-bio":
            p.add_argument("swc_dir")
            p.add_argument("--manifest",
                           help="optional 'filename label' lines for exp-bio")

    args = parser.parse_args(argv)

    if args.command == "tmd":
        tree = parse_swc(Path(args.swc).read_text(), binarize=args.binarize)
        result = tmd(tree, args.mode)
        out = diagram_csv(result.barcode) if args.diagram else dump_barcode_text(result.barcode)
        sys.stdout.write(out)

    elif args.command == "tns":
        barcode = make_strict(parse_barcode_text(Path(args.barcode).read_text()))
        params = TNSParams(lam=args.lam, rho=args.rho, tau=args.tau, mu=args.mu,
                           step_size=args.step, seed=args.seed)
        text = dump_swc(synthesize(barcode, params))
        if args.out:
            Path(args.out).write_text(text)
            print(args.out)
        else:
            sys.stdout.write(text)

    elif args.command == "trn":
        barcode = make_strict(parse_barcode_text(Path(args.barcode).read_text()))
        print(trn(barcode))

    elif args.command == "enumerate":
        barcode = make_strict(parse_barcode_text(Path(args.barcode).read_text()))
        maps = enumerate_attachments(barcode, cap=args.cap)
        for m in maps:
            print(",".join(str(h) for h in m.hosts))
        if args.emit_trees:
            outdir = Path(args.emit_trees)
            outdir.mkdir(parents=True, exist_ok=True)
            for idx, m in enumerate(maps):
                name = outdir / f"realization_{idx:05d}.swc"
                name.write_text(dump_swc(realize_tree(barcode, m)))
            print(f"# wrote {len(maps)} trees to {outdir}", file=sys.stderr)

    elif args.command == "cayley":
        graph = cayley_graph(args.n, cap=args.cap)
        dot = graph.to_dot()
        if args.dot:
            Path(args.dot).write_text(dot)
            print(args.dot)
        else:
            sys.stdout.write(dot)

    elif args.command == "exp-transposition":
        config = build_config(args)
        _write(config, exp_transposition(config), "transposition.csv")

    elif args.command == "exp-bottleneck":
        config = build_config(args)
        _write(config, exp_bottleneck(config), "bottleneck.csv")
        _write(config, exp_bottleneck_gapsweep(config), "bottleneck_gap.csv")

    elif args.command == "exp-trn-hist":
        config = build_config(args)
        _write(config, exp_trn_histogram(args.n_max, config), "trn_hist.csv")

    elif args.command == "exp-type-dist":
        config = build_config(args)
        _write(config, exp_type_distribution(config), "type_dist.csv")

    elif args.command == "exp-death-switch":
        config = build_config(args)
        barcode = make_strict(parse_barcode_text(Path(args.barcode).read_text()))
        table = exp_death_switch(barcode, args.bar_i, args.bar_j, config)
        _write(config, table, "death_switch.csv")

    elif args.command == "exp-diversity":
        config = build_config(args)
        tree = parse_swc(Path(args.swc).read_text())
        _write(config, exp_diversity(tree, config), "diversity.csv")

    elif args.command == "exp-bio":
        config = build_config(args)
        manifest = None
        if args.manifest:
            manifest = {}
            for raw in Path(args.manifest).read_text().splitlines():
                line = raw.split("#", 1)[0].strip()
                if line:
                    fname, _, label = line.partition(" ")
                    manifest[fname.strip()] = label.strip() or "-"
        _write(config, exp_bio(args.swc_dir, config, manifest), "bio.csv")

    return 0


if __name__ == "__main__":
    sys.exit(main())
