"""Command-line front end.

    hinreg describe  --config exp.yaml          selection trace + fitted values
    hinreg recover   --config exp.yaml          Monte Carlo CV report
    hinreg nullcheck --config exp.yaml          real vs reshuffled graphs
    hinreg pcrw      --input g.tsv --metapath RP-UH [--source u2]
    hinreg schema    --input g.tsv

Global options may be given before or after the subcommand.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import pipeline
from .config import ConfigError, ExperimentConfig, load_config
from .errors import HinError, MetaPathError
from .graph import augment_with_holes, with_inverses
from .io import load_edgelist
from .metapath import parse_metapath
from .pcrw import dump_triples, pcrw

log = logging.getLogger("hinreg")


def _global_options(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("global options")
    g.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="experiment config (YAML/JSON)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    g.add_argument("--alpha", type=float, default=argparse.SUPPRESS, help="p-value threshold")
    g.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    g.add_argument("--keep-holes", action="store_true", default=argparse.SUPPRESS,
                   help="keep hole target columns in the regression")
    g.add_argument("--feature-agg", choices=["mean", "sum"], default=argparse.SUPPRESS)
    g.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hinreg", description="Meta-path regression on typed networks.")
    _global_options(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="forward selection on all sources")
    _global_options(p)

    p = sub.add_parser("recover", help="Monte Carlo cross-validation")
    _global_options(p)
    p.add_argument("--per-category", action="store_true", help="one report per category of the division settings")

    p = sub.add_parser("nullcheck", help="compare against degree-preserving reshuffles")
    _global_options(p)
    p.add_argument("--replicates", type=int, default=None)

    p = sub.add_parser("pcrw", help="dump a PCRW table as src,dst,prob triples")
    _global_options(p)
    p.add_argument("--input", type=Path)
    p.add_argument("--header", action="store_true", help="edge list starts with a header line")
    p.add_argument("--metapath", required=True)
    p.add_argument("--source", help="only this source node")
    p.add_argument("--output", type=Path, help="write here instead of stdout")
    p.add_argument("--inverse", action="append", default=[], metavar="BASE:INV",
                   help="add link type INV as the transpose of BASE (repeatable)")
    p.add_argument("--raw", action="store_true", help="no default exclusions")

    p = sub.add_parser("schema", help="print node and link types")
    _global_options(p)
    p.add_argument("--input", type=Path)
    p.add_argument("--header", action="store_true")
    return parser


def _config(args) -> ExperimentConfig:
    if "config" not in args:
        raise ConfigError(f"{args.command} needs --config")
    cfg = load_config(args.config)
    overrides = {}
    for key in ("seed", "alpha", "out", "keep_holes", "feature_agg"):
        if key in args:
            overrides[key] = getattr(args, key)
    return replace(cfg, **overrides).validate()


# ------------------------------------------------------------------ commands

def cmd_describe(args) -> None:
    cfg = _config(args)
    out = cfg.out / "describe"
    out.mkdir(parents=True, exist_ok=True)
    tables = pipeline.compute_tables(pipeline.prepare(pipeline.load(cfg), cfg), cfg)
    trace, design = pipeline.run_describe(tables, cfg)
    trace.write_csv(out / "trace.csv")
    trace.write_json(out / "trace.json")
    fitted = trace.final.predict(design.X[:, trace.selected])
    with open(out / "fitted.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["observed", "fitted"])
        for a, b in zip(design.y, fitted):
            w.writerow([repr(float(a)), repr(float(b))])
    print(f"selected {trace.selected_names or '[]'}  r2={trace.final.r2:.4f}  ({trace.stop_reason})")
    print(f"wrote {out}")


def _recover_one(g_raw, cfg, out: Path) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    tables = pipeline.compute_tables(g_raw, cfg)
    report = pipeline.run_recover(tables, cfg)
    report.write_json(out / "cv.json")
    report.write_csv(out / "cv.csv")
    for s in report.splits:
        if s.error:
            log.warning("%s", s.error)
    return {
        "n_sources": tables.target.shape[0] - 1,
        "train_r2_mean": report.mean_train_r2,
        "train_r2_std": report.std_train_r2,
        "test_r2_mean": report.mean_test_r2,
        "test_r2_std": report.std_test_r2,
        "error": "",
    }


def cmd_recover(args) -> None:
    cfg = _config(args)
    out = cfg.out / "recover"
    g_raw = pipeline.prepare(pipeline.load(cfg), cfg)
    if not args.per_category:
        row = _recover_one(g_raw, cfg, out)
        print(f"train r2 {row['train_r2_mean']:.4f}  test r2 {row['test_r2_mean']:.4f}")
        print(f"wrote {out}")
        return
    if cfg.division is None:
        raise ConfigError("--per-category needs a division section in the config")
    rows = []
    for cat, sub in pipeline.divide(g_raw, cfg).items():
        cat_dir = out / _safe(str(cat))
        try:
            row = _recover_one(sub, cfg, cat_dir)
        except (HinError, ValueError) as exc:
            # an empty or tiny category is reported, not fatal
            cat_dir.mkdir(parents=True, exist_ok=True)
            with open(cat_dir / "cv.json", "w") as fh:
                json.dump({"error": str(exc)}, fh, indent=2)
            row = {"n_sources": "", "train_r2_mean": "", "train_r2_std": "", "test_r2_mean": "", "test_r2_std": "",
                   "error": str(exc)}
        rows.append({"category": cat, **row})
        print(f"{cat}: {row['error'] or 'train r2 %.4f  test r2 %.4f' % (row['train_r2_mean'], row['test_r2_mean'])}")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["category"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {out}")


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name) or "_"


def cmd_nullcheck(args) -> None:
    cfg = _config(args)
    n = cfg.null.replicates if args.replicates is None else args.replicates
    if n < 0:
        raise ConfigError("--replicates must be >= 0")
    out = cfg.out / "nullcheck"
    out.mkdir(parents=True, exist_ok=True)
    real, reps = pipeline.run_nullcheck(pipeline.load(cfg), cfg, n)
    null_r2 = np.array([r.r2 for r in reps if r.r2 is not None], dtype=float)
    report = {
        "real": {
            "r2": real.final.r2,
            "selected": real.selected_names,
            "p_values": real.final.p_values.tolist(),
        },
        "null": {
            "mode": cfg.null.mode,
            "replicates": n,
            "r2_mean": float(null_r2.mean()) if null_r2.size else None,
            "r2_max": float(null_r2.max()) if null_r2.size else None,
            "empty_selections": sum(1 for r in reps if r.error is None and not r.selected),
        },
        "replicates": [
            {"replicate": r.replicate, "r2": r.r2, "selected": r.selected, "p_values": r.p_values, "error": r.error}
            for r in reps
        ],
    }
    with open(out / "nullcheck.json", "w") as fh:
        json.dump(report, fh, indent=2)
    msg = f"real r2 {real.final.r2:.4f}"
    if null_r2.size:
        msg += f"  null r2 mean {null_r2.mean():.4f} max {null_r2.max():.4f}"
    print(msg)
    print(f"wrote {out}")


def _graph_from_args(args):
    if args.input is not None:
        return load_edgelist(args.input, header=args.header), {}
    if "config" in args:
        cfg = _config(args)
        return pipeline.prepare(pipeline.load(cfg), cfg), cfg
    raise ConfigError(f"{args.command} needs --input or --config")


def cmd_pcrw(args) -> None:
    g, _ = _graph_from_args(args)
    inverses = {}
    for spec in args.inverse:
        base, sep, inv = spec.partition(":")
        if not sep or not base or not inv:
            raise ConfigError(f"--inverse expects BASE:INV, got {spec!r}")
        inverses[base] = inv
    if inverses:
        g = with_inverses(g, inverses)
    g = augment_with_holes(g)
    mp = parse_metapath(args.metapath, g.schema(), auto_exclude=not args.raw)
    res = pcrw(g, mp)
    source = None
    if args.source is not None:
        source = g.node_index(mp.source_type, args.source)
    if args.output is not None:
        with open(args.output, "w", newline="") as fh:
            n = dump_triples(res, g, fh, source)
        print(f"wrote {n} rows to {args.output}")
    else:
        dump_triples(res, g, sys.stdout, source)


def cmd_schema(args) -> None:
    g, _ = _graph_from_args(args)
    print("node types:")
    for t, (name, n) in enumerate(g.node_types):
        print(f"  {name}\t{g.n_real(t) if g.augmented else n}")
    print("link types:")
    for e, (name, s, t) in enumerate(g.link_types):
        print(f"  {name}\t{g.node_types[s][0]} -> {g.node_types[t][0]}\t{g.n_edges(e)} edges")


COMMANDS = {
    "describe": cmd_describe,
    "recover": cmd_recover,
    "nullcheck": cmd_nullcheck,
    "pcrw": cmd_pcrw,
    "schema": cmd_schema,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if "verbose" in args else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except MetaPathError as exc:
        text = getattr(args, "metapath", None)
        print(f"error: {exc}", file=sys.stderr)
        if text and exc.pos is not None:
            print(f"  {text}\n  {' ' * exc.pos}^", file=sys.stderr)
        return 2
    except (HinError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
