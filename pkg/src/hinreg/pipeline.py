"""Glue between a config and the core modules: graph preparation, PCRW
tables for the target and candidates, and the three experiment runs."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .errors import TooFewEdges, UncategorizedNode, UnknownNode
from .graph import TypedGraph, augment_with_holes, collapse_link_types, with_inverses
from .io import load_edgelist
from .metapath import MetaPath, enumerate_metapaths, parse_metapath
from .pcrw import PcrwResult, pcrw, pcrw_batch
from .regress import SelectionTrace, aggregate_features, assemble_design, select_from_design
from .validate import CvConfig, CvReport, divide_by_category, monte_carlo_cv, null_model

log = logging.getLogger(__name__)


@dataclass
class Tables:
    graph: TypedGraph          # hole-augmented
    target: PcrwResult
    candidates: list[PcrwResult]


def reshuffle(g: TypedGraph, cfg: ExperimentConfig, replicate: int) -> TypedGraph:
    """One null replicate: every configured link type reshuffled with its own stream.

    Without an explicit list, all link types with at least two edges are
    reshuffled and sparser ones are left alone.
    """
    explicit = cfg.null.link_types is not None
    names = cfg.null.link_types if explicit else [lt[0] for lt in g.link_types]
    for j, name in enumerate(names):
        if not explicit and g.n_edges(name) < 2:
            log.info("null replicate %d: %s has fewer than two edges, left as is", replicate, name)
            continue
        g = null_model(g, name, mode=cfg.null.mode, rng_seed=[cfg.seed, replicate, j])
    return g


def prepare(raw: TypedGraph, cfg: ExperimentConfig, replicate: int | None = None) -> TypedGraph:
    """Null reshuffle (optional), collapsing, inverse link types.  Still unaugmented."""
    g = raw if replicate is None else reshuffle(raw, cfg, replicate)
    for spec in cfg.collapse:
        g = collapse_link_types(g, spec["src"], spec["dst"], spec.get("name", "ALL"))
    if cfg.inverses:
        g = with_inverses(g, cfg.inverses)
    return g


def target_path(g: TypedGraph, cfg: ExperimentConfig) -> MetaPath:
    return parse_metapath(cfg.target, g.schema(), auto_exclude=cfg.auto_exclude)


def candidate_paths(g: TypedGraph, cfg: ExperimentConfig) -> list[MetaPath] | dict[str, list[MetaPath]]:
    schema = g.schema()
    tgt = target_path(g, cfg)
    if cfg.max_len is not None:
        return enumerate_metapaths(
            schema, tgt.source_type, tgt.target_type, cfg.max_len, exclude=tgt, auto_exclude=cfg.auto_exclude
        )
    if cfg.metapaths is not None:
        return [parse_metapath(m, schema, auto_exclude=cfg.auto_exclude) for m in cfg.metapaths]
    return {
        name: [parse_metapath(m, schema, auto_exclude=cfg.auto_exclude) for m in members]
        for name, members in cfg.features.items()
    }


def compute_tables(g_raw: TypedGraph, cfg: ExperimentConfig) -> Tables:
    g = augment_with_holes(g_raw)
    tgt = target_path(g, cfg)
    cands = candidate_paths(g, cfg)
    target = pcrw(g, tgt)
    if isinstance(cands, dict):
        groups = {}
        for name, members in cands.items():
            groups[name] = pcrw_batch(g, members)
        regressors = aggregate_features(groups, how=cfg.feature_agg)
    else:
        regressors = pcrw_batch(g, cands)
    return Tables(g, target, regressors)


def category_map(g: TypedGraph, cfg: ExperimentConfig) -> dict[int, str]:
    """Pivot node index -> category, from a pivot->category link type or a TSV file."""
    div = cfg.division
    k = g.node_type_id(div.pivot_type)
    out: dict[int, str] = {}
    if div.category_link is not None:
        e = g.link_type_id(div.category_link)
        _, s, t = g.link_types[e]
        if s != k:
            raise UncategorizedNode(f"link type {div.category_link} does not start at {div.pivot_type}")
        w = g.adjacency[e].tocsr()
        for p in range(g.size(k)):
            lo, hi = w.indptr[p], w.indptr[p + 1]
            if hi > lo:
                best = w.indices[lo + int(np.argmax(w.data[lo:hi]))]
                out[p] = g.node_label(t, int(best))
    else:
        with open(div.category_file, encoding="utf-8") as fh:
            for row in csv.reader(fh, delimiter="\t"):
                if not row or row[0].startswith("#"):
                    continue
                try:
                    out[g.node_index(k, row[0])] = row[1]
                except UnknownNode:
                    log.warning("category file: unknown %s %r skipped", div.pivot_type, row[0])
    return out


def divide(g_raw: TypedGraph, cfg: ExperimentConfig) -> dict[str, TypedGraph]:
    div = cfg.division
    anchor = parse_metapath(div.anchor, g_raw.schema(), auto_exclude=False)
    return divide_by_category(g_raw, div.pivot_type, category_map(g_raw, cfg), anchor, div.categories)


# ------------------------------------------------------------------ runs

def load(cfg: ExperimentConfig) -> TypedGraph:
    return load_edgelist(cfg.input, header=cfg.header)


def run_describe(tables: Tables, cfg: ExperimentConfig):
    """Forward selection on every real source; returns (trace, design)."""
    d = assemble_design(tables.target, tables.candidates, intercept=cfg.intercept, drop_holes=not cfg.keep_holes)
    trace = select_from_design(d, cfg.alpha)
    return trace, d


def run_recover(tables: Tables, cfg: ExperimentConfig) -> CvReport:
    cv = CvConfig(cfg.cv.train_fraction, cfg.cv.n_splits, cfg.seed)
    return monte_carlo_cv(
        tables.target,
        tables.candidates,
        cfg.alpha,
        cv,
        intercept=cfg.intercept,
        drop_holes=not cfg.keep_holes,
        on_degenerate="record",
    )


@dataclass
class NullReplicate:
    replicate: int
    r2: float | None
    selected: list[str]
    p_values: list[float]
    error: str | None = None


def run_nullcheck(raw: TypedGraph, cfg: ExperimentConfig, replicates: int) -> tuple[SelectionTrace, list[NullReplicate]]:
    real, _ = run_describe(compute_tables(prepare(raw, cfg), cfg), cfg)
    out = []
    for r in range(replicates):
        try:
            g = prepare(raw, cfg, replicate=r)
        except TooFewEdges as exc:
            out.append(NullReplicate(r, None, [], [], error=str(exc)))
            continue
        trace, _ = run_describe(compute_tables(g, cfg), cfg)
        out.append(NullReplicate(r, trace.final.r2, trace.selected_names, trace.final.p_values.tolist()))
    return real, out
