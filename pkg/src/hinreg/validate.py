"""Monte Carlo cross-validation over source nodes, degree-preserving null
graphs and per-category sub-networks."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import AlreadyAugmented, DegenerateSplit, PivotNotOnPath, TooFewEdges, UncategorizedNode
from .graph import TypedGraph, restrict
from .metapath import MetaPath
from .pcrw import PcrwResult
from .regress import DesignMatrix, assemble_design, select_from_design

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CvConfig:
    train_fraction: float = 0.8
    n_splits: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.n_splits < 1:
            raise ValueError("n_splits must be >= 1")


@dataclass
class SplitResult:
    split: int
    train_sources: list[int]
    test_sources: list[int]
    train_r2: float | None = None
    test_r2: float | None = None
    selected: list[str] = field(default_factory=list)
    beta: list[float] = field(default_factory=list)
    error: str | None = None


@dataclass
class CvReport:
    splits: list[SplitResult]

    def _vals(self, attr):
        return np.array([getattr(s, attr) for s in self.splits if s.error is None], dtype=float)

    @property
    def mean_train_r2(self) -> float:
        v = self._vals("train_r2")
        return float(v.mean()) if v.size else math.nan

    @property
    def mean_test_r2(self) -> float:
        v = self._vals("test_r2")
        return float(v.mean()) if v.size else math.nan

    @property
    def std_train_r2(self) -> float:
        v = self._vals("train_r2")
        return float(v.std()) if v.size else math.nan

    @property
    def std_test_r2(self) -> float:
        v = self._vals("test_r2")
        return float(v.std()) if v.size else math.nan

    def to_dict(self) -> dict:
        return {
            "splits": [
                {
                    "split": s.split,
                    "train_r2": s.train_r2,
                    "test_r2": s.test_r2,
                    "selected": s.selected,
                    "beta": s.beta,
                    "n_train": len(s.train_sources),
                    "n_test": len(s.test_sources),
                    "error": s.error,
                }
                for s in self.splits
            ],
            "train_r2": {"mean": self.mean_train_r2, "std": self.std_train_r2},
            "test_r2": {"mean": self.mean_test_r2, "std": self.std_test_r2},
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["split", "phase", "r2", "n_predictors"])
            for s in self.splits:
                if s.error is not None:
                    continue
                w.writerow([s.split, "train", repr(s.train_r2), len(s.selected)])
                w.writerow([s.split, "test", repr(s.test_r2), len(s.selected)])


def train_size(n_sources: int, fraction: float) -> int:
    # guard against 0.7 * 10 == 7.000000000000001
    return math.ceil(round(fraction * n_sources, 9))


def monte_carlo_cv(
    target: PcrwResult,
    candidates: Sequence[PcrwResult],
    alpha: float,
    cfg: CvConfig,
    intercept: bool = True,
    drop_holes: bool = True,
    on_degenerate: str = "raise",
) -> CvReport:
    """Repeated random sub-sampling of source nodes.

    Split ``i`` draws its training sources with ``default_rng(seed + i)``,
    runs forward selection on them and scores the frozen model on the held
    out sources (test r² centred on the test mean, may be negative).
    ``on_degenerate="record"`` stores zero-variance test splits as errors
    instead of raising.
    """
    n_real = target.shape[0] - 1
    if n_real < 2:
        raise ValueError("need at least two real source nodes")
    n_train = train_size(n_real, cfg.train_fraction)
    if not 1 <= n_train < n_real:
        raise ValueError(f"train fraction {cfg.train_fraction} gives {n_train} of {n_real} sources")

    full = assemble_design(target, candidates, None, intercept=intercept, drop_holes=drop_holes)
    per_source = full.n_rows // n_real
    splits = []
    for i in range(cfg.n_splits):
        rng = np.random.default_rng(cfg.rng_seed + i)
        train = np.sort(rng.choice(n_real, size=n_train, replace=False))
        test = np.setdiff1d(np.arange(n_real), train)
        res = SplitResult(i, train.tolist(), test.tolist())

        tr_rows = (train[:, None] * per_source + np.arange(per_source)).ravel()
        te_rows = (test[:, None] * per_source + np.arange(per_source)).ravel()
        y_te = full.y[te_rows]
        tss_te = float(np.sum((y_te - y_te.mean()) ** 2))
        if tss_te == 0:
            msg = f"split {i}: test response has zero variance"
            if on_degenerate == "raise":
                raise DegenerateSplit(msg)
            res.error = msg
            splits.append(res)
            continue

        d_tr = _rows(full, tr_rows)
        trace = select_from_design(d_tr, alpha)
        fit = trace.final
        pred = fit.predict(full.X[te_rows][:, trace.selected])
        rss_te = float(np.sum((y_te - pred) ** 2))
        res.train_r2 = fit.r2
        res.test_r2 = 1.0 - rss_te / tss_te
        res.selected = trace.selected_names
        res.beta = fit.beta.tolist()
        splits.append(res)
    return CvReport(splits)


def _rows(d, rows):
    return DesignMatrix(d.y[rows], d.X[rows], list(d.names), d.intercept, d.row_index[rows])


# ---------------------------------------------------------------- null graphs

def null_model(
    g: TypedGraph, link_type, mode: str = "out-degree", rng_seed: int | Sequence[int] = 0, max_tries: int = 100
) -> TypedGraph:
    """Reshuffle one link type of an unaugmented graph.

    ``out-degree``: permute the target endpoints among the type's edges
    (each edge keeps its source and weight), then repair duplicate
    (source, target) pairs by random swaps.  Out-degrees, in-degrees and the
    per-source weight multisets are preserved exactly.
    ``in-out-degree``: 10 x |E| random double-edge swaps.
    """
    if g.augmented:
        raise AlreadyAugmented("reshuffle the raw graph; augment afterwards")
    e = g.link_type_id(link_type)
    w = g.adjacency[e].tocoo()
    if w.nnz < 2:
        raise TooFewEdges(f"link type {g.link_types[e][0]} has {w.nnz} edges")
    rng = np.random.default_rng(rng_seed)
    rows, cols, vals = w.row.copy(), w.col.copy(), w.data.copy()

    if mode == "out-degree":
        for _ in range(max_tries):
            cols = cols[rng.permutation(len(cols))]
            if _repair_duplicates(rows, cols, rng):
                break
        else:
            raise TooFewEdges(f"could not reshuffle {g.link_types[e][0]} without duplicate edges")
    elif mode == "in-out-degree":
        _double_edge_swaps(rows, cols, rng, 10 * len(cols))
    else:
        raise ValueError(f"unknown null model mode {mode!r}")

    m = sp.csr_matrix((vals, (rows, cols)), shape=w.shape)
    m.sort_indices()
    adjacency = list(g.adjacency)
    adjacency[e] = m
    return g.replace(adjacency=tuple(adjacency))


def _repair_duplicates(rows, cols, rng, rounds: int = 50) -> bool:
    """Swap targets of colliding edges with random partners, in place."""
    n = len(rows)
    for _ in range(rounds):
        seen: dict[tuple[int, int], int] = {}
        dup = []
        for i, key in enumerate(zip(rows.tolist(), cols.tolist())):
            if key in seen:
                dup.append(i)
            seen[key] = seen.get(key, 0) + 1
        if not dup:
            return True
        for i in dup:
            j = int(rng.integers(n))
            a, b, c, d = int(rows[i]), int(cols[i]), int(rows[j]), int(cols[j])
            if a == c or b == d or (a, d) in seen or (c, b) in seen:
                continue
            for key in ((a, b), (c, d)):
                seen[key] -= 1
                if not seen[key]:
                    del seen[key]
            seen[(a, d)] = 1
            seen[(c, b)] = 1
            cols[i], cols[j] = d, b
    return len(set(zip(rows.tolist(), cols.tolist()))) == n


def _double_edge_swaps(rows, cols, rng, n_swaps):
    existing = set(zip(rows.tolist(), cols.tolist()))
    n = len(rows)
    for _ in range(n_swaps):
        i, j = rng.integers(n, size=2)
        a, b, c, d = rows[i], cols[i], rows[j], cols[j]
        if a == c or b == d or (a, d) in existing or (c, b) in existing:
            continue
        existing.difference_update({(a, b), (c, d)})
        existing.update({(a, d), (c, b)})
        cols[i], cols[j] = d, b


# ---------------------------------------------------------------- categories

def divide_by_category(
    g: TypedGraph,
    pivot_type,
    category_of: Mapping[int, object],
    anchor: MetaPath,
    categories: Sequence | None = None,
) -> dict:
    """One sub-network per category of the pivot node type.

    For category r the sub-network keeps the pivot nodes of category r, the
    anchor's source-type nodes that reach one of them along the anchor prefix
    and target-type nodes reached from them along the suffix (only pivots on
    some complete anchor path count), and every node of the other types.
    Edges are induced.  Returns ``{category: TypedGraph}`` in category order.
    """
    if g.augmented:
        raise AlreadyAugmented("divide the raw graph; augment afterwards")
    k = g.node_type_id(pivot_type)
    interior = [i for i in range(1, len(anchor.steps)) if anchor.node_types[i] == k]
    if not interior:
        raise PivotNotOnPath(f"anchor {anchor.name} does not pass through {g.node_types[k][0]}")
    pos = interior[0]
    n_pivot = g.size(k)
    missing = [p for p in range(n_pivot) if p not in category_of]
    if missing:
        raise UncategorizedNode(f"pivot node {g.node_label(k, missing[0])} has no category")
    cats = list(categories) if categories is not None else sorted(set(category_of.values()), key=str)

    def reach(steps):
        m = None
        for e in steps:
            b = (g.adjacency[e] > 0).astype(np.int64)
            m = b if m is None else ((m @ b) > 0).astype(np.int64)
        return sp.csr_matrix(m)

    pre = reach(anchor.steps[:pos])        # source type x pivot
    suf = reach(anchor.steps[pos:])        # pivot x target type
    src_t, dst_t = anchor.node_types[0], anchor.node_types[-1]
    cat_arr = np.array([category_of[p] for p in range(n_pivot)], dtype=object)
    on_path = (np.asarray(pre.sum(axis=0)).ravel() > 0) & (np.asarray(suf.sum(axis=1)).ravel() > 0)

    out = {}
    for r in cats:
        members = np.array([cat_arr[p] == r for p in range(n_pivot)], dtype=bool)
        linked = np.flatnonzero(members & on_path)
        keep = [np.arange(g.size(t)) for t in range(len(g.node_types))]
        s_set = np.flatnonzero(np.asarray(pre[:, linked].sum(axis=1)).ravel() > 0)
        t_set = np.flatnonzero(np.asarray(suf[linked].sum(axis=0)).ravel() > 0)
        if src_t == dst_t:
            keep[src_t] = np.union1d(s_set, t_set)
        else:
            keep[src_t], keep[dst_t] = s_set, t_set
        keep[k] = np.flatnonzero(members)
        if not members.any():
            log.warning("category %r has no pivot nodes; its sub-network is empty", r)
        out[r] = restrict(g, keep)
    return out
