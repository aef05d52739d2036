"""Path-constrained random walks over a hole-augmented typed graph.

Exclusion-free meta-paths are a left-to-right chain of sparse stochastic
products.  With exclusions the forbidden node depends on the walk's own
history, so the frontier is kept per *state*: a source row together with the
nodes it visited at every slot that a later exclusion still refers to.
Entering an excluded slot, each transition row is renormalised over the
non-forbidden candidates; if nothing is left, the mass drops into the hole.
"""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import BatchError, NotAugmented, PathExplosion, SchemaMismatch
from .graph import TypedGraph, stochastic
from .metapath import MetaPath, format_metapath, required_exclusions

ROW_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PcrwResult:
    """Endpoint distribution table; row s, column t holds P(t | s, meta-path).

    Rows cover every node of the source type and columns every node of the
    target type, holes included.  ``metapath`` is None for aggregated
    features, in which case ``label`` names the feature.
    """

    metapath: MetaPath | None
    table: sp.csr_matrix
    label: str = ""

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        mp = self.metapath
        if mp is None:
            return "?"
        # plain chain when the exclusions are just the defaults
        return mp.name if set(mp.exclusions) == required_exclusions(mp) else format_metapath(mp)

    @property
    def shape(self):
        return self.table.shape

    def row(self, s: int) -> np.ndarray:
        return self.table[s].toarray().ravel()

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.table.sum(axis=1)).ravel()


def check_metapath(g: TypedGraph, mp: MetaPath) -> None:
    if not g.augmented:
        raise NotAugmented("random walks need a hole-augmented graph")
    for i, e in enumerate(mp.steps):
        if not 0 <= e < len(g.link_types):
            raise SchemaMismatch(f"step {i + 1}: link type id {e} not in graph")
        name, s, t = g.link_types[e]
        if (s, t) != (mp.node_types[i], mp.node_types[i + 1]):
            raise SchemaMismatch(f"step {i + 1}: link type {name} does not join the path's node types")
        if mp.names and mp.names[i] != name:
            raise SchemaMismatch(f"step {i + 1}: expected link type {mp.names[i]}, graph has {name}")


def pcrw(g: TypedGraph, mp: MetaPath) -> PcrwResult:
    check_metapath(g, mp)
    mats = [stochastic(g, e) for e in mp.steps]
    if mp.exclusions:
        table = _walk_with_exclusions(g, mp, mats)
    else:
        table = mats[0]
        for m in mats[1:]:
            table = table @ m
    table = sp.csr_matrix(table)
    table.eliminate_zeros()
    table.sort_indices()
    return PcrwResult(mp, table)


def _live(exclusions, slot):
    return sorted({a for a, b in exclusions if a <= slot < b})


def _merge_states(src, mem, F):
    keys = np.column_stack([src, mem]) if mem.shape[1] else src[:, None]
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    if len(uniq) == len(src):
        order = np.argsort(inverse)
        return src[order], mem[order], F[order]
    agg = sp.csr_matrix((np.ones(len(src)), (inverse, np.arange(len(src)))), shape=(len(uniq), len(src)))
    return uniq[:, 0].copy(), uniq[:, 1:].copy(), (agg @ F).tocsr()


def _restricted_step(F, S, forbidden, hole):
    """One transition where each state row has its own forbidden targets.

    ``forbidden`` is (states x k); hole entries are never forbidden.
    """
    Fc = F.tocoo()
    r, v, m = Fc.row, Fc.col, Fc.data
    removed = np.zeros(len(r))
    blocked = np.zeros(len(r), dtype=np.int64)
    k = forbidden.shape[1]
    for j in range(k):
        f = forbidden[r, j]
        ok = f != hole
        for jj in range(j):
            ok &= f != forbidden[r, jj]
        if not ok.any():
            continue
        vals = np.asarray(S[v[ok], f[ok]]).ravel()
        removed[ok] += vals
        blocked[ok] += vals > 0
    sole = blocked == np.diff(S.indptr)[v]
    with np.errstate(divide="ignore"):
        scale = np.where(sole, 0.0, 1.0 / np.where(sole, 1.0, 1.0 - removed))
    G = sp.csr_matrix((m * scale, (r, v)), shape=F.shape)
    nxt = (G @ S).tocsr()

    rows = np.repeat(np.arange(F.shape[0]), k)
    cols = forbidden.ravel()
    keep = cols != hole
    if keep.any():
        mask = sp.csr_matrix((np.ones(keep.sum()), (rows[keep], cols[keep])), shape=nxt.shape)
        mask.sum_duplicates()
        mask.data[:] = 1.0
        nxt = nxt - nxt.multiply(mask)

    if sole.any():
        dropped = np.bincount(r[sole], weights=m[sole], minlength=F.shape[0])
        hit = np.flatnonzero(dropped)
        nxt = nxt + sp.csr_matrix((dropped[hit], (hit, np.full(len(hit), hole))), shape=nxt.shape)
    nxt = sp.csr_matrix(nxt)
    nxt.eliminate_zeros()
    return nxt


def _walk_with_exclusions(g, mp, mats):
    excl = mp.exclusions
    n0 = g.size(mp.node_types[0])
    src = np.arange(n0)
    positions = _live(excl, 0)
    mem = np.empty((n0, len(positions)), dtype=np.int64)
    if positions:
        mem[:, 0] = src
    F = sp.identity(n0, format="csr")

    for i, S in enumerate(mats):
        slot = i + 1
        hole = g.size(mp.node_types[slot]) - 1
        targets = [positions.index(a) for a, b in excl if b == slot]
        if targets:
            F = _restricted_step(F, S, mem[:, targets], hole)
        else:
            F = (F @ S).tocsr()

        live = _live(excl, slot)
        carried = [p for p in positions if p in live]
        mem = mem[:, [positions.index(p) for p in carried]]
        if slot in live:
            Fc = F.tocoo()
            src = src[Fc.row]
            mem = np.column_stack([mem[Fc.row], Fc.col])
            F = sp.csr_matrix((Fc.data, (np.arange(Fc.nnz), Fc.col)), shape=(Fc.nnz, F.shape[1]))
            carried = carried + [slot]
        positions = carried
        src, mem, F = _merge_states(src, mem, F)

    agg = sp.csr_matrix((np.ones(len(src)), (src, np.arange(len(src)))), shape=(n0, len(src)))
    return agg @ F


def pcrw_oracle(g: TypedGraph, mp: MetaPath, src: int, budget: int = 10**6) -> np.ndarray:
    """Exact endpoint distribution from one source by enumerating every
    concrete path that satisfies the meta-path and its exclusions.

    Works from the raw augmented weights, independently of the sparse
    product machinery.
    """
    check_metapath(g, mp)
    n = len(mp.steps)
    rows = []
    for e in mp.steps:
        w = g.adjacency[e]
        rows.append([(w.indices[w.indptr[i]:w.indptr[i + 1]], w.data[w.indptr[i]:w.indptr[i + 1]])
                     for i in range(w.shape[0])])
    holes = [g.size(t) - 1 for t in mp.node_types]
    refs = [[a for a, b in mp.exclusions if b == slot] for slot in range(n + 1)]
    out = np.zeros(g.size(mp.node_types[-1]))
    expanded = 0

    def walk(i, visited, prob):
        nonlocal expanded
        expanded += 1
        if expanded > budget:
            raise PathExplosion(f"more than {budget} partial paths")
        if i == n:
            out[visited[-1]] += prob
            return
        cols, vals = rows[i][visited[-1]]
        forbidden = {visited[a] for a in refs[i + 1]} - {holes[i + 1]}
        allowed = [(int(c), float(x)) for c, x in zip(cols, vals) if int(c) not in forbidden]
        if not allowed:
            walk(i + 1, visited + [holes[i + 1]], prob)
            return
        total = sum(x for _, x in allowed)
        for c, x in allowed:
            walk(i + 1, visited + [c], prob * x / total)

    walk(0, [int(src)], 1.0)
    return out


def pcrw_batch(g: TypedGraph, mps: Sequence[MetaPath], workers: int | None = None) -> list[PcrwResult]:
    """pcrw over a list of meta-paths, results in input order."""

    def one(item):
        idx, mp = item
        try:
            return pcrw(g, mp)
        except Exception as exc:  # tagged with its position for the caller
            raise BatchError(idx, exc) from exc

    items = list(enumerate(mps))
    if not items:
        return []
    if workers == 1 or len(items) == 1:
        return [one(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, items))


def dump_triples(result: PcrwResult, g: TypedGraph, fh, source: int | None = None) -> int:
    """Write ``src,dst,prob`` CSV rows (labels, holes as ``<hole>``); returns row count."""
    mp = result.metapath
    s_t = mp.node_types[0] if mp is not None else 0
    d_t = mp.node_types[-1] if mp is not None else 0
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["src", "dst", "prob"])
    table = result.table.tocsr()
    sources = range(table.shape[0]) if source is None else [source]
    count = 0
    for s in sources:
        lo, hi = table.indptr[s], table.indptr[s + 1]
        for t, p in zip(table.indices[lo:hi], table.data[lo:hi]):
            writer.writerow([g.node_label(s_t, s), g.node_label(d_t, int(t)), repr(float(p))])
            count += 1
    return count
