"""Typed weighted directed graphs (heterogeneous information networks).

Each link type owns one sparse CSR weight matrix of shape
``(|source type|, |target type|)``.  Node ids are dense per-type indices.
Hole augmentation appends one absorbing node at the last index of every type
so that every transition row has positive mass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    AlreadyAugmented,
    NegativeWeight,
    NoSuchPair,
    NotAugmented,
    TypeMismatch,
    UnknownNode,
    UnknownType,
)

HOLE = "<hole>"


@dataclass(frozen=True)
class Schema:
    node_types: tuple[str, ...]
    link_types: tuple[tuple[str, int, int], ...]

    def node_type_id(self, name: str | int) -> int:
        return _resolve(name, self.node_types, "node type")

    def link_type_id(self, name: str | int) -> int:
        return _resolve(name, [lt[0] for lt in self.link_types], "link type")

    def link_name(self, e: int) -> str:
        return self.link_types[e][0]

    def endpoints(self, e: int) -> tuple[int, int]:
        _, s, t = self.link_types[e]
        return s, t

    def outgoing(self, t: int) -> list[int]:
        return [e for e, (_, s, _) in enumerate(self.link_types) if s == t]

    def adjacency_counts(self) -> np.ndarray:
        """Type-level adjacency matrix; entry (s, t) counts link types s -> t."""
        k = len(self.node_types)
        a = np.zeros((k, k), dtype=np.int64)
        for _, s, t in self.link_types:
            a[s, t] += 1
        return a


def _resolve(name, names, what):
    if isinstance(name, (int, np.integer)):
        if not 0 <= name < len(names):
            raise UnknownType(f"{what} id {name} out of range")
        return int(name)
    try:
        return list(names).index(name)
    except ValueError:
        raise UnknownType(f"unknown {what} {name!r}") from None


@dataclass(frozen=True, eq=False)
class TypedGraph:
    """Immutable typed multigraph, canonicalised to one weighted edge per
    (source, target, link type).

    ``node_types`` holds ``(name, cardinality)``; once augmented the
    cardinality includes the hole.  ``node_names`` (optional) labels the real
    nodes of each type and is never extended with holes.
    """

    node_types: tuple[tuple[str, int], ...]
    link_types: tuple[tuple[str, int, int], ...]
    adjacency: tuple[sp.csr_matrix, ...]
    augmented: bool = False
    node_names: tuple[tuple[str, ...], ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(self.adjacency) != len(self.link_types):
            raise ValueError("one adjacency matrix per link type required")
        for (name, s, t), w in zip(self.link_types, self.adjacency):
            if w.shape != (self.size(s), self.size(t)):
                raise ValueError(f"link type {name}: shape {w.shape} does not match its node types")

    # ---- lookups
    def schema(self) -> Schema:
        return Schema(tuple(n for n, _ in self.node_types), self.link_types)

    def node_type_id(self, name: str | int) -> int:
        return _resolve(name, [n for n, _ in self.node_types], "node type")

    def link_type_id(self, name: str | int) -> int:
        return _resolve(name, [lt[0] for lt in self.link_types], "link type")

    def size(self, t: int) -> int:
        return self.node_types[t][1]

    def n_real(self, t: int) -> int:
        return self.size(t) - 1 if self.augmented else self.size(t)

    def hole(self, t: int) -> int:
        if not self.augmented:
            raise NotAugmented("graph has no hole nodes")
        return self.size(t) - 1

    def weights(self, e: str | int) -> sp.csr_matrix:
        return self.adjacency[self.link_type_id(e)]

    def node_label(self, t: int, i: int) -> str:
        if self.augmented and i == self.size(t) - 1:
            return HOLE
        if self.node_names is None:
            return str(i)
        return self.node_names[t][i]

    def node_index(self, t: int, label: str) -> int:
        if label == HOLE:
            return self.hole(t)
        if self.node_names is None:
            try:
                i = int(label)
            except ValueError:
                raise UnknownNode(f"no node {label!r} of type {self.node_types[t][0]}") from None
        else:
            lookup = self._cache.setdefault(("labels", t), {n: k for k, n in enumerate(self.node_names[t])})
            if label not in lookup:
                raise UnknownNode(f"no node {label!r} of type {self.node_types[t][0]}")
            i = lookup[label]
        if not 0 <= i < self.n_real(t):
            raise UnknownNode(f"node index {i} out of range for type {self.node_types[t][0]}")
        return i

    def n_edges(self, e: str | int) -> int:
        return self.weights(e).nnz

    def edges(self) -> Iterator[tuple[int, int, int, float]]:
        """Yield ``(link type, src, dst, weight)`` in link-type, row-major order."""
        for e, w in enumerate(self.adjacency):
            coo = w.tocoo()
            for i, j, v in zip(coo.row, coo.col, coo.data):
                yield e, int(i), int(j), float(v)

    def equals(self, other: "TypedGraph") -> bool:
        if (self.node_types, self.link_types, self.augmented) != (
            other.node_types,
            other.link_types,
            other.augmented,
        ):
            return False
        if (self.node_names is None) != (other.node_names is None) or self.node_names != other.node_names:
            return False
        return all(_same_sparse(a, b) for a, b in zip(self.adjacency, other.adjacency))

    def replace(self, **changes) -> "TypedGraph":
        fields = dict(
            node_types=self.node_types,
            link_types=self.link_types,
            adjacency=self.adjacency,
            augmented=self.augmented,
            node_names=self.node_names,
        )
        fields.update(changes)
        return TypedGraph(**fields)


def _same_sparse(a, b) -> bool:
    if a.shape != b.shape:
        return False
    d = (a - b).tocsr()
    d.eliminate_zeros()
    return d.nnz == 0


def _canonical(m) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=np.float64)
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


# ---------------------------------------------------------------- builders

def build_graph(
    node_type_decls: Sequence[tuple[str, int | Sequence[str]]],
    link_type_decls: Sequence[tuple[str, str, str]],
    weighted_edges: Iterable[tuple],
) -> TypedGraph:
    """Build an unaugmented graph.

    ``node_type_decls`` gives each type a node count or a list of labels.
    Each edge is ``(src_type, src, link_type, dst_type, dst, weight)`` where
    ``src``/``dst`` are integer indices or labels.  Duplicate edges are
    summed; zero-weight edges are dropped.
    """
    type_names = [n for n, _ in node_type_decls]
    if len(set(type_names)) != len(type_names):
        raise ValueError("duplicate node type names")
    sizes, names, lookups = [], [], []
    labelled = any(not isinstance(spec, (int, np.integer)) for _, spec in node_type_decls)
    for name, spec in node_type_decls:
        if isinstance(spec, (int, np.integer)):
            sizes.append(int(spec))
            labels = tuple(str(i) for i in range(int(spec)))
        else:
            labels = tuple(str(x) for x in spec)
            if len(set(labels)) != len(labels):
                raise ValueError(f"duplicate node labels in type {name}")
            sizes.append(len(labels))
        names.append(labels)
        lookups.append({lab: i for i, lab in enumerate(labels)})

    links = []
    for lname, s, t in link_type_decls:
        links.append((lname, _resolve(s, type_names, "node type"), _resolve(t, type_names, "node type")))
    link_names = [lt[0] for lt in links]
    if len(set(link_names)) != len(link_names):
        raise ValueError("duplicate link type names")

    rows = [[] for _ in links]
    cols = [[] for _ in links]
    vals = [[] for _ in links]

    def endpoint(t, x):
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < sizes[t]:
                raise UnknownNode(f"node index {x} out of range for type {type_names[t]}")
            return int(x)
        try:
            return lookups[t][str(x)]
        except KeyError:
            raise UnknownNode(f"no node {x!r} of type {type_names[t]}") from None

    for src_type, src, lname, dst_type, dst, w in weighted_edges:
        e = _resolve(lname, link_names, "link type")
        st = _resolve(src_type, type_names, "node type")
        dt = _resolve(dst_type, type_names, "node type")
        _, ls, lt = links[e]
        if (st, dt) != (ls, lt):
            raise TypeMismatch(
                f"edge {src_type}:{src} -> {dst_type}:{dst} does not fit link type "
                f"{lname} ({type_names[ls]} -> {type_names[lt]})"
            )
        w = float(w)
        if not np.isfinite(w):
            raise ValueError(f"non-finite weight {w} on link type {lname}")
        if w < 0:
            raise NegativeWeight(f"negative weight {w} on link type {lname}")
        rows[e].append(endpoint(st, src))
        cols[e].append(endpoint(dt, dst))
        vals[e].append(w)

    adjacency = tuple(
        _canonical(sp.coo_matrix((vals[e], (rows[e], cols[e])), shape=(sizes[s], sizes[t])))
        for e, (_, s, t) in enumerate(links)
    )
    return TypedGraph(
        node_types=tuple(zip(type_names, sizes)),
        link_types=tuple(links),
        adjacency=adjacency,
        augmented=False,
        node_names=tuple(names) if labelled else None,
    )


def from_matrices(node_types, link_types, matrices, node_names=None) -> TypedGraph:
    """Build an unaugmented graph straight from per-link-type weight matrices."""
    type_names = [n for n, _ in node_types]
    links = tuple(
        (n, _resolve(s, type_names, "node type"), _resolve(t, type_names, "node type")) for n, s, t in link_types
    )
    adjacency = []
    for m in matrices:
        m = _canonical(m)
        if m.nnz and (m.data.min() < 0):
            raise NegativeWeight("negative weight in matrix")
        if m.nnz and not np.all(np.isfinite(m.data)):
            raise ValueError("non-finite weight in matrix")
        adjacency.append(m)
    return TypedGraph(
        node_types=tuple((n, int(c)) for n, c in node_types),
        link_types=links,
        adjacency=tuple(adjacency),
        node_names=None if node_names is None else tuple(tuple(x) for x in node_names),
    )


def augment_with_holes(g: TypedGraph) -> TypedGraph:
    if g.augmented:
        raise AlreadyAugmented("graph already carries hole nodes")
    adjacency = []
    for (_, s, t), w in zip(g.link_types, g.adjacency):
        ns, nt = g.size(s), g.size(t)
        dangling = np.flatnonzero(np.diff(w.indptr) == 0)
        coo = w.tocoo()
        hole_rows = np.concatenate([dangling, [ns]])
        rows = np.concatenate([coo.row, hole_rows])
        cols = np.concatenate([coo.col, np.full(len(hole_rows), nt)])
        vals = np.concatenate([coo.data, np.ones(len(hole_rows))])
        adjacency.append(_canonical(sp.coo_matrix((vals, (rows, cols)), shape=(ns + 1, nt + 1))))
    return g.replace(
        node_types=tuple((n, c + 1) for n, c in g.node_types),
        adjacency=tuple(adjacency),
        augmented=True,
    )


def strip_holes(g: TypedGraph) -> TypedGraph:
    if not g.augmented:
        raise NotAugmented("graph has no hole nodes to strip")
    adjacency = tuple(
        _canonical(w[: g.size(s) - 1, : g.size(t) - 1]) for (_, s, t), w in zip(g.link_types, g.adjacency)
    )
    return g.replace(
        node_types=tuple((n, c - 1) for n, c in g.node_types),
        adjacency=adjacency,
        augmented=False,
    )


def stochastic(g: TypedGraph, e: str | int) -> sp.csr_matrix:
    """Row-normalised transition matrix of one link type (cached per graph)."""
    if not g.augmented:
        raise NotAugmented("transition rows are undefined before hole augmentation")
    e = g.link_type_id(e)
    key = ("stochastic", e)
    if key not in g._cache:
        w = g.adjacency[e]
        sums = np.asarray(w.sum(axis=1)).ravel()
        s = sp.diags(1.0 / sums) @ w
        g._cache[key] = _canonical(s)
    return g._cache[key]


def collapse_link_types(g: TypedGraph, src_t: str | int, dst_t: str | int, name: str = "ALL") -> TypedGraph:
    """Replace every link type from ``src_t`` to ``dst_t`` by their entry-wise sum.

    The merged type takes the position of the first replaced one.  Augmented
    graphs are stripped, collapsed and re-augmented so hole edges stay
    consistent.
    """
    if g.augmented:
        return augment_with_holes(collapse_link_types(strip_holes(g), src_t, dst_t, name))
    s, t = g.node_type_id(src_t), g.node_type_id(dst_t)
    members = [e for e, (_, ls, lt) in enumerate(g.link_types) if (ls, lt) == (s, t)]
    if not members:
        raise NoSuchPair(f"no link type from {g.node_types[s][0]} to {g.node_types[t][0]}")
    total = g.adjacency[members[0]].copy()
    for e in members[1:]:
        total = total + g.adjacency[e]
    links, adjacency = [], []
    for e, (lt, w) in enumerate(zip(g.link_types, g.adjacency)):
        if e == members[0]:
            links.append((name, s, t))
            adjacency.append(_canonical(total))
        elif e not in members:
            if lt[0] == name:
                raise ValueError(f"link type name {name!r} already taken")
            links.append(lt)
            adjacency.append(w)
    return g.replace(link_types=tuple(links), adjacency=tuple(adjacency))


def with_inverses(g: TypedGraph, inverses: dict[str, str]) -> TypedGraph:
    """Append transposed link types, e.g. ``{"AP": "PA"}`` adds PA = APᵀ."""
    if g.augmented:
        raise AlreadyAugmented("add inverse link types before hole augmentation")
    links, adjacency = list(g.link_types), list(g.adjacency)
    for base, inv in inverses.items():
        e = g.link_type_id(base)
        if inv in [lt[0] for lt in links]:
            raise ValueError(f"link type name {inv!r} already taken")
        _, s, t = g.link_types[e]
        links.append((inv, t, s))
        adjacency.append(_canonical(g.adjacency[e].T))
    return g.replace(link_types=tuple(links), adjacency=tuple(adjacency))


def restrict(g: TypedGraph, keep: Sequence[np.ndarray]) -> TypedGraph:
    """Induced subgraph keeping, per node type, the given sorted real indices."""
    if g.augmented:
        raise AlreadyAugmented("restrict the raw graph, then augment")
    keep = [np.asarray(k, dtype=np.int64) for k in keep]
    adjacency = tuple(
        _canonical(w[keep[s]][:, keep[t]]) for (_, s, t), w in zip(g.link_types, g.adjacency)
    )
    names = []
    for t, k in enumerate(keep):
        names.append(tuple(g.node_label(t, int(i)) for i in k))
    return g.replace(
        node_types=tuple((n, len(k)) for (n, _), k in zip(g.node_types, keep)),
        adjacency=adjacency,
        node_names=tuple(names),
    )
