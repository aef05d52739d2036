"""Tab-separated typed edge lists.

One edge per line::

    src_type <TAB> src_id <TAB> link_type <TAB> dst_type <TAB> dst_id <TAB> weight

``#`` lines and blank lines are skipped; an optional header line is skipped
when requested.  Ids are opaque strings, indexed densely per node type in
first-seen order.  Node and link types are declared by first use.
"""
from __future__ import annotations

import math
from pathlib import Path

from .errors import IngestError
from .graph import TypedGraph, build_graph

N_FIELDS = 6


def load_edgelist(path, header: bool = False) -> TypedGraph:
    path = Path(path)
    node_ids: dict[str, dict[str, int]] = {}
    links: dict[str, tuple[str, str]] = {}
    edges = []
    skipped_header = not header
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if not skipped_header:
                skipped_header = True
                continue
            fields = line.split("\t")
            if len(fields) != N_FIELDS:
                raise IngestError(path, lineno, f"expected {N_FIELDS} tab-separated fields, got {len(fields)}")
            st, sid, lt, dt, did, wtxt = fields
            if not all((st, sid, lt, dt, did)):
                raise IngestError(path, lineno, "empty type, id or link type field")
            try:
                w = float(wtxt)
            except ValueError:
                raise IngestError(path, lineno, f"weight {wtxt!r} is not a number") from None
            if not math.isfinite(w):
                raise IngestError(path, lineno, f"weight {wtxt!r} is not finite")
            if w < 0:
                raise IngestError(path, lineno, f"weight {wtxt!r} is negative")
            if lt in links and links[lt] != (st, dt):
                a, b = links[lt]
                raise IngestError(path, lineno, f"link type {lt} was declared {a} -> {b}, here used {st} -> {dt}")
            links.setdefault(lt, (st, dt))
            for t, i in ((st, sid), (dt, did)):
                ids = node_ids.setdefault(t, {})
                ids.setdefault(i, len(ids))
            edges.append((st, sid, lt, dt, did, w))
    if not edges:
        raise IngestError(path, 0, "no edges found")
    return build_graph(
        [(t, list(ids)) for t, ids in node_ids.items()],
        [(lt, s, d) for lt, (s, d) in links.items()],
        edges,
    )


def dump_edgelist(g: TypedGraph, fh, header: bool = False) -> None:
    """Write an unaugmented graph in the edge-list format (link-type order, row-major)."""
    if g.augmented:
        raise ValueError("dump the raw graph, not the hole-augmented one")
    if header:
        fh.write("src_type\tsrc_id\tlink_type\tdst_type\tdst_id\tweight\n")
    for e, i, j, w in g.edges():
        name, s, t = g.link_types[e]
        fh.write(
            f"{g.node_types[s][0]}\t{g.node_label(s, i)}\t{name}\t"
            f"{g.node_types[t][0]}\t{g.node_label(t, j)}\t{w!r}\n"
        )


def labelled_edges(g: TypedGraph) -> set[tuple]:
    """Index-free view of a graph, for comparisons up to relabelling."""
    out = set()
    for e, i, j, w in g.edges():
        name, s, t = g.link_types[e]
        out.add((g.node_types[s][0], g.node_label(s, i), name, g.node_types[t][0], g.node_label(t, j), w))
    return out
