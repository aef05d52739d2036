"""Meta-paths: chains of link types with node-revisit exclusions.

Concrete syntax::

    RT-UH
    AP-PPinv-PA !(1,3)
    RP-RP-UH !raw          # no automatic exclusions

An exclusion ``(a, b)`` forbids the walker from standing, at node slot ``b``,
on the node it occupied at slot ``a`` (slots run 0..n over V_0..V_n).
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import BadExclusion, ChainMismatch, UnknownLinkType
from .graph import Schema


@dataclass(frozen=True)
class MetaPath:
    steps: tuple[int, ...]
    node_types: tuple[int, ...]
    exclusions: tuple[tuple[int, int], ...] = ()
    names: tuple[str, ...] = ()

    def __len__(self):
        return len(self.steps)

    @property
    def name(self) -> str:
        return "-".join(self.names) if self.names else "-".join(map(str, self.steps))

    @property
    def source_type(self) -> int:
        return self.node_types[0]

    @property
    def target_type(self) -> int:
        return self.node_types[-1]

    def without_exclusions(self) -> "MetaPath":
        return MetaPath(self.steps, self.node_types, (), self.names)

    def __str__(self):
        return format_metapath(self)


def make_metapath(schema: Schema, steps, exclusions=(), auto_exclude: bool = True) -> MetaPath:
    """Validate a chain of link types (ids or names) and attach exclusions."""
    if len(steps) == 0:
        raise ChainMismatch("a meta-path needs at least one step")
    ids = []
    for s in steps:
        try:
            ids.append(schema.link_type_id(s))
        except Exception:
            raise UnknownLinkType(f"unknown link type {s!r}") from None
    node_types = [schema.endpoints(ids[0])[0]]
    for i, e in enumerate(ids):
        src, dst = schema.endpoints(e)
        if src != node_types[-1]:
            raise ChainMismatch(
                f"step {i + 1} ({schema.link_name(e)}) starts at {schema.node_types[src]}, "
                f"previous step ends at {schema.node_types[node_types[-1]]}"
            )
        node_types.append(dst)
    mp = MetaPath(tuple(ids), tuple(node_types), (), tuple(schema.link_name(e) for e in ids))
    mp = _with_exclusions(mp, exclusions)
    return default_exclusions(mp) if auto_exclude else mp


def _with_exclusions(mp: MetaPath, exclusions) -> MetaPath:
    n = len(mp.steps)
    out = set(mp.exclusions)
    for a, b in exclusions:
        a, b = int(a), int(b)
        if not (0 <= a < b <= n):
            raise BadExclusion(f"exclusion ({a},{b}) needs 0 <= a < b <= {n}")
        if mp.node_types[a] != mp.node_types[b]:
            raise BadExclusion(f"exclusion ({a},{b}) joins slots of different node types")
        out.add((a, b))
    return MetaPath(mp.steps, mp.node_types, tuple(sorted(out)), mp.names)


def required_exclusions(mp: MetaPath) -> set[tuple[int, int]]:
    """The always-on revisit rules for a chain.

    * penultimate slot may not be the start node when both share a type;
    * on five-slot palindromic shapes T0 T1 X T1 T0 the walker may not come
      back to the slot-1 node at slot 3.
    """
    nt = mp.node_types
    n = len(mp.steps)
    req = set()
    if n - 1 > 0 and nt[n - 1] == nt[0]:
        req.add((0, n - 1))
    if n == 4 and nt[0] == nt[4] and nt[1] == nt[3]:
        req.add((1, 3))
    return req


def default_exclusions(mp: MetaPath) -> MetaPath:
    return _with_exclusions(mp, required_exclusions(mp))


def format_metapath(mp: MetaPath) -> str:
    text = mp.name
    missing = required_exclusions(mp) - set(mp.exclusions)
    if missing:
        text += " !raw"
    for a, b in mp.exclusions:
        text += f" !({a},{b})"
    return text


_CLAUSE = re.compile(r"!\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)|!raw")


def parse_metapath(text: str, schema: Schema, auto_exclude: bool = True) -> MetaPath:
    bang = text.find("!")
    body = text if bang < 0 else text[:bang]
    if not body.strip():
        raise ChainMismatch("empty meta-path", pos=0)

    steps = []
    start = 0
    for tok in body.rstrip().split("-"):
        name = tok.strip()
        at = start + len(tok) - len(tok.lstrip())
        if not name:
            raise UnknownLinkType("empty link type token", pos=at)
        try:
            steps.append(schema.link_type_id(name))
        except Exception:
            raise UnknownLinkType(f"unknown link type {name!r}", pos=at) from None
        start += len(tok) + 1

    exclusions, raw = [], False
    i = len(text) if bang < 0 else bang
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _CLAUSE.match(text, i)
        if m is None:
            raise BadExclusion(f"cannot parse exclusion clause {text[i:]!r}", pos=i)
        if m.group(0) == "!raw":
            raw = True
        else:
            exclusions.append((int(m.group(1)), int(m.group(2))))
        i = m.end()
    return make_metapath(schema, steps, exclusions, auto_exclude=auto_exclude and not raw)


def concat(p: MetaPath, q: MetaPath) -> MetaPath:
    """Join two exclusion-free chains (q must start where p ends)."""
    if p.target_type != q.source_type:
        raise ChainMismatch("paths do not meet")
    return MetaPath(p.steps + q.steps, p.node_types + q.node_types[1:], (), p.names + q.names)


def enumerate_metapaths(
    schema: Schema,
    src_t,
    dst_t,
    max_len: int,
    exclude=None,
    auto_exclude: bool = True,
) -> list[MetaPath]:
    """All chains of 1..max_len steps from ``src_t`` to ``dst_t``.

    ``exclude`` (a link type or a MetaPath) removes the chain equal to the
    target relation itself.  Output is length-major, then lexicographic by
    link-type id.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    s, t = schema.node_type_id(src_t), schema.node_type_id(dst_t)
    if exclude is None:
        banned = None
    elif isinstance(exclude, MetaPath):
        banned = exclude.steps
    else:
        banned = (schema.link_type_id(exclude),)

    out = []
    frontier = [((), s)]
    for length in range(1, max_len + 1):
        nxt = []
        for steps, at in frontier:
            for e in schema.outgoing(at):
                nxt.append((steps + (e,), schema.endpoints(e)[1]))
        nxt.sort(key=lambda x: x[0])
        for steps, at in nxt:
            if at == t and steps != banned:
                out.append(make_metapath(schema, steps, auto_exclude=auto_exclude))
        frontier = nxt
    return out


def count_walks(schema: Schema, src_t, dst_t, max_len: int) -> int:
    """Number of type-level walks of length 1..max_len (matrix-power count)."""
    a = schema.adjacency_counts()
    s, t = schema.node_type_id(src_t), schema.node_type_id(dst_t)
    total, power = 0, a.copy()
    for _ in range(max_len):
        total += int(power[s, t])
        power = power @ a
    return total


__all__ = [
    "MetaPath",
    "concat",
    "count_walks",
    "default_exclusions",
    "enumerate_metapaths",
    "format_metapath",
    "make_metapath",
    "parse_metapath",
    "required_exclusions",
]
