"""Small graphs used by tests, scripts and the bundled data files.

``reply_example`` and ``bibliographic_toy`` transcribe the two worked examples
(reply graph around user u2; 5-author bibliographic network).
``twitter_planted`` is a community-structured user/hashtag network with a
known generative story, and ``random_hin`` draws arbitrary small HINs for
property tests.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .graph import TypedGraph, build_graph, from_matrices, with_inverses
from .metapath import MetaPath, make_metapath

TWITTER_NODE_TYPES = ("user", "hashtag")
TWITTER_LINKS = (("RT", "user", "user"), ("RP", "user", "user"), ("MT", "user", "user"), ("UH", "user", "hashtag"))


def reply_example() -> TypedGraph:
    """Replies u2<->u1, u1->u3, u1->u4; u2 posts h1,h2, u1 posts h1..h3,
    u3 posts h3, u4 posts h4.  RT and MT are present but empty."""
    users = ["u1", "u2", "u3", "u4"]
    tags = ["h1", "h2", "h3", "h4"]
    edges = [
        ("user", "u2", "RP", "user", "u1", 1),
        ("user", "u1", "RP", "user", "u2", 1),
        ("user", "u1", "RP", "user", "u3", 1),
        ("user", "u1", "RP", "user", "u4", 1),
        ("user", "u2", "UH", "hashtag", "h1", 1),
        ("user", "u2", "UH", "hashtag", "h2", 1),
        ("user", "u1", "UH", "hashtag", "h1", 1),
        ("user", "u1", "UH", "hashtag", "h2", 1),
        ("user", "u1", "UH", "hashtag", "h3", 1),
        ("user", "u3", "UH", "hashtag", "h3", 1),
        ("user", "u4", "UH", "hashtag", "h4", 1),
    ]
    return build_graph([("user", users), ("hashtag", tags)], TWITTER_LINKS, edges)


BIB_INVERSES = {"AP": "PA", "PP": "PPinv", "PV": "VP", "PT": "TP"}


def bibliographic_toy(inverses: bool = False) -> TypedGraph:
    """Authors a1..a5, papers p1..p4, venues v1..v2, topics t1..t3."""
    writes = {"a1": ["p1"], "a2": ["p1", "p2"], "a3": ["p1", "p3"], "a4": ["p2", "p3", "p4"], "a5": ["p3", "p4"]}
    cites = {"p1": ["p2", "p3"], "p2": ["p3"], "p4": ["p3"]}
    venue = {"p1": "v1", "p2": "v1", "p3": "v1", "p4": "v2"}
    topic = {"p1": "t1", "p2": "t1", "p3": "t2", "p4": "t3"}
    edges = []
    for a, ps in writes.items():
        edges += [("author", a, "AP", "paper", p, 1) for p in ps]
    for p, qs in cites.items():
        edges += [("paper", p, "PP", "paper", q, 1) for q in qs]
    edges += [("paper", p, "PV", "venue", v, 1) for p, v in venue.items()]
    edges += [("paper", p, "PT", "topic", t, 1) for p, t in topic.items()]
    g = build_graph(
        [
            ("author", [f"a{i}" for i in range(1, 6)]),
            ("paper", [f"p{i}" for i in range(1, 5)]),
            ("venue", ["v1", "v2"]),
            ("topic", ["t1", "t2", "t3"]),
        ],
        [("AP", "author", "paper"), ("PP", "paper", "paper"), ("PV", "paper", "venue"), ("PT", "paper", "topic")],
        edges,
    )
    return with_inverses(g, BIB_INVERSES) if inverses else g


def twitter_planted(
    n_communities: int = 4,
    users_per_community: int = 60,
    tags_per_community: int = 6,
    tags_per_user: int = 4,
    max_tag_count: int = 1,
    seed: int = 0,
) -> TypedGraph:
    """Community-structured Twitter-like HIN.

    Hashtags belong to communities; each user posts ``tags_per_user`` of
    its community's hashtags in a cyclic design so every hashtag has the same
    number of posters.  Mentions stay inside the community 90% of the time,
    replies are reciprocal and 70% internal, retweets only 30% internal, so
    MT-UH carries the strongest signal about a user's own hashtags.
    Posting counts are drawn from 1..max_tag_count; with the default of 1
    every hashtag also has the same in-strength, so reshuffled copies carry
    no popularity signal.
    """
    rng = np.random.default_rng(seed)
    K, m, q, d = n_communities, users_per_community, tags_per_community, tags_per_user
    n_users, n_tags = K * m, K * q
    community = np.repeat(np.arange(K), m)
    members = [np.flatnonzero(community == k) for k in range(K)]

    edges = []
    for k in range(K):
        perm = rng.permutation(q)
        for j, u in enumerate(members[k]):
            for l in range(d):
                h = k * q + perm[(j * d + l) % q]
                edges.append(("user", f"u{u}", "UH", "hashtag", f"h{h}", int(rng.integers(1, max_tag_count + 1))))

    def partner(u, p_inside):
        pool = members[community[u]] if rng.random() < p_inside else np.arange(n_users)
        v = u
        while v == u:
            v = int(rng.choice(pool))
        return v

    for u in range(n_users):
        for _ in range(4):
            edges.append(("user", f"u{u}", "MT", "user", f"u{partner(u, 0.9)}", int(rng.integers(1, 4))))
        for _ in range(3):
            edges.append(("user", f"u{u}", "RT", "user", f"u{partner(u, 0.3)}", int(rng.integers(1, 3))))
        v = partner(u, 0.7)
        w = int(rng.integers(1, 3))
        edges.append(("user", f"u{u}", "RP", "user", f"u{v}", w))
        edges.append(("user", f"u{v}", "RP", "user", f"u{u}", w))

    return build_graph(
        [("user", [f"u{i}" for i in range(n_users)]), ("hashtag", [f"h{i}" for i in range(n_tags)])],
        TWITTER_LINKS,
        edges,
    )


def random_hin(
    rng: np.random.Generator,
    max_nodes: int = 50,
    max_types: int = 3,
    max_links: int = 4,
    mean_degree: float = 2.5,
) -> TypedGraph:
    """Random small HIN with integer weights, some dangling rows and self-loops possible."""
    k = int(rng.integers(1, max_types + 1))
    sizes = [int(rng.integers(2, max_nodes + 1)) for _ in range(k)]
    n_links = int(rng.integers(1, max_links + 1))
    links, mats = [], []
    for e in range(n_links):
        s, t = int(rng.integers(k)), int(rng.integers(k))
        p = min(1.0, mean_degree / sizes[t]) * rng.uniform(0.3, 1.0)
        mask = rng.random((sizes[s], sizes[t])) < p
        w = np.where(mask, rng.integers(1, 6, size=mask.shape), 0).astype(float)
        links.append((f"L{e}", f"T{s}", f"T{t}"))
        mats.append(sp.csr_matrix(w))
    return from_matrices([(f"T{i}", n) for i, n in enumerate(sizes)], links, mats)


def random_metapath(rng: np.random.Generator, g: TypedGraph, max_len: int = 4, exclusions: bool = True) -> MetaPath | None:
    """Random chain over g's schema; optionally with random valid exclusions
    on top of the default ones (may be None if the walk dead-ends)."""
    schema = g.schema()
    n = int(rng.integers(1, max_len + 1))
    starts = [t for t in range(len(schema.node_types)) if schema.outgoing(t)]
    at = int(rng.choice(starts))
    steps = []
    for _ in range(n):
        out = schema.outgoing(at)
        if not out:
            break
        e = int(rng.choice(out))
        steps.append(e)
        at = schema.endpoints(e)[1]
    if not steps:
        return None
    mp = make_metapath(schema, steps, auto_exclude=exclusions)
    if exclusions:
        pairs = [
            (a, b)
            for a in range(len(steps) + 1)
            for b in range(a + 1, len(steps) + 1)
            if mp.node_types[a] == mp.node_types[b]
        ]
        if pairs:
            extra = [pairs[i] for i in rng.permutation(len(pairs))[: int(rng.integers(0, len(pairs) + 1))]]
            mp = make_metapath(schema, steps, extra, auto_exclude=True)
    return mp


def dblp_topics(
    n_topics: int = 3,
    authors_per_topic: int = 30,
    papers_per_topic: int = 40,
    venues_per_topic: int = 2,
    seed: int = 0,
) -> TypedGraph:
    """Bibliographic network with single-topic papers.

    Each paper has 2-3 authors drawn mostly from its topic's author pool,
    one venue of its topic and cites up to three earlier papers, mostly of
    the same topic (repeated citations add up).  Only base link types; add
    inverses with ``with_inverses(g, BIB_INVERSES)``.
    """
    rng = np.random.default_rng(seed)
    n_auth, n_pap = n_topics * authors_per_topic, n_topics * papers_per_topic
    edges = []
    for p in range(n_pap):
        k = p % n_topics
        pool = np.arange(k * authors_per_topic, (k + 1) * authors_per_topic)
        n_a = int(rng.integers(2, 4))
        authors = set(rng.choice(pool, size=n_a, replace=False).tolist())
        if rng.random() < 0.1:
            authors.add(int(rng.integers(n_auth)))
        edges += [("author", f"a{a}", "AP", "paper", f"p{p}", 1) for a in sorted(authors)]
        edges.append(("paper", f"p{p}", "PV", "venue", f"v{k * venues_per_topic + int(rng.integers(venues_per_topic))}", 1))
        edges.append(("paper", f"p{p}", "PT", "topic", f"t{k}", 1))
        if p >= n_topics:
            for _ in range(int(rng.integers(0, 4))):
                same = list(range(k, p, n_topics))
                q = int(rng.choice(same)) if rng.random() < 0.8 else int(rng.integers(p))
                edges.append(("paper", f"p{p}", "PP", "paper", f"p{q}", 1))
    return build_graph(
        [
            ("author", [f"a{i}" for i in range(n_auth)]),
            ("paper", [f"p{i}" for i in range(n_pap)]),
            ("venue", [f"v{i}" for i in range(n_topics * venues_per_topic)]),
            ("topic", [f"t{i}" for i in range(n_topics)]),
        ],
        [("AP", "author", "paper"), ("PP", "paper", "paper"), ("PV", "paper", "venue"), ("PT", "paper", "topic")],
        edges,
    )


def planted_design(
    seed: int,
    n_users: int = 40,
    n_tags: int = 12,
    coef: tuple[float, float] = (0.58, 0.40),
    noise: float = 0.05,
    intercept: bool = True,
):
    """Regression problem with a known answer on a random user/hashtag HIN.

    Three user->user link types A, B, C and a posting relation UH are drawn
    at random.  The response is ``coef[0] * PCRW(A-UH) + coef[1] * PCRW(B-UH)``
    plus iid Gaussian noise; PCRW(C-UH) is the decoy.  Returns the design
    matrix with columns in the order A-UH, B-UH, C-UH.
    """
    from .graph import augment_with_holes
    from .pcrw import pcrw
    from .regress import DesignMatrix, assemble_design

    rng = np.random.default_rng(seed)
    edges = []
    for u in range(n_users):
        for lt in ("A", "B", "C"):
            for v in rng.choice(n_users, size=int(rng.integers(1, 5)), replace=False):
                edges.append(("user", f"u{u}", lt, "user", f"u{v}", int(rng.integers(1, 4))))
        for h in rng.choice(n_tags, size=int(rng.integers(1, 5)), replace=False):
            edges.append(("user", f"u{u}", "UH", "hashtag", f"h{h}", int(rng.integers(1, 4))))
    g = build_graph(
        [("user", [f"u{i}" for i in range(n_users)]), ("hashtag", [f"h{i}" for i in range(n_tags)])],
        [("A", "user", "user"), ("B", "user", "user"), ("C", "user", "user"), ("UH", "user", "hashtag")],
        edges,
    )
    g = augment_with_holes(g)
    schema = g.schema()
    tables = [pcrw(g, make_metapath(schema, [schema.link_type_id(x), schema.link_type_id("UH")])) for x in "ABC"]
    d = assemble_design(tables[0], tables, intercept=intercept)
    y = coef[0] * d.X[:, 0] + coef[1] * d.X[:, 1] + rng.normal(0.0, noise, size=d.n_rows)
    return DesignMatrix(y, d.X, d.names, intercept, d.row_index)
