"""Hypothesis strategies over small typed graphs and meta-paths."""
import numpy as np
from hypothesis import strategies as st

from hinreg.graph import augment_with_holes
from hinreg.synthetic import random_hin, random_metapath

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def graphs(draw, max_nodes=12, max_types=3, max_links=4, augmented=False):
    rng = np.random.default_rng(draw(seeds))
    g = random_hin(rng, max_nodes=max_nodes, max_types=max_types, max_links=max_links)
    return augment_with_holes(g) if augmented else g


@st.composite
def graphs_with_paths(draw, max_nodes=10, max_len=4, exclusions=True):
    rng = np.random.default_rng(draw(seeds))
    g = augment_with_holes(random_hin(rng, max_nodes=max_nodes))
    mp = random_metapath(rng, g, max_len=max_len, exclusions=exclusions)
    while mp is None:
        mp = random_metapath(rng, g, max_len=max_len, exclusions=exclusions)
    return g, mp
