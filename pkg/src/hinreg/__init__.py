"""Meta-path regression on heterogeneous information networks."""
from .errors import HinError
from .graph import (
    HOLE,
    Schema,
    TypedGraph,
    augment_with_holes,
    build_graph,
    collapse_link_types,
    from_matrices,
    restrict,
    stochastic,
    strip_holes,
    with_inverses,
)
from .metapath import MetaPath, count_walks, enumerate_metapaths, format_metapath, make_metapath, parse_metapath
from .pcrw import PcrwResult, pcrw, pcrw_batch, pcrw_oracle
from .regress import FitResult, SelectionTrace, aggregate_features, assemble_design, forward_select, ols, t_sf
from .validate import CvConfig, CvReport, divide_by_category, monte_carlo_cv, null_model

__version__ = "0.1.0"
