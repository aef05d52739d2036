import numpy as np
import pytest

from hinreg import pipeline
from hinreg.config import from_dict
from hinreg.graph import augment_with_holes
from hinreg.metapath import parse_metapath
from hinreg.pcrw import pcrw
from hinreg.synthetic import BIB_INVERSES


@pytest.fixture
def dblp_cfg(data_dir):
    def make(**extra):
        base = {
            "input": str(data_dir / "dblp_topics.tsv"),
            "target": "AP-PA",
            "inverses": BIB_INVERSES,
            "candidates": {"features": {"v_PP": ["AP-PP-PA", "AP-PPinv-PA"], "v_V": ["AP-PV-VP-PA"]}},
        }
        base.update(extra)
        return from_dict(base)
    return make


def test_feature_is_mean_of_both_citation_directions(dblp_cfg):
    cfg = dblp_cfg()
    g_raw = pipeline.prepare(pipeline.load(cfg), cfg)
    tables = pipeline.compute_tables(g_raw, cfg)
    assert [t.name for t in tables.candidates] == ["v_PP", "v_V"]
    g = augment_with_holes(g_raw)
    cite = pcrw(g, parse_metapath("AP-PP-PA", g.schema())).table
    cited = pcrw(g, parse_metapath("AP-PPinv-PA", g.schema())).table
    np.testing.assert_allclose(tables.candidates[0].table.toarray(), ((cite + cited) / 2).toarray(), atol=1e-15)
    np.testing.assert_allclose(tables.candidates[0].row_sums(), 1.0, atol=1e-9)


def test_enumeration_excludes_target(data_dir):
    cfg = from_dict({"input": str(data_dir / "twitter_planted.tsv"), "target": "UH",
                     "candidates": {"enumerate": {"max_len": 3}}})
    g = pipeline.prepare(pipeline.load(cfg), cfg)
    names = [mp.name for mp in pipeline.candidate_paths(g, cfg)]
    assert "UH" not in names and len(names) == 12


def test_null_replicates_differ_but_repeat(data_dir):
    cfg = from_dict({"input": str(data_dir / "twitter_planted.tsv"), "target": "UH",
                     "candidates": {"enumerate": 2}, "seed": 1})
    raw = pipeline.load(cfg)
    a = pipeline.prepare(raw, cfg, replicate=0)
    assert a.equals(pipeline.prepare(raw, cfg, replicate=0))
    assert not a.equals(pipeline.prepare(raw, cfg, replicate=1))
    assert not a.equals(raw)
    assert not a.augmented


def test_division_uses_category_link(dblp_cfg):
    cfg = dblp_cfg(division={"pivot_type": "paper", "anchor": "AP-PA", "category_link": "PT"})
    g_raw = pipeline.prepare(pipeline.load(cfg), cfg)
    subs = pipeline.divide(g_raw, cfg)
    assert list(subs) == ["t0", "t1", "t2"]
    assert sum(s.size(1) for s in subs.values()) == g_raw.size(1)


def test_division_from_file(dblp_cfg, tmp_path):
    cfg0 = dblp_cfg()
    g_raw = pipeline.prepare(pipeline.load(cfg0), cfg0)
    f = tmp_path / "cats.tsv"
    f.write_text("".join(f"{g_raw.node_label(1, p)}\t{'even' if p % 2 == 0 else 'odd'}\n" for p in range(g_raw.size(1))))
    cfg = dblp_cfg(division={"pivot_type": "paper", "anchor": "AP-PA", "category_file": str(f)})
    subs = pipeline.divide(g_raw, cfg)
    assert list(subs) == ["even", "odd"]
