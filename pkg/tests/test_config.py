import pytest

from hinreg.config import ConfigError, from_dict, load_config

BASE = {"input": "g.tsv", "target": "UH", "candidates": {"enumerate": {"max_len": 2}}}


def test_defaults_and_paths(tmp_path):
    cfg = from_dict(BASE, base=tmp_path)
    assert cfg.input == tmp_path / "g.tsv"
    assert cfg.max_len == 2 and cfg.alpha == 0.05
    assert cfg.cv.train_fraction == 0.8 and cfg.cv.n_splits == 10
    assert cfg.null.mode == "out-degree"


def test_exactly_one_candidate_source():
    with pytest.raises(ConfigError):
        from_dict({**BASE, "candidates": {}})
    with pytest.raises(ConfigError):
        from_dict({**BASE, "candidates": {"enumerate": 2, "metapaths": ["RT-UH"]}})


@pytest.mark.parametrize("alpha", [0, 1, 1.5, -0.1])
def test_alpha_range(alpha):
    with pytest.raises(ConfigError):
        from_dict({**BASE, "alpha": alpha})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        from_dict({**BASE, "colour": "blue"})
    with pytest.raises(ConfigError):
        from_dict({**BASE, None: {"replicates": 3}})


def test_division_needs_one_category_source():
    with pytest.raises(ConfigError):
        from_dict({**BASE, "division": {"pivot_type": "paper", "anchor": "AP-PA"}})


def test_bundled_configs_load(configs_dir):
    for p in sorted(configs_dir.glob("*.yaml")):
        cfg = load_config(p)
        assert cfg.input.exists(), p
