import csv
import json

import pytest
import yaml

from hinreg.cli import main


@pytest.fixture
def twitter_cfg(tmp_path, data_dir):
    def make(**extra):
        cfg = {
            "input": str(data_dir / "twitter_planted.tsv"),
            "target": "UH",
            "candidates": {"enumerate": {"max_len": 2}},
            "alpha": 0.05,
            "cv": {"train_fraction": 0.8, "n_splits": 10},
            "null_model": {"replicates": 3},
            "out": str(tmp_path / "out"),
            "seed": 42,
        }
        cfg.update(extra)
        p = tmp_path / f"cfg{len(list(tmp_path.glob('cfg*.yaml')))}.yaml"
        p.write_text(yaml.safe_dump(cfg))
        return p
    return make


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_describe_picks_planted_path(twitter_cfg, tmp_path):
    assert main(["describe", "--config", str(twitter_cfg())]) == 0
    out = tmp_path / "out" / "describe"
    trace = json.loads((out / "trace.json").read_text())
    assert trace["steps"][1]["added"] == "MT-UH"
    rows = read_csv(out / "trace.csv")
    assert {"step", "metapath", "coefficient", "p_value", "r2"} == set(rows[0])
    fitted = read_csv(out / "fitted.csv")
    assert list(fitted[0]) == ["observed", "fitted"]
    assert len(fitted) == 240 * 24


def test_describe_empty_candidates(twitter_cfg, tmp_path):
    assert main(["describe", "--config", str(twitter_cfg(candidates={"metapaths": []}))]) == 0
    trace = json.loads((tmp_path / "out" / "describe" / "trace.json").read_text())
    assert trace["selected"] == []
    assert trace["steps"][-1]["fit"]["r2"] == 0.0


def test_malformed_weight_names_line(tmp_path, capsys):
    lines = ["# header comment"] + ["user\tu1\tRP\tuser\tu2\t1"] * 5 + ["user\tu1\tRP\tuser\tu3\tabc"]
    (tmp_path / "bad.tsv").write_text("\n".join(lines) + "\n")
    cfg = tmp_path / "c.yaml"
    cfg.write_text(yaml.safe_dump({"input": "bad.tsv", "target": "RP", "candidates": {"enumerate": 2}}))
    assert main(["describe", "--config", str(cfg)]) != 0
    err = capsys.readouterr().err
    assert "bad.tsv:7:" in err


def test_recover_is_deterministic(twitter_cfg, tmp_path):
    cfg = twitter_cfg()
    assert main(["recover", "--config", str(cfg)]) == 0
    first = (tmp_path / "out" / "recover" / "cv.json").read_bytes()
    assert main(["--seed", "42", "recover", "--config", str(cfg)]) == 0
    assert (tmp_path / "out" / "recover" / "cv.json").read_bytes() == first
    report = json.loads(first)
    assert len(report["splits"]) == 10
    assert all(s["n_train"] == 192 for s in report["splits"])


def test_recover_per_category(tmp_path, configs_dir):
    out = tmp_path / "dblp"
    assert main(["recover", "--per-category", "--config", str(configs_dir / "dblp_topics.yaml"),
                 "--out", str(out)]) == 0
    rows = read_csv(out / "recover" / "summary.csv")
    assert [r["category"] for r in rows] == ["t0", "t1", "t2"]
    for r in rows:
        assert (out / "recover" / r["category"] / "cv.json").exists()
        assert r["error"] == ""


def test_nullcheck(twitter_cfg, tmp_path):
    cfg = twitter_cfg()
    assert main(["nullcheck", "--config", str(cfg), "--replicates", "3"]) == 0
    path = tmp_path / "out" / "nullcheck" / "nullcheck.json"
    rep = json.loads(path.read_text())
    assert rep["real"]["r2"] > rep["null"]["r2_max"]
    assert len(rep["replicates"]) == 3
    first = path.read_bytes()
    assert main(["nullcheck", "--config", str(cfg), "--replicates", "3"]) == 0
    assert path.read_bytes() == first

    assert main(["nullcheck", "--config", str(cfg), "--replicates", "0"]) == 0
    rep = json.loads(path.read_text())
    assert rep["replicates"] == [] and rep["null"]["r2_max"] is None


def test_pcrw_single_row(data_dir, capsys):
    assert main(["pcrw", "--input", str(data_dir / "reply_example.tsv"), "--metapath", "RP-UH", "--source", "u2"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[0] == "src,dst,prob"
    got = {r.split(",")[1]: float(r.split(",")[2]) for r in rows[1:]}
    assert got == pytest.approx({"h1": 1 / 3, "h2": 1 / 3, "h3": 1 / 3})


def test_pcrw_full_dump(data_dir, tmp_path):
    out = tmp_path / "t.csv"
    assert main(["pcrw", "--input", str(data_dir / "reply_example.tsv"), "--metapath", "UH", "--output", str(out)]) == 0
    rows = read_csv(out)
    assert len({r["src"] for r in rows}) == 4 + 1       # every user and the hole


def test_pcrw_parse_error_position(data_dir, capsys):
    assert main(["pcrw", "--input", str(data_dir / "reply_example.tsv"), "--metapath", "RP-XX"]) == 2
    err = capsys.readouterr().err
    assert "position 3" in err and "^" in err


def test_pcrw_with_inverse(data_dir, capsys):
    args = ["pcrw", "--input", str(data_dir / "bibliographic_toy.tsv"), "--metapath", "AP-PA",
            "--inverse", "AP:PA", "--source", "a1"]
    assert main(args) == 0
    rows = capsys.readouterr().out.splitlines()[1:]
    assert {r.split(",")[1] for r in rows} == {"a1", "a2", "a3"}


def test_schema(data_dir, capsys):
    assert main(["schema", "--input", str(data_dir / "reply_example.tsv")]) == 0
    text = capsys.readouterr().out
    assert "user -> hashtag" in text and "RP" in text


def test_global_flags_either_side(twitter_cfg, tmp_path):
    cfg = twitter_cfg()
    assert main(["--alpha", "0.01", "--out", str(tmp_path / "a"), "describe", "--config", str(cfg)]) == 0
    assert main(["describe", "--config", str(cfg), "--alpha", "0.01", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "describe" / "trace.json").read_text()
    assert a == (tmp_path / "b" / "describe" / "trace.json").read_text()


def test_keep_holes_and_feature_agg(tmp_path, configs_dir):
    cfg = configs_dir / "twitter_features.yaml"
    assert main(["describe", "--config", str(cfg), "--out", str(tmp_path / "m")]) == 0
    assert main(["describe", "--config", str(cfg), "--out", str(tmp_path / "s"), "--feature-agg", "sum"]) == 0
    m = json.loads((tmp_path / "m" / "describe" / "trace.json").read_text())
    s = json.loads((tmp_path / "s" / "describe" / "trace.json").read_text())
    assert m["selected"] == s["selected"]
    assert m["steps"][-1]["fit"]["r2"] == pytest.approx(s["steps"][-1]["fit"]["r2"])
    assert main(["describe", "--config", str(cfg), "--out", str(tmp_path / "h"), "--keep-holes"]) == 0
    fitted = read_csv(tmp_path / "h" / "describe" / "fitted.csv")
    assert len(fitted) == 240 * 25


def test_missing_config_is_an_error(capsys):
    assert main(["describe"]) == 1
    assert "needs --config" in capsys.readouterr().err
