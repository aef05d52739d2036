"""Experiment configuration (YAML or JSON file).

Example::

    input: twitter_planted.tsv
    target: UH
    candidates:
      enumerate: {max_len: 2}
    alpha: 0.05
    cv: {train_fraction: 0.8, n_splits: 10}
    null_model: {replicates: 15, mode: out-degree}
    out: results/twitter
    seed: 42

Exactly one of ``candidates.enumerate``, ``candidates.metapaths`` or
``candidates.features`` must be given.  Relative paths resolve against the
config file's directory.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


@dataclass
class CvSettings:
    train_fraction: float = 0.8
    n_splits: int = 10


@dataclass
class NullSettings:
    replicates: int = 15
    mode: str = "out-degree"
    link_types: list[str] | None = None  # None: every link type of the input


@dataclass
class DivisionSettings:
    pivot_type: str
    anchor: str
    category_link: str | None = None   # pivot -> category node link type
    category_file: Path | None = None  # TSV: pivot id, category
    categories: list[str] | None = None


@dataclass
class ExperimentConfig:
    input: Path
    target: str
    max_len: int | None = None
    metapaths: list[str] | None = None
    features: dict[str, list[str]] | None = None
    alpha: float = 0.05
    header: bool = False
    intercept: bool = True
    keep_holes: bool = False
    feature_agg: str = "mean"
    auto_exclude: bool = True
    inverses: dict[str, str] = field(default_factory=dict)
    collapse: list[dict] = field(default_factory=list)
    cv: CvSettings = field(default_factory=CvSettings)
    null: NullSettings = field(default_factory=NullSettings)
    division: DivisionSettings | None = None
    out: Path = Path("results")
    seed: int = 0

    def validate(self) -> "ExperimentConfig":
        sources = [self.max_len is not None, self.metapaths is not None, self.features is not None]
        if sum(sources) != 1:
            raise ConfigError("give exactly one candidate source: enumerate, metapaths or features")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.max_len is not None and self.max_len < 1:
            raise ConfigError("enumerate.max_len must be >= 1")
        if self.feature_agg not in ("mean", "sum"):
            raise ConfigError("feature_agg must be 'mean' or 'sum'")
        if not 0 < self.cv.train_fraction < 1:
            raise ConfigError("cv.train_fraction must lie in (0, 1)")
        if self.cv.n_splits < 1:
            raise ConfigError("cv.n_splits must be >= 1")
        if self.null.mode not in ("out-degree", "in-out-degree"):
            raise ConfigError(f"unknown null mode {self.null.mode!r}")
        if self.division is not None and (self.division.category_link is None) == (self.division.category_file is None):
            raise ConfigError("division needs exactly one of category_link or category_file")
        return self


def from_dict(data: dict, base: Path = Path(".")) -> ExperimentConfig:
    data = dict(data)
    known = {
        "input", "target", "candidates", "alpha", "header", "intercept", "keep_holes", "feature_agg",
        "auto_exclude", "inverses", "collapse", "cv", "null_model", "division", "out", "seed",
    }
    unknown = set(data) - known
    if unknown:
        # a bare `null:` key loads as None under YAML 1.1
        raise ConfigError(f"unknown config keys: {sorted(map(str, unknown))}")
    for key in ("input", "target", "candidates"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")

    cand = data.pop("candidates") or {}
    if not isinstance(cand, dict):
        raise ConfigError("candidates must be a mapping")
    extra = set(cand) - {"enumerate", "metapaths", "features"}
    if extra:
        raise ConfigError(f"unknown candidate source(s): {sorted(extra)}")
    max_len = None
    if "enumerate" in cand:
        spec = cand["enumerate"]
        max_len = int(spec["max_len"] if isinstance(spec, dict) else spec)

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else Path(os.path.normpath(base / p))

    division = None
    if data.get("division"):
        dv = dict(data["division"])
        if dv.get("category_file"):
            dv["category_file"] = resolve(dv["category_file"])
        try:
            division = DivisionSettings(**dv)
        except TypeError as exc:
            raise ConfigError(f"bad division settings: {exc}") from None

    try:
        cfg = ExperimentConfig(
            input=resolve(data["input"]),
            target=str(data["target"]),
            max_len=max_len,
            metapaths=[str(m) for m in cand["metapaths"]] if "metapaths" in cand else None,
            features={str(k): [str(m) for m in v] for k, v in cand["features"].items()} if "features" in cand else None,
            alpha=float(data.get("alpha", 0.05)),
            header=bool(data.get("header", False)),
            intercept=bool(data.get("intercept", True)),
            keep_holes=bool(data.get("keep_holes", False)),
            feature_agg=str(data.get("feature_agg", "mean")),
            auto_exclude=bool(data.get("auto_exclude", True)),
            inverses={str(k): str(v) for k, v in (data.get("inverses") or {}).items()},
            collapse=list(data.get("collapse") or []),
            cv=CvSettings(**(data.get("cv") or {})),
            null=NullSettings(**(data.get("null_model") or {})),
            division=division,
            out=resolve(data.get("out", "results")),
            seed=int(data.get("seed", 0)),
        )
    except TypeError as exc:
        raise ConfigError(f"bad config: {exc}") from None
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return from_dict(data, base=path.parent)
