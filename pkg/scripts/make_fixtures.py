"""Regenerate the bundled edge lists in data/ (deterministic)."""
from __future__ import annotations

from pathlib import Path

from hinreg.io import dump_edgelist
from hinreg.synthetic import bibliographic_toy, dblp_topics, reply_example, twitter_planted

DATA = Path(__file__).resolve().parent.parent / "data"

FIXTURES = {
    "reply_example.tsv": reply_example,
    "bibliographic_toy.tsv": bibliographic_toy,
    "twitter_planted.tsv": twitter_planted,
    "dblp_topics.tsv": dblp_topics,
}


def main() -> None:
    DATA.mkdir(exist_ok=True)
    for name, make in FIXTURES.items():
        with open(DATA / name, "w", encoding="utf-8") as fh:
            fh.write(f"# generated by scripts/make_fixtures.py ({make.__name__})\n")
            dump_edgelist(make(), fh)
        print(f"wrote {DATA / name}")


if __name__ == "__main__":
    main()
