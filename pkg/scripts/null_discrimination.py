"""Real graph vs degree-preserving reshuffles, plus the long-run rate at
which reshuffled graphs admit some regressor.

    python3 scripts/null_discrimination.py [--config configs/twitter.yaml] [--rate-replicates 200]
"""
from __future__ import annotations

import argparse
from pathlib import Path

from hinreg import pipeline
from hinreg.config import load_config

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=ROOT / "configs" / "twitter.yaml")
    ap.add_argument("--rate-replicates", type=int, default=0,
                    help="extra replicates for estimating the null selection rate")
    args = ap.parse_args()
    cfg = load_config(args.config)
    raw = pipeline.load(cfg)

    real, reps = pipeline.run_nullcheck(raw, cfg, cfg.null.replicates)
    null_r2 = [r.r2 for r in reps]
    print(f"real: r2={real.final.r2:.4f} selected={real.selected_names}")
    print(f"null ({len(reps)} x {cfg.null.mode}): mean r2={sum(null_r2) / len(null_r2):.5f} max r2={max(null_r2):.5f}")
    print(f"null replicates with an empty model: {sum(not r.selected for r in reps)}/{len(reps)}")

    if args.rate_replicates:
        _, more = pipeline.run_nullcheck(raw, cfg, args.rate_replicates)
        rate = sum(bool(r.selected) for r in more) / len(more)
        print(f"selection rate over {len(more)} replicates: {rate:.3f}")


if __name__ == "__main__":
    main()
