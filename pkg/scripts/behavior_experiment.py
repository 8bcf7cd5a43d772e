"""Regret and label complexity of NeuralCBP against the query baselines on the Gaussian stream."""
import argparse
import json
from pathlib import Path

import numpy as np

from pmoal.harness import ExperimentConfig, bench

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "behavior.json"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--output-dir")
    args = ap.parse_args()

    cfg = ExperimentConfig.from_json(json.loads(Path(args.config).read_text()))
    cfg.workers = args.workers
    if args.output_dir:
        cfg.output_dir = args.output_dir
    records, rows = bench(cfg)

    half = cfg.horizon // 2
    print(f"{'agent':>12s} {'regret':>9s} {'std':>8s} {'wins':>5s} {'queries':>8s} {'late<early':>10s} {'p(ref<)':>9s}")
    for row in rows:
        recs = [r for r in records if r.agent == row["agent"]]
        sub = sum(sum(q > half for q in r.queries) < sum(q <= half for q in r.queries) for r in recs)
        p = row["welch_p_vs_reference"]
        print(f"{row['agent']:>12s} {row['mean_regret']:9.1f} {row['std_regret']:8.1f} {row['win_count']:5d} "
              f"{row['mean_queries']:8.1f} {sub:>7d}/{len(recs)} {'' if p is None else f'{p:9.2g}'}")

    # weighted f1 on the held-out split at each label budget reached by every seed
    print("\nweighted f1 by label budget (mean over seeds that reached it)")
    for agent in cfg.agents:
        recs = [r for r in records if r.agent == agent]
        budgets = sorted({b for r in recs for b in r.f1_at_budget})
        cells = [f"{b}:{np.mean([r.f1_at_budget[b] for r in recs if b in r.f1_at_budget]):.3f}" for b in budgets]
        print(f"{agent:>12s} " + " ".join(cells))


if __name__ == "__main__":
    main()
