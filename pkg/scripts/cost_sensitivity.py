"""False positives under the uniform and the FP-sensitive label-efficient games."""
import argparse
import json
from pathlib import Path

import numpy as np

from pmoal.harness import ExperimentConfig, run_single

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(ROOT / "configs" / "behavior.json"))
    ap.add_argument("--fn-cost", type=float, default=0.5)
    ap.add_argument("--seeds", type=int, nargs="*")
    args = ap.parse_args()

    base = json.loads(Path(args.config).read_text())
    for k in ("agents", "output_dir", "workers"):
        base.pop(k, None)
    if args.seeds:
        base["seeds"] = args.seeds
    games = {
        "uniform": {"n_classes": 2, "query_cost": 1.0, "error_costs": [[0, 1], [1, 0]]},
        "fp-sensitive": {"n_classes": 2, "query_cost": 1.0, "error_costs": [[0, args.fn_cost], [1, 0]]},
    }
    means = {}
    print(f"{'game':>13s} {'TP':>7s} {'TN':>7s} {'FP':>7s} {'FN':>7s} {'FP std':>7s} {'queries':>8s}")
    for name, game in games.items():
        cfg = ExperimentConfig.from_json({**base, "game": game})
        recs = [run_single(cfg, "neuralcbp", s) for s in cfg.seeds]
        counts = {k: np.array([r.binary_counts()[k] for r in recs]) for k in ("TP", "TN", "FP", "FN")}
        means[name] = counts["FP"].mean()
        print(f"{name:>13s} " + " ".join(f"{counts[k].mean():7.1f}" for k in ("TP", "TN", "FP", "FN"))
              + f" {counts['FP'].std(ddof=1):7.1f} {np.mean([r.n_queries for r in recs]):8.1f}")
    print(f"\nFP ratio (fp-sensitive / uniform): {means['fp-sensitive'] / means['uniform']:.2f}")


if __name__ == "__main__":
    main()
