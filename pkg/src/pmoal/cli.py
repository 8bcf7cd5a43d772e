"""Command line entry point: analyze, run, bench, selftest."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from .envs import EnvError
from .game import CostSpec, GameError, build_game, load_game, make_label_efficient
from .harness import AGENTS, ExperimentConfig, bench, run_single
from .structure import StructureError, analyze


def _dump(obj, path: str | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return obj


def cmd_analyze(args: argparse.Namespace) -> int:
    game = load_game(args.game)
    _dump(analyze(game).to_json(game), args.output)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    obj = _load_config(args.config)
    obj.pop("seeds", None)
    obj.pop("agents", None)
    obj.pop("workers", None)
    obj.pop("output_dir", None)
    if args.env is not None:
        obj["env"] = args.env
    if args.horizon is not None:
        obj["horizon"] = args.horizon
    if args.game is not None:
        with open(args.game, encoding="utf-8") as fh:
            obj["game"] = json.load(fh)
    if args.label_col is not None:
        obj["label_col"] = args.label_col
    if args.replace:
        obj["replace"] = True
    cfg = ExperimentConfig.from_json({**obj, "seeds": [args.seed], "agents": [args.agent]})
    if args.trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            record = run_single(cfg, args.agent, args.seed, trace=fh)
    else:
        record = run_single(cfg, args.agent, args.seed)
    _dump(record.to_dict(), args.output)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_json(_load_config(args.config))
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.workers is not None:
        cfg.workers = args.workers
    _, rows = bench(cfg)
    for row in rows:
        p = row["welch_p_vs_reference"]
        ptxt = "" if p is None else f"  p={p:.3g}"
        print(f"{row['agent']:>12s}  regret {row['mean_regret']:9.2f} +- {row['std_regret']:8.2f}  "
              f"wins {row['win_count']:3d}  queries {row['mean_queries']:8.1f}{ptxt}")
    print(f"wrote {Path(cfg.output_dir) / 'runs.jsonl'} and summary.csv")
    return 0


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Golden checks on the two-class label-efficient game plus randomised observer identities."""
    checks: list[tuple[str, bool, str]] = []
    game = make_label_efficient(CostSpec.uniform(2))
    start = time.perf_counter()
    rep = analyze(game)
    elapsed = time.perf_counter() - start
    S = game.signal_matrices
    checks.append(("signal matrices", np.array_equal(S[0], [[1, 1]]) and np.array_equal(S[1], [[1, 1]])
                   and np.array_equal(S[2], np.eye(2)), f"{[s.tolist() for s in S]}"))
    checks.append(("pareto / dominated", rep.pareto == [0, 1] and rep.classification[2] == "dominated",
                   f"{rep.classification}"))
    checks.append(("neighbors", rep.neighbors == [(0, 1)], f"{rep.neighbors}"))
    checks.append(("neighborhood set", rep.neighborhood_sets[(0, 1)] == [0, 1], f"{rep.neighborhood_sets}"))
    checks.append(("observer set", rep.observer_sets[(0, 1)] == [2], f"{rep.observer_sets}"))
    v = rep.observer_vectors[((0, 1), 2)]
    resid = float(np.abs(S[2].T @ v - (game.cost[0] - game.cost[1])).max())
    checks.append(("observer vector", np.allclose(v, [-1.0, 1.0], atol=1e-9) and resid <= 1e-9,
                   f"v={v.tolist()} residual={resid:.1e}"))
    checks.append(("analysis time", elapsed < 1.0, f"{elapsed:.3f}s"))

    rng = np.random.default_rng(0)
    worst, n_pairs = 0.0, 0
    for _ in range(50):
        m = int(rng.integers(2, 4))
        cost = rng.random((int(rng.integers(m, 7)), m))
        g = build_game(cost, rng.integers(0, 2, size=cost.shape))
        try:
            r = analyze(g)
        except StructureError:
            continue
        for (i, j) in r.neighbors:
            total = sum(g.signal_matrices[a].T @ r.observer_vectors[((i, j), a)] for a in r.observer_sets[(i, j)])
            worst = max(worst, float(np.abs(total - (g.cost[i] - g.cost[j])).max()))
            n_pairs += 1
    checks.append(("observer identity on random games", worst <= 1e-9, f"{n_pairs} pairs, max residual {worst:.1e}"))
    return checks


def cmd_selftest(args: argparse.Namespace) -> int:
    ok = True
    for name, passed, detail in selftest_checks():
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pmoal", description="Partial-monitoring games and online active learning.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="print the structure report of a game JSON")
    p.add_argument("game")
    p.add_argument("--output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("run", help="run one agent on one seeded stream and print its record")
    p.add_argument("--agent", required=True, choices=AGENTS)
    p.add_argument("--env", help="CSV path, synthetic-stream JSON file, or inline JSON")
    p.add_argument("--horizon", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="experiment config JSON (network, agent_config, test_frac, ...)")
    p.add_argument("--game", help="game JSON; defaults to the uniform label-efficient game")
    p.add_argument("--label-col")
    p.add_argument("--replace", action="store_true", help="sample the stream with replacement")
    p.add_argument("--output")
    p.add_argument("--trace", help="write per-round decisions as JSON lines")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="run a seed grid across agents")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="golden structure checks")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StructureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError, EnvError, GameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
