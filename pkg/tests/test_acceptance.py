"""Acceptance criteria, one test per criterion, each reporting a PASS/FAIL line."""
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import classify, face_margin, lattice_for, random_game_costs
from pmoal.agent import sherman_morrison
from pmoal.game import CostSpec, build_game, make_label_efficient
from pmoal.harness import ExperimentConfig, run_single
from pmoal.structure import PARETO, StructureError, analyze, classify_actions, neighbor_pairs
from test_neural import gradient_instances, max_relative_error, numeric_grad
from pmoal.neural import squared_loss_grad

ROOT = Path(__file__).resolve().parents[1]
BEHAVIOR = json.loads((ROOT / "configs" / "behavior.json").read_text())
FP_GAME = json.loads((ROOT / "configs" / "game_fp_sensitive.json").read_text())
MARGIN = 1e-3


def test_criterion_1_golden_label_efficient(acceptance_report):
    start = time.perf_counter()
    g = make_label_efficient(CostSpec.uniform(2))
    rep = analyze(g)
    S = g.signal_matrices
    v = rep.observer_vectors[((0, 1), 2)]
    residual = float(np.abs(S[2].T @ v - (g.cost[0] - g.cost[1])).max())
    elapsed = time.perf_counter() - start
    checks = {
        "S1": S[0].tolist() == [[1, 1]],
        "S2": S[1].tolist() == [[1, 1]],
        "S3": np.array_equal(S[2], np.eye(2)),
        "pareto": rep.pareto == [0, 1],
        "dominated": rep.classification[2] == "dominated",
        "neighbors": rep.neighbors == [(0, 1)],
        "N+": rep.neighborhood_sets[(0, 1)] == [0, 1],
        "V": rep.observer_sets[(0, 1)] == [2],
        "v": residual <= 1e-9 and np.allclose(v, [-1, 1], atol=1e-9),
        "time": elapsed < 1.0,
    }
    ok = all(checks.values())
    acceptance_report("criterion 1 golden suite", ok, f"failed={[k for k, c in checks.items() if not c]} "
                      f"residual={residual:.1e} time={elapsed:.3f}s")
    assert ok


def _random_games(n=200, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        C = random_game_costs(rng)
        yield build_game(C, rng.integers(0, 2, size=C.shape))


def test_criterion_2_oracle_equivalence(acceptance_report):
    start = time.perf_counter()
    lattices = {2: lattice_for(2), 3: lattice_for(3)}
    checked = skipped = 0
    mismatches = []
    for k, g in enumerate(_random_games()):
        cls = classify_actions(g)
        for a, (ours, oracle) in enumerate(zip(cls, classify(g.cost, lattices[g.n_outcomes], MARGIN))):
            if oracle is None:
                skipped += 1
            else:
                checked += 1
                if ours != oracle:
                    mismatches.append((k, a, ours, oracle))
        pairs = set(neighbor_pairs(g, cls))
        pareto = [i for i, c in enumerate(cls) if c == PARETO]
        for x, i in enumerate(pareto):
            for j in pareto[x + 1 :]:
                m = face_margin(g.cost, i, j)
                if abs(m) <= MARGIN:
                    skipped += 1
                    continue
                checked += 1
                if ((i, j) in pairs) != (m > 0):
                    mismatches.append((k, (i, j), (i, j) in pairs, m))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 120
    acceptance_report("criterion 2 oracle equivalence", ok,
                      f"{checked} decisions checked, {skipped} below margin, {len(mismatches)} mismatches, {elapsed:.1f}s")
    assert ok, mismatches[:5]


def test_criterion_3_observer_identity(acceptance_report):
    worst, pairs, observable = 0.0, 0, 0
    for g in _random_games():
        try:
            rep = analyze(g)
        except StructureError:
            continue
        observable += 1
        for (i, j) in rep.neighbors:
            total = sum(g.signal_matrices[a].T @ rep.observer_vectors[((i, j), a)] for a in rep.observer_sets[(i, j)])
            worst = max(worst, float(np.abs(total - (g.cost[i] - g.cost[j])).max()))
            pairs += 1
    ok = worst <= 1e-9 and pairs > 0
    acceptance_report("criterion 3 observer identity", ok,
                      f"{observable} observable games, {pairs} pairs, max residual {worst:.1e}")
    assert ok


def test_criterion_4_numerical_kernels(acceptance_report):
    rng = np.random.default_rng(0)
    d = 20
    G, G_inv, sm_err = np.eye(d), np.eye(d), 0.0
    for _ in range(1000):
        phi = rng.normal(size=d)
        phi /= np.linalg.norm(phi)
        G += np.outer(phi, phi)
        G_inv = sherman_morrison(G_inv, phi)
        sm_err = max(sm_err, float(np.abs(G_inv - np.linalg.inv(G)).max()))
    instances = gradient_instances(10)
    grad_err = max(max_relative_error(squared_loss_grad(net, X, Y), numeric_grad(net, X, Y)) for _, net, X, Y in instances)
    ok = sm_err <= 1e-6 and grad_err <= 1e-4
    acceptance_report("criterion 4 numerical kernels", ok,
                      f"Sherman-Morrison max abs err {sm_err:.1e}; gradient max rel err {grad_err:.1e} "
                      f"over {len(instances)} loss instances")
    assert ok


@pytest.fixture(scope="module")
def behavior_runs():
    start = time.perf_counter()
    base = {k: v for k, v in BEHAVIOR.items() if k not in ("agents", "output_dir")}
    uniform = ExperimentConfig.from_json(base)
    fp = ExperimentConfig.from_json({**base, "game": FP_GAME})
    runs = {a: [run_single(uniform, a, s) for s in uniform.seeds] for a in ("neuralcbp", "random", "always_query")}
    runs["neuralcbp_fp"] = [run_single(fp, "neuralcbp", s) for s in fp.seeds]
    return runs, time.perf_counter() - start


def test_criterion_5_behavior(acceptance_report, behavior_runs):
    runs, elapsed = behavior_runs
    mean = {a: float(np.mean([r.final_regret for r in rs])) for a, rs in runs.items()}
    T = BEHAVIOR["horizon"]
    sublinear = sum(
        sum(q > T // 2 for q in r.queries) < sum(q <= T // 2 for q in r.queries) for r in runs["neuralcbp"]
    )
    ok = mean["neuralcbp"] <= 0.5 * mean["random"] and mean["neuralcbp"] < mean["always_query"] and sublinear >= 8
    ok = ok and elapsed < 15 * 60
    acceptance_report("criterion 5 behavior", ok,
                      f"regret neuralcbp {mean['neuralcbp']:.1f} random {mean['random']:.1f} "
                      f"always_query {mean['always_query']:.1f}; fewer late queries on {sublinear}/10 seeds; "
                      f"{elapsed:.0f}s")
    assert ok


def test_criterion_6_cost_sensitivity(acceptance_report, behavior_runs):
    runs, _ = behavior_runs
    fp_uniform = float(np.mean([r.binary_counts()["FP"] for r in runs["neuralcbp"]]))
    fp_sensitive = float(np.mean([r.binary_counts()["FP"] for r in runs["neuralcbp_fp"]]))
    ratio = fp_sensitive / fp_uniform if fp_uniform else float("inf")
    ok = ratio <= 0.7
    acceptance_report("criterion 6 cost sensitivity", ok,
                      f"mean FP uniform {fp_uniform:.1f}, FP-sensitive {fp_sensitive:.1f}, ratio {ratio:.2f}")
    assert ok


def test_criterion_7_determinism(acceptance_report, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"network": BEHAVIOR["network"]}))
    outputs = []
    same = True
    for agent in ("neuralcbp", "cesa", "random"):
        pair = []
        for k in range(2):
            trace = tmp_path / f"{agent}{k}.jsonl"
            r = subprocess.run(
                [sys.executable, "-m", "pmoal", "run", "--agent", agent, "--env", json.dumps(BEHAVIOR["env"]),
                 "--horizon", "500", "--seed", "13", "--config", str(cfg), "--trace", str(trace)],
                capture_output=True,
            )
            assert r.returncode == 0, r.stderr
            pair.append((r.stdout, trace.read_bytes()))
        same &= pair[0] == pair[1]
        outputs.append(agent)
    acceptance_report("criterion 7 determinism", same, f"run repeated for {', '.join(outputs)}: "
                      f"{'byte-identical' if same else 'outputs differ'}")
    assert same
