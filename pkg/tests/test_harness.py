import csv
import io
import json

import numpy as np
import pytest

from pmoal.harness import (
    BUDGETS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    RunRecord,
    bench,
    compute_metrics,
    run_episode,
    run_single,
    summary_csv,
)
from pmoal.baselines import OracleAgent, make_baseline
from pmoal.envs import load_stream
from pmoal.game import CostSpec, make_label_efficient

NET = {"width": 8, "epochs1": 2, "epochs2": 2}


def cfg(**kw):
    return ExperimentConfig(network=NET, **kw)


def test_record_fields_and_budgets():
    rec = run_single(cfg(horizon=120, agents=["always_query"]), "always_query", 0)
    assert rec.n_queries == 120 == len(rec.queries)
    assert sorted(rec.f1_at_budget) == [b for b in BUDGETS if b <= 120]
    assert all(0 <= v <= 1 for v in rec.f1_at_budget.values())
    assert rec.confusion == [[0, 0], [0, 0]]


def test_confusion_counts_prediction_rounds():
    rec = run_single(cfg(horizon=200), "random", 1)
    assert sum(map(sum, rec.confusion)) == 200 - rec.n_queries
    assert sum(rec.binary_counts().values()) == 200 - rec.n_queries


def test_record_roundtrip():
    rec = run_single(cfg(horizon=60), "neuralcbp", 2)
    again = RunRecord.from_dict(json.loads(json.dumps(rec.to_dict(timing=True))))
    assert again.to_dict() == rec.to_dict()
    assert "wall_clock" not in rec.to_dict()


def test_game_mismatch():
    le = make_label_efficient(CostSpec.uniform(2))
    fp = make_label_efficient(CostSpec.fp_sensitive())
    env = load_stream(fp, {"kind": "gaussian", "M": 2, "d": 2, "sep": 3.0}, 10, 0)
    with pytest.raises(ValueError):
        run_episode(make_baseline("random", le, 2), env)


def test_oracle_zero_regret():
    game = make_label_efficient(CostSpec.uniform(3))
    env = load_stream(game, {"kind": "gaussian", "M": 3, "d": 3, "sep": 2.0}, 100, 0)
    assert run_episode(OracleAgent(game, env), env).final_regret == 0


def test_identical_agents_split_wins():
    recs = [run_single(cfg(horizon=50), "random", s) for s in range(3)]
    twins = [RunRecord.from_dict({**r.to_dict(), "agent": "twin"}) for r in recs]
    rows = {r["agent"]: r for r in compute_metrics(recs + twins, reference="random")}
    assert rows["random"]["win_count"] == rows["twin"]["win_count"] == 3
    assert rows["twin"]["welch_p_vs_reference"] == pytest.approx(0.5)
    assert rows["random"]["welch_p_vs_reference"] is None


def test_compute_metrics_empty():
    with pytest.raises(ValueError):
        compute_metrics([])


def test_bench_outputs(tmp_path):
    c = cfg(horizon=60, seeds=list(range(10)), agents=["neuralcbp", "random"], output_dir=str(tmp_path))
    records, rows = bench(c)
    assert len(records) == 20
    text = (tmp_path / "summary.csv").read_text()
    table = list(csv.DictReader(io.StringIO(text)))
    assert tuple(table[0]) == SUMMARY_COLUMNS
    assert len(table) == 2
    assert sum(int(r["win_count"]) for r in table) >= 10
    lines = (tmp_path / "runs.jsonl").read_text().splitlines()
    assert len(lines) == 20 and all("wall_clock" in json.loads(l) for l in lines)
    assert text == summary_csv(rows)


def test_bench_parallel_matches_serial(tmp_path):
    base = dict(horizon=40, seeds=[0, 1], agents=["neuralcbp", "cesa"])
    _, serial = bench(cfg(output_dir=str(tmp_path / "a"), **base))
    _, parallel = bench(cfg(output_dir=str(tmp_path / "b"), workers=2, **base))
    assert serial == parallel


@pytest.mark.parametrize(
    "bad", [{"seeds": [-1]}, {"seeds": [2**64]}, {"agents": ["nope"]}, {"horizon": 0}]
)
def test_config_validation(bad):
    with pytest.raises(ValueError):
        ExperimentConfig(**bad)


def test_config_unknown_key():
    with pytest.raises(ValueError):
        ExperimentConfig.from_json({"horizont": 5})


def test_three_class_run():
    c = cfg(env={"kind": "gaussian", "M": 3, "d": 3, "sep": 3.0}, horizon=80)
    rec = run_single(c, "neuralcbp", 0)
    assert np.array(rec.confusion).shape == (3, 3)
    assert "counts" not in rec.to_dict()
