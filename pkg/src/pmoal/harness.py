"""Episode runner, run records, metric summaries and the seed-grid benchmark."""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Any, Iterable

import numpy as np

from .agent import AgentConfig, NeuralCBP
from .baselines import KINDS, BaselineConfig, OracleAgent, make_baseline
from .envs import EnvError, StreamEnv, _parse_source, load_stream, read_csv
from .game import CostSpec, Game, expert_action, game_from_json, make_label_efficient
from .metrics import confusion_matrix, weighted_f1, welch_one_sided, win_counts

BUDGETS = (10, 25, 50, 100, 150, 250, 300, 400, 500, 750, 1000, 2500, 5000, 7500, 9000)
AGENTS = ("neuralcbp", *KINDS)
MAX_SEED = 2**64


@dataclass
class RunRecord:
    agent: str
    seed: int
    horizon: int
    n_classes: int
    regret: list[float]
    queries: list[int]  # 1-based rounds on which the expert was played
    confusion: list[list[int]]  # predicted x true, prediction rounds only
    f1_at_budget: dict[int, float]
    wall_clock: float = 0.0

    @property
    def final_regret(self) -> float:
        return float(sum(self.regret))

    @property
    def n_queries(self) -> int:
        return len(self.queries)

    def binary_counts(self) -> dict[str, int]:
        """TP/TN/FP/FN with class 2 as the positive class."""
        if self.n_classes != 2:
            raise ValueError("binary counts need a 2-class game")
        (tn, fn), (fp, tp) = self.confusion
        return {"TP": tp, "TN": tn, "FP": fp, "FN": fn}

    def to_dict(self, timing: bool = False) -> dict[str, Any]:
        d = {
            "agent": self.agent,
            "seed": self.seed,
            "horizon": self.horizon,
            "final_regret": self.final_regret,
            "n_queries": self.n_queries,
            "regret": self.regret,
            "queries": self.queries,
            "confusion": self.confusion,
            "f1_at_budget": {str(k): v for k, v in self.f1_at_budget.items()},
            "n_classes": self.n_classes,
        }
        if self.n_classes == 2:
            d["counts"] = self.binary_counts()
        if timing:
            d["wall_clock"] = self.wall_clock
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunRecord:
        return cls(
            d["agent"], d["seed"], d["horizon"], d["n_classes"], d["regret"], d["queries"], d["confusion"],
            {int(k): v for k, v in d["f1_at_budget"].items()}, d.get("wall_clock", 0.0),
        )


def run_episode(agent, env: StreamEnv, T: int | None = None, seed: int = 0, trace: IO[str] | None = None) -> RunRecord:
    """Drive the act/feedback loop for T rounds and record regret, queries and f1 snapshots."""
    if agent.game is not env.game and not (
        np.array_equal(agent.game.cost, env.game.cost) and np.array_equal(agent.game.feedback, env.game.feedback)
    ):
        raise ValueError("agent and environment play different games")
    T = env.horizon if T is None else T
    if T > env.horizon - env.t:
        raise EnvError(f"only {env.horizon - env.t} rounds left in the stream")
    game = env.game
    m = game.n_outcomes
    expert = expert_action(game)
    budgets = [b for b in BUDGETS if b <= T]
    regret, queries, snaps = [], [], {}
    cm = np.zeros((m, m), dtype=int)
    start = time.perf_counter()
    for _ in range(T):
        x = env.step()
        y = env.current_label
        action = agent.act(x)
        symbol, inc = env.feedback(action)
        agent.observe(x, action, symbol)
        regret.append(inc)
        queried = action == expert
        if queried:
            queries.append(env.t)
            if len(queries) in budgets:
                snaps[len(queries)] = weighted_f1(agent.predict_classes(env.X_test), env.y_test, m)
        elif action < m:
            cm[action, y] += 1
        if trace is not None and getattr(agent, "last_decision", None) is not None:
            trace.write(json.dumps(agent.last_decision.trace(queried)) + "\n")
    elapsed = time.perf_counter() - start
    return RunRecord(getattr(agent, "name", type(agent).__name__), int(seed), T, m, regret, queries, cm.tolist(), snaps, elapsed)


# configuration -----------------------------------------------------------------


@dataclass
class ExperimentConfig:
    env: Any = field(default_factory=lambda: {"kind": "gaussian", "M": 2, "d": 2, "sep": 3.0})
    game: dict[str, Any] | None = None
    horizon: int = 2000
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    agents: list[str] = field(default_factory=lambda: ["neuralcbp", "random"])
    reference: str = "neuralcbp"
    test_frac: float = 0.15
    label_col: str = "label"
    replace: bool = False
    network: dict[str, Any] = field(default_factory=dict)  # overrides shared by every agent
    agent_config: dict[str, dict[str, Any]] = field(default_factory=dict)
    workers: int = 1
    output_dir: str = "bench_out"

    def __post_init__(self) -> None:
        for s in self.seeds:
            if not 0 <= int(s) < MAX_SEED:
                raise ValueError(f"seed {s} is not a 64-bit unsigned integer")
        for a in self.agents:
            if a not in AGENTS:
                raise ValueError(f"unknown agent {a!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> ExperimentConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)


def resolve_game(cfg: ExperimentConfig) -> Game:
    if cfg.game is not None:
        return game_from_json(cfg.game)
    spec = _parse_source(cfg.env)
    if spec is not None:
        return make_label_efficient(CostSpec.uniform(int(spec["M"])))
    data = read_csv(str(cfg.env), cfg.label_col)
    return make_label_efficient(CostSpec.uniform(int(data.y.max()) + 1))


def build_agent(name: str, game: Game, input_dim: int, seed: int, cfg: ExperimentConfig, env: StreamEnv | None = None):
    overrides = dict(cfg.agent_config.get(name, {}))
    net = {**cfg.network, **overrides.pop("network", {})}
    if name == "neuralcbp":
        return NeuralCBP(game, input_dim, AgentConfig(network=net, **overrides), seed=seed)
    if name == "oracle":
        return OracleAgent(game, env)
    return make_baseline(name, game, input_dim, BaselineConfig(network=net, **overrides), seed=seed)


def run_single(cfg: ExperimentConfig, agent_name: str, seed: int, game: Game | None = None, trace: IO[str] | None = None) -> RunRecord:
    game = game if game is not None else resolve_game(cfg)
    env = load_stream(game, cfg.env, cfg.horizon, seed, cfg.test_frac, cfg.label_col, cfg.replace)
    agent = build_agent(agent_name, game, env.input_dim, seed, cfg, env)
    return run_episode(agent, env, cfg.horizon, seed, trace)


# summaries ---------------------------------------------------------------------


def compute_metrics(records: Iterable[RunRecord], reference: str | None = None) -> list[dict[str, Any]]:
    """One summary row per agent; Welch p-values test reference < agent on final regret."""
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.agent, []).append(r)
    if not groups or any(not g for g in groups.values()):
        raise ValueError("no records to summarise")
    finals = {a: {r.seed: r.final_regret for r in g} for a, g in groups.items()}
    wins = win_counts(finals)
    rows = []
    for a, g in groups.items():
        fr = np.array([r.final_regret for r in g])
        row: dict[str, Any] = {
            "agent": a,
            "mean_regret": float(fr.mean()),
            "std_regret": float(fr.std(ddof=1)) if fr.size > 1 else 0.0,
            "win_count": wins[a],
            "mean_queries": float(np.mean([r.n_queries for r in g])),
            "welch_p_vs_reference": None,
        }
        if reference is not None and reference in groups and a != reference:
            ref = [r.final_regret for r in groups[reference]]
            row["welch_p_vs_reference"] = welch_one_sided(ref, fr)[2]
        if g[0].n_classes == 2:
            for k in ("TP", "TN", "FP", "FN"):
                row[f"mean_{k}"] = float(np.mean([r.binary_counts()[k] for r in g]))
        rows.append(row)
    return rows


SUMMARY_COLUMNS = ("agent", "mean_regret", "std_regret", "win_count", "mean_queries", "welch_p_vs_reference")


def summary_csv(rows: list[dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for row in rows:
        w.writerow(["" if row[c] is None else row[c] for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def _bench_job(args: tuple[dict[str, Any], str, int]) -> dict[str, Any]:
    cfg_dict, agent, seed = args
    return run_single(ExperimentConfig(**cfg_dict), agent, seed).to_dict(timing=True)


def bench(cfg: ExperimentConfig) -> tuple[list[RunRecord], list[dict[str, Any]]]:
    """Run every (agent, seed) pair; writes runs.jsonl and summary.csv to cfg.output_dir."""
    jobs = [(asdict(cfg), a, int(s)) for a in cfg.agents for s in cfg.seeds]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            dicts = list(pool.map(_bench_job, jobs))
    else:
        dicts = [_bench_job(j) for j in jobs]
    records = [RunRecord.from_dict(d) for d in dicts]
    reference = cfg.reference if cfg.reference in cfg.agents else None
    rows = compute_metrics(records, reference)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for d in dicts:
            fh.write(json.dumps(d) + "\n")
    with open(out / "summary.csv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(summary_csv(rows))
    return records, rows
