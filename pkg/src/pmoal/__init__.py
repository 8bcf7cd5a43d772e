"""Partial-monitoring games, structure analysis, NeuralCBP and an online active learning harness."""
from .agent import AgentConfig, NeuralCBP
from .game import CostSpec, Game, GameError, build_game, make_label_efficient
from .harness import ExperimentConfig, RunRecord, bench, compute_metrics, run_episode, run_single
from .neural import EENets, NetworkConfig
from .structure import StructureError, StructureReport, analyze

__all__ = [
    "AgentConfig", "CostSpec", "EENets", "ExperimentConfig", "Game", "GameError", "NetworkConfig", "NeuralCBP",
    "RunRecord", "StructureError", "StructureReport", "analyze", "bench", "build_game", "compute_metrics",
    "make_label_efficient", "run_episode", "run_single",
]
