"""Time-adaptive tabular reinforcement learning.

Agents learn a library of behaviours on different time scales and pick the
one that suits the objective f(R, T) of each episode.
"""
from .environments import (GridSpec, Goal, build_circular, build_grid, paper_grid, paper_grid_spec,
                           random_mdp)
from .harness import BenchmarkConfig, RunResults, run_benchmark
from .ige import IgeAgent, gamma_ladder
from .mdp import EpisodeTrace, TaMdp, run_episode, step
from .nse import NseAgent
from .objectives import PAPER_OBJECTIVES, Objective, evaluate_objective
from .oracle import gamma_sweep, n_step_dp, pareto_front, value_iteration_gamma
from .specfile import load_env, load_spec, save_spec
from .tqlearn import TimeQAgent, phi_reward

__all__ = [
    "GridSpec", "Goal", "build_circular", "build_grid", "paper_grid", "paper_grid_spec",
    "random_mdp", "BenchmarkConfig", "RunResults", "run_benchmark",
    "gamma_sweep", "n_step_dp", "pareto_front", "value_iteration_gamma",
    "load_env", "load_spec", "save_spec",
    "IgeAgent", "gamma_ladder", "EpisodeTrace", "TaMdp", "run_episode", "step",
    "NseAgent", "PAPER_OBJECTIVES", "Objective", "evaluate_objective",
    "TimeQAgent", "phi_reward",
]

__version__ = "0.1.0"
