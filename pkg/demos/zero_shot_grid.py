"""Train once on the goal grid, then switch objectives without further learning.

Compares the goal an n-step ensemble picks for each objective with the
exact best goal, and reports the mean outcome of greedy episodes.
"""
import collections
import sys

import numpy as np

from tamdp import NseAgent, oracle, paper_grid, run_episode
from tamdp.environments import paper_grid_spec, render_grid

episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 3000
env = paper_grid()
rng = np.random.default_rng(1)
print(render_grid(paper_grid_spec()))

front = oracle.pareto_front(env)
print("\nexact Pareto front (E[R], E[T]):")
for p in front:
    print(f"  {p.policy_id}: {p.expected_reward:7.3f} {p.expected_steps:7.3f}")

agent = NseAgent.for_env(env)
f1 = env.objectives["f1"]
for e in range(episodes):
    agent.alpha = float(np.interp(e, [500, 1000], [1.0, 0.1]))
    agent.epsilon = float(np.interp(e, [500, 1000], [0.9, 0.0]))
    run_episode(agent, env, f1, rng=rng)

agent.epsilon = 0.0
print(f"\nafter {episodes} training episodes on f1 only:")
print(f"{'obj':>4} {'exact goal':>10} {'picked n':>8} {'mean outcome':>12}  goals reached")
for label, f in env.objectives.items():
    best = max(front, key=lambda p: f(p.expected_reward, p.expected_steps))
    n = agent.select_module(env.start_state, f)
    out, ends = [], collections.Counter()
    for _ in range(200):
        tr = run_episode(agent, env, f, rng=rng, learn=False)
        out.append(tr.outcome)
        ends[env.state_names[tr.final_state]] += 1
    print(f"{label:>4} {best.policy_id:>10} {n:>8} {np.mean(out):12.3f}  {dict(ends.most_common(3))}")
