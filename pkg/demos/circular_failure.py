"""Why a discount ladder cannot leave a rewarding loop, and horizons can.

In the circular MDP, staying in s_b pays +2 per step forever.  Every
discounted module prefers to stay, so none of them ever ends an episode.
Finite-horizon modules count down and walk to a goal once the remaining
horizon is short.
"""
import numpy as np

from tamdp import IgeAgent, NseAgent, build_circular, gamma_ladder, oracle, run_episode
from tamdp.objectives import PAPER_OBJECTIVES

env = build_circular()
rng = np.random.default_rng(0)
s_b = env.state_index("s_b")


def sweep(agent, sweeps):
    pairs = [(s, a) for s in range(env.num_states) if s not in env.terminals
             for a in env.valid_actions(s)]
    for _ in range(sweeps):
        for i in rng.permutation(len(pairs)):
            s, a = pairs[i]
            s2, r, done = env.step(s, int(a), rng)
            agent.update(s, int(a), r, s2, done)


ige = IgeAgent.for_env(env, gammas=gamma_ladder())
sweep(ige, 800)
acts = {env.action_names[ige.greedy_policy(m)[s_b]] for m in range(ige.num_modules)}
print(f"IGE: greedy action at s_b over {ige.num_modules} discounts: {sorted(acts)}")
tr = run_episode(ige, env, PAPER_OBJECTIVES["f1"], max_steps=20, rng=rng, learn=False)
print(f"IGE episode under f1: {tr.length} steps, terminated={tr.terminated}")

nse = NseAgent.for_env(env, num_modules=4)
sweep(nse, 10)
print("NSE horizon tables at s_b (q, r, t per action left/stay/right):")
for n in range(1, 5):
    a = env.action_names[nse.greedy_action(n, s_b)]
    print(f"  n={n}: q={nse.q[n - 1, s_b]} r={nse.r_tab[n - 1, s_b]} t={nse.t_tab[n - 1, s_b]} -> {a}")
dp = oracle.n_step_dp(env, 4)
print("learned tables equal the exact ones:",
      all(np.array_equal(x, y) for x, y in ((nse.q, dp.q), (nse.r_tab, dp.r), (nse.t_tab, dp.t))))
for label in ("f1", "f4", "f7"):
    tr = run_episode(nse, env, PAPER_OBJECTIVES[label], max_steps=20, rng=rng, learn=False)
    print(f"NSE under {label}: R={tr.total_reward:g} T={tr.length} "
          f"ends in {env.state_names[tr.final_state]}")
