"""Acceptance checks, one per criterion, each printing a PASS/FAIL line.

Run with pytest, or directly (``python tests/test_acceptance.py [numbers]``)
to print the lines without pytest's capture.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import sweep_train  # noqa: E402
from tamdp import (IgeAgent, NseAgent, build_circular, gamma_ladder, oracle,  # noqa: E402
                   paper_grid, random_mdp, run_episode)
from tamdp.harness import (BenchmarkConfig, default_schedules, phase_windows,  # noqa: E402
                           run_benchmark)
from tamdp.objectives import PAPER_OBJECTIVES as F  # noqa: E402

# Hand-derived circular tables, rows n = 1..4.  Columns: s_a left,
# s_b left, s_b stay, s_b right, s_c right.
CIRCULAR_Q = [[0, 0, 2, 0, 1], [0, 0, 2, 1, 1], [0, 0, 3, 1, 1], [0, 0, 5, 1, 1]]
CIRCULAR_R = [[0, 0, 3, 1, 1], [0, 0, 3, 1, 1], [0, 0, 3, 1, 1], [0, 0, 5, 1, 1]]
CIRCULAR_T = [[1, 2, 3, 2, 1], [1, 2, 3, 2, 1], [1, 2, 3, 2, 1], [1, 2, 4, 2, 1]]
CIRCULAR_GREEDY = ["right", "right", "stay", "stay"]
CELLS = [(0, 0), (1, 0), (1, 1), (1, 2), (2, 2)]


def report(number: int, ok: bool, detail: str, seconds: float) -> str:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} ({seconds:.2f} s)"
    print(line, flush=True)
    return line


def _cells(arr):
    return np.array([[arr[n, s, a] for s, a in CELLS] for n in range(arr.shape[0])])


# 1 ----------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    env = build_circular()
    agent = NseAgent.for_env(env, num_modules=4, alpha=1.0, epsilon=1.0)
    rng = np.random.default_rng(0)
    for _ in range(200):
        run_episode(agent, env, F["f1"], rng=rng)
    dp = oracle.n_step_dp(env, 4)
    s_b = env.state_index("s_b")
    err = 0.0
    for q, r, t in ((agent.q, agent.r_tab, agent.t_tab), (dp.q, dp.r, dp.t)):
        for got, want in ((q, CIRCULAR_Q), (r, CIRCULAR_R), (t, CIRCULAR_T)):
            err = max(err, float(np.max(np.abs(_cells(got) - np.array(want)))))
    greedy = [env.action_names[agent.greedy_action(n, s_b)] for n in range(1, 5)]
    greedy_dp = [env.action_names[oracle.nstep_greedy_action(env, dp, n, s_b)] for n in range(1, 5)]
    dt = time.perf_counter() - t0
    ok = err <= 1e-9 and greedy == greedy_dp == CIRCULAR_GREEDY and dt < 1.0
    return ok, f"circular n-step tables max error {err:.1e}, greedy at s_b {greedy}", dt


# 2 ----------------------------------------------------------------------

def criterion_2():
    t0 = time.perf_counter()
    env = build_circular()
    gammas = gamma_ladder()
    agent = IgeAgent.for_env(env, gammas=gammas)
    sweep_train(agent, env, np.random.default_rng(0), 800)
    s_b = env.state_index("s_b")
    stay = env.action_index("stay")
    learned = [int(agent.greedy_policy(m)[s_b]) for m in range(agent.num_modules)]
    exact = [int(oracle.value_iteration_gamma(env, g).greedy_policy(env)[s_b]) for g in gammas]
    # follow each module's greedy policy; a terminal is never reached
    reached = 0
    for m in range(agent.num_modules):
        pol, s = agent.greedy_policy(m), env.start_state
        for _ in range(100):
            s, _, done = env.step(s, int(pol[s]), np.random.default_rng(0))
            if done:
                reached += 1
                break
    proper = sum(p.proper for p in oracle.gamma_sweep(env, gammas))
    dt = time.perf_counter() - t0
    ok = (all(a == stay for a in learned) and all(a == stay for a in exact)
          and reached == 0 and proper == 0 and dt < 5.0)
    return ok, (f"{sum(a == stay for a in learned)}/{len(gammas)} learned and "
                f"{sum(a == stay for a in exact)}/{len(gammas)} exact modules stay at s_b, "
                f"{reached} reach a terminal"), dt


# 3 ----------------------------------------------------------------------

def _valid(env, x):
    live = np.ones(env.num_states, dtype=bool)
    live[list(env.terminals)] = False
    return x[..., live[:, None] & env.action_mask]


def criterion_3(count: int = 50, modules: int = 8):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    gammas = gamma_ladder()
    nse_equal = 0
    ige_err = 0.0
    for _ in range(count):
        S = int(rng.integers(3, 9))
        A = int(rng.integers(1, 4))
        env = random_mdp(rng, num_states=S, num_actions=A, num_terminals=int(rng.integers(1, min(3, S - 1) + 1)))
        nse = NseAgent.for_env(env, num_modules=modules)
        sweep_train(nse, env, rng, 60)
        dp = oracle.n_step_dp(env, modules)
        same = all(np.array_equal(_valid(env, a), _valid(env, b)) for a, b in
                   ((nse.q, dp.q), (nse.r_tab, dp.r), (nse.t_tab, dp.t)))
        nse_equal += same
        ige = IgeAgent.for_env(env, gammas=gammas)
        sweep_train(ige, env, rng, 700)
        for m, g in enumerate(gammas):
            ref = oracle.value_iteration_gamma(env, g, tol=1e-10).q
            ige_err = max(ige_err, float(np.max(np.abs(_valid(env, ige.q[m]) - _valid(env, ref)),
                                                initial=0.0)))
    dt = time.perf_counter() - t0
    ok = nse_equal == count and ige_err <= 1e-3 and dt < 30.0
    return ok, (f"NSE bitwise equal to n-step DP on {nse_equal}/{count} MDPs, "
                f"IGE max |q - q*| {ige_err:.1e}"), dt


# 4 ----------------------------------------------------------------------

def criterion_4(modules: int = 20, tol: float = 0.05):
    t0 = time.perf_counter()
    env = paper_grid()
    s0 = env.start_state
    front = oracle.pareto_front(env)
    names = [p.policy_id for p in front]
    sweep_goals = {p.goal for p in oracle.gamma_sweep(env, gamma_ladder())}
    tab = oracle.n_step_dp(env, modules)
    values = [tab.state_values(env, s0, n) for n in range(1, modules + 1)]
    worst, uncovered = 0.0, []
    for p in front:
        err = min(max(abs(r - p.expected_reward) / abs(p.expected_reward),
                      abs(t - p.expected_steps) / abs(p.expected_steps)) for _, r, t in values)
        worst = max(worst, err)
        if err > tol:
            uncovered.append(p.policy_id)
    dt = time.perf_counter() - t0
    ok = (len(front) == 6 and "g3" not in names and "g4" not in sweep_goals
          and not uncovered and dt < 300.0)
    return ok, (f"front {names}, gamma sweep reaches {sorted(g for g in sweep_goals if g)}, "
                f"worst module match {100 * worst:.1f}% (uncovered: {uncovered or 'none'})"), dt


# 5 ----------------------------------------------------------------------

def criterion_5(window: int = 50, limit: float = 0.5, gap: float = 2.0):
    t0 = time.perf_counter()
    parts, ok = [], True
    for algo in ("ige", "nse", "tqlearn"):
        res = run_benchmark(BenchmarkConfig.preset("desk", algo))
        wins = phase_windows(res, window)[1:]
        if algo == "tqlearn":
            slow = sum(last - first > gap for _, first, last in wins)
            ok &= slow >= 5
            parts.append(f"tqlearn {slow}/8 phases start > {gap} below their end")
        else:
            diffs = {label: abs(last - first) for label, first, last in wins}
            worst = max(diffs, key=diffs.get)
            over = [label for label, d in diffs.items() if d > limit]
            ok &= not over
            parts.append(f"{algo} max |first - last| {diffs[worst]:.2f} in {worst}"
                         f" (over {limit}: {over or 'none'})")
    dt = time.perf_counter() - t0
    ok &= dt < 900.0
    return bool(ok), "; ".join(parts), dt


# 6 ----------------------------------------------------------------------

OBJECTIVE_CASES = [
    ("f1", 5.0, 10, 5.0), ("f2", 5.0, 3, 5.0), ("f2", 5.0, 4, 4.0), ("f2", 5.0, 10, -2.0),
    ("f3", 5.0, 3, 5.0), ("f3", 5.0, 4, 3.7), ("f3", 5.0, 6, 5.0 - 1.3 ** 3),
    ("f4", 100.0, 7, -7.0), ("f5", 6.5, 3, -10.0), ("f5", 6.6, 3, -3.0),
    ("f6", 4.0, 7, 4.0), ("f6", 4.0, 8, -10.0), ("f7", 4.0, 5, 4.0), ("f7", 4.0, 6, -10.0),
    ("f8", 9.0, 3, 3.0), ("f9", 6.5, 2, 3.25), ("f9", 6.49, 2, -1.0),
]


def criterion_6():
    t0 = time.perf_counter()
    bad = [(k, R, T) for k, R, T, want in OBJECTIVE_CASES if abs(F[k](R, T) - want) > 1e-12]
    dt = time.perf_counter() - t0
    return not bad and dt < 1.0, f"{len(OBJECTIVE_CASES) - len(bad)}/{len(OBJECTIVE_CASES)} exact and boundary cases", dt


# 7 ----------------------------------------------------------------------

MONOTONE_DOMAINS = {"f1": (-50, 50, 60), "f2": (-50, 50, 60), "f3": (-50, 50, 25),
                    "f4": (-50, 50, 60), "f5": (-50, 50, 10), "f6": (-10, 50, 60),
                    "f7": (-10, 50, 60), "f8": (0, 50, 60), "f9": (0, 50, 60)}


def criterion_7():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    mono_bad = 0
    for k, (lo, hi, t_hi) in MONOTONE_DOMAINS.items():
        for _ in range(2000):
            r1, r2 = np.sort(rng.uniform(lo, hi, 2))
            t1, t2 = np.sort(rng.integers(1, t_hi + 1, 2))
            mono_bad += F[k](r2, t1) < F[k](r1, t1) or F[k](r1, t2) > F[k](r1, t1)
    rows_bad = 0
    envs = [build_circular(), paper_grid()] + [random_mdp(rng, deterministic=bool(i % 2)) for i in range(40)]
    for env in envs:
        live = np.ones(env.num_states, dtype=bool)
        live[list(env.terminals)] = False
        sums = env.transition.sum(axis=2)[live[:, None] & env.action_mask]
        rows_bad += int(np.sum(np.abs(sums - 1.0) > 1e-12))
    alpha750 = default_schedules("nse")[0](750)
    cfg = BenchmarkConfig(env="paper_grid", algo="nse", episodes_per_phase=20, runs=2, seed=5,
                          phases=("f1", "f7"))
    a, b = run_benchmark(cfg), run_benchmark(cfg)
    same = a.outcomes.tobytes() == b.outcomes.tobytes() and a.lengths.tobytes() == b.lengths.tobytes()
    dt = time.perf_counter() - t0
    ok = mono_bad == 0 and rows_bad == 0 and abs(alpha750 - 0.55) < 1e-12 and same
    return ok, (f"{mono_bad} monotonicity violations, {rows_bad} unnormalized rows, "
                f"alpha(750) = {alpha750:.2f}, reruns bitwise equal: {same}"), dt


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7}


@pytest.mark.parametrize("number", [
    1, 2, 3, 4, pytest.param(5, marks=pytest.mark.slow), 6, 7])
def test_criterion(number, capsys):
    ok, detail, dt = CRITERIA[number]()
    with capsys.disabled():
        print()
        report(number, ok, detail, dt)
    assert ok, detail


if __name__ == "__main__":
    chosen = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    results = [CRITERIA[n]() for n in chosen]
    for n, (ok, detail, dt) in zip(chosen, results):
        report(n, ok, detail, dt)
    raise SystemExit(0 if all(ok for ok, _, _ in results) else 1)
