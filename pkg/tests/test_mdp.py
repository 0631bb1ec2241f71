import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamdp import paper_grid, random_mdp, run_episode, step
from tamdp.mdp import TaMdp, random_policy_rollouts
from tamdp.objectives import PAPER_OBJECTIVES


class FixedPolicy:
    def __init__(self, actions):
        self.actions = actions
        self.seen = []

    def begin_episode(self, state, objective):
        self.seen.clear()

    def act(self, state, rng):
        return self.actions[state]

    def observe(self, s, a, r, s2, terminal, learn=True):
        self.seen.append((s, a, r, s2, terminal))


def test_rows_normalized_on_shipped_envs(circular):
    for env in (circular, paper_grid()):
        live = [s for s in range(env.num_states) if s not in env.terminals]
        sums = env.transition[live].sum(axis=2)
        valid = env.action_mask[live]
        assert np.allclose(sums[valid], 1.0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), det=st.booleans())
def test_rows_normalized_on_random_mdps(seed, det):
    env = random_mdp(np.random.default_rng(seed), deterministic=det)
    for s in range(env.num_states):
        if s in env.terminals:
            continue
        for a in env.valid_actions(s):
            assert abs(env.transition[s, a].sum() - 1.0) < 1e-12
            assert np.all(env.transition[s, a] >= 0)


def test_constructor_validation():
    P = np.zeros((2, 1, 2))
    P[0, 0, 1] = 0.5
    with pytest.raises(ValueError):
        TaMdp(P, np.zeros_like(P), frozenset({1}), 0)
    P[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        TaMdp(P, np.zeros((2, 1, 3)), frozenset({1}), 0)
    with pytest.raises(ValueError):
        TaMdp(P, np.zeros_like(P), frozenset({1}), 1)
    with pytest.raises(ValueError):
        TaMdp(P, np.zeros_like(P), frozenset({1}), 0, action_mask=np.zeros((2, 1), bool))


def test_step_rules(circular):
    rng = np.random.default_rng(0)
    s_b = circular.state_index("s_b")
    assert step(circular, s_b, circular.action_index("stay"), rng) == (s_b, 2.0, False)
    with pytest.raises(ValueError):
        circular.step(circular.state_index("s_a"), circular.action_index("stay"), rng)
    with pytest.raises(ValueError):
        circular.step(circular.state_index("g_L"), 0, rng)
    with pytest.raises(ValueError):
        circular.step(s_b, 7, rng)


def test_step_frequencies_follow_slip():
    env = paper_grid()
    rng = np.random.default_rng(1)
    s = env.start_state
    n = 20000
    hits = np.zeros(env.num_states)
    for _ in range(n):
        hits[env.step(s, 2, rng)[0]] += 1
    p = env.transition[s, 2]
    for s2 in np.flatnonzero(p):
        assert abs(hits[s2] / n - p[s2]) < 4 * np.sqrt(p[s2] * (1 - p[s2]) / n)


def test_run_episode_records_outcome(chain):
    agent = FixedPolicy({0: 0, 1: 0})
    tr = run_episode(agent, chain, PAPER_OBJECTIVES["f1"], rng=np.random.default_rng(0))
    assert tr.steps == [(0, 0, 1.0), (1, 0, 2.0)]
    assert (tr.total_reward, tr.length, tr.outcome) == (3.0, 2, 3.0)
    assert tr.terminated and tr.final_state == 2
    assert tr.recompute() == (3.0, 2)
    assert tr.states == [0, 1, 2]
    assert agent.seen[-1] == (1, 0, 2.0, 2, True)


def test_truncated_episode_scored_on_partial_outcome(circular):
    stay = FixedPolicy({circular.state_index("s_b"): circular.action_index("stay")})
    tr = run_episode(stay, circular, PAPER_OBJECTIVES["f8"], max_steps=7,
                     rng=np.random.default_rng(0))
    assert not tr.terminated and tr.length == 7
    assert tr.total_reward == 14.0 and tr.outcome == 2.0
    with pytest.raises(ValueError):
        run_episode(stay, circular, PAPER_OBJECTIVES["f1"], max_steps=0)


def test_policy_rollouts_match_deterministic_chain(chain):
    out = random_policy_rollouts(chain, [0, 0, -1], 5, np.random.default_rng(0))
    assert np.all(out == [3.0, 2.0, 1.0])
