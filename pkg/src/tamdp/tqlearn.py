"""Time-indexed Q-learning baseline with one table per objective.

The agent sees the step counter as part of the state and is rewarded only
on termination, with the objective's score of the episode so far.  The
collected reward is not part of the state, so the problem stays partially
observable for this agent; that limitation is inherent to the baseline.
"""
from __future__ import annotations

import numpy as np

from .agent import TabularAgent, blend
from .mdp import DEFAULT_MAX_STEPS
from .objectives import Objective, evaluate_objective, objective_from_dict

__all__ = ["phi_reward", "TimeQAgent"]


def phi_reward(f: Objective, R: float, t: int, is_terminal: bool) -> float:
    """Zero on every transition except the last, which pays ``f(R, t)``."""
    if not is_terminal:
        return 0.0
    return evaluate_objective(f, R, t)


class TimeQAgent(TabularAgent):
    algo = "tqlearn"

    def __init__(self, num_states, num_actions, gamma=0.99, t_max=DEFAULT_MAX_STEPS,
                 alpha=1.0, epsilon=0.0, action_mask=None):
        super().__init__(num_states, num_actions, alpha, epsilon, action_mask)
        if not 0.0 <= gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if t_max < 0:
            raise ValueError("t_max must be >= 0")
        self.gamma = gamma
        self.t_max = t_max
        self.objectives: list[Objective] = []
        self.tables: list[np.ndarray] = []
        self.k = 0
        self.t = 0
        self.R = 0.0

    def slice_for(self, f: Objective) -> int:
        """Index of the table for ``f``, created (zero-filled) on first use."""
        for k, g in enumerate(self.objectives):
            if g == f:
                return k
        self.objectives.append(f)
        self.tables.append(np.zeros((self.t_max + 1, self.num_states, self.num_actions)))
        return len(self.objectives) - 1

    def _time(self, t: int) -> int:
        return t if t <= self.t_max else self.t_max

    def begin_episode(self, state, objective):
        self.k = self.slice_for(objective)
        self.t = 0
        self.R = 0.0

    def act(self, s, rng, k=None, t=None):
        k = self.k if k is None else k
        t = self.t if t is None else t
        return self.epsilon_greedy(self.tables[k][self._time(t), s], s, rng)

    def update(self, k, t, s, a, xi, s_next, terminal):
        table = self.tables[k]
        t = self._time(t)
        old = table[t, s, a]
        if terminal:
            target = xi
        else:
            nxt = table[self._time(t + 1), s_next] + self._penalty[s_next]
            target = xi + self.gamma * nxt.max()
        table[t, s, a] = blend(old, target, self.alpha)

    def observe(self, s, a, r, s_next, terminal, learn=True):
        self.R += r
        if learn:
            xi = phi_reward(self.objectives[self.k], self.R, self.t + 1, terminal)
            self.update(self.k, self.t, s, a, xi, s_next, terminal)
        self.t += 1

    def _arrays(self):
        return {f"q{k}": table for k, table in enumerate(self.tables)}

    def _params(self):
        return {"gamma": self.gamma, "t_max": self.t_max,
                "objectives": [f.to_dict() for f in self.objectives]}

    @classmethod
    def _from_snapshot(cls, meta, arrays):
        agent = cls(meta["num_states"], meta["num_actions"], gamma=meta["gamma"],
                    t_max=meta["t_max"], alpha=meta["alpha"], epsilon=meta["epsilon"],
                    action_mask=arrays["action_mask"])
        for k, spec in enumerate(meta["objectives"]):
            agent.slice_for(objective_from_dict(spec))
            agent.tables[k][...] = arrays[f"q{k}"]
        return agent
