"""Independent gamma-ensemble: parallel Q-learning over a ladder of discounts.

Every module keeps its own Q table plus running estimates of the total
return and the episode length of its greedy policy.  At the start of an
episode the module whose (return, length) estimate scores best under the
active objective drives the behaviour for the whole episode.
"""
from __future__ import annotations

import numpy as np

from .agent import TabularAgent, blend, select_by_objective
from .objectives import Objective

__all__ = ["gamma_ladder", "IgeAgent"]


def gamma_ladder(base_count: int = 14, fill: int = 2) -> np.ndarray:
    """Discounts i/(i+1) for i = 1..base_count, refined towards 1.

    ``fill`` evenly spaced values go into every gap between consecutive base
    values and into the gap between the last base value and 1 (1 excluded).
    The defaults give 14 + 2 * 14 = 42 discounts.
    """
    if base_count < 1 or fill < 0:
        raise ValueError("base_count must be >= 1 and fill >= 0")
    base = [i / (i + 1) for i in range(1, base_count + 1)]
    values = []
    for lo, hi in zip(base, base[1:] + [1.0]):
        values.append(lo)
        values.extend(lo + (hi - lo) * j / (fill + 1) for j in range(1, fill + 1))
    return np.array(values)


class IgeAgent(TabularAgent):
    algo = "ige"

    def __init__(self, num_states, num_actions, gammas=None, alpha=1.0, epsilon=0.0,
                 action_mask=None):
        super().__init__(num_states, num_actions, alpha, epsilon, action_mask)
        gammas = gamma_ladder() if gammas is None else np.asarray(gammas, dtype=float)
        if gammas.ndim != 1 or len(gammas) == 0:
            raise ValueError("need a non-empty 1-d sequence of discounts")
        if np.any(gammas <= 0) or np.any(gammas >= 1):
            raise ValueError("discounts must lie in (0, 1)")
        if np.any(np.diff(gammas) <= 0):
            raise ValueError("discounts must be strictly increasing")
        self.gammas = gammas
        M = len(gammas)
        self.q = np.zeros((M, num_states, num_actions))
        self.r_exp = np.zeros((M, num_states))
        self.t_exp = np.zeros((M, num_states))
        self.active = 0

    @property
    def num_modules(self) -> int:
        return len(self.gammas)

    def select_module(self, s0: int, f: Objective) -> int:
        """Best module under ``f`` at ``s0``; ties go to fewer steps, then lower index."""
        self.active = select_by_objective(f, self.r_exp[:, s0], self.t_exp[:, s0])
        return self.active

    def begin_episode(self, state, objective):
        self.select_module(state, objective)

    def greedy_actions(self, s: int, module: int | None = None) -> np.ndarray:
        m = self.active if module is None else module
        return self._greedy_candidates(self.q[m, s], s)

    def act(self, s, rng):
        return self.epsilon_greedy(self.q[self.active, s], s, rng)

    def update(self, s, a, r, s_next, terminal):
        alpha = self.alpha
        qs = self.q[:, s, :]
        if terminal:
            target = r
        else:
            target = r + self.gammas * np.max(self.q[:, s_next, :] + self._penalty[s_next], axis=1)
        qs[:, a] = blend(qs[:, a], target, alpha)
        # expectation tables follow each module's own greedy policy only
        masked = qs + self._penalty[s]
        greedy = qs[:, a] == masked.max(axis=1)
        if not greedy.any():
            return
        if terminal:
            boot_r = boot_t = 0.0
        else:
            boot_r = self.r_exp[greedy, s_next]
            boot_t = self.t_exp[greedy, s_next]
        r_old = self.r_exp[greedy, s]
        t_old = self.t_exp[greedy, s]
        self.r_exp[greedy, s] = blend(r_old, r + boot_r, alpha)
        self.t_exp[greedy, s] = blend(t_old, 1.0 + boot_t, alpha)

    def observe(self, s, a, r, s_next, terminal, learn=True):
        if learn:
            self.update(s, a, r, s_next, terminal)

    def greedy_policy(self, module: int) -> np.ndarray:
        """Lowest-index greedy action per state for one module."""
        return np.argmax(self.q[module] + self._penalty, axis=1)

    def _arrays(self):
        return {"gammas": self.gammas, "q": self.q, "r_exp": self.r_exp, "t_exp": self.t_exp}

    @classmethod
    def _from_snapshot(cls, meta, arrays):
        agent = cls(meta["num_states"], meta["num_actions"], gammas=arrays["gammas"],
                    alpha=meta["alpha"], epsilon=meta["epsilon"],
                    action_mask=arrays["action_mask"])
        agent.q[...] = arrays["q"]
        agent.r_exp[...] = arrays["r_exp"]
        agent.t_exp[...] = arrays["t_exp"]
        return agent
