"""n-step ensemble: finite-horizon modules chained through a greedy cascade.

Module n estimates the best total reward collectable within n steps
(``q``), together with the total reward (``r_tab``) and the number of steps
(``t_tab``) until a terminal state is reached when following the greedy
cascade afterwards.  Module n bootstraps on module n - 1; module 1 keeps
only the immediate reward in ``q`` while its ``r_tab``/``t_tab`` bootstrap
on module 1 itself.

Horizons are 1-based in the public API; tables are indexed ``[n - 1]``.
"""
from __future__ import annotations

import numpy as np

from .agent import TabularAgent, blend, select_by_objective
from .objectives import Objective

__all__ = ["NseAgent", "DEFAULT_MODULES"]

DEFAULT_MODULES = 20


class NseAgent(TabularAgent):
    algo = "nse"

    def __init__(self, num_states, num_actions, num_modules=DEFAULT_MODULES, alpha=1.0,
                 epsilon=0.0, action_mask=None):
        super().__init__(num_states, num_actions, alpha, epsilon, action_mask)
        if num_modules < 1:
            raise ValueError("need at least one module")
        M = num_modules
        self.q = np.zeros((M, num_states, num_actions))
        self.r_tab = np.zeros((M, num_states, num_actions))
        self.t_tab = np.zeros((M, num_states, num_actions))
        self._horizons = np.arange(1, M + 1, dtype=float)[:, None]
        self._invalid = ~self.action_mask
        self.active_n = 1

    @property
    def num_modules(self) -> int:
        return self.q.shape[0]

    # greedy cascade ------------------------------------------------------

    def _candidates(self, s: int, lo: int, hi: int) -> np.ndarray:
        """Boolean (hi - lo, A) mask of cascade winners for modules lo+1..hi at ``s``."""
        q, t, r = self.q[lo:hi, s], self.t_tab[lo:hi, s], self.r_tab[lo:hi, s]
        invalid = self._invalid[s]
        t_all = np.where(invalid, np.inf, t)
        cand = t_all <= self._horizons[lo:hi]
        empty = ~cand.any(axis=1)
        if empty.any():
            cand[empty] = t_all[empty] == t_all[empty].min(axis=1, keepdims=True)
        v = np.where(cand, q, -np.inf)
        cand &= v == v.max(axis=1, keepdims=True)
        v = np.where(cand, t, np.inf)
        cand &= v == v.min(axis=1, keepdims=True)
        v = np.where(cand, r, -np.inf)
        cand &= v == v.max(axis=1, keepdims=True)
        return cand

    def greedy_candidates(self, n: int, s: int) -> np.ndarray:
        """All actions tied at the end of the cascade for module ``n``."""
        if not 1 <= n <= self.num_modules:
            raise ValueError(f"horizon {n} outside 1..{self.num_modules}")
        return np.flatnonzero(self._candidates(s, n - 1, n)[0])

    def greedy_action(self, n: int, s: int, rng: np.random.Generator | None = None) -> int:
        """Cascade action of module ``n``; ties are broken at random when ``rng`` is given.

        Tied actions share their q, t and r values, so the lowest index is
        returned without ``rng``.
        """
        cand = self.greedy_candidates(n, s)
        return self._pick(cand, rng) if rng is not None else int(cand[0])

    def state_values(self, s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(q, r, t) at ``s`` under each module's own greedy action, one entry per module."""
        a = np.argmax(self._candidates(s, 0, self.num_modules), axis=1)
        idx = np.arange(self.num_modules)
        return self.q[idx, s, a], self.r_tab[idx, s, a], self.t_tab[idx, s, a]

    # episode hooks -------------------------------------------------------

    def select_module(self, s0: int, f: Objective) -> int:
        """Horizon maximizing ``f`` at ``s0``; ties go to fewer steps, then smaller n."""
        _, R, T = self.state_values(s0)
        self.active_n = select_by_objective(f, R, T) + 1
        return self.active_n

    def begin_episode(self, state, objective):
        self.select_module(state, objective)

    def act(self, s, rng):
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            return self.random_action(s, rng)
        return self._pick(self.greedy_candidates(self.active_n, s), rng)

    def countdown(self) -> int:
        self.active_n = max(1, self.active_n - 1)
        return self.active_n

    def observe(self, s, a, r, s_next, terminal, learn=True):
        if learn:
            self.update(s, a, r, s_next, terminal)
        self.countdown()

    # learning ------------------------------------------------------------

    def update(self, s, a, r, s_next, terminal):
        if s_next == s and not terminal:
            self._update_sequential(s, a, r)
            return
        M = self.num_modules
        if terminal:
            bq = br = bt = 0.0
        else:
            best = np.argmax(self._candidates(s_next, 0, M), axis=1)
            idx = np.arange(M)
            vq = self.q[idx, s_next, best]
            vr = self.r_tab[idx, s_next, best]
            vt = self.t_tab[idx, s_next, best]
            # module n reads module n - 1; module 1 reads itself for r and t
            bq = np.concatenate(([0.0], vq[:-1]))
            br = np.concatenate((vr[:1], vr[:-1]))
            bt = np.concatenate((vt[:1], vt[:-1]))
        alpha = self.alpha
        q, rt, tt = self.q[:, s, a], self.r_tab[:, s, a], self.t_tab[:, s, a]
        self.q[:, s, a] = blend(q, r + bq, alpha)
        self.r_tab[:, s, a] = blend(rt, r + br, alpha)
        self.t_tab[:, s, a] = blend(tt, 1.0 + bt, alpha)

    def _update_sequential(self, s, a, r):
        # Self-transition: module n must see module n - 1 after its update.
        alpha = self.alpha
        b1 = int(np.argmax(self._candidates(s, 0, 1)[0]))
        br, bt = self.r_tab[0, s, b1], self.t_tab[0, s, b1]
        self._apply(0, s, a, r, 0.0, br, bt, alpha)
        for k in range(1, self.num_modules):
            b = int(np.argmax(self._candidates(s, k - 1, k)[0]))
            self._apply(k, s, a, r, self.q[k - 1, s, b], self.r_tab[k - 1, s, b],
                        self.t_tab[k - 1, s, b], alpha)

    def _apply(self, k, s, a, r, bq, br, bt, alpha):
        q, rt, tt = self.q[k, s, a], self.r_tab[k, s, a], self.t_tab[k, s, a]
        self.q[k, s, a] = blend(q, r + bq, alpha)
        self.r_tab[k, s, a] = blend(rt, r + br, alpha)
        self.t_tab[k, s, a] = blend(tt, 1.0 + bt, alpha)

    # snapshots -----------------------------------------------------------

    def _arrays(self):
        return {"q": self.q, "r_tab": self.r_tab, "t_tab": self.t_tab}

    @classmethod
    def _from_snapshot(cls, meta, arrays):
        agent = cls(meta["num_states"], meta["num_actions"], num_modules=arrays["q"].shape[0],
                    alpha=meta["alpha"], epsilon=meta["epsilon"],
                    action_mask=arrays["action_mask"])
        agent.q[...] = arrays["q"]
        agent.r_tab[...] = arrays["r_tab"]
        agent.t_tab[...] = arrays["t_tab"]
        return agent
