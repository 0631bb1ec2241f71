"""Pieces shared by the tabular agents: action masks, exploration, snapshots."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mdp import TaMdp

__all__ = ["TabularAgent", "load_agent", "select_by_objective"]

_REGISTRY: dict[str, type] = {}


def blend(old, target, alpha: float):
    """``old + alpha * (target - old)``; exactly ``target`` when ``alpha == 1``."""
    if alpha == 1.0:
        return target
    return old + alpha * (target - old)


def _score(f, r: float, t: float) -> float:
    try:
        v = f(r, t)
    except ZeroDivisionError:
        return -np.inf
    return -np.inf if v != v else v


def select_by_objective(f, R: np.ndarray, T: np.ndarray) -> int:
    """Index maximizing ``f(R[i], T[i])``; ties go to the smaller ``T``, then the lower index.

    Undefined scores (a ratio over a still-zero step estimate) rank last.
    """
    scores = np.array([_score(f, float(r), float(t)) for r, t in zip(R, T)])
    best = np.flatnonzero(scores == scores.max())
    return int(best[np.argmin(np.asarray(T)[best])])


class TabularAgent:
    algo = "base"

    def __init_subclass__(cls, **kw):
        super().__init_subclass__(**kw)
        _REGISTRY[cls.algo] = cls

    def __init__(self, num_states: int, num_actions: int, alpha: float = 1.0,
                 epsilon: float = 0.0, action_mask: np.ndarray | None = None):
        self.num_states = num_states
        self.num_actions = num_actions
        self.alpha = alpha
        self.epsilon = epsilon
        mask = (np.ones((num_states, num_actions), dtype=bool) if action_mask is None
                else np.asarray(action_mask, dtype=bool))
        self.action_mask = mask
        self._valid = [np.flatnonzero(row) for row in mask]
        self._valid_lists = [v.tolist() for v in self._valid]
        # -inf on unavailable actions, added before any argmax
        self._penalty = np.where(mask, 0.0, -np.inf)

    @classmethod
    def for_env(cls, env: TaMdp, **kw):
        return cls(env.num_states, env.num_actions, action_mask=env.action_mask, **kw)

    def random_action(self, s: int, rng: np.random.Generator) -> int:
        valid = self._valid_lists[s]
        return valid[int(rng.random() * len(valid))]

    def _pick(self, candidates: np.ndarray, rng: np.random.Generator) -> int:
        if len(candidates) == 1:
            return int(candidates[0])
        return int(candidates[int(rng.random() * len(candidates))])

    def _greedy_candidates(self, row: np.ndarray, s: int) -> np.ndarray:
        row = row + self._penalty[s]
        return np.flatnonzero(row == row.max())

    def epsilon_greedy(self, row: np.ndarray, s: int, rng: np.random.Generator) -> int:
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            return self.random_action(s, rng)
        return self._pick(self._greedy_candidates(row, s), rng)

    # snapshots -----------------------------------------------------------

    def _arrays(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def _params(self) -> dict:
        return {}

    def save(self, path) -> Path:
        """Write all tables plus parameters to a ``.npz`` file."""
        path = Path(path)
        meta = {"algo": self.algo, "num_states": self.num_states,
                "num_actions": self.num_actions, "alpha": self.alpha,
                "epsilon": self.epsilon, **self._params()}
        with open(path, "wb") as fh:
            np.savez_compressed(fh, meta=np.array(json.dumps(meta)),
                                action_mask=self.action_mask, **self._arrays())
        return path

    @classmethod
    def load(cls, path):
        with np.load(path, allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            arrays = {k: data[k] for k in data.files if k != "meta"}
        if meta["algo"] != cls.algo:
            raise ValueError(f"snapshot holds a {meta['algo']!r} agent, not {cls.algo!r}")
        return cls._from_snapshot(meta, arrays)

    @classmethod
    def _from_snapshot(cls, meta, arrays):
        raise NotImplementedError


def load_agent(path) -> TabularAgent:
    with np.load(path, allow_pickle=False) as data:
        algo = json.loads(str(data["meta"]))["algo"]
    return _REGISTRY[algo].load(path)
