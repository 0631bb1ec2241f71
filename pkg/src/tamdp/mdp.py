"""Tabular time-adaptive MDPs, episode execution and traces."""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .objectives import Objective, evaluate_objective

__all__ = [
    "TaMdp",
    "EpisodeTrace",
    "Agent",
    "step",
    "run_episode",
    "DEFAULT_MAX_STEPS",
]

DEFAULT_MAX_STEPS = 1000


@dataclass(frozen=True, eq=False)
class TaMdp:
    """A finite MDP with terminal states and a set of named objectives.

    ``transition[s, a, s2]`` and ``reward[s, a, s2]`` are dense arrays.
    ``action_mask[s, a]`` marks the actions available in ``s``; when it is
    omitted every action is available everywhere.  Rows of terminal states
    are never read.
    """

    transition: np.ndarray
    reward: np.ndarray
    terminals: frozenset[int]
    start_state: int
    objectives: dict[str, Objective] = field(default_factory=dict)
    action_mask: np.ndarray | None = None
    state_names: tuple[str, ...] | None = None
    action_names: tuple[str, ...] | None = None

    def __post_init__(self):
        P = np.array(self.transition, dtype=np.float64)
        R = np.array(self.reward, dtype=np.float64)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ValueError(f"transition must have shape (S, A, S), got {P.shape}")
        if R.shape != P.shape:
            raise ValueError(f"reward shape {R.shape} != transition shape {P.shape}")
        S, A, _ = P.shape
        mask = (np.ones((S, A), dtype=bool) if self.action_mask is None
                else np.array(self.action_mask, dtype=bool))
        if mask.shape != (S, A):
            raise ValueError(f"action_mask must have shape {(S, A)}")
        terminals = frozenset(int(g) for g in self.terminals)
        if any(not 0 <= g < S for g in terminals):
            raise ValueError("terminal state out of range")
        if not 0 <= self.start_state < S:
            raise ValueError("start_state out of range")
        if self.start_state in terminals:
            raise ValueError("start_state must not be terminal")
        for s in range(S):
            if s in terminals:
                continue
            if not mask[s].any():
                raise ValueError(f"state {s} has no available action")
            sums = P[s, mask[s]].sum(axis=1)
            if np.any(np.abs(sums - 1.0) > 1e-9):
                raise ValueError(f"transition rows of state {s} do not sum to 1: {sums}")
        if np.any(P < 0):
            raise ValueError("negative transition probability")
        for name, arr in (("state_names", self.state_names), ("action_names", self.action_names)):
            if arr is not None and len(arr) != (S if name == "state_names" else A):
                raise ValueError(f"{name} has wrong length")
        for arr in (P, R, mask):
            arr.setflags(write=False)
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "reward", R)
        object.__setattr__(self, "action_mask", mask)
        object.__setattr__(self, "terminals", terminals)
        object.__setattr__(self, "objectives", dict(self.objectives))
        if self.state_names is not None:
            object.__setattr__(self, "state_names", tuple(self.state_names))
        if self.action_names is not None:
            object.__setattr__(self, "action_names", tuple(self.action_names))
        object.__setattr__(self, "_sampler", self._build_sampler())

    def _build_sampler(self):
        # Per (s, a): successor ids, cumulative probabilities and rewards as
        # plain lists, so sampling one step is a bisect.
        table = []
        for s in range(self.num_states):
            row = []
            for a in range(self.num_actions):
                if s in self.terminals or not self.action_mask[s, a]:
                    row.append(None)
                    continue
                nxt = np.flatnonzero(self.transition[s, a] > 0)
                cum = np.cumsum(self.transition[s, a, nxt])
                cum[-1] = 1.0
                row.append((nxt.tolist(), cum.tolist(), self.reward[s, a, nxt].tolist(),
                            [int(n) in self.terminals for n in nxt]))
            table.append(row)
        return table

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    def is_terminal(self, s: int) -> bool:
        return s in self.terminals

    def valid_actions(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.action_mask[s])

    def state_index(self, name: str) -> int:
        if self.state_names is None:
            raise KeyError("environment has no state names")
        return self.state_names.index(name)

    def action_index(self, name: str) -> int:
        if self.action_names is None:
            raise KeyError("environment has no action names")
        return self.action_names.index(name)

    def expected_reward(self) -> np.ndarray:
        """E[r | s, a] as an (S, A) array."""
        return np.einsum("ijk,ijk->ij", self.transition, self.reward)

    def step(self, s: int, a: int, rng: np.random.Generator) -> tuple[int, float, bool]:
        if s in self.terminals:
            raise ValueError(f"cannot act from terminal state {s}")
        if not 0 <= a < self.num_actions:
            raise ValueError(f"action {a} out of range")
        entry = self._sampler[s][a]
        if entry is None:
            raise ValueError(f"action {a} is not available in state {s}")
        nxt, cum, rew, term = entry
        i = 0 if len(nxt) == 1 else bisect_right(cum, rng.random())
        if i == len(nxt):
            i -= 1
        return nxt[i], rew[i], term[i]


def step(env: TaMdp, s: int, a: int, rng: np.random.Generator) -> tuple[int, float, bool]:
    """Sample ``(next_state, reward, is_terminal)`` for taking ``a`` in ``s``."""
    return env.step(s, a, rng)


@dataclass
class EpisodeTrace:
    steps: list[tuple[int, int, float]]
    total_reward: float
    length: int
    outcome: float
    terminated: bool
    final_state: int

    def recompute(self) -> tuple[float, int]:
        return float(sum(r for _, _, r in self.steps)), len(self.steps)

    @property
    def states(self) -> list[int]:
        return [s for s, _, _ in self.steps] + [self.final_state]


class Agent(Protocol):
    def begin_episode(self, state: int, objective: Objective) -> None: ...

    def act(self, state: int, rng: np.random.Generator) -> int: ...

    def observe(self, state: int, action: int, reward: float, next_state: int,
                terminal: bool, learn: bool = True) -> None: ...


def run_episode(agent: Agent, env: TaMdp, f: Objective, max_steps: int = DEFAULT_MAX_STEPS,
                rng: np.random.Generator | None = None, learn: bool = True,
                start_state: int | None = None) -> EpisodeTrace:
    """Run one episode; stops at a terminal state or after ``max_steps`` steps.

    A truncated episode is scored on the reward and length accumulated so far.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if rng is None:
        rng = np.random.default_rng()
    s = env.start_state if start_state is None else start_state
    agent.begin_episode(s, f)
    steps: list[tuple[int, int, float]] = []
    total = 0.0
    done = False
    for _ in range(max_steps):
        a = agent.act(s, rng)
        s2, r, done = env.step(s, a, rng)
        steps.append((s, a, r))
        total += r
        agent.observe(s, a, r, s2, done, learn)
        s = s2
        if done:
            break
    T = len(steps)
    return EpisodeTrace(steps, total, T, evaluate_objective(f, total, T), done, s)


def random_policy_rollouts(env: TaMdp, policy: Sequence[int], n: int, rng: np.random.Generator,
                           max_steps: int = DEFAULT_MAX_STEPS) -> np.ndarray:
    """Monte Carlo (R, T, terminated) samples of a stationary policy from the start state."""
    out = np.empty((n, 3))
    for i in range(n):
        s, total, t, done = env.start_state, 0.0, 0, False
        while t < max_steps and not done:
            s, r, done = env.step(s, int(policy[s]), rng)
            total += r
            t += 1
        out[i] = total, t, done
    return out
