"""Exact dynamic-programming references for the learning agents.

These routines are deliberately plain (explicit loops over states where it
helps readability) and share no code with the agents they are used to check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .mdp import TaMdp

__all__ = [
    "OracleError",
    "ImproperPolicyError",
    "ValueIterationResult",
    "NStepTables",
    "ParetoPoint",
    "GammaSweepPoint",
    "value_iteration_gamma",
    "n_step_dp",
    "nstep_greedy_action",
    "policy_eval",
    "absorption_probabilities",
    "restricted_to_goal",
    "pareto_front",
    "non_dominated",
    "gamma_sweep",
]


class OracleError(RuntimeError):
    pass


class ImproperPolicyError(OracleError):
    """Raised when a policy can cycle forever without reaching a terminal state."""

    def __init__(self, states, names=None):
        self.states = sorted(int(s) for s in states)
        label = [names[s] for s in self.states] if names else self.states
        super().__init__(f"policy never terminates from states {label}")


def _nonterminal(env: TaMdp) -> np.ndarray:
    keep = np.ones(env.num_states, dtype=bool)
    keep[list(env.terminals)] = False
    return keep


def _terminal_zero(env: TaMdp, v: np.ndarray) -> np.ndarray:
    v = v.copy()
    v[list(env.terminals)] = 0.0
    return v


@dataclass
class ValueIterationResult:
    q: np.ndarray
    iterations: int
    residual: float

    def greedy_policy(self, env: TaMdp) -> np.ndarray:
        """Greedy action per state, lowest action index on ties; -1 for terminals."""
        pol = np.full(env.num_states, -1, dtype=int)
        for s in np.flatnonzero(_nonterminal(env)):
            row = np.where(env.action_mask[s], self.q[s], -np.inf)
            pol[s] = int(np.argmax(row))
        return pol


def value_iteration_gamma(env: TaMdp, gamma: float, tol: float = 1e-8,
                          max_iter: int = 100_000) -> ValueIterationResult:
    """Q* of the discounted Bellman optimality operator (sup-norm ``tol``).

    ``gamma = 1`` is accepted but only converges when every policy reaches a
    terminal state; otherwise :class:`OracleError` is raised at ``max_iter``.
    Unavailable actions hold ``-inf``, terminal rows hold 0.
    """
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    mask = env.action_mask.copy()
    mask[list(env.terminals)] = False
    r = env.expected_reward()
    q = np.where(mask, 0.0, -np.inf)
    q[list(env.terminals)] = 0.0
    for it in range(1, max_iter + 1):
        v = np.where(mask.any(axis=1), np.max(np.where(mask, q, -np.inf), axis=1), 0.0)
        v = _terminal_zero(env, v)
        new = r + gamma * env.transition @ v
        new = np.where(mask, new, q)
        finite = np.isfinite(new)
        diff = float(np.max(np.abs(new[finite] - q[finite]), initial=0.0))
        q = new
        if diff < tol:
            return ValueIterationResult(q, it, diff)
    raise OracleError(f"value iteration did not converge in {max_iter} iterations "
                      f"(gamma={gamma}, last change {diff:.3g})")


@dataclass
class NStepTables:
    """Q_n, R_n, T_n for n = 1..M, stored at index n - 1; shape (M, S, A)."""

    q: np.ndarray
    r: np.ndarray
    t: np.ndarray

    @property
    def horizon(self) -> int:
        return self.q.shape[0]

    def state_values(self, env: TaMdp, s: int, n: int) -> tuple[float, float, float]:
        a = nstep_greedy_action(env, self, n, s)
        return self.q[n - 1, s, a], self.r[n - 1, s, a], self.t[n - 1, s, a]


def nstep_greedy_action(env: TaMdp, tables: NStepTables, n: int, s: int) -> int:
    """Lowest-index action of the greedy cascade for module ``n`` in state ``s``."""
    return _cascade(env.valid_actions(s), tables.q[n - 1, s], tables.r[n - 1, s],
                    tables.t[n - 1, s], n)[0]


def _cascade(actions, q, r, t, n):
    feasible = [a for a in actions if t[a] <= n]
    if not feasible:
        tmin = min(t[a] for a in actions)
        feasible = [a for a in actions if t[a] == tmin]
    qmax = max(q[a] for a in feasible)
    best_q = [a for a in feasible if q[a] == qmax]
    tmin = min(t[a] for a in best_q)
    fastest = [a for a in best_q if t[a] == tmin]
    rmax = max(r[a] for a in fastest)
    return [a for a in fastest if r[a] == rmax]


def n_step_dp(env: TaMdp, M: int, tol: float = 1e-12, max_iter: int = 100_000) -> NStepTables:
    """Backward induction over the horizon under the greedy cascade.

    Module 1 is a fixed point of its own recursion (its R and T bootstrap on
    module 1) and is solved by repeated synchronous sweeps; modules 2..M then
    each need a single sweep over module n - 1.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    S, A = env.num_states, env.num_actions
    live = [s for s in range(S) if s not in env.terminals]
    mask = np.zeros((S, A), dtype=bool)
    mask[live] = env.action_mask[live]
    P, Rw = env.transition, env.reward
    q = np.zeros((M, S, A))
    r = np.zeros((M, S, A))
    t = np.zeros((M, S, A))
    q[0] = np.where(mask, env.expected_reward(), 0.0)

    def successor_values(k):
        vq, vr, vt = np.zeros(S), np.zeros(S), np.zeros(S)
        for s in live:
            a = _cascade(env.valid_actions(s), q[k, s], r[k, s], t[k, s], k + 1)[0]
            vq[s], vr[s], vt[s] = q[k, s, a], r[k, s, a], t[k, s, a]
        return vq, vr, vt

    def backup(v):
        # E[r + v(s')] and E[1 + v(s')] over successors
        return (np.where(mask, np.sum(P * (Rw + v[None, None, :]), axis=2), 0.0),
                np.where(mask, np.sum(P * (1.0 + v[None, None, :]), axis=2), 0.0))

    for it in range(max_iter):
        _, vr, vt = successor_values(0)
        new_r, _ = backup(vr)
        _, new_t = backup(vt)
        done = (np.max(np.abs(new_r - r[0])) <= tol and np.max(np.abs(new_t - t[0])) <= tol)
        r[0], t[0] = new_r, new_t
        if done:
            break
    else:
        raise OracleError("module-1 recursion did not converge; some state cannot reach a terminal")

    for n in range(1, M):
        vq, vr, vt = successor_values(n - 1)
        q[n], _ = backup(vq)
        r[n], _ = backup(vr)
        _, t[n] = backup(vt)
    return NStepTables(q, r, t)


def _as_policy_array(env: TaMdp, policy) -> np.ndarray:
    pol = np.full(env.num_states, -1, dtype=int)
    if isinstance(policy, dict):
        for s, a in policy.items():
            s = env.state_index(s) if isinstance(s, str) else int(s)
            pol[s] = env.action_index(a) if isinstance(a, str) else int(a)
    else:
        pol[:] = np.asarray(policy, dtype=int)
    for s in range(env.num_states):
        if s in env.terminals:
            pol[s] = -1
        elif pol[s] < 0:
            valid = env.valid_actions(s)
            if len(valid) == 1:
                pol[s] = valid[0]
        elif not env.action_mask[s, pol[s]]:
            raise ValueError(f"policy picks unavailable action {pol[s]} in state {s}")
    return pol


def _policy_closure(env: TaMdp, pol: np.ndarray, roots) -> list[int]:
    seen, stack = set(), [int(s) for s in roots if s not in env.terminals]
    while stack:
        s = stack.pop()
        if s in seen:
            continue
        seen.add(s)
        if pol[s] < 0:
            raise ValueError(f"policy has no action for reachable state {s}")
        for s2 in np.flatnonzero(env.transition[s, pol[s]] > 0):
            if int(s2) not in env.terminals and int(s2) not in seen:
                stack.append(int(s2))
    return sorted(seen)


def _check_proper(env: TaMdp, pol: np.ndarray, states: list[int]):
    # states from which no terminal is reachable under the policy
    can_finish = set()
    changed = True
    while changed:
        changed = False
        for s in states:
            if s in can_finish:
                continue
            nxt = np.flatnonzero(env.transition[s, pol[s]] > 0)
            if any(int(n) in env.terminals or int(n) in can_finish for n in nxt):
                can_finish.add(s)
                changed = True
    stuck = set(states) - can_finish
    if stuck:
        raise ImproperPolicyError(stuck, env.state_names)


def policy_eval(env: TaMdp, policy, start=None) -> tuple[np.ndarray, np.ndarray]:
    """Expected total reward and expected steps to termination under a policy.

    ``policy`` is an array of actions per state or a mapping state -> action
    (names allowed).  States with a single available action may be omitted.
    Values are computed for every state reachable from ``start`` (default:
    every state the policy assigns); other entries are NaN and terminals are 0.
    """
    pol = _as_policy_array(env, policy)
    roots = np.flatnonzero(pol >= 0) if start is None else [start]
    states = _policy_closure(env, pol, roots)
    _check_proper(env, pol, states)
    idx = {s: i for i, s in enumerate(states)}
    n = len(states)
    A = np.eye(n)
    b_r = np.zeros(n)
    for s in states:
        i = idx[s]
        p = env.transition[s, pol[s]]
        b_r[i] = float(p @ env.reward[s, pol[s]])
        for s2 in np.flatnonzero(p > 0):
            if int(s2) in idx:
                A[i, idx[int(s2)]] -= p[s2]
    sol = np.linalg.solve(A, np.column_stack([b_r, np.ones(n)]))
    er = np.full(env.num_states, np.nan)
    et = np.full(env.num_states, np.nan)
    er[list(env.terminals)] = 0.0
    et[list(env.terminals)] = 0.0
    er[states] = sol[:, 0]
    et[states] = sol[:, 1]
    return er, et


def absorption_probabilities(env: TaMdp, policy, start: int | None = None) -> dict[int, float]:
    """Probability of ending in each terminal state when starting from ``start``."""
    start = env.start_state if start is None else start
    pol = _as_policy_array(env, policy)
    states = _policy_closure(env, pol, [start])
    _check_proper(env, pol, states)
    idx = {s: i for i, s in enumerate(states)}
    goals = sorted(env.terminals)
    A = np.eye(len(states))
    B = np.zeros((len(states), len(goals)))
    for s in states:
        p = env.transition[s, pol[s]]
        for s2 in np.flatnonzero(p > 0):
            s2 = int(s2)
            if s2 in idx:
                A[idx[s], idx[s2]] -= p[s2]
            else:
                B[idx[s], goals.index(s2)] += p[s2]
    sol = np.linalg.solve(A, B)
    return {g: float(sol[idx[start], j]) for j, g in enumerate(goals)}


def restricted_to_goal(env: TaMdp, goal: int) -> TaMdp:
    """Copy of ``env`` where every other terminal acts as a wall.

    Probability mass that would enter another terminal stays in the source
    state and pays the reward of a self-transition there.
    """
    P = env.transition.copy()
    Rw = env.reward.copy()
    others = [g for g in env.terminals if g != goal]
    for s in range(env.num_states):
        if s in env.terminals:
            continue
        for h in others:
            moved = P[s, :, h].copy()
            P[s, :, h] = 0.0
            P[s, :, s] += moved
            Rw[s, :, s] = np.where(moved > 0, env.reward[s, :, s], Rw[s, :, s])
    mask = env.action_mask.copy()
    for h in others:
        P[h] = 0.0
        P[h, :, h] = 1.0
        Rw[h] = 0.0
        mask[h] = True
    return TaMdp(P, Rw, frozenset({goal}), env.start_state, env.objectives, mask,
                 env.state_names, env.action_names)


@dataclass(frozen=True)
class ParetoPoint:
    expected_reward: float
    expected_steps: float
    policy_id: str


def non_dominated(points: list[ParetoPoint], eps: float = 1e-12) -> list[ParetoPoint]:
    """Points not dominated by any other (more reward and fewer steps, one strictly)."""
    keep = []
    for p in points:
        dominated = False
        for o in points:
            if o is p:
                continue
            ge = o.expected_reward >= p.expected_reward - eps and o.expected_steps <= p.expected_steps + eps
            strict = o.expected_reward > p.expected_reward + eps or o.expected_steps < p.expected_steps - eps
            if ge and strict:
                dominated = True
                break
        if not dominated and not any(_same(p, k, eps) for k in keep):
            keep.append(p)
    return sorted(keep, key=lambda p: (p.expected_steps, -p.expected_reward, p.policy_id))


def _same(a: ParetoPoint, b: ParetoPoint, eps: float) -> bool:
    return (abs(a.expected_reward - b.expected_reward) <= eps
            and abs(a.expected_steps - b.expected_steps) <= eps)


def _name(env: TaMdp, s: int) -> str:
    return env.state_names[s] if env.state_names else str(s)


def _per_goal_points(env: TaMdp, s0: int, tol: float = 1e-10,
                     max_iter: int = 20_000) -> list[ParetoPoint]:
    points = []
    for g in sorted(env.terminals):
        sub = restricted_to_goal(env, g)
        inside = np.zeros(env.num_states, dtype=bool)
        inside[list(_reaches(sub, g))] = True
        if not inside[s0]:
            continue
        # actions that can leave the region able to reach g are never optimal
        ok = sub.action_mask & ~np.any((sub.transition > 0) & ~inside[None, None, :], axis=2)
        ok[~inside] = False
        ok[g] = False
        r = sub.expected_reward()
        v = np.zeros(env.num_states)
        for _ in range(max_iter):
            q = np.where(ok, r + sub.transition @ v, -np.inf)
            new = np.where(ok.any(axis=1), q.max(axis=1), 0.0)
            if np.max(np.abs(new - v)) < tol:
                break
            v = new
        else:
            raise OracleError(f"undiscounted backup towards {_name(env, g)} does not converge")
        # among reward-optimal actions prefer the fewest expected steps
        best = ok & (q >= new[:, None] - 1e-9 * max(1.0, np.max(np.abs(new))))
        t = np.zeros(env.num_states)
        for _ in range(max_iter):
            qt = np.where(best, 1.0 + sub.transition @ t, np.inf)
            nt = np.where(best.any(axis=1), qt.min(axis=1), 0.0)
            if np.max(np.abs(nt - t)) < tol:
                break
            t = nt
        pol = np.where(best.any(axis=1), np.argmin(qt, axis=1), -1)
        er, et = policy_eval(sub, pol, start=s0)
        points.append(ParetoPoint(float(er[s0]), float(et[s0]), _name(env, g)))
    return points


def _reaches(env: TaMdp, goal: int) -> set[int]:
    found = {goal}
    changed = True
    while changed:
        changed = False
        for s in range(env.num_states):
            if s in found or s in env.terminals:
                continue
            if np.any(env.transition[s, env.action_mask[s]][:, list(found)] > 0):
                found.add(s)
                changed = True
    return found


def _enumerated_points(env: TaMdp, s0: int, cap: int) -> list[ParetoPoint]:
    # only states reachable from s0 matter
    reach, stack = set(), [s0]
    while stack:
        s = stack.pop()
        if s in reach or s in env.terminals:
            continue
        reach.add(s)
        for a in env.valid_actions(s):
            stack.extend(int(x) for x in np.flatnonzero(env.transition[s, a] > 0))
    states = sorted(reach)
    choices = [env.valid_actions(s) for s in states]
    count = int(np.prod([len(c) for c in choices], dtype=float))
    if count > cap:
        raise OracleError(f"{count} deterministic policies exceed the enumeration cap {cap}")
    points = []
    pol = np.full(env.num_states, -1, dtype=int)
    for combo in itertools.product(*choices):
        pol[states] = combo
        try:
            er, et = policy_eval(env, pol, start=s0)
        except ImproperPolicyError:
            continue
        label = ",".join(
            f"{_name(env, s)}:{env.action_names[a] if env.action_names else a}"
            for s, a in zip(states, combo))
        points.append(ParetoPoint(float(er[s0]), float(et[s0]), label))
    return points


def pareto_front(env: TaMdp, s0: int | None = None, method: str = "auto",
                 cap: int = 200_000, max_states_enumerate: int = 12) -> list[ParetoPoint]:
    """Non-dominated (E[R], E[T]) choices from ``s0``.

    ``per_goal`` computes, for each terminal, the reward-maximizing policy of
    the MDP where all other terminals are walls.  ``enumerate`` evaluates every
    proper deterministic stationary policy.  ``auto`` tries ``per_goal`` and
    falls back to enumeration for small MDPs when that fails (for example
    when a reward cycle makes the undiscounted backup diverge).
    """
    s0 = env.start_state if s0 is None else s0
    if method == "enumerate":
        return non_dominated(_enumerated_points(env, s0, cap))
    try:
        points = _per_goal_points(env, s0)
    except OracleError:
        if method == "per_goal" or env.num_states > max_states_enumerate:
            raise
        return non_dominated(_enumerated_points(env, s0, cap))
    return non_dominated(points)


@dataclass(frozen=True)
class GammaSweepPoint:
    gamma: float
    expected_reward: float
    expected_steps: float
    goal: str | None
    goal_probs: dict[str, float]
    proper: bool


def gamma_sweep(env: TaMdp, gammas, s0: int | None = None, tol: float = 1e-10) -> list[GammaSweepPoint]:
    """Outcome of the discounted-optimal greedy policy for each discount factor.

    ``goal`` is the most likely terminal; improper policies get ``goal=None``.
    """
    s0 = env.start_state if s0 is None else s0
    out = []
    for gamma in gammas:
        pol = value_iteration_gamma(env, float(gamma), tol=tol).greedy_policy(env)
        try:
            er, et = policy_eval(env, pol, start=s0)
            probs = absorption_probabilities(env, pol, s0)
        except ImproperPolicyError:
            out.append(GammaSweepPoint(float(gamma), float("nan"), float("inf"), None, {}, False))
            continue
        named = {_name(env, g): p for g, p in probs.items()}
        best = max(named, key=named.get)
        out.append(GammaSweepPoint(float(gamma), float(er[s0]), float(et[s0]), best, named, True))
    return out
