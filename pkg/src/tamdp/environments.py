"""The stochastic goal grid-world and the circular positive-reward MDP."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mdp import TaMdp
from .objectives import PAPER_OBJECTIVES, Objective

__all__ = [
    "Goal",
    "GridSpec",
    "build_grid",
    "build_circular",
    "random_mdp",
    "paper_grid_spec",
    "paper_grid",
    "grid_cell",
    "grid_state",
    "render_grid",
    "MOVES",
    "ACTION_NAMES",
]

# north, east, south, west; y grows downwards
MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))
ACTION_NAMES = ("N", "E", "S", "W")


@dataclass(frozen=True)
class Goal:
    name: str
    cell: tuple[int, int]
    reward: float


@dataclass(frozen=True)
class GridSpec:
    """A 4-connected grid with terminal goal cells and per-cell step rewards.

    Every move costs the step reward of the cell it starts from; entering a
    goal additionally pays the goal's reward.  With probability ``slip_prob``
    the move direction is replaced by a uniformly random one (which may be
    the intended one).  Moves off the grid leave the agent in place.
    """

    width: int
    height: int
    start: tuple[int, int]
    goals: tuple[Goal, ...]
    slip_prob: float = 0.1
    default_step_reward: float = -2.0
    step_rewards: dict[tuple[int, int], float] = field(default_factory=dict)
    name: str = "grid"

    def step_reward(self, cell: tuple[int, int]) -> float:
        return self.step_rewards.get(tuple(cell), self.default_step_reward)

    def goal(self, name: str) -> Goal:
        for g in self.goals:
            if g.name == name:
                return g
        raise KeyError(name)


def grid_state(spec: GridSpec, cell: tuple[int, int]) -> int:
    x, y = cell
    return y * spec.width + x


def grid_cell(spec: GridSpec, state: int) -> tuple[int, int]:
    return state % spec.width, state // spec.width


def _inside(spec: GridSpec, cell) -> bool:
    x, y = cell
    return 0 <= x < spec.width and 0 <= y < spec.height


def build_grid(spec: GridSpec, objectives: dict[str, Objective] | None = None) -> TaMdp:
    if spec.width < 1 or spec.height < 1:
        raise ValueError("grid must be at least 1x1")
    if not 0.0 <= spec.slip_prob <= 1.0:
        raise ValueError("slip_prob must be a probability")
    if not spec.goals:
        raise ValueError("grid needs at least one goal")
    cells = [tuple(g.cell) for g in spec.goals]
    for c in cells + [tuple(spec.start)]:
        if not _inside(spec, c):
            raise ValueError(f"cell {c} lies outside the {spec.width}x{spec.height} grid")
    if len(set(cells)) != len(cells):
        raise ValueError("goal cells must be distinct")
    if len({g.name for g in spec.goals}) != len(spec.goals):
        raise ValueError("goal names must be distinct")
    if tuple(spec.start) in cells:
        raise ValueError("start cell overlaps a goal")
    for c in spec.step_rewards:
        if not _inside(spec, c):
            raise ValueError(f"step reward cell {c} lies outside the grid")

    S, A = spec.width * spec.height, len(MOVES)
    goal_reward = {grid_state(spec, g.cell): g.reward for g in spec.goals}
    bonus = np.zeros(S)
    for s2, value in goal_reward.items():
        bonus[s2] = value
    P = np.zeros((S, A, S))
    Rw = np.zeros((S, A, S))
    direct = 1.0 - spec.slip_prob
    spread = spec.slip_prob / A
    for s in range(S):
        if s in goal_reward:
            continue
        x, y = grid_cell(spec, s)
        base = spec.step_reward((x, y))
        dest = []
        for dx, dy in MOVES:
            c = (x + dx, y + dy)
            dest.append(grid_state(spec, c) if _inside(spec, c) else s)
        for a in range(A):
            for d, s2 in enumerate(dest):
                P[s, a, s2] += spread + (direct if d == a else 0.0)
        # defined for every successor so that derived MDPs (e.g. goals turned
        # into walls) can reuse the self-transition reward
        Rw[s] = base + bonus[None, :]
    goal_names = {tuple(g.cell): g.name for g in spec.goals}
    names = []
    for s in range(S):
        x, y = grid_cell(spec, s)
        names.append(goal_names.get((x, y), f"{x},{y}"))
    return TaMdp(
        transition=P,
        reward=Rw,
        terminals=frozenset(goal_reward),
        start_state=grid_state(spec, spec.start),
        objectives=dict(PAPER_OBJECTIVES if objectives is None else objectives),
        state_names=tuple(names),
        action_names=ACTION_NAMES,
    )


def render_grid(spec: GridSpec, policy=None) -> str:
    """Character dump: ``S`` start, goal index digits, ``-``/``.`` for cheap/default cells.

    With a policy (one action per state) the non-goal cells show arrows.
    """
    arrows = "^>v<"
    goal_at = {tuple(g.cell): g.name[-1] for g in spec.goals}
    lines = []
    for y in range(spec.height):
        row = []
        for x in range(spec.width):
            c = (x, y)
            if c in goal_at:
                row.append(goal_at[c])
            elif policy is not None:
                row.append(arrows[int(policy[grid_state(spec, c)])])
            elif c == tuple(spec.start):
                row.append("S")
            elif spec.step_reward(c) != spec.default_step_reward:
                row.append("-")
            else:
                row.append(".")
        lines.append(" ".join(row))
    return "\n".join(lines)


def _straight_path(start, moves):
    x, y = start
    cells = []
    for m in moves:
        dx, dy = MOVES["NESW".index(m)]
        x, y = x + dx, y + dy
        cells.append((x, y))
    return cells


# Goal layout: name -> (move string from the start, terminal reward).  The
# cells visited before the goal form its cheap path (step reward -1).
_PAPER_ROUTES = {
    "g1": ("WW", 5.8),
    "g2": ("EEE", 9.3),
    "g4": ("SSWWW", 12.2),
    "g3": ("SSSEEEE", 12.9),
    "g5": ("SSSSSWWW", 18.6),
    "g6": ("SSSSSSSEEEE", 25.4),
    "g7": ("SSSSSSSSWWWWW", 30.5),
}
_PAPER_SIZE = (15, 10)
_PAPER_START = (7, 0)


def paper_grid_spec() -> GridSpec:
    """Default goal grid: 7 goals on the branches of a tree, farther goals pay more.

    A trunk runs south from the start on the top edge and branches alternate
    west and east.  Rewards are set so that g3 is dominated (it pays less
    than g4 and takes longer), g4 is never the choice of any discount in
    :func:`tamdp.ige.gamma_ladder`, and every goal on the front is matched within
    5% by some horizon of a 20-module n-step ensemble.
    """
    goals = []
    cheap: dict[tuple[int, int], float] = {}
    for name, (moves, reward) in _PAPER_ROUTES.items():
        cells = _straight_path(_PAPER_START, moves)
        goals.append(Goal(name, cells[-1], reward))
        for c in [_PAPER_START] + cells[:-1]:
            cheap[c] = -1.0
    return GridSpec(width=_PAPER_SIZE[0], height=_PAPER_SIZE[1], start=_PAPER_START,
                    goals=tuple(goals), slip_prob=0.1, default_step_reward=-2.0,
                    step_rewards=cheap, name="paper_grid")


def paper_grid() -> TaMdp:
    return build_grid(paper_grid_spec())


def build_circular(objectives: dict[str, Objective] | None = None) -> TaMdp:
    """Five-state loop: stay in ``s_b`` for +2 per step, or walk two steps to a goal.

    Actions are ``left``, ``stay`` and ``right``; ``s_b`` offers all three,
    ``s_a`` only ``left`` and ``s_c`` only ``right``.  Walking left ends in
    ``g_L`` with reward 0, walking right ends in ``g_R`` with reward 1.
    """
    names = ("s_a", "s_b", "s_c", "g_L", "g_R")
    s_a, s_b, s_c, g_L, g_R = range(5)
    left, stay, right = range(3)
    P = np.zeros((5, 3, 5))
    R = np.zeros((5, 3, 5))
    mask = np.zeros((5, 3), dtype=bool)
    for s, a, s2, r in [
        (s_a, left, g_L, 0.0),
        (s_b, left, s_a, 0.0),
        (s_b, stay, s_b, 2.0),
        (s_b, right, s_c, 0.0),
        (s_c, right, g_R, 1.0),
    ]:
        P[s, a, s2] = 1.0
        R[s, a, s2] = r
        mask[s, a] = True
    return TaMdp(
        transition=P,
        reward=R,
        terminals=frozenset({g_L, g_R}),
        start_state=s_b,
        objectives=dict(PAPER_OBJECTIVES if objectives is None else objectives),
        action_mask=mask,
        state_names=names,
        action_names=("left", "stay", "right"),
    )


def random_mdp(rng: np.random.Generator, num_states: int = 8, num_actions: int = 3,
               num_terminals: int = 2, deterministic: bool = True,
               reward_scale: float = 1.0) -> TaMdp:
    """Random MDP in which every non-terminal state can reach a terminal.

    Each non-terminal state gets between 1 and ``num_actions`` available
    actions; one of them moves strictly closer (in a random order of the
    states) to a terminal, which guarantees reachability.  Rewards are drawn
    from a normal distribution rounded to two decimals.  State 0 is the start.
    """
    if num_states < 2 or not 1 <= num_terminals < num_states:
        raise ValueError("need at least one terminal and one non-terminal state")
    S, A = num_states, num_actions
    terminals = set(range(S - num_terminals, S))
    # terminals rank lowest; every state has an action leading to a lower rank
    order = [s for s in range(S) if s not in terminals]
    rng.shuffle(order)
    rank = {g: -1 for g in terminals}
    rank.update({s: i for i, s in enumerate(order)})
    P = np.zeros((S, A, S))
    Rw = np.zeros((S, A, S))
    mask = np.zeros((S, A), dtype=bool)
    for s in order:
        n_act = int(rng.integers(1, A + 1))
        acts = rng.choice(A, size=n_act, replace=False)
        closer = [x for x in range(S) if rank[x] < rank[s]]
        for i, a in enumerate(acts):
            mask[s, a] = True
            if deterministic:
                s2 = int(rng.choice(closer)) if i == 0 else int(rng.integers(S))
                P[s, a, s2] = 1.0
            else:
                p = rng.dirichlet(np.ones(S))
                if i == 0:
                    p = 0.5 * p
                    p[int(rng.choice(closer))] += 0.5
                P[s, a] = p
            Rw[s, a] = np.round(rng.normal(0.0, reward_scale, size=S), 2)
    return TaMdp(transition=P, reward=Rw, terminals=frozenset(terminals), start_state=0,
                 action_mask=mask)
