"""JSON environment spec files.

Two layouts are understood, told apart by ``"kind"``:

``grid``
    ``width``, ``height``, ``start`` ([x, y]), ``goals`` (list of
    ``{"name", "cell", "reward"}``), optional ``slip_prob``,
    ``default_step_reward`` and ``step_rewards`` (list of
    ``{"cell", "reward"}``).

``table``
    ``states`` (names), ``actions`` (names), ``start`` (state name),
    ``terminals`` (state names), ``transitions`` (list of
    ``{"state", "action", "next", "prob", "reward"}``).  An action is
    available in a state exactly when it has at least one transition there.

Both may carry ``name`` and ``objectives`` (a mapping from label to an
objective dict as produced by :meth:`Objective.to_dict`).  Without
``objectives`` the nine standard ones are attached.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .environments import Goal, GridSpec, build_grid
from .mdp import TaMdp
from .objectives import PAPER_OBJECTIVES, Objective, objective_from_dict

__all__ = [
    "FORMAT_VERSION",
    "BUILTIN_ENVS",
    "load_spec",
    "save_spec",
    "dumps_spec",
    "load_env",
    "spec_from_dict",
    "spec_to_dict",
    "grid_to_dict",
    "table_to_dict",
    "env_from_dict",
    "builtin_path",
]

FORMAT_VERSION = 1
BUILTIN_ENVS = ("paper_grid", "circular")


def _objectives_from(data: dict) -> dict[str, Objective]:
    if "objectives" not in data:
        return dict(PAPER_OBJECTIVES)
    return {k: objective_from_dict(v) for k, v in data["objectives"].items()}


def _objectives_to(objectives: dict[str, Objective]) -> dict[str, dict]:
    return {k: f.to_dict() for k, f in objectives.items()}


def grid_to_dict(spec: GridSpec, objectives: dict[str, Objective] | None = None) -> dict[str, Any]:
    out = {
        "format_version": FORMAT_VERSION,
        "kind": "grid",
        "name": spec.name,
        "width": spec.width,
        "height": spec.height,
        "start": list(spec.start),
        "slip_prob": spec.slip_prob,
        "default_step_reward": spec.default_step_reward,
        "step_rewards": [{"cell": list(c), "reward": r}
                         for c, r in sorted(spec.step_rewards.items(), key=lambda kv: (kv[0][1], kv[0][0]))],
        "goals": [{"name": g.name, "cell": list(g.cell), "reward": g.reward} for g in spec.goals],
    }
    if objectives is not None:
        out["objectives"] = _objectives_to(objectives)
    return out


def _grid_from_dict(data: dict) -> GridSpec:
    return GridSpec(
        width=int(data["width"]),
        height=int(data["height"]),
        start=tuple(data["start"]),
        goals=tuple(Goal(g["name"], tuple(g["cell"]), float(g["reward"])) for g in data["goals"]),
        slip_prob=float(data.get("slip_prob", 0.1)),
        default_step_reward=float(data.get("default_step_reward", -2.0)),
        step_rewards={tuple(e["cell"]): float(e["reward"]) for e in data.get("step_rewards", [])},
        name=data.get("name", "grid"),
    )


def table_to_dict(env: TaMdp, name: str = "table",
                  objectives: dict[str, Objective] | None = None) -> dict[str, Any]:
    """Table form of any environment; only non-zero transitions are listed."""
    states = list(env.state_names or [str(s) for s in range(env.num_states)])
    actions = list(env.action_names or [str(a) for a in range(env.num_actions)])
    rows = []
    for s in range(env.num_states):
        if s in env.terminals:
            continue
        for a in env.valid_actions(s):
            for s2 in np.flatnonzero(env.transition[s, a] > 0):
                rows.append({"state": states[s], "action": actions[a], "next": states[s2],
                             "prob": float(env.transition[s, a, s2]),
                             "reward": float(env.reward[s, a, s2])})
    return {
        "format_version": FORMAT_VERSION,
        "kind": "table",
        "name": name,
        "states": states,
        "actions": actions,
        "start": states[env.start_state],
        "terminals": [states[g] for g in sorted(env.terminals)],
        "transitions": rows,
        "objectives": _objectives_to(env.objectives if objectives is None else objectives),
    }


def _table_from_dict(data: dict) -> TaMdp:
    states, actions = list(data["states"]), list(data["actions"])
    if len(set(states)) != len(states) or len(set(actions)) != len(actions):
        raise ValueError("state and action names must be unique")
    si = {n: i for i, n in enumerate(states)}
    ai = {n: i for i, n in enumerate(actions)}
    S, A = len(states), len(actions)
    P = np.zeros((S, A, S))
    R = np.zeros((S, A, S))
    mask = np.zeros((S, A), dtype=bool)
    for row in data["transitions"]:
        try:
            s, a, s2 = si[row["state"]], ai[row["action"]], si[row["next"]]
        except KeyError as exc:
            raise ValueError(f"unknown name {exc.args[0]!r} in transition {row}") from None
        if P[s, a, s2] != 0:
            raise ValueError(f"duplicate transition {row}")
        P[s, a, s2] = float(row["prob"])
        R[s, a, s2] = float(row.get("reward", 0.0))
        mask[s, a] = True
    terminals = frozenset(si[n] for n in data["terminals"])
    for g in terminals:
        if mask[g].any():
            raise ValueError(f"terminal state {states[g]!r} has outgoing transitions")
    return TaMdp(transition=P, reward=R, terminals=terminals, start_state=si[data["start"]],
                 objectives=_objectives_from(data), action_mask=mask,
                 state_names=tuple(states), action_names=tuple(actions))


def spec_from_dict(data: dict) -> GridSpec | TaMdp:
    """A :class:`GridSpec` for grid specs, a ready :class:`TaMdp` for table specs."""
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported spec format version {version}")
    kind = data.get("kind")
    if kind == "grid":
        return _grid_from_dict(data)
    if kind == "table":
        return _table_from_dict(data)
    raise ValueError(f"unknown spec kind {kind!r}")


def spec_to_dict(spec: GridSpec | TaMdp, objectives: dict[str, Objective] | None = None,
                 name: str = "table") -> dict[str, Any]:
    if isinstance(spec, GridSpec):
        return grid_to_dict(spec, objectives)
    return table_to_dict(spec, name, objectives)


def env_from_dict(data: dict) -> TaMdp:
    spec = spec_from_dict(data)
    if isinstance(spec, GridSpec):
        return build_grid(spec, _objectives_from(data))
    return spec


def builtin_path(name: str) -> Path:
    if name not in BUILTIN_ENVS:
        raise KeyError(f"no built-in environment {name!r}; choose from {BUILTIN_ENVS}")
    return Path(str(resources.files("tamdp") / "envs" / f"{name}.json"))


def _resolve(path_or_name) -> Path:
    if isinstance(path_or_name, str) and path_or_name in BUILTIN_ENVS:
        return builtin_path(path_or_name)
    return Path(path_or_name)


def load_spec(path_or_name) -> dict[str, Any]:
    """Raw spec dict from a file path or a built-in name."""
    with open(_resolve(path_or_name), encoding="utf-8") as fh:
        return json.load(fh)


def load_env(path_or_name) -> TaMdp:
    return env_from_dict(load_spec(path_or_name))


def save_spec(spec: GridSpec | TaMdp, path, objectives: dict[str, Objective] | None = None,
              name: str = "table") -> Path:
    path = Path(path)
    path.write_text(dumps_spec(spec_to_dict(spec, objectives, name)) + "\n", encoding="utf-8")
    return path


def dumps_spec(data: dict) -> str:
    """Indented JSON with each list entry (a cell, a goal, a transition) on one line."""
    lines = ["{"]
    items = list(data.items())
    for i, (k, v) in enumerate(items):
        comma = "," if i < len(items) - 1 else ""
        if isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"  {json.dumps(k)}: [")
            lines += [f"    {json.dumps(x)}" + ("," if j < len(v) - 1 else "") for j, x in enumerate(v)]
            lines.append(f"  ]{comma}")
        elif isinstance(v, dict):
            lines.append(f"  {json.dumps(k)}: {{")
            sub = list(v.items())
            lines += [f"    {json.dumps(a)}: {json.dumps(b)}" + ("," if j < len(sub) - 1 else "")
                      for j, (a, b) in enumerate(sub)]
            lines.append(f"  }}{comma}")
        else:
            lines.append(f"  {json.dumps(k)}: {json.dumps(v)}{comma}")
    lines.append("}")
    return "\n".join(lines)
