import json

import numpy as np
import pytest

from tamdp import build_circular, paper_grid, paper_grid_spec
from tamdp import specfile as S
from tamdp.objectives import PAPER_OBJECTIVES, TotalReward


def same_env(a, b):
    return (np.array_equal(a.transition, b.transition) and np.array_equal(a.reward, b.reward)
            and np.array_equal(a.action_mask, b.action_mask) and a.terminals == b.terminals
            and a.start_state == b.start_state and a.state_names == b.state_names
            and a.objectives == b.objectives)


def test_builtins_match_constructors():
    assert same_env(S.load_env("paper_grid"), paper_grid())
    assert same_env(S.load_env("circular"), build_circular())
    with pytest.raises(KeyError):
        S.builtin_path("nowhere")


def test_grid_round_trip(tmp_path):
    path = S.save_spec(paper_grid_spec(), tmp_path / "g.json", objectives=PAPER_OBJECTIVES)
    assert S.spec_from_dict(S.load_spec(path)) == paper_grid_spec()
    assert same_env(S.load_env(path), paper_grid())
    # one line per goal keeps the file readable
    text = path.read_text()
    assert '{"name": "g1", "cell": [5, 0], "reward": 5.8}' in text
    assert json.loads(text) == S.grid_to_dict(paper_grid_spec(), PAPER_OBJECTIVES)


def test_table_round_trip(tmp_path):
    env = build_circular()
    path = S.save_spec(env, tmp_path / "t.json", name="circular")
    assert same_env(S.load_env(path), env)


def test_objectives_default_and_override(tmp_path):
    d = S.grid_to_dict(paper_grid_spec())
    assert "objectives" not in d
    assert S.env_from_dict(d).objectives == PAPER_OBJECTIVES
    d["objectives"] = {"total": {"kind": "TotalReward"}}
    assert S.env_from_dict(d).objectives == {"total": TotalReward()}
    t = S.table_to_dict(build_circular(), objectives={"total": TotalReward()})
    assert t["objectives"] == {"total": {"kind": "TotalReward"}}


def minimal_table():
    return {
        "format_version": 1, "kind": "table",
        "states": ["a", "g"], "actions": ["go"], "start": "a", "terminals": ["g"],
        "transitions": [{"state": "a", "action": "go", "next": "g", "prob": 1.0, "reward": 3.0}],
    }


def test_minimal_table():
    env = S.env_from_dict(minimal_table())
    assert env.reward[0, 0, 1] == 3.0 and env.terminals == {1}
    assert env.action_mask.tolist() == [[True], [False]]


@pytest.mark.parametrize("edit", [
    lambda d: d.update(format_version=2),
    lambda d: d.update(kind="graph"),
    lambda d: d["transitions"].append({"state": "g", "action": "go", "next": "a", "prob": 1.0}),
    lambda d: d["transitions"].append(dict(d["transitions"][0])),
    lambda d: d["transitions"].append({"state": "x", "action": "go", "next": "g", "prob": 1.0}),
    lambda d: d["transitions"][0].update(prob=0.5),
    lambda d: d.update(states=["a", "a"]),
])
def test_invalid_tables(edit):
    d = minimal_table()
    edit(d)
    with pytest.raises((ValueError, KeyError)):
        S.env_from_dict(d)
