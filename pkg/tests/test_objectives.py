import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tamdp.objectives import (
    PAPER_OBJECTIVES,
    AverageReward,
    AverageRewardAboveThreshold,
    ExpPenaltyAfter,
    NegTime,
    RewardWithinTimeLimit,
    ShortestPathAboveReward,
    StepPenaltyAfter,
    TotalReward,
    evaluate_objective,
    objective_from_dict,
)

F = PAPER_OBJECTIVES


@pytest.mark.parametrize("label, R, T, expected", [
    ("f1", 5.0, 10, 5.0),
    ("f1", -3.25, 1, -3.25),
    ("f2", 5.0, 3, 5.0),
    ("f2", 5.0, 4, 4.0),
    ("f2", 5.0, 10, -2.0),
    ("f2", 2.0, 1, 2.0),
    ("f3", 5.0, 3, 5.0),
    ("f3", 5.0, 4, 5.0 - 1.3),
    ("f3", 5.0, 6, 5.0 - 1.3 ** 3),
    ("f4", 100.0, 7, -7.0),
    ("f5", 6.5, 3, -10.0),
    ("f5", 6.6, 3, -3.0),
    ("f5", 0.0, 2, -10.0),
    ("f6", 4.0, 7, 4.0),
    ("f6", 4.0, 8, -10.0),
    ("f7", 4.0, 5, 4.0),
    ("f7", 4.0, 6, -10.0),
    ("f8", 9.0, 3, 3.0),
    ("f8", -2.0, 4, -0.5),
    ("f9", 6.5, 2, 3.25),
    ("f9", 6.49, 2, -1.0),
    ("f9", 13.0, 2, 6.5),
])
def test_exact_values(label, R, T, expected):
    assert evaluate_objective(F[label], R, T) == pytest.approx(expected, abs=1e-12)


def test_boundary_cases_named():
    # the step penalties start after the third step
    assert F["f2"](1.0, 3) == 1.0 and F["f2"](1.0, 4) == 0.0
    assert F["f3"](1.0, 3) == 1.0 and math.isclose(F["f3"](1.0, 4), -0.3)
    # "at most five steps" keeps T = 5
    assert F["f7"](2.0, 5) == 2.0 and F["f7"](2.0, 6) == -10.0
    # 6.5 itself is not enough for f5 but is enough for f9
    assert F["f5"](6.5, 4) == -10.0
    assert F["f9"](6.5, 4) == 6.5 / 4


def test_zero_length_rejected():
    with pytest.raises(ValueError):
        evaluate_objective(F["f8"], 1.0, 0)


def test_round_trip_through_dicts():
    for f in F.values():
        g = objective_from_dict(f.to_dict())
        assert g == f and type(g) is type(f)
    with pytest.raises(ValueError):
        objective_from_dict({"kind": "NoSuchThing"})


def test_describe_mentions_parameters():
    assert F["f7"].describe() == "RewardWithinTimeLimit(t_max=5, penalty=-10.0)"


def test_parameterized_instances():
    assert StepPenaltyAfter(k=0)(3.0, 2) == 1.0
    assert ExpPenaltyAfter(k=1, base=2.0)(0.0, 4) == -8.0
    assert ShortestPathAboveReward(r_min=0.0, penalty=-1.0)(0.0, 9) == -1.0
    assert RewardWithinTimeLimit(t_max=1, penalty=-3.0)(5.0, 2) == -3.0
    assert AverageRewardAboveThreshold(r_min=0.0)(0.0, 5) == 0.0
    assert TotalReward()(2.0, 99) == 2.0 and NegTime()(2.0, 99) == -99.0
    assert AverageReward()(3.0, 2) == 1.5


# Monotonicity: non-decreasing in R, non-increasing in T, on the domain where
# each kind is meant to be used.  The thresholded kinds jump to a fixed
# penalty, so they are only monotone when every admissible outcome beats the
# penalty; ratios need R >= 0 to be non-increasing in T.
_DOMAINS = {
    "f1": (-50.0, 50.0, 60),
    "f2": (-50.0, 50.0, 60),
    "f3": (-50.0, 50.0, 25),
    "f4": (-50.0, 50.0, 60),
    "f5": (-50.0, 50.0, 10),
    "f6": (-10.0, 50.0, 60),
    "f7": (-10.0, 50.0, 60),
    "f8": (0.0, 50.0, 60),
    "f9": (0.0, 50.0, 60),
}


@settings(max_examples=300, deadline=None)
@given(label=st.sampled_from(sorted(_DOMAINS)), data=st.data())
def test_monotone_in_reward_and_time(label, data):
    lo, hi, t_hi = _DOMAINS[label]
    f = F[label]
    r1 = data.draw(st.floats(lo, hi))
    r2 = data.draw(st.floats(r1, hi))
    t1 = data.draw(st.integers(1, t_hi))
    t2 = data.draw(st.integers(t1, t_hi))
    assert f(r2, t1) >= f(r1, t1)
    assert f(r1, t2) <= f(r1, t1)


def test_objectives_accept_float_lengths():
    # module selection scores expected lengths, which are real numbers
    assert F["f7"](3.0, 5.0) == 3.0 and F["f7"](3.0, 5.01) == -10.0
    assert np.isclose(F["f3"](0.0, 4.5), -(1.3 ** 1.5))
