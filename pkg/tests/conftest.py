import numpy as np
import pytest

from tamdp import build_circular
from tamdp.mdp import TaMdp
from tamdp.objectives import PAPER_OBJECTIVES


@pytest.fixture
def circular():
    return build_circular()


@pytest.fixture
def chain():
    """s0 -a-> s1 -a-> g with rewards 1 and 2; action b in s0 jumps straight to g for 0.5."""
    P = np.zeros((3, 2, 3))
    R = np.zeros((3, 2, 3))
    P[0, 0, 1] = 1.0
    R[0, 0, 1] = 1.0
    P[0, 1, 2] = 1.0
    R[0, 1, 2] = 0.5
    P[1, 0, 2] = 1.0
    R[1, 0, 2] = 2.0
    mask = np.array([[True, True], [True, False], [False, False]])
    return TaMdp(P, R, frozenset({2}), 0, dict(PAPER_OBJECTIVES), action_mask=mask,
                 state_names=("s0", "s1", "g"), action_names=("a", "b"))
