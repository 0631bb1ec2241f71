"""Objective functions f(R, T) over an episode's total reward and length.

The family is closed and parameterized so that environment files can name
objectives with plain data.  ``PAPER_OBJECTIVES`` holds the nine instances
used by the adaptation benchmark.

Adding a kind means subclassing :class:`Objective`, implementing
``__call__`` and registering the class with :func:`_register`.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, ClassVar

__all__ = [
    "Objective",
    "TotalReward",
    "StepPenaltyAfter",
    "ExpPenaltyAfter",
    "NegTime",
    "ShortestPathAboveReward",
    "RewardWithinTimeLimit",
    "AverageReward",
    "AverageRewardAboveThreshold",
    "PAPER_OBJECTIVES",
    "evaluate_objective",
    "objective_from_dict",
]

_KINDS: dict[str, type[Objective]] = {}


def _register(cls):
    _KINDS[cls.kind] = cls
    return cls


@dataclass(frozen=True)
class Objective:
    """Base class; concrete kinds are frozen dataclasses."""

    kind: ClassVar[str] = "Objective"

    def __call__(self, R: float, T: int) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, **asdict(self)}

    def describe(self) -> str:
        params = ", ".join(f"{k}={v!r}" for k, v in asdict(self).items())
        return f"{self.kind}({params})"


@_register
@dataclass(frozen=True)
class TotalReward(Objective):
    kind: ClassVar[str] = "TotalReward"

    def __call__(self, R, T):
        return float(R)


@_register
@dataclass(frozen=True)
class StepPenaltyAfter(Objective):
    """R, minus one per step beyond ``k``."""

    k: int = 3
    kind: ClassVar[str] = "StepPenaltyAfter"

    def __call__(self, R, T):
        if T <= self.k:
            return float(R)
        return float(R - (T - self.k))


@_register
@dataclass(frozen=True)
class ExpPenaltyAfter(Objective):
    """R, minus ``base ** (T - k)`` once the episode is longer than ``k``."""

    k: int = 3
    base: float = 1.3
    kind: ClassVar[str] = "ExpPenaltyAfter"

    def __call__(self, R, T):
        if T <= self.k:
            return float(R)
        return float(R - self.base ** (T - self.k))


@_register
@dataclass(frozen=True)
class NegTime(Objective):
    kind: ClassVar[str] = "NegTime"

    def __call__(self, R, T):
        return -float(T)


@_register
@dataclass(frozen=True)
class ShortestPathAboveReward(Objective):
    """``-T`` if ``R > r_min`` else ``penalty`` (the threshold itself fails)."""

    r_min: float = 6.5
    penalty: float = -10.0
    kind: ClassVar[str] = "ShortestPathAboveReward"

    def __call__(self, R, T):
        if R <= self.r_min:
            return float(self.penalty)
        return -float(T)


@_register
@dataclass(frozen=True)
class RewardWithinTimeLimit(Objective):
    """``R`` if ``T <= t_max`` else ``penalty``."""

    t_max: int = 5
    penalty: float = -10.0
    kind: ClassVar[str] = "RewardWithinTimeLimit"

    def __call__(self, R, T):
        if T <= self.t_max:
            return float(R)
        return float(self.penalty)


@_register
@dataclass(frozen=True)
class AverageReward(Objective):
    kind: ClassVar[str] = "AverageReward"

    def __call__(self, R, T):
        return float(R) / T


@_register
@dataclass(frozen=True)
class AverageRewardAboveThreshold(Objective):
    """``R / T`` if ``R >= r_min`` (threshold passes) else ``penalty``."""

    r_min: float = 6.5
    penalty: float = -1.0
    kind: ClassVar[str] = "AverageRewardAboveThreshold"

    def __call__(self, R, T):
        if R >= self.r_min:
            return float(R) / T
        return float(self.penalty)


PAPER_OBJECTIVES: dict[str, Objective] = {
    "f1": TotalReward(),
    "f2": StepPenaltyAfter(3),
    "f3": ExpPenaltyAfter(3, 1.3),
    "f4": NegTime(),
    "f5": ShortestPathAboveReward(6.5, -10.0),
    "f6": RewardWithinTimeLimit(7, -10.0),
    "f7": RewardWithinTimeLimit(5, -10.0),
    "f8": AverageReward(),
    "f9": AverageRewardAboveThreshold(6.5, -1.0),
}


def evaluate_objective(f: Objective, R: float, T: int) -> float:
    if T < 1:
        raise ValueError(f"episode length must be >= 1, got {T}")
    return f(R, T)


def objective_from_dict(data: dict[str, Any]) -> Objective:
    """Inverse of :meth:`Objective.to_dict`."""
    params = dict(data)
    try:
        cls = _KINDS[params.pop("kind")]
    except KeyError as exc:
        raise ValueError(f"unknown objective kind in {data!r}") from exc
    return cls(**params)
