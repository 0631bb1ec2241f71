"""Multi-phase adaptation benchmark: schedules, runs, aggregation, result files.

A benchmark trains one fresh agent per run on a sequence of phases, each
with its own objective.  The ensemble agents keep their tables across
phases; the time-indexed baseline keeps one table per objective.  Every run
draws its random numbers from its own child of a single seed sequence, so
results do not depend on the number of worker processes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .ige import IgeAgent, gamma_ladder
from .mdp import DEFAULT_MAX_STEPS, TaMdp, run_episode
from .nse import DEFAULT_MODULES, NseAgent
from .specfile import load_env
from .tqlearn import TimeQAgent

__all__ = [
    "ALGOS",
    "PRESETS",
    "Schedule",
    "schedule_value",
    "default_schedules",
    "BenchmarkConfig",
    "RunResults",
    "Curves",
    "make_agent",
    "run_benchmark",
    "aggregate",
    "phase_windows",
    "write_results",
    "read_results",
    "results_from_arrays",
]

ALGOS = ("ige", "nse", "tqlearn")
PRESETS = ("desk", "paper")
_RESULT_COLUMNS = ("episode", "phase", "objective", "outcome", "return", "length")


@dataclass(frozen=True)
class Schedule:
    """Piecewise-linear value over episodes, flat outside the breakpoints.

    With ``per_phase`` the episode counter restarts at every phase;
    otherwise it counts episodes since the start of the run.
    """

    points: tuple[tuple[float, float], ...]
    per_phase: bool = False

    def __post_init__(self):
        pts = tuple((float(e), float(v)) for e, v in self.points)
        if not pts:
            raise ValueError("a schedule needs at least one breakpoint")
        if any(b[0] < a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("schedule breakpoints must be sorted by episode")
        object.__setattr__(self, "points", pts)

    def __call__(self, episode: float) -> float:
        xs, ys = zip(*self.points)
        return float(np.interp(episode, xs, ys))

    def scaled(self, factor: float) -> "Schedule":
        """Same shape with every breakpoint episode multiplied by ``factor``."""
        return Schedule(tuple((e * factor, v) for e, v in self.points), self.per_phase)

    def to_dict(self) -> dict:
        return {"points": [list(p) for p in self.points], "per_phase": self.per_phase}

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        return cls(tuple(tuple(p) for p in data["points"]), bool(data.get("per_phase", False)))


def schedule_value(sched: Schedule, episode: float) -> float:
    return sched(episode)


def default_schedules(algo: str) -> tuple[Schedule, Schedule]:
    """(alpha, epsilon) schedules used at full scale."""
    if algo in ("ige", "nse"):
        return (Schedule(((500, 1.0), (1000, 0.1))), Schedule(((500, 0.9), (1000, 0.0))))
    if algo == "tqlearn":
        return (Schedule(((750, 1.0), (3000, 0.1)), per_phase=True),
                Schedule(((750, 0.9), (3000, 0.0)), per_phase=True))
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGOS}")


def _check_range(name, sched):
    for _, v in sched.points:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} schedule values must lie in [0, 1]")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Everything that determines a benchmark's results.

    ``modules`` is the number of horizons for ``nse`` and the number of base
    discounts of the ladder for ``ige``; it is ignored by ``tqlearn``.
    ``alpha``/``epsilon`` default to :func:`default_schedules`.
    """

    env: str = "paper_grid"
    algo: str = "nse"
    phases: tuple[str, ...] = tuple(f"f{i}" for i in range(1, 10))
    episodes_per_phase: int = 6000
    runs: int = 100
    seed: int = 0
    modules: int | None = None
    alpha: Schedule | None = None
    epsilon: Schedule | None = None
    gamma: float = 0.99
    max_steps: int = DEFAULT_MAX_STEPS
    workers: int = 1

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {ALGOS}")
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.phases:
            raise ValueError("need at least one phase")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.episodes_per_phase < 1:
            raise ValueError("episodes_per_phase must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.modules is not None and self.modules < 1:
            raise ValueError("modules must be >= 1")
        alpha, eps = default_schedules(self.algo)
        for name, default in (("alpha", alpha), ("epsilon", eps)):
            value = getattr(self, name)
            if value is None:
                value = default
            elif isinstance(value, dict):
                value = Schedule.from_dict(value)
            _check_range(name, value)
            object.__setattr__(self, name, value)

    @classmethod
    def preset(cls, name: str, algo: str = "nse", **overrides) -> "BenchmarkConfig":
        """``paper``: 100 runs x 6000 episodes per phase.  ``desk``: 10 runs x 1500.

        The desk preset compresses the per-phase baseline schedules by the
        same factor as the phase length; the global ensemble schedules end
        within the first phase either way and are left alone.
        """
        if name == "paper":
            base = cls(algo=algo)
        elif name == "desk":
            alpha, eps = default_schedules(algo)
            if algo == "tqlearn":
                alpha, eps = alpha.scaled(1500 / 6000), eps.scaled(1500 / 6000)
            base = cls(algo=algo, runs=10, episodes_per_phase=1500, alpha=alpha, epsilon=eps)
        else:
            raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
        return replace(base, **overrides)

    @property
    def total_episodes(self) -> int:
        return len(self.phases) * self.episodes_per_phase

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["phases"] = list(self.phases)
        out["alpha"] = self.alpha.to_dict()
        out["epsilon"] = self.epsilon.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def config_hash(self) -> str:
        """Hash of the fields that influence results (``workers`` excluded)."""
        d = self.to_dict()
        d.pop("workers")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def make_agent(config: BenchmarkConfig, env: TaMdp):
    if config.algo == "ige":
        gammas = gamma_ladder(config.modules) if config.modules else None
        return IgeAgent.for_env(env, gammas=gammas)
    if config.algo == "nse":
        return NseAgent.for_env(env, num_modules=config.modules or DEFAULT_MODULES)
    return TimeQAgent.for_env(env, gamma=config.gamma, t_max=config.max_steps)


def _run_one(config: BenchmarkConfig, seed_seq: np.random.SeedSequence):
    env = load_env(config.env)
    missing = [p for p in config.phases if p not in env.objectives]
    if missing:
        raise KeyError(f"environment has no objectives named {missing}")
    rng = np.random.default_rng(seed_seq)
    agent = make_agent(config, env)
    n = config.total_episodes
    outcomes, returns, lengths = np.empty(n), np.empty(n), np.empty(n, dtype=np.int64)
    E = config.episodes_per_phase
    for k, label in enumerate(config.phases):
        f = env.objectives[label]
        for e in range(E):
            g = k * E + e
            agent.alpha = config.alpha(e if config.alpha.per_phase else g)
            agent.epsilon = config.epsilon(e if config.epsilon.per_phase else g)
            trace = run_episode(agent, env, f, max_steps=config.max_steps, rng=rng)
            outcomes[g], returns[g], lengths[g] = trace.outcome, trace.total_reward, trace.length
    return outcomes, returns, lengths


@dataclass
class RunResults:
    """Per-episode records, shape (runs, phases * episodes_per_phase)."""

    config: BenchmarkConfig
    outcomes: np.ndarray
    returns: np.ndarray
    lengths: np.ndarray
    metadata: dict[str, Any] = field(default_factory=dict)

    def phase_of(self, episode: int) -> int:
        return episode // self.config.episodes_per_phase

    def phase_slice(self, k: int) -> slice:
        E = self.config.episodes_per_phase
        return slice(k * E, (k + 1) * E)


def _run_seeds(config: BenchmarkConfig) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(config.seed).spawn(config.runs)


def run_benchmark(config: BenchmarkConfig, progress=None) -> RunResults:
    """Run every seed of ``config``; ``progress(i, runs)`` is called after each run."""
    started = time.time()
    seeds = _run_seeds(config)
    results: list = [None] * config.runs
    if config.workers == 1 or config.runs == 1:
        for i, ss in enumerate(seeds):
            results[i] = _run_one(config, ss)
            if progress:
                progress(i + 1, config.runs)
    else:
        with ProcessPoolExecutor(max_workers=min(config.workers, config.runs)) as pool:
            futures = [pool.submit(_run_one, config, ss) for ss in seeds]
            for i, fut in enumerate(futures):
                results[i] = fut.result()
                if progress:
                    progress(i + 1, config.runs)
    outcomes, returns, lengths = (np.stack(x) for x in zip(*results))
    meta = {
        "config": config.to_dict(),
        "config_hash": config.config_hash(),
        "seed_entropy": seeds[0].entropy if seeds else None,
        "run_spawn_keys": [list(s.spawn_key) for s in seeds],
        "started": started,
        "finished": time.time(),
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    return RunResults(config, outcomes, returns, lengths, meta)


@dataclass
class Curves:
    """Long-form learning curves: one row per global episode."""

    episode: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    phase: np.ndarray
    objective: list[str]

    def rows(self):
        for i in range(len(self.episode)):
            yield (int(self.episode[i]), float(self.mean[i]), float(self.std[i]),
                   int(self.phase[i]), self.objective[i])


def aggregate(results: RunResults, clip_min: float | None = -10.0) -> Curves:
    """Mean and (population) standard deviation across runs, after clipping below ``clip_min``."""
    x = results.outcomes if clip_min is None else np.maximum(results.outcomes, clip_min)
    n = x.shape[1]
    E = results.config.episodes_per_phase
    phase = np.arange(n) // E
    labels = [results.config.phases[k] for k in phase]
    return Curves(np.arange(n), x.mean(axis=0), x.std(axis=0), phase, labels)


def phase_windows(results: RunResults, window: int = 50, clip_min: float | None = -10.0
                  ) -> list[tuple[str, float, float]]:
    """(objective, mean of the first ``window`` episodes, mean of the last ``window``) per phase.

    Means are taken over runs and episodes of the clipped outcomes.
    """
    x = results.outcomes if clip_min is None else np.maximum(results.outcomes, clip_min)
    E = results.config.episodes_per_phase
    if not 1 <= window <= E:
        raise ValueError(f"window must lie in 1..{E}")
    out = []
    for k, label in enumerate(results.config.phases):
        block = x[:, k * E:(k + 1) * E]
        out.append((label, float(block[:, :window].mean()), float(block[:, -window:].mean())))
    return out


def _fmt(x) -> str:
    return repr(float(x))


def write_results(results: RunResults, out_dir, clip_min: float | None = -10.0) -> Path:
    """One CSV per run, an aggregate CSV and a metadata JSON.

    CSV files hold only data derived from the config and seeds, so reruns
    write identical bytes; timestamps live in ``metadata.json``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = results.config
    for r in range(results.outcomes.shape[0]):
        with open(out / f"run_{r:03d}.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_RESULT_COLUMNS)
            for g in range(results.outcomes.shape[1]):
                k = results.phase_of(g)
                w.writerow((g, k, cfg.phases[k], _fmt(results.outcomes[r, g]),
                            _fmt(results.returns[r, g]), int(results.lengths[r, g])))
    curves = aggregate(results, clip_min)
    with open(out / "aggregate.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("episode", "mean", "std", "phase", "objective"))
        for ep, m, s, k, label in curves.rows():
            w.writerow((ep, _fmt(m), _fmt(s), k, label))
    meta = dict(results.metadata)
    meta["clip_min"] = clip_min
    meta["files"] = sorted(p.name for p in out.glob("run_*.csv")) + ["aggregate.csv"]
    (out / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return out


def read_results(out_dir) -> RunResults:
    out = Path(out_dir)
    meta = json.loads((out / "metadata.json").read_text(encoding="utf-8"))
    config = BenchmarkConfig.from_dict(meta["config"])
    runs = sorted(out.glob("run_*.csv"))
    if len(runs) != config.runs:
        raise ValueError(f"expected {config.runs} run files in {out}, found {len(runs)}")
    cols: list[list[np.ndarray]] = [[], [], []]
    for path in runs:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        cols[0].append(np.array([float(r["outcome"]) for r in rows]))
        cols[1].append(np.array([float(r["return"]) for r in rows]))
        cols[2].append(np.array([int(r["length"]) for r in rows], dtype=np.int64))
    return RunResults(config, *(np.stack(c) for c in cols), metadata=meta)


def results_from_arrays(config: BenchmarkConfig, outcomes: Sequence[Sequence[float]]) -> RunResults:
    """Wrap a bare outcome matrix (e.g. for aggregation tests); returns/lengths are NaN/0."""
    x = np.asarray(outcomes, dtype=float)
    return RunResults(config, x, np.full_like(x, np.nan), np.zeros(x.shape, dtype=np.int64))
