"""Command line entry point: ``tamdp {bench,train,eval,oracle,plot}``.

Settings are resolved in this order, later ones winning: built-in
defaults, ``--preset``, the ``--config`` JSON file, explicit flags.
"""
from __future__ import annotations

import argparse
import collections
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import oracle as _oracle
from .agent import load_agent
from .harness import (ALGOS, PRESETS, BenchmarkConfig, make_agent, phase_windows,
                      run_benchmark, write_results)
from .ige import gamma_ladder
from .mdp import run_episode
from .objectives import evaluate_objective
from .specfile import load_env

_CONFIG_ONLY = {"out", "clip"}


def _add_common(p, algo=True):
    p.add_argument("--env", help="spec file or built-in name (paper_grid, circular)")
    if algo:
        p.add_argument("--algo", choices=ALGOS)
        p.add_argument("--preset", choices=PRESETS)
        p.add_argument("--modules", type=int, help="NSE horizons / IGE base discounts")
        p.add_argument("--phases", help="comma separated objective labels, e.g. f1,f4,f7")
        p.add_argument("--episodes", type=int, dest="episodes_per_phase",
                       help="episodes per phase")
        p.add_argument("--config", help="JSON file with benchmark settings")
    p.add_argument("--seed", type=int)


def _resolve_config(args) -> tuple[BenchmarkConfig, dict]:
    file_cfg = {}
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    extras = {k: file_cfg.pop(k) for k in list(file_cfg) if k in _CONFIG_ONLY}
    preset = getattr(args, "preset", None) or file_cfg.pop("preset", None)
    file_cfg.pop("preset", None)
    flags = {k: getattr(args, k, None) for k in
             ("env", "algo", "runs", "seed", "modules", "episodes_per_phase", "workers")}
    flags = {k: v for k, v in flags.items() if v is not None}
    if getattr(args, "phases", None):
        flags["phases"] = tuple(s.strip() for s in args.phases.split(",") if s.strip())
    for k in _CONFIG_ONLY:
        if getattr(args, k, None) is not None:
            extras[k] = getattr(args, k)
    merged = {**file_cfg, **flags}
    unknown = set(merged) - set(BenchmarkConfig.__dataclass_fields__)
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    algo = merged.pop("algo", "nse")
    base = BenchmarkConfig.preset(preset, algo) if preset else BenchmarkConfig(algo=algo)
    return replace(base, **merged), extras


def _progress(i, n):
    print(f"  run {i}/{n} done", file=sys.stderr, flush=True)


def cmd_bench(args) -> int:
    config, extras = _resolve_config(args)
    clip = float(extras.get("clip", -10.0))
    out = Path(extras.get("out") or f"results/{config.algo}")
    print(f"{config.algo}: {config.runs} runs x {len(config.phases)} phases x "
          f"{config.episodes_per_phase} episodes on {config.env}", file=sys.stderr)
    results = run_benchmark(config, progress=_progress)
    write_results(results, out, clip_min=clip)
    print(f"{'phase':>6} {'first':>9} {'last':>9}")
    for label, first, last in phase_windows(results, min(50, config.episodes_per_phase), clip):
        print(f"{label:>6} {first:9.3f} {last:9.3f}")
    print(f"results written to {out}")
    return 0


def cmd_train(args) -> int:
    config, extras = _resolve_config(args)
    config = replace(config, runs=1)
    env = load_env(config.env)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])
    agent = make_agent(config, env)
    E = config.episodes_per_phase
    for k, label in enumerate(config.phases):
        f = env.objectives[label]
        for e in range(E):
            g = k * E + e
            agent.alpha = config.alpha(e if config.alpha.per_phase else g)
            agent.epsilon = config.epsilon(e if config.epsilon.per_phase else g)
            run_episode(agent, env, f, max_steps=config.max_steps, rng=rng)
    out = Path(extras.get("out") or f"{config.algo}.npz")
    agent.save(out)
    print(f"snapshot written to {out}")
    return 0


def cmd_eval(args) -> int:
    env = load_env(args.env or "paper_grid")
    agent = load_agent(args.snapshot)
    agent.epsilon = 0.0
    if args.objective not in env.objectives:
        raise SystemExit(f"unknown objective {args.objective!r}; have {sorted(env.objectives)}")
    f = env.objectives[args.objective]
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    outcomes, R, T, ends = [], [], [], collections.Counter()
    for _ in range(args.episodes):
        tr = run_episode(agent, env, f, rng=rng, learn=False)
        outcomes.append(tr.outcome)
        R.append(tr.total_reward)
        T.append(tr.length)
        name = env.state_names[tr.final_state] if env.state_names else str(tr.final_state)
        ends[name if tr.terminated else "(truncated)"] += 1
    x = np.array(outcomes)
    stats = {
        "objective": args.objective,
        "episodes": args.episodes,
        "mean_outcome": float(x.mean()),
        "mean_clipped_outcome": float(np.maximum(x, args.clip).mean()),
        "mean_return": float(np.mean(R)),
        "mean_length": float(np.mean(T)),
        "f_of_means": float(evaluate_objective(f, float(np.mean(R)), float(np.mean(T)))),
        "final_states": dict(sorted(ends.items())),
    }
    print(json.dumps(stats, indent=2))
    return 0


def cmd_oracle(args) -> int:
    env = load_env(args.env or "paper_grid")
    s0 = env.start_state
    out: dict = {}
    if args.what in ("front", "all"):
        front = _oracle.pareto_front(env)
        out["pareto_front"] = [{"policy": p.policy_id, "expected_reward": p.expected_reward,
                                "expected_steps": p.expected_steps} for p in front]
    if args.what in ("sweep", "all"):
        gammas = gamma_ladder(args.modules) if args.modules else gamma_ladder()
        out["gamma_sweep"] = [{"gamma": p.gamma, "goal": p.goal, "expected_reward": p.expected_reward,
                               "expected_steps": p.expected_steps, "proper": p.proper}
                              for p in _oracle.gamma_sweep(env, gammas)]
    if args.what in ("nstep", "all"):
        M = args.modules or 20
        tab = _oracle.n_step_dp(env, M)
        rows = []
        for n in range(1, M + 1):
            q, r, t = tab.state_values(env, s0, n)
            rows.append({"n": n, "q": q, "r": r, "t": t})
        out["n_step_start"] = rows
    if args.what == "vi":
        res = _oracle.value_iteration_gamma(env, args.gamma)
        out["value_iteration"] = {"gamma": args.gamma, "iterations": res.iterations,
                                  "start_values": res.q[s0].tolist(),
                                  "greedy_policy": res.greedy_policy(env).tolist()}
    print(json.dumps(out, indent=2, default=float))
    return 0


def cmd_plot(args) -> int:
    from .plot import plot_curves, read_curves

    curves, labels = [], []
    for d in args.results:
        d = Path(d)
        path = d / "aggregate.csv" if d.is_dir() else d
        curves.append(read_curves(path))
        labels.append(d.name if d.is_dir() else d.stem)
    out = plot_curves(curves, labels, args.out, window=args.window, title=args.title)
    print(f"figure written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tamdp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench", help="run the multi-phase benchmark")
    _add_common(p)
    p.add_argument("--runs", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--clip", type=float, help="lower clip for aggregated outcomes (default -10)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("train", help="train one agent and save a snapshot")
    _add_common(p)
    p.add_argument("--out", help="snapshot path (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a snapshot greedily on one objective")
    p.add_argument("snapshot")
    _add_common(p, algo=False)
    p.add_argument("--objective", default="f1")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--clip", type=float, default=-10.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("oracle", help="exact reference quantities for an environment")
    _add_common(p, algo=False)
    p.add_argument("--what", choices=("front", "sweep", "nstep", "vi", "all"), default="all")
    p.add_argument("--modules", type=int, help="horizons for nstep / base discounts for sweep")
    p.add_argument("--gamma", type=float, default=0.9, help="discount for --what vi")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("plot", help="render learning curves to SVG")
    p.add_argument("results", nargs="+", help="result directories or aggregate CSV files")
    p.add_argument("--out", default="curves.svg")
    p.add_argument("--window", type=int, default=50, help="moving-average window")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
