"""Command-line entry point: gen, solve, run, oracle."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import instance_from_json, instance_to_json
from .harness import (
    Environment,
    ExperimentConfig,
    gen_hard_instance,
    gen_random_instance,
    oracle_to_json,
    run_experiment,
    _acquire_oracle,
)
from .offline import solve_lp_k, solve_stackelberg
from .oracle import PartialOracleError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARTIAL_ORACLE = 2


def _add_common(p):
    p.add_argument("--config", type=Path, help="experiment config JSON")
    p.add_argument("--seed", type=int, help="override: single seed")
    p.add_argument("--out", type=Path, help="override: output directory/file")
    p.add_argument("--T", type=int, dest="horizon", help="override: horizon")


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise SystemExit("--config is required for this subcommand")
    config = ExperimentConfig.from_dict(json.loads(args.config.read_text()))
    if args.seed is not None:
        config.seeds = (args.seed,)
    if args.horizon is not None:
        config.t = args.horizon
    if args.out is not None:
        config.out_dir = str(args.out)
    return config


def cmd_gen(args) -> int:
    if args.kind == "random":
        instance = gen_random_instance(
            k=args.k, m=args.m, n_states=args.states, b_s=args.b_s, b_u=args.b_u,
            seed=args.seed if args.seed is not None else 0,
        )
    else:
        instance = gen_hard_instance(args.e1, v2_width=args.v2_width)
    text = instance_to_json(instance)
    if args.out is None:
        print(text)
    else:
        Path(args.out).write_text(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = instance_from_json(Path(args.instance).read_text())
    best_k, best = solve_stackelberg(instance)
    print(f"optimal action: {best_k}")
    print(f"optimal principal profit: {best.h_star:.12g}")
    for k in range(instance.n_actions):
        sol = solve_lp_k(instance, k)
        if sol.feasible:
            scores = ", ".join(f"{v:.6g}" for v in sol.s_star.truthful_scores())
            print(f"  action {k}: h = {sol.h_star:.12g}  expected scores = [{scores}]")
        else:
            print(f"  action {k}: not inducible")
    return EXIT_OK


def cmd_run(args) -> int:
    config = _load_config(args)
    instance = None
    if args.instance is not None:
        instance = instance_from_json(Path(args.instance).read_text())
    try:
        results = run_experiment(config, instance)
    except PartialOracleError as err:
        print(f"oracle acquisition incomplete: {err}", file=sys.stderr)
        return EXIT_PARTIAL_ORACLE
    for res in results:
        print(
            f"seed {res.seed}: rounds={res.rounds} regret={res.final_regret:.6g} "
            f"slope={res.slope:.4g} essential={res.essential_searches}"
        )
    return EXIT_OK


def cmd_oracle(args) -> int:
    config = _load_config(args)
    if args.instance is None and config.instance_path is None:
        raise SystemExit("an instance is required")
    path = args.instance or config.instance_path
    instance = instance_from_json(Path(path).read_text())
    _, best = solve_stackelberg(instance)
    env = Environment(instance, config.seeds[0], best.h_star)
    try:
        oracle, rounds = _acquire_oracle(env, instance, config, config.seeds[0])
    except PartialOracleError as err:
        print(f"oracle acquisition incomplete: {err}", file=sys.stderr)
        return EXIT_PARTIAL_ORACLE
    text = oracle_to_json(oracle)
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "oracle.json").write_text(text)
        print(f"wrote oracle after {rounds} rounds to {out / 'oracle.json'}")
    else:
        print(text)
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="infoacq")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="emit an instance JSON")
    p_gen.add_argument("kind", choices=["random", "hard"])
    p_gen.add_argument("--k", type=int, default=2)
    p_gen.add_argument("--m", type=int, default=2)
    p_gen.add_argument("--states", type=int, default=2)
    p_gen.add_argument("--b-s", type=float, default=1.0)
    p_gen.add_argument("--b-u", type=float, default=1.0)
    p_gen.add_argument("--e1", type=float, default=-0.5)
    p_gen.add_argument("--v2-width", type=float, default=0.0)
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--out", type=Path)
    p_gen.set_defaults(func=cmd_gen)

    p_solve = sub.add_parser("solve", help="offline optimum report")
    p_solve.add_argument("instance", type=Path)
    p_solve.set_defaults(func=cmd_solve)

    p_run = sub.add_parser("run", help="run experiments")
    p_run.add_argument("--instance", type=Path)
    _add_common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_oracle = sub.add_parser("oracle", help="oracle acquisition only")
    p_oracle.add_argument("--instance", type=Path)
    _add_common(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
