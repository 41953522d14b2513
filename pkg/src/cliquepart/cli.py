"""Command line entry point: ``cliquepart <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import bench
from .baselines import POLICIES, rollout
from .environment import write_episode_log
from .errors import CliquePartError
from .exact import DEFAULT_CAP, solve_exact_dp
from .instance import DEFAULT_THRESHOLD, generate, load_instance, save_instance
from .objective import save_partition


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD, help="separation threshold D")
    return p


def cmd_generate(args):
    inst = generate(args.env, args.n, args.seed, args.threshold)
    save_instance(inst, args.out)
    print(f"wrote {args.env} instance n={inst.n} D={inst.threshold} to {args.out}")


def _print_solution(objective, partition, seconds=None):
    print(f"objective {objective!r}")
    print("clusters " + json.dumps([[v for v in c] for c in partition.clusters()]))
    if seconds is not None:
        print(f"wall time {seconds:.3f} s")


def cmd_solve_exact(args):
    inst = load_instance(args.instance)
    t0 = time.perf_counter()
    partition, objective = solve_exact_dp(inst, args.cap)
    _print_solution(objective, partition, time.perf_counter() - t0)
    if args.out:
        save_partition(partition, args.out)


def cmd_solve_heuristic(args):
    inst = load_instance(args.instance)
    policy = POLICIES[args.policy]
    episodes = args.episodes if args.policy == "random" else 1
    best = None
    for k in range(episodes):
        traj, objective = rollout(inst, policy, args.seed + k)
        if best is None or objective < best[1]:
            best = (traj, objective)
    traj, objective = best
    _print_solution(objective, traj.partition)
    if args.log:
        write_episode_log(traj.outcomes, args.log)
    if args.out:
        save_partition(traj.partition, args.out)


def cmd_train(args):
    from .ppo import TrainConfig, Trainer

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    if args.resume:
        trainer = Trainer.resume(args.resume, args.out_dir)
    else:
        cfg = TrainConfig.load(args.config) if args.config else TrainConfig()
        trainer = Trainer(cfg, args.out_dir)
        cfg.dump(trainer.out_dir / "config.toml")
    path = trainer.run()
    print(f"final checkpoint {path}")


def cmd_evaluate(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    suite = bench.SuiteSpec(args.env, args.n, args.count, args.seed, args.threshold)
    timings = {}
    report = bench.run_suite(methods, suite, args.reference, args.cap, timings=timings)
    csv_path, txt_path = bench.export_tables(report, args.out)
    print(bench.format_table(report), end="")
    for m, s in timings.items():
        print(f"{m}: {s:.2f} s")
    print(f"wrote {csv_path} and {txt_path}")


def cmd_verify_fig1(args):
    t0 = time.perf_counter()
    rep = bench.verify_golden()
    for line in rep.lines():
        print(line)
    print(f"{'PASS' if rep.passed else 'FAIL'} golden walkthrough ({time.perf_counter() - t0:.3f} s)")
    return 0 if rep.passed else 1


def cmd_export(args):
    report = bench.read_report(args.report)
    csv_path, txt_path = bench.export_tables(report, args.out)
    print(bench.format_table(report), end="")
    print(f"wrote {csv_path} and {txt_path}")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="cliquepart", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a random instance")
    p.add_argument("--env", choices=["cities", "general"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve-exact", parents=[common], help="optimal clustering by subset DP")
    p.add_argument("--instance", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("solve-heuristic", parents=[common], help="random or greedy episode")
    p.add_argument("--policy", choices=sorted(POLICIES), required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--episodes", type=int, default=1, help="best of k random episodes")
    p.add_argument("--log", help="episode log (JSON lines)")
    p.add_argument("--out", help="partition JSON")
    p.set_defaults(func=cmd_solve_heuristic)

    p = sub.add_parser("train", parents=[common], help="PPO training")
    p.add_argument("--config", help="TOML file of TrainConfig keys")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", help="continue from a checkpoint written by a previous run")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="gap report over an instance suite")
    p.add_argument("--methods", default="random,greedy",
                   help="comma list of random, greedy, exact, checkpoint:PATH")
    p.add_argument("--env", choices=["cities", "general"], default="cities")
    p.add_argument("--n", type=int, default=18)
    p.add_argument("--count", type=int, default=128)
    p.add_argument("--reference", choices=["exact", "best-known"], default="exact")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.add_argument("--out", required=True, help="output prefix for .csv and .txt")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify-fig1", parents=[common], help="replay the four-site golden example")
    p.set_defaults(func=cmd_verify_fig1)

    p = sub.add_parser("export", parents=[common], help="re-render a report CSV as tables")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (CliquePartError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
