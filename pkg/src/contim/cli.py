"""Command line front end.

Subcommands: generate, train, evaluate, benchmark, reward-audit. Exit
codes: 0 on success, 1 on usage or configuration errors, 2 on runtime
failures.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, default_config, load_config
from .harness import (
    cmd_benchmark,
    cmd_evaluate,
    cmd_generate,
    cmd_train,
    run_reward_audit,
)

USAGE_EXIT = 1
RUNTIME_EXIT = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract reserves 2 for
    # runtime failures, so remap.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="contim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_out=True, needs_methods=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH",
                       help="config file; defaults apply when omitted")
        p.add_argument("--seed", type=int, metavar="U64",
                       help="override every seed in the config")
        if needs_out:
            p.add_argument("--out", required=True, metavar="DIR",
                           help="experiment directory")
        if needs_methods:
            p.add_argument("--methods", metavar="LIST",
                           help="comma-separated method list")
        return p

    add("generate", "write the train/val/test graph splits and manifest")
    add("train", "train the configured agent on the generated graphs")
    add("evaluate", "score methods on the test graphs", needs_methods=True)
    add("benchmark", "time per-episode selections", needs_methods=True)
    add("reward-audit", "run the reward-shaping invariant checks",
        needs_out=False)
    return parser


def _load(args):
    cfg = load_config(args.config) if args.config else default_config()
    if args.seed is not None:
        cfg.graph_seed = args.seed
        cfg.train_seed = args.seed
        cfg.eval_seed = args.seed
    return cfg


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        if args.command == "generate":
            files = cmd_generate(cfg, args.out)
            total = sum(len(v) for v in files.values())
            print(f"wrote {total} graphs and manifest under {args.out}")
        elif args.command == "train":
            info = cmd_train(cfg, args.out)
            print(f"trained {info['method']}: best validation mean "
                  f"{info['best_val_mean']:.4f}")
            print(f"checkpoint: {info['checkpoint']}")
            print(f"log: {info['log']}")
        elif args.command == "evaluate":
            path = cmd_evaluate(cfg, args.out, args.methods)
            print(f"results: {path}")
        elif args.command == "benchmark":
            path = cmd_benchmark(cfg, args.out, args.methods)
            print(f"timing: {path}")
        elif args.command == "reward-audit":
            results = run_reward_audit()
            width = max(len(name) for name, _, _ in results)
            failed = False
            for name, ok, detail in results:
                status = "PASS" if ok else "FAIL"
                suffix = f"  ({detail})" if detail else ""
                print(f"{name:<{width}}  {status}{suffix}")
                failed = failed or not ok
            if failed:
                return RUNTIME_EXIT
        return 0
    except ConfigError as exc:
        print(f"contim: config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except Exception as exc:  # surface runtime failures as exit 2
        print(f"contim: error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
