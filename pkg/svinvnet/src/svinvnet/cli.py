"""Command line for training and evaluating the inversion network.

``svinvnet train --data DIR --splits splits.json --td 3 --epochs E --seed S
--out run_dir`` trains on the selected TD level; ``svinvnet eval --ckpt
run_dir/checkpoint.pt --data DIR --splits splits.json --report out.json``
evaluates on the split's test ids with the shared report schema.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import load_split
from .model import NetConfig
from .train import TrainConfig, evaluate, load_checkpoint, train


def cmd_train(args) -> int:
    cfg = TrainConfig(
        lr0=args.lr, epochs=args.epochs, batch_size=args.batch,
        lambda_l1=args.lambda_l1, lambda_ssim=args.lambda_ssim,
        seed=args.seed, val_fraction=args.val_fraction,
        stop_train_l1=args.stop_train_l1,
    )
    summary = train(args.data, args.splits, args.td, cfg, args.out, NetConfig(), quiet=args.quiet)
    print(json.dumps(summary, indent=1))
    return 0


def cmd_eval(args) -> int:
    model, _ = load_checkpoint(args.ckpt)
    if args.ids:
        ids = [int(x) for x in args.ids.split(",")]
    else:
        split = load_split(args.splits)
        ids = split["test"] if args.subset == "test" else split["train"][args.subset]
    report = evaluate(model, args.data, ids, batch_size=args.batch)
    out = Path(args.report)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=1)
    print(f"eval: n={report['n_samples']} l1={report['overall']['l1']:.6f} "
          f"ssim={report['overall']['ssim']:.6f} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="svinvnet")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train on one TD level of a split")
    t.add_argument("--data", required=True, help="dataset directory (with records)")
    t.add_argument("--splits", required=True, help="splits JSON from the benchmark toolkit")
    t.add_argument("--td", default="3", help="training level, e.g. 3 or TD-3")
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--batch", type=int, default=32)
    t.add_argument("--lr", type=float, default=5e-3)
    t.add_argument("--lambda-l1", type=float, default=1.0, dest="lambda_l1")
    t.add_argument("--lambda-ssim", type=float, default=1.0, dest="lambda_ssim")
    t.add_argument("--val-fraction", type=float, default=0.1, dest="val_fraction")
    t.add_argument("--stop-train-l1", type=float, default=None, dest="stop_train_l1")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--quiet", action="store_true")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="metric report for a checkpoint")
    e.add_argument("--ckpt", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--splits", help="splits JSON (used unless --ids is given)")
    e.add_argument("--subset", default="test", help="test or a TD level name")
    e.add_argument("--ids", help="explicit comma-separated sample ids")
    e.add_argument("--batch", type=int, default=8)
    e.add_argument("--report", required=True)
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
