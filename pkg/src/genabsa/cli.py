"""Command-line entry point: ``genabsa {train,predict,evaluate,analyze,convert,toy}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import pipeline
from .data import DatasetError, convert_file
from .model import CheckpointError, TrainingDiverged
from .runconfig import ConfigError, RunConfig
from .toy import make_toy_corpus


def cmd_train(args, extra: List[str]) -> int:
    cfg = RunConfig.load(args.config, extra)
    _, result = pipeline.run_training(cfg, log_every=args.log_every)
    print(f"trained {len(result.losses)} steps, final loss {result.losses[-1] if result.losses else float('nan'):.4f}")
    print(f"wrote {Path(cfg.out_dir) / pipeline.CHECKPOINT_NAME}")
    return 0


def cmd_predict(args, extra: List[str]) -> int:
    lines = pipeline.run_prediction(args.checkpoint, args.data, args.out, args.subtask, args.beam, args.max_len)
    print(f"wrote {len(lines)} predictions to {args.out}")
    return 0


def cmd_evaluate(args, extra: List[str]) -> int:
    report = pipeline.run_evaluation(args.predictions, args.gold, args.out, args.subtask)
    print(report.to_table(), end="")
    return 0


def cmd_analyze(args, extra: List[str]) -> int:
    lines = pipeline.read_jsonl(args.predictions)
    if args.subtask:
        lines = [l for l in lines if l["task"].lower() == args.subtask.lower()]
    report = pipeline.validity_of_lines(lines)
    print(report.to_table())
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        pipeline.dump_json(report.to_dict(), out / "validity.json")
    if args.sweep:
        if not (args.checkpoint and args.data):
            raise ConfigError("--sweep needs --checkpoint and --data")
        beams = [int(b) for b in args.beams.split(",")]
        rows = pipeline.beam_sweep(args.checkpoint, args.data, beams)
        print(pipeline.sweep_table(rows), end="")
        if out:
            pipeline.dump_json(rows, out / "sweep.json")
    return 0


def cmd_convert(args, extra: List[str]) -> int:
    count = convert_file(args.input, args.output)
    print(f"converted {count} sentences")
    return 0


def cmd_toy(args, extra: List[str]) -> int:
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for rec in make_toy_corpus(args.num, args.seed):
            f.write(json.dumps(rec) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genabsa", description="Generative pointer-index ABSA: train, predict, evaluate, analyze.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a JSON run config; any --key value overrides the config")
    p.add_argument("--config", help="flat JSON run configuration")
    p.add_argument("--log-every", type=int, default=0, help="print the epoch loss every N epochs")
    p.set_defaults(func=cmd_train, extra_ok=True)

    p = sub.add_parser("predict", help="generate and decode predictions")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--subtask", help="must match the checkpoint's subtask")
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--max-len", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="exact-match P/R/F1 of a predictions file")
    p.add_argument("--predictions", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--subtask")
    p.add_argument("--out", help="directory for report.json and report.txt")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("analyze", help="invalid size/order/token rates, optional beam sweep")
    p.add_argument("--predictions", required=True)
    p.add_argument("--subtask")
    p.add_argument("--out")
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--checkpoint")
    p.add_argument("--data")
    p.add_argument("--beams", default="1,2,4")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convert", help="'sentence####[triplets]' lines to JSONL")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("toy", help="write a synthetic Triplet corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--num", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_toy)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra and not getattr(args, "extra_ok", False):
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        return args.func(args, extra)
    except (ConfigError, DatasetError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (TrainingDiverged, CheckpointError, RuntimeError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
