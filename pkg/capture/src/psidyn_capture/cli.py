"""Command-line capture runner.

Examples:

    psidyn-capture --condition intact_complex --n-trials 15 \
        --channel-seed 7 --out runs/capture
    psidyn-capture --all-conditions --n-trials 15 --out runs/capture
"""

from __future__ import annotations

import argparse
import sys

from .conditions import CONDITIONS
from .errors import CaptureError
from .modeling import PINNED_MODEL
from .recorder import run_capture


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="psidyn-capture",
        description="record transformer activations into analyzer trial files",
    )
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--condition", choices=CONDITIONS)
    group.add_argument("--all-conditions", action="store_true")
    p.add_argument("--n-trials", type=int, default=15)
    p.add_argument("--gen-len", type=int, default=256)
    p.add_argument("--channel-seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=0, help="base trial seed")
    p.add_argument("--model", default=PINNED_MODEL)
    p.add_argument("--no-random-init", action="store_true",
                   help="fail instead of falling back to random weights")
    p.add_argument("--hidden-size", type=int, default=None,
                   help="shrink the fallback model (offline testing only)")
    p.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    conditions = CONDITIONS if args.all_conditions else (args.condition,)
    try:
        manifest = run_capture(
            args.out,
            conditions=conditions,
            n_trials=args.n_trials,
            gen_len=args.gen_len,
            channel_seed=args.channel_seed,
            base_seed=args.seed,
            model_name=args.model,
            allow_random_init=not args.no_random_init,
            hidden_size=args.hidden_size,
        )
    except CaptureError as exc:
        sys.stderr.write(f"capture failed: {exc}\n")
        return 1
    print(f"manifest written to {manifest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
