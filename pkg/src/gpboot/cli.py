"""Command-line entry point: ``gpboot <subcommand> --config cfg.json``."""

import argparse
import json
import sys

from . import harness
from .exceptions import GPBootError, NoConvergence

# subcommand -> (default experiment, experiments it accepts)
SUBCOMMANDS = {
    "bootstrap": ("bootstrap", ("bootstrap",)),
    "ellipsoid": ("ellipsoid_coverage", ("ellipsoid_coverage",)),
    "specnorm": ("specnorm_coverage", ("specnorm_coverage",)),
    "rkhs-band": ("rkhs_band", ("rkhs_band",)),
    "diag": ("berry_esseen", ("berry_esseen", "anticoncentration")),
}


def _u64(text):
    v = int(text, 0)
    if not 0 <= v <= harness.SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="gpboot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--seed", type=_u64, help="64-bit seed (overrides the config)")
        p.add_argument("--out", help="output directory for reports")
        p.add_argument("--threads", type=int, default=1, help="Monte Carlo worker threads")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    default, allowed = SUBCOMMANDS[args.command]
    try:
        if args.config:
            with open(args.config) as fh:
                raw = json.load(fh)
        else:
            raw = {}
        if isinstance(raw, dict):
            raw.setdefault("experiment", default)
            if raw["experiment"] not in allowed:
                raise harness.ConfigInvalid(
                    "experiment", f"{args.command} accepts {allowed}, got {raw['experiment']!r}")
        cfg = harness.parse_config(raw, seed=args.seed, output=args.out)
        code, path = harness.run(cfg, n_jobs=args.threads)
    except (GPBootError, NoConvergence, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{'ok' if code == 0 else 'property check failed'}: {path}")
    return code


if __name__ == "__main__":
    sys.exit(main())
