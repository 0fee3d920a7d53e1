#!/usr/bin/env python3
"""Run the four shipped experiment configs end to end.

For each config: validate the geometry of the configured space, run the
ensemble and its certificate audit (writing curves.csv and audit.json under
the output directory), then print the human-readable report.  Any nonzero
exit from a stage stops the sweep and becomes this script's exit code.

Usage:
    python3 scripts/run_experiments.py [--outdir results] [--seed-override N]
"""

import argparse
import pathlib
import sys

from fejerlab.cli import main as fejerlab

CONFIGS = (
    "flagship_skm.json",
    "fast_skm.json",
    "tripod_sppa_liminf.json",
    "segment_sb_liminf.json",
)


def run(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", default="results", help="output directory")
    parser.add_argument(
        "--seed-override", type=int, default=None, help="replace every config seed"
    )
    args = parser.parse_args(argv)

    here = pathlib.Path(__file__).resolve().parent
    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    override = (
        [] if args.seed_override is None else ["--seed-override", str(args.seed_override)]
    )
    for name in CONFIGS:
        config = str(here / name)
        prefix = str(outdir / (name.removesuffix(".json") + "_"))
        print(f"=== {name} ===")
        for command in ("validate", "audit", "report"):
            rc = fejerlab([command, "--config", config, "--out", prefix, *override])
            if rc != 0:
                print(f"{name}: {command} exited with code {rc}", file=sys.stderr)
                return rc
    print(f"all experiments passed; outputs under {outdir}/")
    return 0


if __name__ == "__main__":
    sys.exit(run())
