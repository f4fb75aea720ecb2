#!/usr/bin/env python3
"""Run every stock experiment config in sequence and summarize pass/fail.

Usage:
    python scripts/run_all_experiments.py [--out-root DIR]

Each experiment writes its own report.json/CSV set under
<out-root>/<config-stem>/; the script exits nonzero if any experiment fails.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

from dirac_lab import cli

STOCK = ["verify", "spectrum2d", "sectors", "weyl", "weyl_free", "gauge"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-root", default="runs", help="output root directory")
    parser.add_argument("--configs", nargs="*", default=STOCK,
                        help="config stems under configs/ to run")
    args = parser.parse_args()

    root = pathlib.Path(__file__).resolve().parents[1]
    failures = []
    for stem in args.configs:
        config = root / "configs" / f"{stem}.toml"
        experiment = stem.split("_")[0]
        out_dir = str(pathlib.Path(args.out_root) / stem)
        print(f"=== {stem} ({config}) -> {out_dir}")
        code = cli.main([experiment, "--config", str(config), "--out", out_dir])
        if code != 0:
            failures.append(stem)
    if failures:
        print(f"FAILED: {', '.join(failures)}")
        return 1
    print(f"all {len(args.configs)} experiments passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
