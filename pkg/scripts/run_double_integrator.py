#!/usr/bin/env python3
"""Run the double-integrator benchmark end to end.

Computes the model-based invariant sets, learns the joint-space set from
failing trajectories without the model, certifies the result with 1200
random rollouts, and writes the report plus plot data. Exit status 0
means every validation flag passed.

Usage:
    python scripts/run_double_integrator.py [--out DIR] [--seed N] [--rollouts N]
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from polyinv.config import load_config  # noqa: E402
from polyinv.experiment import run_experiment  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--rollouts", type=int, default=None)
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args()

    config = load_config(REPO / "configs" / "double_integrator.toml")
    report, _ = run_experiment(
        config,
        out_dir=args.out,
        seed=args.seed,
        rollouts=args.rollouts,
        quiet=args.quiet,
    )
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
