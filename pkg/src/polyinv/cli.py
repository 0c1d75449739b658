"""Command-line driver.

Subcommands:
    run        full pipeline (ground truth, learning, certification, report)
    mci        model-based maximal control invariant set only
    msci       model-based joint-space fixed point only
    fail-learn learning loop only, fully model-blind
    certify    random-rollout audit of a polytope JSON file
    compare    containment / equality / Hausdorff between two polytope files

Exit status is 0 only when every pass flag holds, so CI can gate on it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .dynamics import make_joint_constraints, step_oracle
from .errors import PolyinvError
from .experiment import (
    emit_learn_state,
    emit_trace,
    run_experiment,
    trajectories_csv,
)
from .geometry import contains, equal, hausdorff, polytope_from_json
from .invariance import compute_mci, compute_msci
from .learning import certify, learn_from_failures


def _add_common(parser: argparse.ArgumentParser, need_config: bool = True) -> None:
    parser.add_argument("--config", required=need_config, help="experiment config (TOML)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--rollouts", type=int, default=None, help="certification rollout count")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyinv",
        description="Invariant-set computation and failure-driven safe-set learning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("run", help="full pipeline with validation report"))
    _add_common(sub.add_parser("mci", help="compute the maximal control invariant set"))
    _add_common(sub.add_parser("msci", help="compute the joint-space invariant set"))
    _add_common(sub.add_parser("fail-learn", help="run the learning loop only"))

    cert = sub.add_parser("certify", help="audit a polytope with random rollouts")
    cert.add_argument("polytope", help="polytope JSON file")
    _add_common(cert)

    cmp_ = sub.add_parser("compare", help="compare two polytope JSON files")
    cmp_.add_argument("first")
    cmp_.add_argument("second")
    cmp_.add_argument("--tol", type=float, default=1e-6)

    return parser


def _out_dir(args, config) -> Path:
    return Path(args.out if args.out is not None else config.output.directory)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    report, _ = run_experiment(
        config,
        out_dir=args.out,
        seed=args.seed,
        rollouts=args.rollouts,
        quiet=args.quiet,
    )
    return 0 if report.all_passed else 1


def _cmd_trace(args, which: str) -> int:
    config = load_config(args.config)
    out = _out_dir(args, config)
    if which == "mci":
        trace = compute_mci(config.system, config.state_box, config.input_box)
        emit_trace(trace, out, "mci", emit_vertices=config.output.emit_vertices)
    else:
        joint = make_joint_constraints(config.state_box, config.input_box)
        trace = compute_msci(config.system, joint)
        emit_trace(trace, out, "msci", n_x=config.n_x,
                   emit_vertices=config.output.emit_vertices)
    if not args.quiet:
        print(
            f"{which}: {trace.fixpoint.n_rows} rows, "
            f"{trace.iterations_to_fixpoint} refining iterations -> {out}"
        )
    return 0


def _cmd_fail_learn(args) -> int:
    config = load_config(args.config)
    out = _out_dir(args, config)
    joint = make_joint_constraints(config.state_box, config.input_box)
    state = learn_from_failures(
        step_oracle(config.system),
        joint,
        config.n_x,
        config.schedule,
        max_refinements=config.max_refinements,
        horizon=config.horizon,
        seed=config.seed if args.seed is None else args.seed,
        certification_rollouts=(
            config.certification_rollouts if args.rollouts is None else args.rollouts
        ),
    )
    emit_learn_state(state, out, emit_vertices=config.output.emit_vertices,
                     emit_trajectories=config.output.emit_trajectories)
    if not args.quiet:
        print(
            f"learned {state.refinement_count} rows from "
            f"{state.failing_trajectory_count} failing trajectories "
            f"({state.terminated_by}) -> {out}"
        )
    return 0


def _cmd_certify(args) -> int:
    config = load_config(args.config)
    out = _out_dir(args, config)
    polytope = polytope_from_json(Path(args.polytope).read_text())
    seed = config.seed if args.seed is None else args.seed
    n = config.certification_rollouts if args.rollouts is None else args.rollouts
    report, trajs = certify(
        step_oracle(config.system),
        polytope,
        config.n_x,
        n,
        config.horizon,
        np.random.default_rng(seed),
        collect=True,
    )
    out.mkdir(parents=True, exist_ok=True)
    (out / "certification.json").write_text(
        json.dumps(
            {
                "n_rollouts": report.n_rollouts,
                "violations": report.violations,
                "first_exit_steps": list(report.first_exit_steps),
                "passed": report.passed,
            },
            indent=2,
            sort_keys=True,
        )
    )
    if config.output.emit_trajectories:
        (out / "certification_trajectories.csv").write_text(trajectories_csv(trajs))
    if not args.quiet:
        print(f"certify: {report.violations}/{report.n_rollouts} violations")
    return 0 if report.passed else 1


def _cmd_compare(args) -> int:
    p = polytope_from_json(Path(args.first).read_text())
    q = polytope_from_json(Path(args.second).read_text())
    result = {
        "first_contains_second": contains(p, q, args.tol),
        "second_contains_first": contains(q, p, args.tol),
        "equal": equal(p, q, args.tol),
        "hausdorff": hausdorff(p, q),
    }
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command in ("mci", "msci"):
            return _cmd_trace(args, args.command)
        if args.command == "fail-learn":
            return _cmd_fail_learn(args)
        if args.command == "certify":
            return _cmd_certify(args)
        if args.command == "compare":
            return _cmd_compare(args)
    except PolyinvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
