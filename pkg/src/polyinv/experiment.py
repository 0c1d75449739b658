"""Experiment driver: ground-truth recursions, failure-driven learning,
validation against the model, and artifact emission.

All pass/fail thresholds live here, computed from the config with no
hidden tolerances: row-set equality at 1e-6, projection identity at 1e-6,
learned-row matching at 1e-3, certification at zero violations. Reports
are bit-identical for identical configs and seeds.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .dynamics import Trajectory, make_joint_constraints, step_oracle
from .geometry import (
    TOL_ROW_MATCH,
    TOL_SET_EQUALITY,
    Polytope,
    equal,
    hausdorff,
    polytope_to_dict,
    vertices_csv,
)
from .invariance import RecursionTrace, compute_mci, compute_msci, state_projection
from .learning import CertificationReport, LearnState, certify, learn_from_failures

REPORT_SCHEMA_VERSION = 1
VERTEX_EMIT_MAX_DIM = 3


@dataclass(frozen=True)
class ValidationReport:
    """Numbers a run is judged on, plus the per-criterion verdicts."""

    schema_version: int
    seed: int
    msci_rows: int | None
    mci_rows: int | None
    msci_iterations: int | None
    mci_iterations: int | None
    projection_hausdorff: float | None
    learned_row_match_errors: tuple[float, ...] | None
    fail_iterations: int
    failing_trajectory_count: int
    certification_violations: int
    certification_rollouts: int
    passes: dict[str, bool]

    @property
    def all_passed(self) -> bool:
        return all(self.passes.values())

    def to_json(self) -> str:
        data = asdict(self)
        data["learned_row_match_errors"] = (
            None
            if self.learned_row_match_errors is None
            else list(self.learned_row_match_errors)
        )
        return json.dumps(data, indent=2, sort_keys=True)


def trajectories_csv(trajectories: list[Trajectory]) -> str:
    """One concatenated CSV with a trajectory-id column and failing marker."""
    if not trajectories or all(not t.samples for t in trajectories):
        return "trajectory,k,failing\n"
    first = next(t for t in trajectories if t.samples)
    n_x = first.samples[0].x.size
    n_u = first.samples[0].u.size
    header = (
        ["trajectory", "k"]
        + [f"x{i}" for i in range(n_x)]
        + [f"u{i}" for i in range(n_u)]
        + [f"x_next{i}" for i in range(n_x)]
        + ["failing"]
    )
    lines = [",".join(header)]
    for tid, traj in enumerate(trajectories):
        last = len(traj.samples) - 1
        for i, s in enumerate(traj.samples):
            fail = int(traj.failing and i == last)
            vals = [str(tid), str(s.k)] + [
                f"{v:.12g}" for v in (*s.x, *s.u, *s.x_next)
            ] + [str(fail)]
            lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def learn_state_to_dict(state: LearnState) -> dict:
    """JSON transcript: per-iteration row lists and the learned-row ledger."""
    return {
        "seed": state.seed,
        "n_x": state.n_x,
        "refinements": state.refinement_count,
        "failing_trajectory_count": state.failing_trajectory_count,
        "trajectory_count": len(state.trajectories),
        "terminated_by": state.terminated_by,
        "polytopes": [polytope_to_dict(p) for p in state.polytopes],
        "projections": [polytope_to_dict(p) for p in state.projections],
        "learned": [
            {
                "normal": [float(v) for v in lr.normal],
                "offset": float(lr.offset),
                "violated_projection_row": {
                    "index": lr.row.index,
                    "normal": [float(v) for v in lr.row.normal],
                    "offset": float(lr.row.offset),
                },
                "event": {
                    "iteration": lr.source.iteration,
                    "step": lr.source.step,
                    "z": [float(v) for v in lr.source.z],
                    "x_next": [float(v) for v in lr.source.x_next],
                    "violated_rows": [
                        {
                            "index": vr.index,
                            "normal": [float(v) for v in vr.normal],
                            "offset": float(vr.offset),
                        }
                        for vr in lr.source.violated_rows
                    ],
                },
            }
            for lr in state.learned
        ],
        "duplicate_skips": [
            {"at_refinement": i, "normal": [float(v) for v in n], "offset": float(o)}
            for i, n, o in state.duplicate_skips
        ],
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _emit_polytope(p: Polytope, out: Path, stem: str, emit_vertices: bool) -> None:
    _write(out / f"{stem}.json", json.dumps(polytope_to_dict(p), indent=2, sort_keys=True))
    if emit_vertices and p.dim <= VERTEX_EMIT_MAX_DIM:
        _write(out / f"{stem}_vertices.csv", vertices_csv(p))


def emit_trace(
    trace: RecursionTrace,
    out_dir: str | Path,
    prefix: str,
    n_x: int | None = None,
    emit_vertices: bool = True,
) -> None:
    """Per-iterate polytope JSON and vertex CSVs; joint-space traces also
    get their projected 2-D vertex files when n_x is given. Dimensions
    above 3 downgrade to halfspace-only JSON."""
    out = Path(out_dir)
    summary = {
        "iterations_to_fixpoint": trace.iterations_to_fixpoint,
        "iterates": [polytope_to_dict(p) for p in trace.iterates],
    }
    _write(out / f"{prefix}_trace.json", json.dumps(summary, indent=2, sort_keys=True))
    for k, p in enumerate(trace.iterates):
        _emit_polytope(p, out, f"{prefix}_iter{k}", emit_vertices)
        if n_x is not None and n_x < p.dim:
            _emit_polytope(
                state_projection(p, n_x), out, f"{prefix}_iter{k}_proj", emit_vertices
            )


def emit_learn_state(state: LearnState, out_dir: str | Path, emit_vertices: bool = True,
                     emit_trajectories: bool = True,
                     certification: CertificationReport | None = None) -> None:
    """Transcript JSON, per-iteration projected vertex CSVs, trajectory CSV."""
    out = Path(out_dir)
    transcript = learn_state_to_dict(state)
    if certification is not None:
        transcript["certification"] = {
            "n_rollouts": certification.n_rollouts,
            "violations": certification.violations,
            "first_exit_steps": list(certification.first_exit_steps),
            "passed": certification.passed,
        }
    _write(out / "learn_transcript.json", json.dumps(transcript, indent=2, sort_keys=True))
    for ell, (p, proj) in enumerate(zip(state.polytopes, state.projections)):
        _emit_polytope(p, out, f"learn_P{ell}", emit_vertices)
        _emit_polytope(proj, out, f"learn_X{ell}", emit_vertices)
    if emit_trajectories:
        _write(out / "learn_trajectories.csv", trajectories_csv(state.trajectories))


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    seed: int | None = None,
    rollouts: int | None = None,
    quiet: bool = False,
) -> tuple[ValidationReport, LearnState]:
    """Full pipeline: recursions, learning, certification, validation,
    artifact emission. Returns the report and the learning transcript."""

    def say(msg: str) -> None:
        if not quiet:
            print(msg)

    seed = config.seed if seed is None else seed
    n_cert = config.certification_rollouts if rollouts is None else rollouts
    out = Path(out_dir if out_dir is not None else config.output.directory)
    sys_ = config.system
    joint = make_joint_constraints(config.state_box, config.input_box)
    oracle = step_oracle(sys_)
    val = config.validation

    mci_trace = msci_trace = None
    projection_gap = None
    if val.against_model:
        t0 = time.perf_counter()
        mci_trace = compute_mci(sys_, config.state_box, config.input_box)
        t1 = time.perf_counter()
        msci_trace = compute_msci(sys_, joint)
        t2 = time.perf_counter()
        projection_gap = hausdorff(
            state_projection(msci_trace.fixpoint, config.n_x), mci_trace.fixpoint
        )
        say(
            f"ground truth: mci {mci_trace.fixpoint.n_rows} rows in "
            f"{mci_trace.iterations_to_fixpoint} iterations ({t1 - t0:.3f}s); "
            f"msci {msci_trace.fixpoint.n_rows} rows in "
            f"{msci_trace.iterations_to_fixpoint} iterations ({t2 - t1:.3f}s); "
            f"projection hausdorff {projection_gap:.2e}"
        )

    t0 = time.perf_counter()
    state = learn_from_failures(
        oracle,
        joint,
        config.n_x,
        config.schedule,
        max_refinements=config.max_refinements,
        horizon=config.horizon,
        seed=seed,
        certification_rollouts=n_cert,
    )
    t1 = time.perf_counter()
    say(
        f"learning: {state.refinement_count} refinements from "
        f"{state.failing_trajectory_count} failing trajectories "
        f"({len(state.trajectories)} total, {t1 - t0:.3f}s, {state.terminated_by})"
    )

    cert_rng = np.random.default_rng(seed + 1)
    t0 = time.perf_counter()
    cert, cert_trajs = certify(
        oracle, state.current_polytope, config.n_x, n_cert, config.horizon,
        cert_rng, collect=True,
    )
    t1 = time.perf_counter()
    say(f"certification: {cert.violations}/{cert.n_rollouts} violations ({t1 - t0:.3f}s)")

    row_errors = None
    passes: dict[str, bool] = {}
    if val.against_model:
        zinf = msci_trace.fixpoint
        row_errors = tuple(
            float(
                min(
                    max(
                        float(np.max(np.abs(zinf.normals[i] - lr.normal))),
                        abs(float(zinf.offsets[i]) - lr.offset),
                    )
                    for i in range(zinf.n_rows)
                )
            )
            for lr in state.learned
        )
        passes["projection_identity"] = projection_gap <= TOL_SET_EQUALITY
        passes["fail_converged"] = equal(state.current_polytope, zinf, TOL_SET_EQUALITY)
        passes["learned_rows_match"] = all(e < TOL_ROW_MATCH for e in row_errors)
        if val.expected_msci_rows is not None:
            passes["msci_rows"] = msci_trace.fixpoint.n_rows == val.expected_msci_rows
        if val.expected_mci_rows is not None:
            passes["mci_rows"] = mci_trace.fixpoint.n_rows == val.expected_mci_rows
        if val.expected_msci_iterations is not None:
            passes["msci_iterations"] = (
                abs(msci_trace.iterations_to_fixpoint - val.expected_msci_iterations)
                <= val.iteration_tolerance
            )
        if val.expected_mci_iterations is not None:
            passes["mci_iterations"] = (
                abs(mci_trace.iterations_to_fixpoint - val.expected_mci_iterations)
                <= val.iteration_tolerance
            )
    if val.max_refinements_pass is not None:
        passes["fail_iterations"] = state.refinement_count <= val.max_refinements_pass
    if val.max_failing_trajectories is not None:
        passes["failing_trajectories"] = (
            state.failing_trajectory_count <= val.max_failing_trajectories
        )
    passes["certification"] = cert.violations == 0

    report = ValidationReport(
        schema_version=REPORT_SCHEMA_VERSION,
        seed=seed,
        msci_rows=None if msci_trace is None else msci_trace.fixpoint.n_rows,
        mci_rows=None if mci_trace is None else mci_trace.fixpoint.n_rows,
        msci_iterations=None if msci_trace is None else msci_trace.iterations_to_fixpoint,
        mci_iterations=None if mci_trace is None else mci_trace.iterations_to_fixpoint,
        projection_hausdorff=projection_gap,
        learned_row_match_errors=row_errors,
        fail_iterations=state.refinement_count,
        failing_trajectory_count=state.failing_trajectory_count,
        certification_violations=cert.violations,
        certification_rollouts=cert.n_rollouts,
        passes=passes,
    )

    _write(out / "report.json", report.to_json())
    if val.against_model:
        emit_trace(mci_trace, out, "mci", emit_vertices=config.output.emit_vertices)
        emit_trace(
            msci_trace, out, "msci", n_x=config.n_x,
            emit_vertices=config.output.emit_vertices,
        )
    emit_learn_state(
        state, out,
        emit_vertices=config.output.emit_vertices,
        emit_trajectories=config.output.emit_trajectories,
        certification=cert,
    )
    if config.output.emit_trajectories:
        _write(out / "certification_trajectories.csv", trajectories_csv(cert_trajs))

    for name, ok in sorted(passes.items()):
        say(f"{'PASS' if ok else 'FAIL'} {name}")
    return report, state
