"""Failure-driven learning of the maximal state-control invariant set.

The learner holds a polytope over joint state-input vectors and shrinks
it from observed one-step failures, never touching the system matrices:
everything here is expressed against a StepOracle and recorded
trajectories. When a rollout's next state leaves the current projected
set, the violated projection rows identify which predecessor halfspaces
were crossed; each normal is recovered exactly by regressing the row
functional of the next state on the visited state-input vectors, and the
polytope is refined by intersecting with the learned halfspace. Offsets
are copied from the violated projection rows, never estimated.

This module may import only model-free helpers (state_projection,
x_section); a test pins that boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .controllers import ControllerSchedule, ScheduleEntry, random_admissible_controller
from .dynamics import GUARD_EXIT, StepOracle, Trajectory, rollout
from .errors import (
    ControllerInfeasibleError,
    DegenerateHalfspaceError,
    FailureNotExcludedError,
    InsufficientExcitationError,
    ResidualTooLargeError,
)
from .geometry import TOL_FEAS, Halfspace, Polytope, intersect, sample_uniform
from .invariance import state_projection, x_section

RANK_RTOL = 1e-8
RESIDUAL_TOL = 1e-8
DUPLICATE_TOL = 1e-6

TERMINATED_CERTIFIED = "certified"
TERMINATED_CAP = "refinement-cap"


@dataclass(frozen=True)
class ViolatedRow:
    """A projection row crossed by a failing next state."""

    index: int
    normal: np.ndarray
    offset: float


@dataclass(frozen=True)
class FailureEvent:
    """One-step failure: z was admissible, its next state was not."""

    iteration: int
    step: int
    z: np.ndarray
    x_next: np.ndarray
    violated_rows: tuple[ViolatedRow, ...]


@dataclass(frozen=True)
class RegressorWindow:
    """Square window of state-input rows with the row-functional targets."""

    regressors: np.ndarray  # (p, p)
    targets: np.ndarray  # (p,)
    source_indices: tuple[tuple[int, int], ...]  # (trajectory id, step k)


@dataclass(frozen=True)
class LearnedRow:
    normal: np.ndarray  # unit-normalized
    offset: float
    source: FailureEvent
    row: ViolatedRow  # projection row the offset was copied from


@dataclass(frozen=True)
class CertificationReport:
    """Random-rollout audit of a candidate invariant polytope.

    Certification is heuristic: zero violations over n_rollouts is
    evidence, not proof.
    """

    n_rollouts: int
    violations: int
    first_exit_steps: tuple[int, ...]
    passed: bool


@dataclass
class LearnState:
    """Full transcript of a learning run: every intermediate polytope,
    its projection, the learned-row ledger, and the trajectory archive."""

    n_x: int
    polytopes: list[Polytope]
    projections: list[Polytope]
    learned: list[LearnedRow] = field(default_factory=list)
    trajectories: list[Trajectory] = field(default_factory=list)
    seed: int | None = None
    duplicate_skips: list[tuple[int, np.ndarray, float]] = field(default_factory=list)
    failing_trajectory_count: int = 0
    terminated_by: str = TERMINATED_CAP

    @property
    def current_polytope(self) -> Polytope:
        return self.polytopes[-1]

    @property
    def current_projection(self) -> Polytope:
        return self.projections[-1]

    @property
    def refinement_count(self) -> int:
        return len(self.polytopes) - 1


def new_learn_state(initial: Polytope, n_x: int, seed: int | None = None) -> LearnState:
    return LearnState(
        n_x=n_x,
        polytopes=[initial],
        projections=[state_projection(initial, n_x)],
        seed=seed,
    )


def detect_failures(
    traj: Trajectory,
    p_prev: Polytope,
    x_prev: Polytope,
    iteration: int = 0,
    tol: float = TOL_FEAS,
) -> list[FailureEvent]:
    """Failures in a trajectory: samples with z inside the joint polytope
    whose next state violates the projected polytope by more than tol."""
    events: list[FailureEvent] = []
    for s in traj.samples:
        z = np.concatenate([s.x, s.u])
        if z.size != p_prev.dim or s.x_next.size != x_prev.dim:
            raise ValueError("trajectory dimensions inconsistent with polytopes")
        if np.any(p_prev.normals @ z > p_prev.offsets + tol):
            continue
        residuals = x_prev.normals @ s.x_next - x_prev.offsets
        violated = np.flatnonzero(residuals > tol)
        if violated.size == 0:
            continue
        rows = tuple(
            ViolatedRow(int(j), x_prev.normals[j].copy(), float(x_prev.offsets[j]))
            for j in violated
        )
        events.append(FailureEvent(iteration, s.k, z, s.x_next.copy(), rows))
    return events


def build_window(
    archive: Sequence[Trajectory],
    row_normal: np.ndarray,
    rank_rtol: float = RANK_RTOL,
) -> RegressorWindow:
    """Select p rank-increasing samples, most recent trajectory first.

    Targets are the violated row's functional applied to each recorded
    next state. Raises when the whole archive cannot reach full rank.
    """
    row_normal = np.asarray(row_normal, dtype=float).ravel()
    total = sum(len(t) for t in archive)
    p: int | None = None
    rows: list[np.ndarray] = []
    targets: list[float] = []
    sources: list[tuple[int, int]] = []
    rank = 0
    for t_idx in range(len(archive) - 1, -1, -1):
        for s in reversed(archive[t_idx].samples):
            z = np.concatenate([s.x, s.u])
            p = p if p is not None else z.size
            candidate = np.vstack(rows + [z]) if rows else z[None, :]
            sv = np.linalg.svd(candidate, compute_uv=False)
            new_rank = int(np.sum(sv > rank_rtol * sv[0])) if sv[0] > 0 else 0
            if new_rank > rank:
                rows.append(z)
                targets.append(float(row_normal @ s.x_next))
                sources.append((t_idx, s.k))
                rank = new_rank
            if p is not None and rank == p:
                regressors = np.vstack(rows)
                return RegressorWindow(
                    regressors, np.asarray(targets), tuple(sources)
                )
    raise InsufficientExcitationError(
        f"archive of {total} samples reached rank {rank}, need {p}"
    )


def learn_normal(window: RegressorWindow) -> np.ndarray:
    """Recover the predecessor-row normal by solving the square window.

    Deterministic linear dynamics make the interpolation exact; a residual
    above tolerance signals that assumption is broken.
    """
    sv = np.linalg.svd(window.regressors, compute_uv=False)
    if sv[0] <= 0 or sv[-1] <= RANK_RTOL * sv[0]:
        raise InsufficientExcitationError("regressor window is rank-deficient")
    a_hat = np.linalg.solve(window.regressors, window.targets)
    residual = float(np.max(np.abs(window.regressors @ a_hat - window.targets)))
    scale = max(1.0, float(np.max(np.abs(window.targets))))
    if residual > RESIDUAL_TOL * scale:
        raise ResidualTooLargeError(
            f"regression residual {residual:.3e} exceeds noiseless tolerance"
        )
    return a_hat


def refine(
    state: LearnState, event: FailureEvent, row: ViolatedRow, a_hat: np.ndarray
) -> LearnState:
    """Intersect the current polytope with a learned halfspace.

    The offset is the violated projection row's, jointly rescaled with the
    normal. A row matching an existing one within 1e-6 is skipped and
    logged. The source failure must violate the new row; anything else is
    a hard error, not a warning.
    """
    a_hat = np.asarray(a_hat, dtype=float).ravel()
    scale = np.linalg.norm(a_hat)
    if scale <= 1e-12:
        raise DegenerateHalfspaceError("learned normal is numerically zero")
    normal = a_hat / scale
    offset = row.offset / scale
    current = state.current_polytope
    dup = np.any(
        np.all(np.abs(current.normals - normal) <= DUPLICATE_TOL, axis=1)
        & (np.abs(current.offsets - offset) <= DUPLICATE_TOL)
    )
    if dup:
        state.duplicate_skips.append((state.refinement_count, normal, offset))
        return state
    margin = float(normal @ event.z - offset)
    if margin <= 0.0:
        raise FailureNotExcludedError(
            f"learned halfspace keeps its source failure (margin {margin:.3e})"
        )
    label = f"learned:{state.refinement_count + 1}"
    refined = intersect(current, Halfspace(normal, offset), label=label)
    state.polytopes.append(refined)
    state.projections.append(state_projection(refined, state.n_x))
    state.learned.append(LearnedRow(normal, offset, event, row))
    return state


def _entry_start(
    entry: ScheduleEntry, projection: Polytope, rng: np.random.Generator
) -> np.ndarray:
    if entry.x0 is not None:
        return entry.x0
    return sample_uniform(projection, rng)


def learn_from_failures(
    oracle: StepOracle,
    initial: Polytope,
    n_x: int,
    schedule: ControllerSchedule,
    max_refinements: int = 20,
    horizon: int = 15,
    seed: int = 0,
    certification_rollouts: int = 1200,
) -> LearnState:
    """Refine the joint constraint set from failing rollouts.

    Each trajectory is replayed against every refinement it enables: the
    inner loop re-detects failures with the refreshed polytopes until the
    trajectory is clean. Random-phase rollouts double as certification --
    the run stops once `certification_rollouts` consecutive rollouts
    produce no failure, or at the refinement cap.
    """
    rng = np.random.default_rng(seed)
    state = new_learn_state(initial, n_x, seed=seed)
    traj_index = 0
    clean_streak = 0
    while state.refinement_count < max_refinements:
        entry = schedule.entry(traj_index)
        traj_index += 1
        current = state.current_polytope
        guard = state.current_projection
        controller = entry.spec.build(rng=rng)
        try:
            x0 = _entry_start(entry, guard, rng)
            traj = rollout(
                oracle,
                controller,
                x0,
                horizon,
                guard,
                section_of=lambda xx: x_section(current, xx),
            )
        except ControllerInfeasibleError:
            clean_streak = 0
            continue
        state.trajectories.append(traj)
        had_failure = False
        while state.refinement_count < max_refinements:
            events = detect_failures(
                traj,
                state.current_polytope,
                state.current_projection,
                iteration=state.refinement_count + 1,
            )
            if not events:
                break
            had_failure = True
            progressed = False
            for row in events[0].violated_rows:
                if state.refinement_count >= max_refinements:
                    break
                window = build_window(state.trajectories, row.normal)
                a_hat = learn_normal(window)
                before = state.refinement_count
                refine(state, events[0], row, a_hat)
                progressed = progressed or state.refinement_count > before
            if not progressed:
                break
        if had_failure:
            state.failing_trajectory_count += 1
            clean_streak = 0
        elif entry.spec.kind == "random-admissible":
            clean_streak += 1
            if clean_streak >= certification_rollouts:
                state.terminated_by = TERMINATED_CERTIFIED
                break
    return state


def certify(
    oracle: StepOracle,
    polytope: Polytope,
    n_x: int,
    n_rollouts: int,
    horizon: int,
    rng: np.random.Generator,
    collect: bool = False,
) -> CertificationReport | tuple[CertificationReport, list[Trajectory]]:
    """Audit a polytope with random-admissible rollouts from uniform starts.

    A rollout violates if it exits the projected set or hits an empty
    input section; violations are data, not errors.
    """
    projection = state_projection(polytope, n_x)
    violations = 0
    exits: list[int] = []
    kept: list[Trajectory] = []
    controller = random_admissible_controller(rng)
    for _ in range(n_rollouts):
        x0 = sample_uniform(projection, rng)
        try:
            traj = rollout(
                oracle,
                controller,
                x0,
                horizon,
                projection,
                section_of=lambda xx: x_section(polytope, xx),
            )
        except ControllerInfeasibleError as exc:
            violations += 1
            exits.append(exc.step if exc.step is not None else -1)
            continue
        if collect:
            kept.append(traj)
        if traj.terminated_by == GUARD_EXIT:
            violations += 1
            exits.append(traj.samples[-1].k)
    report = CertificationReport(n_rollouts, violations, tuple(exits), violations == 0)
    return (report, kept) if collect else report
