"""Deterministic LTI simulation and guarded trajectory recording.

The learner never sees the system matrices: simulation is exposed through
an opaque StepOracle holding only a next-state callable. Trajectories
record (k, x, u, x_next) tuples and stop either at the horizon or at the
first sample whose next state leaves the guard polytope (that failing
sample is kept).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ControllerInfeasibleError, DimensionMismatchError, EmptySectionError
from .geometry import Polytope, is_member

logger = logging.getLogger(__name__)

GUARD_EXIT = "guard-exit"
HORIZON = "horizon"


@dataclass(frozen=True)
class LtiSystem:
    """x(k+1) = a x(k) + b u(k)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        b = np.asarray(self.b, dtype=float)
        b = b.reshape(a.shape[0], -1)
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatchError(f"state matrix must be square, got {a.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("system matrices must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_x(self) -> int:
        return self.a.shape[0]

    @property
    def n_u(self) -> int:
        return self.b.shape[1]


def step(sys: LtiSystem, x, u) -> np.ndarray:
    """One exact forward step a x + b u."""
    x = np.asarray(x, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    if x.size != sys.n_x or u.size != sys.n_u:
        raise DimensionMismatchError(
            f"state/input dims ({x.size},{u.size}) vs system ({sys.n_x},{sys.n_u})"
        )
    return sys.a @ x + sys.b @ u


class StepOracle:
    """Opaque one-step simulator: exposes next_state(x, u) and nothing else."""

    def __init__(self, next_state_fn: Callable[[np.ndarray, np.ndarray], np.ndarray]):
        self._next_state = next_state_fn

    def next_state(self, x, u) -> np.ndarray:
        return np.asarray(self._next_state(np.asarray(x, float), np.asarray(u, float)), float)


def step_oracle(sys: LtiSystem) -> StepOracle:
    """Wrap a system as a StepOracle without leaking its matrices."""
    return StepOracle(lambda x, u: step(sys, x, u))


@dataclass(frozen=True)
class TrajectorySample:
    k: int
    x: np.ndarray
    u: np.ndarray
    x_next: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    samples: tuple[TrajectorySample, ...]
    terminated_by: str  # guard-exit | horizon

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def failing(self) -> bool:
        return self.terminated_by == GUARD_EXIT

    def to_csv(self) -> str:
        """CSV rows: k, x..., u..., x_next..., failing flag on the exit sample."""
        if not self.samples:
            return "k,failing\n"
        n_x = self.samples[0].x.size
        n_u = self.samples[0].u.size
        header = (
            ["k"]
            + [f"x{i}" for i in range(n_x)]
            + [f"u{i}" for i in range(n_u)]
            + [f"x_next{i}" for i in range(n_x)]
            + ["failing"]
        )
        lines = [",".join(header)]
        last = len(self.samples) - 1
        for i, s in enumerate(self.samples):
            fail = int(self.failing and i == last)
            vals = [str(s.k)] + [f"{v:.12g}" for v in (*s.x, *s.u, *s.x_next)] + [str(fail)]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def make_joint_constraints(state_box: Polytope, input_box: Polytope) -> Polytope:
    """Stack state and input constraints into one polytope over z = (x, u).

    The state projection of the result is state_box and its section at any
    feasible state is input_box (input constraints are state-independent).
    """
    n_x, n_u = state_box.dim, input_box.dim
    for name, box in (("state", state_box), ("input", input_box)):
        if box.n_rows and np.any(box.offsets <= 0.0):
            logger.warning("%s box does not contain the origin in its interior", name)
    normals = np.zeros((state_box.n_rows + input_box.n_rows, n_x + n_u))
    normals[: state_box.n_rows, :n_x] = state_box.normals
    normals[state_box.n_rows :, n_x:] = input_box.normals
    offsets = np.concatenate([state_box.offsets, input_box.offsets])
    return Polytope(n_x + n_u, normals, offsets, ("initial",) * offsets.size)


SectionFn = Callable[[np.ndarray], Optional[Polytope]]
Controller = Callable[[np.ndarray, Optional[Polytope]], np.ndarray]


def rollout(
    oracle: StepOracle,
    controller: Controller,
    x0,
    horizon: int,
    guard: Polytope,
    section_of: SectionFn | None = None,
) -> Trajectory:
    """Run the controller until the next state exits the guard or the
    horizon fills, recording every sample including the failing one.
    """
    x = np.asarray(x0, dtype=float).ravel()
    if not is_member(guard, x):
        raise ValueError(f"initial state {x} outside the guard polytope")
    samples: list[TrajectorySample] = []
    terminated = HORIZON
    for k in range(horizon):
        section = section_of(x) if section_of is not None else None
        try:
            u = np.asarray(controller(x, section), dtype=float).ravel()
        except EmptySectionError as exc:
            raise ControllerInfeasibleError(
                f"no admissible input at step {k}, state {x}", step=k
            ) from exc
        x_next = oracle.next_state(x, u)
        samples.append(TrajectorySample(k, x.copy(), u, x_next.copy()))
        if not is_member(guard, x_next):
            terminated = GUARD_EXIT
            break
        x = x_next
    return Trajectory(tuple(samples), terminated)


__all__ = [
    "LtiSystem",
    "StepOracle",
    "Trajectory",
    "TrajectorySample",
    "step",
    "step_oracle",
    "make_joint_constraints",
    "rollout",
    "GUARD_EXIT",
    "HORIZON",
]
