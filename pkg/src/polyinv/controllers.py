"""Controller families used by the experiments.

All controllers share one contract: called with the current state and the
current admissible-input polytope (supplied by the rollout loop, so
refinements take effect without rebuilding the controller), they return
an input vector. Constant controllers ignore the section on purpose --
they exist to provoke failures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyPolytopeError, EmptySectionError
from .geometry import Polytope, chebyshev_center, is_member, sample_uniform
from .invariance import x_section


def constant_controller(u_c):
    """Always return u_c, regardless of state or section."""
    u_c = np.asarray(u_c, dtype=float).ravel()
    if not np.all(np.isfinite(u_c)):
        raise ValueError(f"constant input {u_c} must be finite")

    def controller(x, section: Optional[Polytope] = None) -> np.ndarray:
        return u_c

    return controller


def random_admissible_controller(rng: np.random.Generator):
    """Sample the supplied section uniformly; deterministic under rng."""

    def controller(x, section: Optional[Polytope]) -> np.ndarray:
        if section is None:
            raise EmptySectionError(f"no admissible inputs at state {x}")
        try:
            return sample_uniform(section, rng)
        except EmptyPolytopeError as exc:
            raise EmptySectionError(f"no admissible inputs at state {x}") from exc

    return controller


def safe_controller(z_ref: Polytope):
    """Steer with the Chebyshev center of the reference set's section.

    z_ref must be state-control invariant for the closed loop to stay in
    its state projection; the center maximizes the margin inside the
    admissible inputs at each state.
    """

    def controller(x, section: Optional[Polytope] = None) -> np.ndarray:
        sec = x_section(z_ref, np.asarray(x, dtype=float))
        if sec is None:
            raise EmptySectionError(f"state {x} outside the reference projection")
        try:
            center, _ = chebyshev_center(sec)
        except EmptyPolytopeError as exc:
            raise EmptySectionError(f"state {x} outside the reference projection") from exc
        return center

    return controller


@dataclass(frozen=True)
class ControllerSpec:
    """Parsed controller description: constant | random-admissible | safe."""

    kind: str
    u: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "random-admissible", "safe"):
            raise ValueError(f"unknown controller kind {self.kind!r}")
        if self.kind == "constant":
            if self.u is None:
                raise ValueError("constant controller needs an input value")
            object.__setattr__(self, "u", np.asarray(self.u, dtype=float).ravel())

    def validate_input(self, input_box: Polytope) -> None:
        """Constant inputs must lie in the iteration-0 input box."""
        if self.kind == "constant" and not is_member(input_box, self.u):
            raise ValueError(f"constant input {self.u} outside the input box")

    def build(self, rng: np.random.Generator | None = None, z_ref: Polytope | None = None):
        if self.kind == "constant":
            return constant_controller(self.u)
        if self.kind == "random-admissible":
            if rng is None:
                raise ValueError("random-admissible controller needs an rng")
            return random_admissible_controller(rng)
        if z_ref is None:
            raise ValueError("safe controller needs a reference polytope")
        return safe_controller(z_ref)


@dataclass(frozen=True)
class ScheduleEntry:
    """One trajectory's controller choice plus an optional explicit start.

    x0 = None means the start is sampled from the current projected
    polytope (only meaningful for random entries).
    """

    spec: ControllerSpec
    x0: np.ndarray | None = None

    def __post_init__(self):
        if self.x0 is not None:
            object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).ravel())


RANDOM_ENTRY = ScheduleEntry(ControllerSpec("random-admissible"))


@dataclass(frozen=True)
class ControllerSchedule:
    """Explicit entries consumed per trajectory; random entries repeat after."""

    entries: tuple[ScheduleEntry, ...] = ()

    def entry(self, trajectory_index: int) -> ScheduleEntry:
        if trajectory_index < len(self.entries):
            return self.entries[trajectory_index]
        return RANDOM_ENTRY
