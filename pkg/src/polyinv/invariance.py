"""Model-based invariant-set machinery.

State projections and x-sections decompose a joint state-input polytope;
the predecessor operators pull a target set back through the dynamics one
step. Both fixed-point recursions intersect the predecessor with the
current iterate until set equality, producing the maximal control
invariant set (state space) and its joint-space counterpart whose
projection recovers it and whose sections are the invariance-preserving
inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import LtiSystem
from .errors import DimensionMismatchError, EmptyPolytopeError, NonConvergenceError
from .geometry import (
    TOL_DEGENERATE,
    TOL_FEAS,
    TOL_SET_EQUALITY,
    Polytope,
    contains,
    equal,
    intersect_polytopes,
    is_empty,
    project_eliminate,
    remove_redundancy,
)

DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class RecursionTrace:
    """Nested iterates of a predecessor recursion down to its fixed point.

    `iterations_to_fixpoint` counts only the strictly refining steps; the
    terminal equality check is not counted.
    """

    iterates: tuple[Polytope, ...]
    iterations_to_fixpoint: int
    fixpoint: Polytope


def state_projection(z: Polytope, n_x: int) -> Polytope:
    """Project a joint polytope onto its first n_x coordinates."""
    if not 0 < n_x < z.dim:
        raise DimensionMismatchError(f"n_x={n_x} invalid for joint dim {z.dim}")
    return remove_redundancy(project_eliminate(z, range(n_x)))


def x_section(z: Polytope, x) -> Optional[Polytope]:
    """Input polytope {u : (x, u) in z} for a fixed state x.

    Rows without an input component are checked against x and dropped;
    if one is violated the section is empty and None is returned.
    """
    x = np.asarray(x, dtype=float).ravel()
    n_x = x.size
    if n_x >= z.dim:
        raise DimensionMismatchError(f"state dim {n_x} not below joint dim {z.dim}")
    n_u = z.dim - n_x
    h_zx = z.normals[:, :n_x]
    h_zu = z.normals[:, n_x:]
    residual = z.offsets - h_zx @ x
    pure_state = np.max(np.abs(h_zu), axis=1) <= TOL_DEGENERATE
    if np.any(residual[pure_state] < -TOL_FEAS):
        return None
    keep = ~pure_state
    return Polytope(n_u, h_zu[keep], residual[keep], tuple(
        l for l, k in zip(z.labels, keep) if k
    ))


def pre_z(sys: LtiSystem, omega: Polytope) -> Polytope:
    """Joint-space predecessor {z : [a b] z in state_projection(omega)}.

    Row j of the result is the pullback of projection row j through
    [a b]; its label records that link. Rows whose pullback vanishes are
    trivially satisfied (or raise if contradictory) and are dropped.
    """
    n_x, n_u = sys.n_x, sys.n_u
    if omega.dim != n_x + n_u:
        raise DimensionMismatchError(f"joint dim {omega.dim} vs system {n_x + n_u}")
    proj = state_projection(omega, n_x)
    ab = np.hstack([sys.a, sys.b])
    normals = proj.normals @ ab
    scales = np.linalg.norm(normals, axis=1)
    live = scales > TOL_DEGENERATE
    if np.any(proj.offsets[~live] < -TOL_FEAS):
        raise EmptyPolytopeError("predecessor is empty: unreachable projection row")
    labels = tuple(f"pre[{j}]" for j in np.flatnonzero(live))
    return Polytope(omega.dim, normals[live], proj.offsets[live], labels)


def pre_state(sys: LtiSystem, omega_x: Polytope, input_set: Polytope) -> Polytope:
    """State-space predecessor: states steerable into omega_x in one step.

    Built by lifting {(x, u) : a x + b u in omega_x, u in input_set} and
    projecting out the input coordinates.
    """
    n_x, n_u = sys.n_x, sys.n_u
    if omega_x.dim != n_x or input_set.dim != n_u:
        raise DimensionMismatchError("target/input dims inconsistent with system")
    if is_empty(omega_x):
        raise EmptyPolytopeError("predecessor of an empty target set")
    ab = np.hstack([sys.a, sys.b])
    lifted_n = np.vstack(
        [
            omega_x.normals @ ab,
            np.hstack([np.zeros((input_set.n_rows, n_x)), input_set.normals]),
        ]
    )
    lifted_o = np.concatenate([omega_x.offsets, input_set.offsets])
    scales = np.linalg.norm(lifted_n, axis=1)
    live = scales > TOL_DEGENERATE
    if np.any(lifted_o[~live] < -TOL_FEAS):
        raise EmptyPolytopeError("predecessor is empty: unreachable target row")
    lifted = Polytope(n_x + n_u, lifted_n[live], lifted_o[live])
    return project_eliminate(lifted, range(n_x))


def _fixed_point(start: Polytope, advance, tol: float, max_iter: int) -> RecursionTrace:
    omega = remove_redundancy(start)
    iterates = [omega]
    for k in range(1, max_iter + 1):
        pre = advance(omega)
        labels = (f"recursion:{k}",) * pre.n_rows
        nxt = remove_redundancy(intersect_polytopes(omega, pre, labels))
        if equal(nxt, omega, tol):
            return RecursionTrace(tuple(iterates), len(iterates) - 1, omega)
        iterates.append(nxt)
        omega = nxt
    raise NonConvergenceError(f"no fixed point within {max_iter} iterations")


def compute_mci(
    sys: LtiSystem,
    state_set: Polytope,
    input_set: Polytope,
    tol: float = TOL_SET_EQUALITY,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RecursionTrace:
    """Maximal control invariant subset of the state constraints."""
    return _fixed_point(
        state_set, lambda om: pre_state(sys, om, input_set), tol, max_iter
    )


def compute_msci(
    sys: LtiSystem,
    joint_set: Polytope,
    tol: float = TOL_SET_EQUALITY,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RecursionTrace:
    """Maximal state-control invariant subset of the joint constraints."""
    return _fixed_point(joint_set, lambda om: pre_z(sys, om), tol, max_iter)


def is_state_control_invariant(
    sys: LtiSystem, c: Polytope, tol: float = TOL_SET_EQUALITY
) -> bool:
    """Whether every pair in c has a successor pair inside c."""
    return contains(pre_z(sys, c), c, tol)
