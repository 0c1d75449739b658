"""Polytope algebra in H-representation with explicit tolerances.

A polytope is stored as unit-normalized rows {y : N y <= h}. All values
are immutable after construction; operations are pure functions backed by
the embedded simplex solver. Tolerances are fixed package-wide:
feasibility 1e-9, redundancy 1e-7, set equality 1e-6, row matching 1e-3.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHalfspaceError,
    DimensionMismatchError,
    EmptyPolytopeError,
    UnboundedPolytopeError,
)
from .simplex import solve_inequality_lp

TOL_FEAS = 1e-9
TOL_REDUNDANCY = 1e-7
TOL_SET_EQUALITY = 1e-6
TOL_ROW_MATCH = 1e-3
TOL_DEGENERATE = 1e-12

REJECTION_CAP = 10_000
HIT_AND_RUN_STEPS = 50


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Halfspace:
    """One halfspace {y : normal.y <= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", _frozen(np.ravel(self.normal)))
        object.__setattr__(self, "offset", float(self.offset))
        if np.linalg.norm(self.normal) <= TOL_DEGENERATE:
            raise DegenerateHalfspaceError(f"normal {self.normal} is numerically zero")

    @property
    def dim(self) -> int:
        return self.normal.size


def normalize(h: Halfspace) -> Halfspace:
    """Scale a halfspace so its normal has unit Euclidean norm."""
    scale = np.linalg.norm(h.normal)
    if scale <= TOL_DEGENERATE:
        raise DegenerateHalfspaceError(f"normal {h.normal} is numerically zero")
    return Halfspace(h.normal / scale, h.offset / scale)


@dataclass(frozen=True)
class Polytope:
    """Intersection of halfspaces {y : normals y <= offsets} in R^dim.

    Rows are unit-normalized at construction. `labels` carries optional
    per-row provenance tags and stays parallel to the rows. A polytope
    with zero rows is the whole space.
    """

    dim: int
    normals: np.ndarray
    offsets: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        normals = np.asarray(self.normals, dtype=float).reshape(-1, self.dim)
        offsets = np.asarray(self.offsets, dtype=float).ravel()
        if self.dim <= 0:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if offsets.size != normals.shape[0]:
            raise DimensionMismatchError(
                f"{normals.shape[0]} normals vs {offsets.size} offsets"
            )
        scales = np.linalg.norm(normals, axis=1)
        if np.any(scales <= TOL_DEGENERATE):
            raise DegenerateHalfspaceError("zero row in polytope description")
        normals = normals / scales[:, None]
        offsets = offsets / scales
        labels = tuple(self.labels) if self.labels else ("",) * offsets.size
        if len(labels) != offsets.size:
            raise ValueError(f"{len(labels)} labels for {offsets.size} rows")
        object.__setattr__(self, "normals", _frozen(normals))
        object.__setattr__(self, "offsets", _frozen(offsets))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_cache", {})

    @property
    def n_rows(self) -> int:
        return self.offsets.size

    @property
    def halfspaces(self) -> tuple[Halfspace, ...]:
        return tuple(Halfspace(n, o) for n, o in zip(self.normals, self.offsets))

    @staticmethod
    def from_box(lower, upper, labels: tuple[str, ...] | None = None) -> "Polytope":
        """Axis-aligned box {lower <= y <= upper}."""
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        if lower.size != upper.size:
            raise DimensionMismatchError("lower/upper length mismatch")
        if np.any(upper < lower):
            raise ValueError("box has upper < lower")
        d = lower.size
        eye = np.eye(d)
        normals = np.vstack([eye, -eye])
        offsets = np.concatenate([upper, -lower])
        return Polytope(d, normals, offsets, labels or ())


def is_member(p: Polytope, y, tol: float = TOL_FEAS) -> bool:
    """Row-wise membership test N y <= h + tol."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != p.dim:
        raise DimensionMismatchError(f"point dim {y.size} vs polytope dim {p.dim}")
    if p.n_rows == 0:
        return True
    return bool(np.all(p.normals @ y <= p.offsets + tol))


@dataclass(frozen=True)
class LpResult:
    status: str  # optimal | infeasible | unbounded
    optimum: float
    argument: np.ndarray | None


def lp_solve(objective, p: Polytope, sense: str = "maximize") -> LpResult:
    """Optimize a linear objective over a polytope."""
    objective = np.asarray(objective, dtype=float).ravel()
    if objective.size != p.dim:
        raise DimensionMismatchError(
            f"objective dim {objective.size} vs polytope dim {p.dim}"
        )
    if sense not in ("maximize", "minimize"):
        raise ValueError(f"unknown sense {sense!r}")
    status, opt, arg = solve_inequality_lp(
        objective, p.normals, p.offsets, maximize=(sense == "maximize")
    )
    return LpResult(status, opt, arg)


def is_empty(p: Polytope) -> bool:
    status, _, _ = solve_inequality_lp(
        np.zeros(p.dim), p.normals, p.offsets, maximize=False
    )
    return status == "infeasible"


def remove_redundancy(p: Polytope) -> Polytope:
    """Drop every row implied by the others (verified by LP).

    A kept row j satisfies max n_j.y over the remaining rows > h_j + 1e-7.
    Later duplicates are dropped first so earlier provenance survives.
    """
    if is_empty(p):
        raise EmptyPolytopeError("cannot reduce an empty polytope")
    normals, offsets = p.normals, p.offsets
    labels = list(p.labels)
    # Cheap near-duplicate pass, keeping the first occurrence.
    keep: list[int] = []
    for j in range(p.n_rows):
        dup = any(
            np.all(np.abs(normals[j] - normals[i]) <= 1e-9)
            and abs(offsets[j] - offsets[i]) <= 1e-9
            for i in keep
        )
        if not dup:
            keep.append(j)
    # LP sweep from the back so earlier rows win ties among equivalents.
    for pos in range(len(keep) - 1, -1, -1):
        j = keep[pos]
        others = keep[:pos] + keep[pos + 1 :]
        status, opt, _ = solve_inequality_lp(
            normals[j], normals[others], offsets[others], maximize=True
        )
        if status == "optimal" and opt <= offsets[j] + TOL_REDUNDANCY:
            keep.pop(pos)
    return Polytope(
        p.dim,
        normals[keep],
        offsets[keep],
        tuple(labels[j] for j in keep),
    )


def _build_rows(dim, normals, offsets, labels):
    """Construct a polytope, filtering trivially-true zero rows."""
    normals = np.asarray(normals, dtype=float).reshape(-1, dim)
    offsets = np.asarray(offsets, dtype=float).ravel()
    scales = np.linalg.norm(normals, axis=1)
    zero = scales <= TOL_DEGENERATE
    if np.any(zero):
        if np.any(offsets[zero] < -TOL_FEAS):
            raise EmptyPolytopeError("contradictory constraints (0 <= negative)")
        keep = ~zero
        normals, offsets = normals[keep], offsets[keep]
        labels = tuple(l for l, k in zip(labels, keep) if k)
    return Polytope(dim, normals, offsets, tuple(labels))


def project_eliminate(p: Polytope, keep) -> Polytope:
    """Project onto the coordinates in `keep` (0-based, order-preserving).

    Dropped coordinates are removed one at a time by Fourier-Motzkin
    elimination; redundancy is removed after each eliminated variable so
    the intermediate row count stays bounded.
    """
    keep = sorted(set(int(i) for i in keep))
    if not keep:
        raise ValueError("keep must be nonempty")
    if any(i < 0 or i >= p.dim for i in keep):
        raise ValueError(f"keep {keep} out of range for dim {p.dim}")
    if len(keep) == p.dim:
        raise ValueError("keep must be a proper subset of the coordinates")

    cols = list(range(p.dim))
    normals = np.array(p.normals)
    offsets = np.array(p.offsets)
    labels = list(p.labels)
    for target in [i for i in range(p.dim) if i not in keep]:
        col = cols.index(target)
        coeffs = normals[:, col]
        pos = np.flatnonzero(coeffs > TOL_DEGENERATE)
        neg = np.flatnonzero(coeffs < -TOL_DEGENERATE)
        zero = np.flatnonzero(np.abs(coeffs) <= TOL_DEGENERATE)
        rest = np.delete(normals, col, axis=1)
        new_normals = [rest[zero]]
        new_offsets = [offsets[zero]]
        new_labels = [labels[i] for i in zero]
        for i, j in itertools.product(pos, neg):
            wi, wj = coeffs[i], -coeffs[j]
            new_normals.append((rest[i] / wi + rest[j] / wj)[None, :])
            new_offsets.append(np.atleast_1d(offsets[i] / wi + offsets[j] / wj))
            new_labels.append("")
        stacked_n = np.vstack(new_normals) if new_normals else np.zeros((0, rest.shape[1]))
        stacked_o = np.concatenate(new_offsets) if new_offsets else np.zeros(0)
        cols.pop(col)
        reduced = _build_rows(len(cols), stacked_n, stacked_o, tuple(new_labels))
        reduced = remove_redundancy(reduced)
        normals = np.array(reduced.normals)
        offsets = np.array(reduced.offsets)
        labels = list(reduced.labels)
    return Polytope(len(keep), normals, offsets, tuple(labels))


def intersect(p: Polytope, h: Halfspace, label: str = "") -> Polytope:
    """Append one normalized halfspace row; no redundancy removal."""
    if h.dim != p.dim:
        raise DimensionMismatchError(f"halfspace dim {h.dim} vs polytope dim {p.dim}")
    hn = normalize(h)
    return Polytope(
        p.dim,
        np.vstack([p.normals, hn.normal[None, :]]),
        np.concatenate([p.offsets, [hn.offset]]),
        p.labels + (label,),
    )


def intersect_polytopes(p: Polytope, q: Polytope, labels: tuple[str, ...] | None = None) -> Polytope:
    """Row union of two polytopes, skipping rows p already carries."""
    if p.dim != q.dim:
        raise DimensionMismatchError(f"dims {p.dim} vs {q.dim}")
    labels = labels if labels is not None else q.labels
    new_n, new_o, new_l = [p.normals], [p.offsets], list(p.labels)
    for normal, offset, lab in zip(q.normals, q.offsets, labels):
        dup = np.any(
            np.all(np.abs(p.normals - normal) <= 1e-9, axis=1)
            & (np.abs(p.offsets - offset) <= 1e-9)
        )
        if not dup:
            new_n.append(normal[None, :])
            new_o.append(np.atleast_1d(offset))
            new_l.append(lab)
    return Polytope(p.dim, np.vstack(new_n), np.concatenate(new_o), tuple(new_l))


def contains(p: Polytope, q: Polytope, tol: float = TOL_SET_EQUALITY) -> bool:
    """Whether q is a subset of p: every row of p bounds q within tol."""
    if p.dim != q.dim:
        raise DimensionMismatchError(f"dims {p.dim} vs {q.dim}")
    if is_empty(q):
        raise EmptyPolytopeError("containment query against an empty polytope")
    for normal, offset in zip(p.normals, p.offsets):
        status, opt, _ = solve_inequality_lp(normal, q.normals, q.offsets, maximize=True)
        if status == "unbounded":
            return False
        if opt > offset + tol:
            return False
    return True


def equal(p: Polytope, q: Polytope, tol: float = TOL_SET_EQUALITY) -> bool:
    """Set equality by mutual containment."""
    return contains(p, q, tol) and contains(q, p, tol)


def _interval_bounds(p: Polytope) -> tuple[float, float]:
    """Closed-form bounds of a 1-D polytope (rows are +/-1 after normalization)."""
    up = p.offsets[p.normals[:, 0] > 0.5]
    lo = -p.offsets[p.normals[:, 0] < -0.5]
    if up.size == 0 or lo.size == 0:
        raise UnboundedPolytopeError("1-D polytope unbounded")
    lower, upper = float(lo.max()), float(up.min())
    if upper < lower - TOL_FEAS:
        raise EmptyPolytopeError("empty 1-D polytope")
    return lower, upper


def chebyshev_center(p: Polytope) -> tuple[np.ndarray, float]:
    """Center and radius of the largest inscribed ball.

    Radius 0 indicates a lower-dimensional set; an empty polytope raises.
    """
    if p.dim == 1 and p.n_rows:
        lower, upper = _interval_bounds(p)
        return np.array([(lower + upper) / 2.0]), max((upper - lower) / 2.0, 0.0)
    # Variables (y, r): maximize r s.t. n_i.y + r <= h_i, -r <= 0.
    a = np.hstack([p.normals, np.ones((p.n_rows, 1))])
    a = np.vstack([a, np.concatenate([np.zeros(p.dim), [-1.0]])])
    b = np.concatenate([p.offsets, [0.0]])
    cost = np.concatenate([np.zeros(p.dim), [1.0]])
    status, opt, arg = solve_inequality_lp(cost, a, b, maximize=True)
    if status == "infeasible":
        raise EmptyPolytopeError("no Chebyshev center: polytope is empty")
    if status == "unbounded":
        raise UnboundedPolytopeError("inscribed radius unbounded")
    return arg[: p.dim], float(opt)


def bounding_box(p: Polytope) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounding box from per-coordinate LPs (cached)."""
    cache = p.__dict__["_cache"]
    if "bbox" in cache:
        return cache["bbox"]
    if p.dim == 1 and p.n_rows:
        lower, upper = _interval_bounds(p)
        box = (np.array([lower]), np.array([upper]))
        cache["bbox"] = box
        return box
    lo = np.empty(p.dim)
    hi = np.empty(p.dim)
    for i in range(p.dim):
        e = np.zeros(p.dim)
        e[i] = 1.0
        for sign, out in ((1.0, hi), (-1.0, lo)):
            status, opt, _ = solve_inequality_lp(sign * e, p.normals, p.offsets, maximize=True)
            if status == "unbounded":
                raise UnboundedPolytopeError(f"polytope unbounded in coordinate {i}")
            if status == "infeasible":
                raise EmptyPolytopeError("bounding box of an empty polytope")
            out[i] = sign * opt
    box = (_frozen(lo), _frozen(hi))
    cache["bbox"] = box
    return box


def enumerate_vertices(p: Polytope, tol: float = 1e-8) -> np.ndarray:
    """All extreme points of a bounded polytope of dimension <= 4.

    Brute force over d-row subsets: solve, filter by feasibility, and
    deduplicate within tol. Output rows are sorted lexicographically.
    """
    if p.dim > 4:
        raise ValueError("vertex enumeration supports dimension <= 4")
    cache = p.__dict__["_cache"]
    if "vertices" in cache:
        return cache["vertices"]
    bounding_box(p)  # raises if unbounded or empty
    verts: list[np.ndarray] = []
    for rows in itertools.combinations(range(p.n_rows), p.dim):
        sub = p.normals[list(rows)]
        try:
            v = np.linalg.solve(sub, p.offsets[list(rows)])
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(v)):
            continue
        if np.max(np.abs(sub @ v - p.offsets[list(rows)])) > tol:
            continue
        if np.any(p.normals @ v - p.offsets > tol):
            continue
        if not any(np.linalg.norm(v - w) <= tol for w in verts):
            verts.append(v)
    out = np.array(sorted(verts, key=tuple)) if verts else np.zeros((0, p.dim))
    out = _frozen(out)
    cache["vertices"] = out
    return out


def point_distance(p: Polytope, y) -> float:
    """Euclidean distance from a point to a polytope.

    The projection is found by enumerating candidate active facet sets
    (size 1..dim), projecting onto each affine hull, and keeping the
    closest feasible candidate.
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.size != p.dim:
        raise DimensionMismatchError(f"point dim {y.size} vs polytope dim {p.dim}")
    if is_member(p, y, TOL_FEAS):
        return 0.0
    best = np.inf
    for size in range(1, p.dim + 1):
        for rows in itertools.combinations(range(p.n_rows), size):
            n_s = p.normals[list(rows)]
            h_s = p.offsets[list(rows)]
            gram = n_s @ n_s.T
            mu, *_ = np.linalg.lstsq(gram, n_s @ y - h_s, rcond=None)
            cand = y - n_s.T @ mu
            if np.max(np.abs(n_s @ cand - h_s)) > 1e-7:
                continue  # rank-deficient inconsistent subset
            if np.any(p.normals @ cand - p.offsets > 1e-7):
                continue
            best = min(best, float(np.linalg.norm(y - cand)))
    if not np.isfinite(best):
        raise EmptyPolytopeError("no feasible projection found")
    return best


def hausdorff(p: Polytope, q: Polytope) -> float:
    """Symmetric Hausdorff distance between two bounded polytopes."""
    if p.dim != q.dim:
        raise DimensionMismatchError(f"dims {p.dim} vs {q.dim}")
    d_pq = max((point_distance(q, v) for v in enumerate_vertices(p)), default=0.0)
    d_qp = max((point_distance(p, v) for v in enumerate_vertices(q)), default=0.0)
    return max(d_pq, d_qp)


def sample_uniform(p: Polytope, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample by bounding-box rejection, deterministic under rng.

    Falls back to Chebyshev-center-seeded hit-and-run (50 steps) if the
    rejection cap (10,000 draws) is exhausted.
    """
    lo, hi = bounding_box(p)
    drawn = 0
    while drawn < REJECTION_CAP:
        batch = min(100, REJECTION_CAP - drawn)
        pts = rng.uniform(lo, hi, size=(batch, p.dim))
        drawn += batch
        if p.n_rows == 0:
            return pts[0]
        ok = np.flatnonzero(np.all(pts @ p.normals.T <= p.offsets + TOL_FEAS, axis=1))
        if ok.size:
            return pts[ok[0]].copy()
    center, _ = chebyshev_center(p)
    y = np.array(center, dtype=float)
    for _ in range(HIT_AND_RUN_STEPS):
        direction = rng.standard_normal(p.dim)
        norm = np.linalg.norm(direction)
        if norm <= TOL_DEGENERATE:
            continue
        direction /= norm
        proj = p.normals @ direction
        slack = p.offsets - p.normals @ y
        t_hi = np.min(slack[proj > TOL_DEGENERATE] / proj[proj > TOL_DEGENERATE], initial=np.inf)
        t_lo = np.max(slack[proj < -TOL_DEGENERATE] / proj[proj < -TOL_DEGENERATE], initial=-np.inf)
        if not (np.isfinite(t_lo) and np.isfinite(t_hi)) or t_hi < t_lo:
            continue
        y = y + rng.uniform(t_lo, t_hi) * direction
    return y


def polytope_to_dict(p: Polytope) -> dict:
    """JSON-ready form: {dim, rows:[{normal, offset, label}]}."""
    return {
        "dim": p.dim,
        "rows": [
            {"normal": [float(v) for v in n], "offset": float(o), "label": l}
            for n, o, l in zip(p.normals, p.offsets, p.labels)
        ],
    }


def polytope_from_dict(data: dict) -> Polytope:
    rows = data["rows"]
    dim = int(data["dim"])
    if not rows:
        return Polytope(dim, np.zeros((0, dim)), np.zeros(0))
    return Polytope(
        dim,
        np.array([r["normal"] for r in rows], dtype=float),
        np.array([r["offset"] for r in rows], dtype=float),
        tuple(r.get("label", "") for r in rows),
    )


def polytope_to_json(p: Polytope) -> str:
    return json.dumps(polytope_to_dict(p), indent=2, sort_keys=True)


def polytope_from_json(text: str) -> Polytope:
    return polytope_from_dict(json.loads(text))


def vertices_csv(p: Polytope) -> str:
    """Vertices as CSV, one point per line."""
    lines = [",".join(f"y{i}" for i in range(p.dim))]
    for v in enumerate_vertices(p):
        lines.append(",".join(f"{c:.12g}" for c in v))
    return "\n".join(lines) + "\n"
