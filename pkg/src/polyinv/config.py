"""Experiment configuration: TOML with nested tables, plain decimals.

Schema (see README for the full reference):

    schema_version = 1
    [system]        a, b                 -- matrices, row-major nested arrays
    [constraints]   state_lower/upper, input_lower/upper
    [learn]         seed (required), max_refinements, horizon,
                    certification_rollouts, [[learn.schedule]] entries
    [validation]    against_model + optional expected_* thresholds
    [output]        directory, emit_vertices, emit_trajectories

The system matrices are used only to simulate the plant and, when
validation is enabled, to compute the ground-truth sets for comparison;
the learner itself never reads them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .controllers import ControllerSchedule, ControllerSpec, ScheduleEntry
from .errors import ConfigError
from .geometry import Polytope
from .dynamics import LtiSystem

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ValidationOptions:
    against_model: bool = True
    expected_msci_rows: int | None = None
    expected_mci_rows: int | None = None
    expected_msci_iterations: int | None = None
    expected_mci_iterations: int | None = None
    iteration_tolerance: int = 1
    max_refinements_pass: int | None = None
    max_failing_trajectories: int | None = None


@dataclass(frozen=True)
class OutputOptions:
    directory: str = "out"
    emit_vertices: bool = True
    emit_trajectories: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    system: LtiSystem
    state_box: Polytope
    input_box: Polytope
    seed: int
    max_refinements: int = 20
    horizon: int = 15
    certification_rollouts: int = 1200
    schedule: ControllerSchedule = field(default_factory=ControllerSchedule)
    validation: ValidationOptions = field(default_factory=ValidationOptions)
    output: OutputOptions = field(default_factory=OutputOptions)

    @property
    def n_x(self) -> int:
        return self.system.n_x

    @property
    def n_u(self) -> int:
        return self.system.n_u


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing required field '{where}.{key}'")
    return table[key]


def _matrix(value, where: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{where}' is not a numeric array") from exc
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"field '{where}' contains non-finite values")
    return arr


def _parse_schedule(entries: list, input_box: Polytope, where: str) -> ControllerSchedule:
    parsed: list[ScheduleEntry] = []
    for i, raw in enumerate(entries):
        loc = f"{where}[{i}]"
        kind = _require(raw, "kind", loc)
        if kind == "constant":
            u = _matrix(_require(raw, "u", loc), f"{loc}.u")
            spec = ControllerSpec("constant", u)
            try:
                spec.validate_input(input_box)
            except ValueError as exc:
                raise ConfigError(f"{loc}: {exc}") from exc
            x0 = raw.get("x0")
            if x0 is None:
                raise ConfigError(f"{loc}: constant entries need an explicit x0")
            parsed.append(ScheduleEntry(spec, _matrix(x0, f"{loc}.x0")))
        elif kind == "random":
            x0 = raw.get("x0")
            parsed.append(
                ScheduleEntry(
                    ControllerSpec("random-admissible"),
                    None if x0 is None else _matrix(x0, f"{loc}.x0"),
                )
            )
        else:
            raise ConfigError(f"{loc}: unknown schedule kind {kind!r}")
    return ControllerSchedule(tuple(parsed))


def parse_config(data: dict) -> ExperimentConfig:
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")

    system_tbl = _require(data, "system", "config")
    a = _matrix(_require(system_tbl, "a", "system"), "system.a")
    b = _matrix(_require(system_tbl, "b", "system"), "system.b")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"system.a must be square, got shape {a.shape}")
    b = np.atleast_2d(b)
    if b.shape[0] != a.shape[0]:
        raise ConfigError(
            f"system.b has {b.shape[0]} rows, expected {a.shape[0]} to match system.a"
        )
    system = LtiSystem(a, b)

    cons = _require(data, "constraints", "config")
    state_lower = _matrix(_require(cons, "state_lower", "constraints"), "constraints.state_lower")
    state_upper = _matrix(_require(cons, "state_upper", "constraints"), "constraints.state_upper")
    input_lower = _matrix(_require(cons, "input_lower", "constraints"), "constraints.input_lower")
    input_upper = _matrix(_require(cons, "input_upper", "constraints"), "constraints.input_upper")
    if state_lower.size != system.n_x or state_upper.size != system.n_x:
        raise ConfigError("constraints.state bounds must match the state dimension")
    if input_lower.size != system.n_u or input_upper.size != system.n_u:
        raise ConfigError("constraints.input bounds must match the input dimension")
    state_box = Polytope.from_box(state_lower, state_upper)
    input_box = Polytope.from_box(input_lower, input_upper)

    learn_tbl = _require(data, "learn", "config")
    seed = _require(learn_tbl, "seed", "learn")
    if not isinstance(seed, int):
        raise ConfigError("learn.seed must be an integer")
    schedule = _parse_schedule(learn_tbl.get("schedule", []), input_box, "learn.schedule")

    val_tbl = data.get("validation", {})
    validation = ValidationOptions(
        against_model=val_tbl.get("against_model", True),
        expected_msci_rows=val_tbl.get("expected_msci_rows"),
        expected_mci_rows=val_tbl.get("expected_mci_rows"),
        expected_msci_iterations=val_tbl.get("expected_msci_iterations"),
        expected_mci_iterations=val_tbl.get("expected_mci_iterations"),
        iteration_tolerance=val_tbl.get("iteration_tolerance", 1),
        max_refinements_pass=val_tbl.get("max_refinements_pass"),
        max_failing_trajectories=val_tbl.get("max_failing_trajectories"),
    )

    out_tbl = data.get("output", {})
    output = OutputOptions(
        directory=out_tbl.get("directory", "out"),
        emit_vertices=out_tbl.get("emit_vertices", True),
        emit_trajectories=out_tbl.get("emit_trajectories", True),
    )

    return ExperimentConfig(
        system=system,
        state_box=state_box,
        input_box=input_box,
        seed=seed,
        max_refinements=learn_tbl.get("max_refinements", 20),
        horizon=learn_tbl.get("horizon", 15),
        certification_rollouts=learn_tbl.get("certification_rollouts", 1200),
        schedule=schedule,
        validation=validation,
        output=output,
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)
