import numpy as np
import pytest

from polyinv.controllers import ControllerSchedule, ControllerSpec, ScheduleEntry
from polyinv.dynamics import LtiSystem, make_joint_constraints, step_oracle
from polyinv.geometry import Polytope
from polyinv.invariance import compute_mci, compute_msci
from polyinv.learning import learn_from_failures

# Fixed points of the double-integrator benchmark, frozen as row sets.
# Cross-checked independently by the grid and exhaustive-input probes in
# test_invariance.py.
XINF_NORMALS = np.array(
    [
        [1, 0],
        [-1, 0],
        [0, 1],
        [0, -1],
        [1, 1],
        [-1, -1],
        [1, 2],
        [-1, -2],
    ],
    dtype=float,
)
XINF_OFFSETS = np.array([15, 15, 10, 10, 15, 15, 20, 20], dtype=float)

ZINF_NORMALS = np.array(
    [
        [1, 0, 0],
        [-1, 0, 0],
        [0, 1, 0],
        [0, -1, 0],
        [0, 0, 1],
        [0, 0, -1],
        [0, 1, 1],
        [0, -1, -1],
        [1, 1, 0],
        [-1, -1, 0],
        [1, 2, 1],
        [-1, -2, -1],
        [1, 3, 2],
        [-1, -3, -2],
    ],
    dtype=float,
)
ZINF_OFFSETS = np.array(
    [15, 15, 10, 10, 5, 5, 10, 10, 15, 15, 15, 15, 20, 20], dtype=float
)


@pytest.fixture(scope="session")
def di_system() -> LtiSystem:
    return LtiSystem([[1.0, 1.0], [0.0, 1.0]], [[0.0], [1.0]])


@pytest.fixture(scope="session")
def state_box() -> Polytope:
    return Polytope.from_box([-15.0, -10.0], [15.0, 10.0])


@pytest.fixture(scope="session")
def input_box() -> Polytope:
    return Polytope.from_box([-5.0], [5.0])


@pytest.fixture(scope="session")
def joint_box(state_box, input_box) -> Polytope:
    return make_joint_constraints(state_box, input_box)


@pytest.fixture(scope="session")
def xinf_expected() -> Polytope:
    return Polytope(2, XINF_NORMALS, XINF_OFFSETS)


@pytest.fixture(scope="session")
def zinf_expected() -> Polytope:
    return Polytope(3, ZINF_NORMALS, ZINF_OFFSETS)


@pytest.fixture(scope="session")
def mci_trace(di_system, state_box, input_box):
    return compute_mci(di_system, state_box, input_box)


@pytest.fixture(scope="session")
def msci_trace(di_system, joint_box):
    return compute_msci(di_system, joint_box)


@pytest.fixture(scope="session")
def benchmark_schedule() -> ControllerSchedule:
    return ControllerSchedule(
        (
            ScheduleEntry(ControllerSpec("constant", [-5.0]), x0=[0.0, 0.0]),
            ScheduleEntry(ControllerSpec("constant", [5.0]), x0=[0.0, 0.0]),
        )
    )


@pytest.fixture(scope="session")
def learned_state(di_system, joint_box, benchmark_schedule):
    """One complete learning run with a fixed seed, shared across tests."""
    return learn_from_failures(
        step_oracle(di_system),
        joint_box,
        2,
        benchmark_schedule,
        max_refinements=20,
        horizon=15,
        seed=7,
        certification_rollouts=300,
    )
