import numpy as np
import pytest

from polyinv import geometry as geo
from polyinv.controllers import constant_controller, safe_controller
from polyinv.dynamics import (
    GUARD_EXIT,
    HORIZON,
    LtiSystem,
    Trajectory,
    make_joint_constraints,
    rollout,
    step,
    step_oracle,
)
from polyinv.errors import DimensionMismatchError
from polyinv.geometry import Polytope
from polyinv.invariance import x_section


def brute_force_exit_step(sys_, x0, u_const, state_box, horizon):
    """Reference simulation: index of the sample whose successor leaves the box."""
    x = np.asarray(x0, dtype=float)
    for k in range(horizon):
        x_next = sys_.a @ x + sys_.b @ np.atleast_1d(u_const)
        if not geo.is_member(state_box, x_next):
            return k
        x = x_next
    return None


class TestStep:
    def test_equilibrium(self, di_system):
        np.testing.assert_allclose(step(di_system, [0, 0], [0]), [0, 0])

    def test_hand_multiply(self, di_system):
        np.testing.assert_allclose(step(di_system, [1, 2], [3]), [3, 5])
        np.testing.assert_allclose(step(di_system, [0, 10], [5]), [10, 15])

    def test_dimension_mismatch(self, di_system):
        with pytest.raises(DimensionMismatchError):
            step(di_system, [1, 2, 3], [0])

    def test_system_validation(self):
        with pytest.raises(DimensionMismatchError):
            LtiSystem([[1, 0], [0, 1], [0, 0]], [[1], [1], [1]])
        with pytest.raises(ValueError):
            LtiSystem([[np.inf, 0], [0, 1]], [[0], [1]])


class TestStepOracle:
    def test_agrees_with_step_on_random_pairs(self, di_system):
        oracle = step_oracle(di_system)
        rng = np.random.default_rng(5)
        for _ in range(1000):
            x = rng.uniform(-20, 20, size=2)
            u = rng.uniform(-10, 10, size=1)
            np.testing.assert_array_equal(oracle.next_state(x, u), step(di_system, x, u))

    def test_origin_is_fixed(self, di_system):
        oracle = step_oracle(di_system)
        np.testing.assert_allclose(oracle.next_state([0, 0], [0]), [0, 0])

    def test_exposes_only_next_state(self, di_system):
        oracle = step_oracle(di_system)
        public = [n for n in dir(oracle) if not n.startswith("_")]
        assert public == ["next_state"]


class TestJointConstraints:
    def test_benchmark_joint_box(self, joint_box, state_box, input_box):
        assert joint_box.dim == 3
        assert joint_box.n_rows == 6
        assert set(joint_box.labels) == {"initial"}
        proj = geo.project_eliminate(joint_box, [0, 1])
        assert geo.equal(proj, state_box, 1e-9)
        section = x_section(joint_box, [3.0, -2.0])
        assert geo.equal(section, input_box, 1e-9)

    def test_unit_cube(self):
        square = Polytope.from_box([-1, -1], [1, 1])
        seg = Polytope.from_box([-1], [1])
        cube = make_joint_constraints(square, seg)
        assert cube.n_rows == 6
        assert geo.equal(cube, Polytope.from_box([-1, -1, -1], [1, 1, 1]), 1e-9)

    def test_origin_not_interior_warns(self, caplog):
        shifted = Polytope.from_box([0.0, -1.0], [2.0, 1.0])
        seg = Polytope.from_box([-1.0], [1.0])
        with caplog.at_level("WARNING"):
            make_joint_constraints(shifted, seg)
        assert any("origin" in rec.message for rec in caplog.records)


class TestRollout:
    def test_constant_push_fails_after_brute_force_step(self, di_system, state_box):
        oracle = step_oracle(di_system)
        for u_c in (5.0, -5.0):
            traj = rollout(oracle, constant_controller([u_c]), [0, 0], 15, state_box)
            assert traj.terminated_by == GUARD_EXIT
            expected = brute_force_exit_step(di_system, [0, 0], u_c, state_box, 15)
            assert traj.samples[-1].k == expected
            # last recorded pair is the one-step failure
            assert not geo.is_member(state_box, traj.samples[-1].x_next)
            for s in traj.samples[:-1]:
                assert geo.is_member(state_box, s.x_next)

    def test_equilibrium_runs_to_horizon(self, di_system, state_box):
        oracle = step_oracle(di_system)
        traj = rollout(oracle, constant_controller([0.0]), [0, 0], 15, state_box)
        assert traj.terminated_by == HORIZON
        assert len(traj) == 15
        for s in traj.samples:
            np.testing.assert_allclose(s.x, [0, 0])
            np.testing.assert_allclose(s.x_next, [0, 0])

    def test_chaining_invariant(self, di_system, state_box):
        oracle = step_oracle(di_system)
        traj = rollout(oracle, constant_controller([1.0]), [0, 0], 15, state_box)
        for a, b in zip(traj.samples, traj.samples[1:]):
            np.testing.assert_array_equal(a.x_next, b.x)
            assert b.k == a.k + 1

    def test_rejects_start_outside_guard(self, di_system, state_box):
        with pytest.raises(ValueError):
            rollout(step_oracle(di_system), constant_controller([0.0]), [99, 0], 5, state_box)

    def test_safe_controller_closed_loop_stays_inside(
        self, di_system, msci_trace, mci_trace
    ):
        # 100 seeded rollouts of length 50 never leave the invariant set.
        oracle = step_oracle(di_system)
        zinf, xinf = msci_trace.fixpoint, mci_trace.fixpoint
        controller = safe_controller(zinf)
        rng = np.random.default_rng(100)
        for _ in range(100):
            x0 = geo.sample_uniform(xinf, rng)
            traj = rollout(oracle, controller, x0, 50, xinf)
            assert traj.terminated_by == HORIZON
            for s in traj.samples:
                assert geo.is_member(xinf, s.x_next, 1e-9)


class TestTrajectoryCsv:
    def test_failing_marker_on_exit_sample(self, di_system, state_box):
        oracle = step_oracle(di_system)
        traj = rollout(oracle, constant_controller([5.0]), [0, 0], 15, state_box)
        lines = traj.to_csv().strip().splitlines()
        assert lines[0] == "k,x0,x1,u0,x_next0,x_next1,failing"
        assert lines[-1].endswith(",1")
        assert all(line.endswith(",0") for line in lines[1:-1])

    def test_empty_trajectory_header_only(self):
        assert Trajectory((), HORIZON).to_csv() == "k,failing\n"
