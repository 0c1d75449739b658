"""Control-invariant set computation and failure-driven safe-set learning
for discrete-time LTI systems with polytopic constraints."""

from .controllers import (
    ControllerSchedule,
    ControllerSpec,
    ScheduleEntry,
    constant_controller,
    random_admissible_controller,
    safe_controller,
)
from .dynamics import (
    LtiSystem,
    StepOracle,
    Trajectory,
    TrajectorySample,
    make_joint_constraints,
    rollout,
    step,
    step_oracle,
)
from .geometry import (
    Halfspace,
    LpResult,
    Polytope,
    chebyshev_center,
    contains,
    enumerate_vertices,
    equal,
    hausdorff,
    intersect,
    is_member,
    lp_solve,
    normalize,
    project_eliminate,
    remove_redundancy,
    sample_uniform,
)
from .invariance import (
    RecursionTrace,
    compute_mci,
    compute_msci,
    is_state_control_invariant,
    pre_state,
    pre_z,
    state_projection,
    x_section,
)
from .learning import (
    CertificationReport,
    FailureEvent,
    LearnState,
    RegressorWindow,
    build_window,
    certify,
    detect_failures,
    learn_from_failures,
    learn_normal,
    refine,
)

__version__ = "0.1.0"
