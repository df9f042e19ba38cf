"""Sampled-data bilateral teleoperation: stability analysis and simulation.

A position-force teleoperation loop (master and slave robots exchanging
sampled, delayed signals through zero-order holds) is covered end to end:

* frequency-domain machinery for rational transfer functions (:mod:`.lti`),
* robot / operator / wall models and exact ZOH discretization (:mod:`.plants`),
* the shared coordinating controller (:mod:`.control`),
* absolute-stability certificates for the sampled loop (:mod:`.stability`),
* a deterministic hybrid continuous/discrete simulator (:mod:`.sim`),
* scenario files, reports, and the command line front end
  (:mod:`.scenario`, :mod:`.cli`).
"""

__version__ = "0.1.0"

from .control import (
    ControllerGains,
    LatchedState,
    NotYetInitialized,
    control_continuous,
    control_sampled,
    controller_z_tf,
    passivity_gain_rule,
)
from .lti import (
    BadGrid,
    ComplexResponse,
    DegenerateZ,
    FrequencyGrid,
    PoleHit,
    RationalTF,
    backward_diff_gain,
    eval_tf,
    freq_response,
    make_grid,
    tustin_gain,
    zoh_factor,
)
from .plants import (
    FREE,
    DegenerateModel,
    HybridMatrix,
    ImpedanceModel,
    ImproperPlant,
    RobotParams,
    SingularSlaveLoop,
    WallModel,
    hybrid_at,
    plant_position_tf,
    robot_impedance,
    sampled_plant_tf,
    transparency_error,
    wall_force,
)
from .scenario import (
    ParseError,
    RunSettings,
    ValidationError,
    build_report,
    load_run_settings,
    load_scenario,
    read_report,
    save_scenario,
    scenario_hash,
    serialize_scenario,
    write_report,
)
from .sim import (
    NonidealityConfig,
    OperatorForce,
    SimScenario,
    SimTrace,
    SimVerdict,
    SweepRow,
    apply_nonidealities,
    clamp_force,
    run_scenario,
    sweep_period,
    verdict,
    write_events_csv,
    write_trace_csv,
)
from .stability import (
    AssumptionViolated,
    ChannelConfig,
    DelayModel,
    KernelSingular,
    MaxPeriodResult,
    NoBracket,
    SingularDenominator,
    StabilityReport,
    TeleopSystem,
    alpha_zero_condition,
    damping_bound,
    induced_delay_gamma,
    max_stable_period,
    mn_terms,
    r_kernel,
    small_gain_value,
)

__all__ = [
    "__version__",
    # lti
    "RationalTF",
    "ComplexResponse",
    "FrequencyGrid",
    "BadGrid",
    "PoleHit",
    "DegenerateZ",
    "eval_tf",
    "zoh_factor",
    "backward_diff_gain",
    "tustin_gain",
    "make_grid",
    "freq_response",
    # plants
    "RobotParams",
    "ImpedanceModel",
    "FREE",
    "WallModel",
    "HybridMatrix",
    "DegenerateModel",
    "ImproperPlant",
    "SingularSlaveLoop",
    "robot_impedance",
    "plant_position_tf",
    "sampled_plant_tf",
    "hybrid_at",
    "transparency_error",
    "wall_force",
    # control
    "ControllerGains",
    "LatchedState",
    "NotYetInitialized",
    "control_continuous",
    "control_sampled",
    "controller_z_tf",
    "passivity_gain_rule",
    # stability
    "ChannelConfig",
    "TeleopSystem",
    "DelayModel",
    "StabilityReport",
    "MaxPeriodResult",
    "KernelSingular",
    "SingularDenominator",
    "NoBracket",
    "AssumptionViolated",
    "r_kernel",
    "mn_terms",
    "small_gain_value",
    "alpha_zero_condition",
    "damping_bound",
    "max_stable_period",
    "induced_delay_gamma",
    # sim
    "NonidealityConfig",
    "OperatorForce",
    "SimScenario",
    "SimTrace",
    "SimVerdict",
    "SweepRow",
    "run_scenario",
    "verdict",
    "sweep_period",
    "apply_nonidealities",
    "clamp_force",
    "write_trace_csv",
    "write_events_csv",
    # scenario io
    "ParseError",
    "ValidationError",
    "RunSettings",
    "load_scenario",
    "load_run_settings",
    "save_scenario",
    "serialize_scenario",
    "scenario_hash",
    "build_report",
    "write_report",
    "read_report",
]
