from ultralocal.benchmark.config import (
    InvalidConfig,
    ScenarioConfig,
    benchmark_signals,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
)
from ultralocal.benchmark.robot_arm import (
    ROBOT_ARM_X0,
    RobotArmParams,
    build_robot_arm,
    nominal_theta_x,
    robot_arm_eta,
    robot_arm_uncertainty,
)
from ultralocal.benchmark.scenario import (
    ModeComparison,
    PerformanceRow,
    ScenarioResult,
    build_system,
    compare_modes,
    design_filter,
    run_scenario,
    verify_trace,
)
