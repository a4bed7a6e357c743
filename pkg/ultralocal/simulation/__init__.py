from ultralocal.simulation.harness import (
    DEFAULT_HORIZON,
    DEFAULT_STEP,
    SimulationSpecs,
    SimulationTrace,
    resolve_noise_amplitude,
    run_ensemble,
    simulate,
)
from ultralocal.simulation.integrate import NonFiniteState, integrate_rk4
from ultralocal.simulation.lyapunov import SpotCheckReport, lyapunov_spot_check
from ultralocal.simulation.metrics import (
    DisturbanceNotZero,
    GainRatio,
    NoiseNotZero,
    empirical_energy_to_peak,
    empirical_l2_gain,
    peak_error,
    tracking_rms,
)
from ultralocal.simulation.signals import InvalidSignal, Signal, SignalSpec, realize
from ultralocal.simulation.trace_io import load_trace_csv, save_fault_csv, save_trace_csv
