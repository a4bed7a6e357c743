"""
Scenario configuration, loaded from TOML or JSON (chosen by file extension) into typed dataclasses.

Every field has a default, so an empty file describes the robot-arm benchmark with the tradeoff design and 5%
output noise.
"""
import datetime
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Union

import shortuuid
import typedload
from typedload.exceptions import TypedloadException

from ultralocal.benchmark.robot_arm import ROBOT_ARM_X0, RobotArmParams
from ultralocal.lmi import DEFAULT_A_GRID, DEFAULT_B_GRID
from ultralocal.plant.loader import UncertaintyDocument
from ultralocal.sdp import SolverSettings
from ultralocal.simulation import DEFAULT_HORIZON, DEFAULT_STEP, SignalSpec, SimulationSpecs
from ultralocal.util.compat import tomllib

logger = logging.getLogger(__name__)

ScenarioMode = Literal['l2', 'l2linf', 'tradeoff', 'all']
BUILTIN_PLANTS = ('robot-arm', )


class InvalidConfig(ValueError):
    pass


def benchmark_signals() -> SimulationSpecs:
    return SimulationSpecs(
        u=SignalSpec('sinusoid', 1, amplitude=2., frequency=0.25),
        fault=SignalSpec('sinusoid', 1, amplitude=0.1, frequency=0.25, delay=25.),
        omega=SignalSpec('sinusoid', 1, amplitude=0.03, frequency=0.1),
        nu=SignalSpec('piecewise-constant-uniform', 2, amplitude=0.05, relative=True),
    )


@dataclass
class DesignConfig:
    mode: ScenarioMode = 'tradeoff'
    r: int = 1
    a_grid: List[float] = field(default_factory=lambda: [float(a) for a in DEFAULT_A_GRID])
    b_grid: List[float] = field(default_factory=lambda: [float(b) for b in DEFAULT_B_GRID])
    # None: no bound. "auto": geometric mean of the l2 and l2linf sigma*, solved first
    sigma_max: Union[None, float, str] = 'auto'
    eps: Optional[float] = None
    linear_reduction: bool = False
    workers: int = 1


@dataclass
class SimulationConfig:
    x0: List[float] = field(default_factory=lambda: list(ROBOT_ARM_X0))
    z0: Literal['zero', 'matched'] = 'zero'
    T: float = DEFAULT_HORIZON
    h: float = DEFAULT_STEP
    seed: int = 0
    # extra reseeded runs for the certificate checks
    ensemble: int = 0
    # start of the steady-state window for tracking metrics
    t_transient: float = 50.
    workers: int = 1


@dataclass
class ScenarioConfig:
    name: str = 'robot-arm'
    # builtin name or path to a JSON plant document
    plant: str = 'robot-arm'
    robot_arm: RobotArmParams = field(default_factory=RobotArmParams)
    # kind only (no matrices) on the builtin plant takes the nominal mismatch model
    uncertainty: UncertaintyDocument = field(default_factory=lambda: UncertaintyDocument('linear-state'))
    design: DesignConfig = field(default_factory=DesignConfig)
    signals: SimulationSpecs = field(default_factory=benchmark_signals)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    solver: SolverSettings = field(default_factory=SolverSettings)
    output_dir: Optional[str] = None
    progress: bool = True



def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    d = cfg.design
    if d.r < 1:
        raise InvalidConfig(f'r must be >= 1, got {d.r}')
    if isinstance(d.sigma_max, str) and d.sigma_max != 'auto':
        raise InvalidConfig(f'sigma_max must be a number, null or "auto", got {d.sigma_max!r}')
    if d.mode in ('tradeoff', 'all'):
        if d.sigma_max is None or (not isinstance(d.sigma_max, str) and not math.isfinite(d.sigma_max)):
            raise InvalidConfig(f'mode {d.mode} needs a finite sigma_max or "auto"')
    if not d.a_grid or not d.b_grid:
        raise InvalidConfig('the (a, b) grids must not be empty')
    if any(a <= 0 for a in d.a_grid) or any(b == 0 for b in d.b_grid):
        raise InvalidConfig('a must be > 0 and b nonzero on every grid point')
    s = cfg.simulation
    if s.h <= 0 or s.T <= 0:
        raise InvalidConfig(f'horizon and step must be > 0, got T={s.T}, h={s.h}')
    if s.ensemble < 0:
        raise InvalidConfig(f'ensemble must be >= 0, got {s.ensemble}')
    if cfg.plant not in BUILTIN_PLANTS and not os.path.exists(cfg.plant):
        raise InvalidConfig(f'plant {cfg.plant!r} is neither builtin {BUILTIN_PLANTS} nor an existing file')
    return cfg


def config_from_dict(data: Dict[str, Any]) -> ScenarioConfig:
    try:
        cfg = typedload.load(data, ScenarioConfig, failonextra=True)
    except (TypedloadException, ValueError) as e:
        raise InvalidConfig(f'Invalid scenario config: {e}') from e
    return validate_config(cfg)


def load_config(path: str) -> ScenarioConfig:
    ext = os.path.splitext(path)[1].lower()
    if ext == '.toml':
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    elif ext == '.json':
        with open(path) as f:
            data = json.load(f)
    else:
        raise InvalidConfig(f'Config {path} must be .toml or .json, got {ext!r}')
    logger.info(f'Loading scenario config from {path}')
    return config_from_dict(data)


def config_to_dict(cfg: ScenarioConfig) -> Dict[str, Any]:
    return typedload.dump(cfg, hidedefault=False)


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(json.dumps(config_to_dict(cfg), sort_keys=True).encode()).hexdigest()


def run_key(now: Optional[datetime.datetime] = None) -> str:
    now = now or datetime.datetime.now()
    return f'{now.strftime("%Y-%m-%d-%H-%M-%S")}-{shortuuid.uuid()[:6]}'


def output_directory(cfg: ScenarioConfig, base: str = 'runs') -> str:
    """The configured output directory, or a fresh run key under `base`."""
    path = cfg.output_dir or os.path.join(base, run_key())
    os.makedirs(path, exist_ok=True)
    return path
