import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Any, Callable, Dict, FrozenSet, List, Optional, Sequence, Union

import numpy as np
import typedload
from tqdm import tqdm

from ultralocal.estimator import FilterRealization, extract_fault, filter_rhs, matched_filter_state
from ultralocal.plant import DimensionMismatch, ValidatedPlant, validate_plant
from ultralocal.simulation.integrate import integrate_rk4
from ultralocal.simulation.signals import InvalidSignal, SignalSpec, realize
from ultralocal.util.logging_config import intermittent_log

logger = logging.getLogger(__name__)

DEFAULT_STEP = 0.01
DEFAULT_HORIZON = 100.

EtaFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
InitialFilterState = Union[np.ndarray, List[float], str]


@dataclass(frozen=True)
class SimulationSpecs:
    u: SignalSpec = field(default_factory=SignalSpec)
    fault: SignalSpec = field(default_factory=SignalSpec)
    omega: SignalSpec = field(default_factory=SignalSpec)
    nu: SignalSpec = field(default_factory=SignalSpec)

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self)]

    def reseeded(self, seed: int) -> 'SimulationSpecs':
        """Give every random signal its own seed derived from `seed`."""
        return SimulationSpecs(**{
            name: spec.with_seed(4 * seed + i) if spec.random else spec
            for i, (name, spec) in enumerate(self.items())
        })


TRACE_ARRAYS = (
    't', 'x', 'x_a', 'z', 'x_hat', 'y', 'u', 'f', 'f_hat', 'e', 'e_f', 'omega', 'nu', 'delta_eta', 'f_r'
)


@dataclass(frozen=True)
class SimulationTrace:
    """
    Time-indexed record of a co-simulation, one row per grid point. e = x_hat - x_a and e_f = C_bar e.

    delta_eta is the true uncertainty minus the model's output along the simulated trajectory, f_r the r-th fault
    derivative, nu_dot the analytic noise derivative (None for piecewise-constant noise).
    """
    t: np.ndarray
    x: np.ndarray
    x_a: np.ndarray
    z: np.ndarray
    x_hat: np.ndarray
    y: np.ndarray
    u: np.ndarray
    f: np.ndarray
    f_hat: np.ndarray
    e: np.ndarray
    e_f: np.ndarray
    omega: np.ndarray
    nu: np.ndarray
    delta_eta: np.ndarray
    f_r: np.ndarray
    nu_dot: Optional[np.ndarray] = None
    meta: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        for name in TRACE_ARRAYS + ('nu_dot', ):
            value = getattr(self, name)
            if value is not None:
                value.setflags(write=False)

    @property
    def h(self) -> float:
        return float(self.meta.get('h', self.t[1] - self.t[0]))

    @property
    def omega_a(self) -> np.ndarray:
        return np.hstack([self.delta_eta, self.omega, self.f_r])

    @property
    def held(self) -> FrozenSet[str]:
        """Signals held constant over each integration step."""
        return frozenset(self.meta.get('held', ()))


def _check_dimensions(p: ValidatedPlant, specs: SimulationSpecs) -> None:
    d = p.dims
    expected = {'u': d.l, 'fault': d.n_f, 'omega': d.n_omega, 'nu': d.m_nu}
    mismatched = [name for name, spec in specs.items() if spec.dimension != expected[name]]
    if mismatched:
        raise DimensionMismatch(
            mismatched,
            ', '.join(f'signal {n} has dimension {getattr(specs, n).dimension}, expected {expected[n]}' for n in mismatched)
        )


def resolve_noise_amplitude(
        plant: ValidatedPlant,
        fr: FilterRealization,
        specs: SimulationSpecs,
        x0: np.ndarray,
        T: float = DEFAULT_HORIZON,
        h: float = DEFAULT_STEP,
        eta_true: Optional[EtaFn] = None) -> List[float]:
    """
    Absolute noise amplitude from a relative one: `specs.nu.amplitude` times the per-channel peak of |y| on the
    noise-free run. Channels that do not map one-to-one onto outputs use the overall peak.
    """
    clean = simulate(plant, eta_true, fr, replace(specs, nu=SignalSpec(dimension=specs.nu.dimension)), x0, 'zero', T, h)
    peaks = np.max(np.abs(clean.y), axis=0)
    d = plant.dims
    if d.m_nu != d.m:
        peaks = np.full(d.m_nu, float(np.max(peaks, initial=0.)))
    amplitude = specs.nu.amplitudes() * peaks
    logger.info(f'Resolved relative noise {specs.nu.amplitude} against output peaks {peaks.round(6).tolist()}: {amplitude.tolist()}')
    return amplitude.tolist()


def simulate(
        plant: ValidatedPlant,
        eta_true: Optional[EtaFn],
        fr: FilterRealization,
        specs: SimulationSpecs,
        x0: Union[np.ndarray, List[float]],
        z0: InitialFilterState = 'zero',
        T: float = DEFAULT_HORIZON,
        h: float = DEFAULT_STEP,
        meta: Optional[Dict[str, Any]] = None) -> SimulationTrace:
    """
    Co-simulate the plant (driven by the true uncertainty `eta_true`, default the plant's own) and the filter.

    z0 is a vector, 'zero' or 'matched' (M x_a(0) + E D_nu nu(0), i.e. zero initial estimation error). Signals
    that are not differentiable are held at their step-start value for every RK4 stage of the step.
    """
    p = validate_plant(plant)
    pm, d = p.plant, p.dims
    aug = fr.aug
    r = aug.dims.r
    _check_dimensions(p, specs)
    if not specs.fault.differentiable:
        raise InvalidSignal(f'The fault must be {r} times differentiable, got a {specs.fault.kind} signal')

    noise_amplitude = None
    if specs.nu.relative and specs.nu.kind != 'zero':
        noise_amplitude = resolve_noise_amplitude(p, fr, specs, np.asarray(x0, dtype=float), T, h, eta_true)
        specs = replace(specs, nu=specs.nu.with_amplitude(noise_amplitude))

    signals = {name: realize(spec, T, h) for name, spec in specs.items()}
    held = frozenset(name for name, s in signals.items() if not s.differentiable)
    latch = {'t': 0.}

    def sample(name: str, t: float) -> np.ndarray:
        return signals[name].value(latch['t'] if name in held else t)

    eta_fn = eta_true if eta_true is not None else pm.eta

    def eta(x: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
        if eta_fn is None or d.n_eta == 0:
            return np.zeros(d.n_eta)
        return np.asarray(eta_fn(pm.V_eta @ x, u, t), dtype=float)

    n = d.n

    def rhs(t: float, s: np.ndarray) -> np.ndarray:
        x, z = s[:n], s[n:]
        u, f, w, nu = (sample(name, t) for name in ('u', 'fault', 'omega', 'nu'))
        dx = pm.A @ x + pm.B_u @ u + pm.S_eta @ eta(x, u, t) + pm.B_f @ f + pm.B_omega @ w
        if d.n_g:
            dx = dx + pm.S_g @ pm.g(pm.V_g @ x, u, t)
        y = pm.C @ x + pm.D_f @ f + pm.D_nu @ nu
        dz = filter_rhs(fr, z, aug.build_u_a(u, y, t), y, t)
        return np.concatenate([dx, dz])

    def chain(t: float) -> np.ndarray:
        return aug.fault_chain([signals['fault'].derivative(t, k) for k in range(r)])

    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n, ):
        raise DimensionMismatch(['x0'], f'x0 has shape {x0.shape}, expected ({n},)')
    x_a0 = aug.x_a(x0, chain(0.))
    if isinstance(z0, str):
        if z0 == 'zero':
            z0_vec = np.zeros(aug.dims.n_z)
        elif z0 == 'matched':
            z0_vec = matched_filter_state(fr, x_a0, signals['nu'].value(0.))
        else:
            raise ValueError(f"z0 must be a vector, 'zero' or 'matched', got {z0!r}")
    else:
        z0_vec = np.asarray(z0, dtype=float)
        if z0_vec.shape != (aug.dims.n_z, ):
            raise DimensionMismatch(['z0'], f'z0 has shape {z0_vec.shape}, expected ({aug.dims.n_z},)')

    def before_step(k: int, tk: float) -> None:
        latch['t'] = tk
        if k % 1000 == 0:
            intermittent_log(logger, f'Simulating {pm.name!r}: t={tk:.2f}/{T:g}', frequency=10, caller_extra_id=pm.name)

    t, states = integrate_rk4(rhs, np.concatenate([x0, z0_vec]), 0., T, h, before_step=before_step)

    rows: Dict[str, List[np.ndarray]] = {name: [] for name in TRACE_ARRAYS[1:]}
    nu_dot: Optional[List[np.ndarray]] = [] if 'nu' not in held else None
    for tk, s in zip(t, states):
        latch['t'] = tk
        x, z = s[:n], s[n:]
        u, f, w, nu = (sample(name, tk) for name in ('u', 'fault', 'omega', 'nu'))
        y = pm.C @ x + pm.D_f @ f + pm.D_nu @ nu
        x_a = aug.x_a(x, chain(tk))
        x_hat = fr.x_hat(z, y)
        e = x_hat - x_a
        if d.n_eta:
            delta_eta = eta(x, u, tk) - aug.model_eta(x, y, u, tk)
        else:
            delta_eta = np.zeros(0)
        for name, value in (
                ('x', x), ('x_a', x_a), ('z', z), ('x_hat', x_hat), ('y', y), ('u', u), ('f', f),
                ('f_hat', extract_fault(fr, z, y)), ('e', e), ('e_f', aug.C_bar @ e), ('omega', w), ('nu', nu),
                ('delta_eta', delta_eta), ('f_r', signals['fault'].derivative(tk, r))):
            rows[name].append(value)
        if nu_dot is not None:
            nu_dot.append(signals['nu'].derivative(tk, 1))

    def stack(values: List[np.ndarray], width: int) -> np.ndarray:
        return np.array(values, dtype=float).reshape(len(t), width)

    widths = {
        'x': n, 'x_a': aug.dims.n_z, 'z': aug.dims.n_z, 'x_hat': aug.dims.n_z, 'y': d.m, 'u': d.l, 'f': d.n_f,
        'f_hat': d.n_f, 'e': aug.dims.n_z, 'e_f': d.n_f, 'omega': d.n_omega, 'nu': d.m_nu, 'delta_eta': d.n_eta,
        'f_r': d.n_f,
    }
    trace_meta = {
        'h': h,
        'T': T,
        'steps': len(t) - 1,
        'plant': pm.name,
        'kind': aug.kind,
        'r': r,
        'z0': z0 if isinstance(z0, str) else 'given',
        'held': sorted(held),
        'seeds': {name: spec.seed for name, spec in specs.items() if spec.random},
        'specs': typedload.dump(specs),
        'noise_amplitude': noise_amplitude,
        **(meta or {}),
    }
    trace = SimulationTrace(
        t=t,
        **{name: stack(values, widths[name]) for name, values in rows.items()},
        nu_dot=stack(nu_dot, d.m_nu) if nu_dot is not None else None,
        meta=trace_meta,
    )
    logger.debug(f'Simulated {len(t) - 1} steps of h={h}: peak |e_f|={np.max(np.abs(trace.e_f), initial=0.):.4g}')
    return trace


def run_ensemble(
        plant: ValidatedPlant,
        eta_true: Optional[EtaFn],
        fr: FilterRealization,
        specs: SimulationSpecs,
        seeds: Sequence[int],
        x0: Union[np.ndarray, List[float]],
        z0: InitialFilterState = 'zero',
        T: float = DEFAULT_HORIZON,
        h: float = DEFAULT_STEP,
        workers: int = 1,
        progress: bool = True) -> List[SimulationTrace]:
    """One simulation per seed, random signals reseeded; traces are returned in seed order."""

    def run(seed: int) -> SimulationTrace:
        return simulate(plant, eta_true, fr, specs.reseeded(seed), x0, z0, T, h, meta={'ensemble_seed': seed})

    bar = tqdm(total=len(seeds), desc='ensemble', disable=not progress)
    traces = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for trace in pool.map(run, seeds):
                traces.append(trace)
                bar.update()
    else:
        for seed in seeds:
            traces.append(run(seed))
            bar.update()
    bar.close()
    return traces
