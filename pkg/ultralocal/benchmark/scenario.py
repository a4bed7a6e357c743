"""
End-to-end scenarios: augment, synthesize over the (a, b) grid, build the filter, simulate and check the
certificates along the simulated traces.
"""
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import tabulate

from ultralocal.augmentation import AugmentedSystem, augment
from ultralocal.benchmark.config import ScenarioConfig, ScenarioMode, config_hash, config_to_dict, output_directory
from ultralocal.benchmark.robot_arm import build_robot_arm, robot_arm_uncertainty
from ultralocal.estimator import (
    DesignRecord,
    FilterRealization,
    build_filter,
    certificate_matrices,
    make_design_record,
    nan_to_none,
    recover_gains,
    save_design,
)
from ultralocal.lmi import DesignMode, LineSearchResult, line_search
from ultralocal.plant import UncertaintyModel, ValidatedPlant, load_plant
from ultralocal.simulation import (
    DisturbanceNotZero,
    GainRatio,
    NoiseNotZero,
    SignalSpec,
    SimulationSpecs,
    SimulationTrace,
    empirical_energy_to_peak,
    empirical_l2_gain,
    lyapunov_spot_check,
    peak_error,
    run_ensemble,
    save_fault_csv,
    save_trace_csv,
    simulate,
    tracking_rms,
)
from ultralocal.util import round_floats, timed

logger = logging.getLogger(__name__)

# slack on the certificate comparisons, relative to the bound
BOUND_RTOL = 1e-6


class InvalidMode(ValueError):
    pass


def build_plant(cfg: ScenarioConfig) -> ValidatedPlant:
    if cfg.plant == 'robot-arm':
        return build_robot_arm(cfg.robot_arm)
    return load_plant(cfg.plant)


def build_uncertainty(cfg: ScenarioConfig) -> UncertaintyModel:
    doc = cfg.uncertainty
    given = any(v is not None for v in (doc.theta_x, doc.theta_y, doc.T_eta, doc.eta_lx))
    if cfg.plant == 'robot-arm' and not given:
        return robot_arm_uncertainty(doc.kind, cfg.robot_arm)  # type: ignore[arg-type]
    return doc.build()


def build_system(cfg: ScenarioConfig) -> Tuple[ValidatedPlant, AugmentedSystem]:
    plant = build_plant(cfg)
    aug = augment(plant, build_uncertainty(cfg), cfg.design.r)
    logger.info(f'Augmented {plant.name!r} ({aug.kind}, r={aug.dims.r}): n_z={aug.dims.n_z}, alpha={aug.alpha:.4g}')
    return plant, aug


def design_filter(
        cfg: ScenarioConfig,
        aug: AugmentedSystem,
        mode: DesignMode,
        sigma_max: float = math.inf) -> Tuple[LineSearchResult, FilterRealization, DesignRecord]:
    d = cfg.design
    result = line_search(
        aug,
        d.a_grid,
        d.b_grid,
        sigma_max=sigma_max if mode == 'tradeoff' else math.inf,
        eps=d.eps,
        mode=mode,
        linear_reduction=d.linear_reduction,
        settings=cfg.solver,
        workers=d.workers,
        progress=cfg.progress,
    )
    fr = build_filter(aug, *recover_gains(result.solution))
    return result, fr, make_design_record(aug, result, fr)


def resolve_sigma_max(
        cfg: ScenarioConfig,
        aug: AugmentedSystem,
        designs: Optional[Dict[str, Tuple[LineSearchResult, FilterRealization, DesignRecord]]] = None) -> float:
    """
    The configured sigma_max, or for "auto" the geometric mean of the sigma* of the l2 and l2linf designs (solved
    here and stored in `designs` when missing).
    """
    value = cfg.design.sigma_max
    if value is None:
        return math.inf
    if not isinstance(value, str):
        return float(value)
    designs = designs if designs is not None else {}
    for mode in ('l2', 'l2linf'):
        if mode not in designs:
            designs[mode] = design_filter(cfg, aug, mode)  # type: ignore[arg-type]
    sigma_l2, sigma_linf = designs['l2'][0].sigma, designs['l2linf'][0].sigma
    sigma_max = math.sqrt(sigma_l2 * sigma_linf)
    logger.info(f'Resolved sigma_max=auto to {sigma_max:.6g} from l2 sigma*={sigma_l2:.6g}, l2linf sigma*={sigma_linf:.6g}')
    return sigma_max


def l2_check_scale(record: DesignRecord) -> float:
    """The `a` the cumulative L2 inequality is taken with: 1 for the reduced form, which drops the a scaling."""
    return 1. if record.l2_form == 'linear-reduction' else record.certificate.a


def _ratio_report(compute: Any, trace: SimulationTrace, bound: float) -> Dict[str, Any]:
    try:
        ratio: GainRatio = compute(trace)
    except (NoiseNotZero, DisturbanceNotZero) as e:
        return {'status': 'not-applicable', 'reason': str(e)}
    report: Dict[str, Any] = {'status': ratio.status, 'basis': ratio.basis, 'value': ratio.value, 'bound': bound}
    if ratio.defined:
        report['holds'] = bool(ratio.value <= bound * (1 + BOUND_RTOL))
    return report


def verify_trace(trace: SimulationTrace, fr: FilterRealization, record: DesignRecord, label: str = 'trace') -> Dict[str, Any]:
    """Empirical ratios against the certified bounds and the Lyapunov spot-check, for one trace."""
    cert = certificate_matrices(record, fr.aug)
    spot = lyapunov_spot_check(
        trace,
        cert['P'],
        fr,
        record.alpha,
        R=cert['R'],
        Q=cert['Q'],
        J=cert['J'],
        rho=float(cert['rho']),
        a=l2_check_scale(record),
    )
    report = {
        'label': label,
        'seeds': trace.meta.get('seeds', {}),
        'l2': _ratio_report(empirical_l2_gain, trace, record.bounds['l2']),
        'energy_to_peak': _ratio_report(empirical_energy_to_peak, trace, record.bounds['peak_full']),
        'spot_check': {**asdict(spot), 'total_violations': spot.total_violations},
    }
    failed = [name for name in ('l2', 'energy_to_peak') if report[name].get('holds') is False]
    if failed or spot.total_violations:
        logger.warning(f'{label}: certificate checks failed ({failed}), {spot.total_violations} spot-check violations')
    return report


def certificate_failures(checks: List[Dict[str, Any]]) -> int:
    return sum(
        int(c['spot_check']['total_violations']) + sum(c[name].get('holds') is False for name in ('l2', 'energy_to_peak'))
        for c in checks
    )


def _zero(spec: SignalSpec) -> SignalSpec:
    return SignalSpec(dimension=spec.dimension)


def noise_free(specs: SimulationSpecs) -> SimulationSpecs:
    return replace(specs, nu=_zero(specs.nu))


def noise_only(specs: SimulationSpecs) -> SimulationSpecs:
    return replace(specs, fault=_zero(specs.fault), omega=_zero(specs.omega))


@dataclass(frozen=True)
@round_floats
class PerformanceRow:
    mode: str
    a: float
    b: float
    rho: float
    sigma: float
    l2_bound: float
    peak_bound: float
    noise_amplification: float
    tracking_rms: float
    peak_error: float


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    mode: DesignMode
    design: LineSearchResult = field(repr=False)
    filter: FilterRealization = field(repr=False)
    record: DesignRecord = field(repr=False)
    trace: SimulationTrace = field(repr=False)
    clean_trace: SimulationTrace = field(repr=False)
    summary: Dict[str, Any] = field(repr=False)
    output_dir: Optional[str] = None

    @property
    def performance(self) -> PerformanceRow:
        return PerformanceRow(mode=self.mode, **self.summary['performance'])


def evaluate_design(
        cfg: ScenarioConfig,
        plant: ValidatedPlant,
        fr: FilterRealization,
        record: DesignRecord,
        timings: Optional[Dict[str, float]] = None) -> Tuple[SimulationTrace, SimulationTrace, Dict[str, Any]]:
    """
    Simulate the configured scenario, its noise-free twin (same z0) and the certificate runs (z0 matched, one per
    ensemble seed), and collect the performance metrics and certificate checks.
    """
    timings = timings if timings is not None else {}
    s = cfg.simulation
    specs = cfg.signals.reseeded(s.seed)
    run = timed(timings, 'simulation')(simulate)
    meta = {'config_hash': config_hash(cfg), 'config': config_to_dict(cfg), 'design_mode': record.mode}

    trace = run(plant, None, fr, specs, s.x0, s.z0, s.T, s.h, meta={**meta, 'run': 'scenario'})
    clean = run(plant, None, fr, noise_free(specs), s.x0, s.z0, s.T, s.h, meta={**meta, 'run': 'noise-free'})
    steady = trace.t >= s.t_transient
    performance = {
        'a': record.certificate.a,
        'b': record.certificate.b,
        'rho': record.certificate.rho,
        'sigma': record.certificate.sigma,
        'l2_bound': record.bounds['l2'],
        'peak_bound': record.bounds['peak'],
        # the noise-induced part of e_f, identical inputs otherwise
        'noise_amplification': float(np.max(np.abs(trace.f_hat[steady] - clean.f_hat[steady]), initial=0.)),
        'tracking_rms': tracking_rms(clean, s.t_transient),
        'peak_error': peak_error(trace, s.t_transient),
    }

    seeds = [s.seed + k for k in range(s.ensemble + 1)]
    check = timed(timings, 'verification')(verify_trace)
    ensemble = timed(timings, 'simulation')(run_ensemble)
    checks = []
    for label, variant in (('l2', noise_free(cfg.signals)), ('energy-to-peak', noise_only(cfg.signals))):
        traces = ensemble(plant, None, fr, variant, seeds, s.x0, 'matched', s.T, s.h, workers=s.workers, progress=cfg.progress)
        checks.extend(check(t, fr, record, f'{label} seed={seed}') for seed, t in zip(seeds, traces))

    return trace, clean, {'performance': performance, 'certificate_checks': checks}


def _write_json(obj: Any, path: str) -> str:
    with open(path, 'w') as f:
        json.dump(nan_to_none(obj), f, indent=2, default=float)
    return path


def write_artifacts(
        out: str,
        record: DesignRecord,
        trace: SimulationTrace,
        summary: Dict[str, Any]) -> Dict[str, str]:
    artifacts = {
        'gains': save_design(record, os.path.join(out, 'gains.json')),
        'trace': save_trace_csv(trace, os.path.join(out, 'trace.csv')),
        'fault': save_fault_csv(trace, os.path.join(out, 'fault.csv')),
    }
    summary['artifacts'] = artifacts
    artifacts['summary'] = _write_json(summary, os.path.join(out, 'summary.json'))
    return artifacts


def _log_timings(timings: Dict[str, float]) -> None:
    logger.info(f'Stage timings:\n{tabulate.tabulate(sorted(timings.items()), headers=["stage", "seconds"], floatfmt=".3f")}')


def run_scenario(
        cfg: ScenarioConfig,
        mode: Optional[ScenarioMode] = None,
        out: Optional[str] = None,
        write: bool = True,
        sigma_max: Optional[float] = None,
        design: Optional[Tuple[LineSearchResult, FilterRealization, DesignRecord]] = None) -> ScenarioResult:
    """
    Design (or reuse `design`), simulate and verify one mode. Writes gains.json, trace.csv (+ sidecar), fault.csv
    and summary.json to `out` (default: the configured output directory or a fresh run key) when `write` is set.
    """
    mode = mode or cfg.design.mode
    if mode == 'all':
        raise InvalidMode('run_scenario runs a single mode; use compare_modes for all of them')
    timings: Dict[str, float] = {}

    plant, aug = timed(timings, 'augmentation')(build_system)(cfg)
    if design is None:
        if mode == 'tradeoff' and sigma_max is None:
            sigma_max = timed(timings, 'synthesis')(resolve_sigma_max)(cfg, aug)
        design = timed(timings, 'synthesis')(design_filter)(cfg, aug, mode, sigma_max if sigma_max is not None else math.inf)
    result, fr, record = design

    trace, clean, evaluation = evaluate_design(cfg, plant, fr, record, timings)
    failures = certificate_failures(evaluation['certificate_checks'])
    summary: Dict[str, Any] = {
        'name': cfg.name,
        'mode': mode,
        'config_hash': config_hash(cfg),
        'seeds': trace.meta['seeds'],
        'kind': aug.kind,
        'r': aug.dims.r,
        'alpha': aug.alpha,
        'a': result.a,
        'b': result.b,
        'rho': result.rho,
        'sigma': result.sigma,
        'sigma_max': record.sigma_max,
        'bounds': dict(record.bounds),
        'l2_form': record.l2_form,
        'l2linf_form': record.l2linf_form,
        'feasibility_table': record.table,
        'identity_residuals': fr.identity_residuals(),
        **evaluation,
        'violations': failures,
        'timings': timings,
    }
    _log_timings(timings)
    logger.info(
        f'{mode}: rho*={result.rho:.6g} sigma*={result.sigma:.6g}, '
        f'noise amplification={summary["performance"]["noise_amplification"]:.4g}, '
        f'tracking rms={summary["performance"]["tracking_rms"]:.4g}, {failures} certificate failures'
    )

    output_dir = None
    if write:
        output_dir = out or output_directory(cfg)
        os.makedirs(output_dir, exist_ok=True)
        write_artifacts(output_dir, record, trace, summary)
        logger.info(f'Wrote {mode} scenario to {output_dir}')

    return ScenarioResult(cfg, mode, result, fr, record, trace, clean, summary, output_dir)


@dataclass
class ModeComparison:
    sigma_max: float
    results: Dict[str, ScenarioResult] = field(repr=False)
    output_dir: Optional[str] = None

    @property
    def rows(self) -> List[PerformanceRow]:
        return [r.performance for r in self.results.values()]

    def format_table(self) -> str:
        return tabulate.tabulate([asdict(r) for r in self.rows], headers='keys')


def compare_modes(cfg: ScenarioConfig, out: Optional[str] = None, write: bool = True) -> ModeComparison:
    """
    Run l2, l2linf and tradeoff on the same signals and seeds. The tradeoff sigma_max comes from the config ("auto":
    between the other two designs).
    """
    output_dir = (out or output_directory(cfg)) if write else None
    _, aug = build_system(cfg)
    designs: Dict[str, Tuple[LineSearchResult, FilterRealization, DesignRecord]] = {}
    if cfg.design.sigma_max == 'auto':
        sigma_max = resolve_sigma_max(cfg, aug, designs)
    else:
        sigma_max = resolve_sigma_max(cfg, aug)

    results = {}
    for mode in ('l2', 'l2linf', 'tradeoff'):
        results[mode] = run_scenario(
            cfg,
            mode,  # type: ignore[arg-type]
            out=os.path.join(output_dir, mode) if output_dir else None,
            write=write,
            sigma_max=sigma_max,
            design=designs.get(mode),
        )

    comparison = ModeComparison(sigma_max, results, output_dir)
    logger.info(f'Mode comparison (sigma_max={sigma_max:.6g}):\n{comparison.format_table()}')
    if output_dir:
        _write_json(
            {
                'config_hash': config_hash(cfg),
                'sigma_max': sigma_max,
                'modes': [asdict(r) for r in comparison.rows],
                'violations': {mode: r.summary['violations'] for mode, r in results.items()},
            },
            os.path.join(output_dir, 'comparison.json'),
        )
    return comparison
