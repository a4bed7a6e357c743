import logging
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ultralocal.simulation.harness import SimulationTrace
from ultralocal.util.arrayops import rowwise_norm, uniform_grid

logger = logging.getLogger(__name__)

GainStatus = Literal['ok', 'undefined']
GainBasis = Literal['omega_a', 'nu+nu_dot', 'nu-only']

UNDEFINED_BELOW = 1e-12
ZERO_TOL = 1e-12


class NoiseNotZero(ValueError):
    pass


class DisturbanceNotZero(ValueError):
    pass


@dataclass(frozen=True)
class GainRatio:
    value: Optional[float]
    status: GainStatus
    basis: GainBasis

    @property
    def defined(self) -> bool:
        return self.status == 'ok'

    def __str__(self) -> str:
        return f'{self.value:.6g} ({self.basis})' if self.defined else f'undefined ({self.basis})'


def energy(t: np.ndarray, values: np.ndarray, held: bool = False) -> float:
    """Integral of |v|^2: trapezoidal for continuous signals, left rectangles for signals held over each step."""
    return float(cumulative_energy(t, values, held)[-1])


def cumulative_energy(t: np.ndarray, values: np.ndarray, held: bool = False) -> np.ndarray:
    sq = rowwise_norm(values) ** 2
    if held:
        return np.concatenate([[0.], np.cumsum(sq[:-1] * np.diff(t))])
    return cumulative_trapezoid(sq, t, initial=0.)


def cumulative_omega_a_energy(trace: SimulationTrace) -> np.ndarray:
    return (
        cumulative_energy(trace.t, trace.delta_eta)
        + cumulative_energy(trace.t, trace.omega, held='omega' in trace.held)
        + cumulative_energy(trace.t, trace.f_r)
    )


def _peak(values: np.ndarray) -> float:
    return float(np.max(np.abs(values), initial=0.))


def _check_grid(trace: SimulationTrace) -> None:
    if not uniform_grid(trace.t):
        raise ValueError('Trace time grid is not uniform')


def empirical_l2_gain(trace: SimulationTrace) -> GainRatio:
    """|e_f|_L2 / |omega_a|_L2 with omega_a = (delta_eta, omega, f^(r)); needs a noise-free trace."""
    _check_grid(trace)
    if _peak(trace.nu) > ZERO_TOL:
        raise NoiseNotZero(f'L2 gain needs nu = 0, trace has peak |nu| = {_peak(trace.nu):.3g}')
    denominator = np.sqrt(cumulative_omega_a_energy(trace)[-1])
    if denominator < UNDEFINED_BELOW:
        return GainRatio(None, 'undefined', 'omega_a')
    numerator = np.sqrt(energy(trace.t, trace.e_f))
    return GainRatio(float(numerator / denominator), 'ok', 'omega_a')


def empirical_energy_to_peak(trace: SimulationTrace) -> GainRatio:
    """
    sup_t |e_f(t)| / |(nu, nu')|_L2 on a disturbance-free trace. Without an analytic nu' (piecewise-constant noise)
    the denominator is |nu|_L2 and the basis says so.
    """
    _check_grid(trace)
    for name in ('delta_eta', 'omega', 'f_r'):
        if _peak(getattr(trace, name)) > ZERO_TOL:
            raise DisturbanceNotZero(f'Energy-to-peak gain needs {name} = 0, trace has peak {_peak(getattr(trace, name)):.3g}')
    held = 'nu' in trace.held
    noise_energy = energy(trace.t, trace.nu, held=held)
    if trace.nu_dot is not None:
        basis: GainBasis = 'nu+nu_dot'
        noise_energy += energy(trace.t, trace.nu_dot)
    else:
        basis = 'nu-only'
    denominator = np.sqrt(noise_energy)
    if denominator < UNDEFINED_BELOW:
        return GainRatio(None, 'undefined', basis)
    return GainRatio(float(np.max(rowwise_norm(trace.e_f)) / denominator), 'ok', basis)


def tracking_rms(trace: SimulationTrace, t_from: float = 0.) -> float:
    """RMS of |e_f| over t >= t_from."""
    mask = trace.t >= t_from
    if np.count_nonzero(mask) < 2:
        return float(rowwise_norm(trace.e_f[mask]).max(initial=0.))
    t = trace.t[mask]
    return float(np.sqrt(trapezoid(rowwise_norm(trace.e_f[mask]) ** 2, t) / (t[-1] - t[0])))


def peak_error(trace: SimulationTrace, t_from: float = 0.) -> float:
    return float(rowwise_norm(trace.e_f[trace.t >= t_from]).max(initial=0.))
