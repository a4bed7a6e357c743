"""
Exogenous signals: input u, fault f, disturbance omega and sensor noise nu.

A `SignalSpec` is plain configuration; `realize` turns it into a `Signal` over a horizon. Random signals draw their
whole table up front from their seed, so evaluation order never changes the values.
"""
import math
from dataclasses import dataclass, field, replace
from typing import List, Literal, Optional, Union

import numpy as np
from numpy.polynomial import polynomial

SignalKind = Literal['zero', 'constant', 'sinusoid', 'polynomial', 'piecewise-constant-uniform']
SIGNAL_KINDS = ('zero', 'constant', 'sinusoid', 'polynomial', 'piecewise-constant-uniform')


class InvalidSignal(ValueError):
    pass


@dataclass(frozen=True)
class SignalSpec:
    """
    zero
    constant                    amplitude
    sinusoid                    amplitude sin(frequency (t - delay)) for t >= delay, 0 before
    polynomial                  sum_k coefficients[k] (t - delay)^k for t >= delay, 0 before
    piecewise-constant-uniform  uniform on [-amplitude, amplitude], redrawn every `hold` time-units (default: the
                                integration step)

    `amplitude` is a scalar or one value per channel. With `relative`, the amplitude of noise is a fraction of the
    noise-free output peak, resolved by the harness.
    """
    kind: SignalKind = 'zero'
    dimension: int = 1
    amplitude: Union[float, List[float]] = 0.
    frequency: float = 0.
    delay: float = 0.
    coefficients: List[float] = field(default_factory=list)
    hold: Optional[float] = None
    seed: int = 0
    relative: bool = False

    def __post_init__(self) -> None:
        if self.kind not in SIGNAL_KINDS:
            raise InvalidSignal(f'Unknown signal kind {self.kind!r}, expected one of {SIGNAL_KINDS}')
        if self.dimension < 0:
            raise InvalidSignal(f'Signal dimension must be >= 0, got {self.dimension}')
        if isinstance(self.amplitude, list) and len(self.amplitude) not in (1, self.dimension):
            raise InvalidSignal(f'{len(self.amplitude)} amplitudes given for a {self.dimension}-channel signal')
        if self.hold is not None and self.hold <= 0:
            raise InvalidSignal(f'hold must be > 0, got {self.hold}')

    @property
    def random(self) -> bool:
        return self.kind == 'piecewise-constant-uniform'

    @property
    def differentiable(self) -> bool:
        return not self.random

    def amplitudes(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.amplitude, dtype=float), (self.dimension, )).copy()

    def with_seed(self, seed: int) -> 'SignalSpec':
        return replace(self, seed=seed)

    def with_amplitude(self, amplitude: Union[float, List[float]]) -> 'SignalSpec':
        return replace(self, amplitude=amplitude, relative=False)


class Signal:

    def __init__(self, spec: SignalSpec, horizon: float, step: float):
        self.spec = spec
        self.dimension = spec.dimension
        self.amplitude = spec.amplitudes()
        self.differentiable = spec.differentiable
        self._table: Optional[np.ndarray] = None
        if spec.random:
            self.hold = spec.hold or step
            n_holds = int(math.floor(horizon / self.hold + 1e-9)) + 2
            rng = np.random.default_rng(spec.seed)
            self._table = rng.uniform(-1., 1., size=(n_holds, self.dimension)) * self.amplitude

    def value(self, t: float) -> np.ndarray:
        spec = self.spec
        if spec.kind == 'zero':
            return np.zeros(self.dimension)
        if spec.kind == 'constant':
            return self.amplitude.copy()
        if spec.kind == 'piecewise-constant-uniform':
            index = min(max(int(math.floor(t / self.hold + 1e-9)), 0), len(self._table) - 1)
            return self._table[index].copy()
        tau = t - spec.delay
        if tau < 0:
            return np.zeros(self.dimension)
        if spec.kind == 'sinusoid':
            return self.amplitude * math.sin(spec.frequency * tau)
        return np.full(self.dimension, polynomial.polyval(tau, spec.coefficients) if spec.coefficients else 0.)

    def derivative(self, t: float, order: int) -> Optional[np.ndarray]:
        """d^order/dt^order of the signal, None for piecewise-constant signals."""
        if order == 0:
            return self.value(t)
        spec = self.spec
        if not self.differentiable:
            return None
        if spec.kind in ('zero', 'constant'):
            return np.zeros(self.dimension)
        tau = t - spec.delay
        if tau < 0:
            return np.zeros(self.dimension)
        if spec.kind == 'sinusoid':
            w = spec.frequency
            return self.amplitude * w ** order * math.sin(w * tau + order * math.pi / 2)
        coefficients = polynomial.polyder(spec.coefficients, order) if spec.coefficients else []
        return np.full(self.dimension, polynomial.polyval(tau, coefficients) if len(coefficients) else 0.)


def realize(spec: SignalSpec, horizon: float, step: float) -> Signal:
    return Signal(spec, horizon, step)
