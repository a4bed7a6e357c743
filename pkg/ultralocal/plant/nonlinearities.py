"""
Registry of named nonlinearities.

Plants reference nonlinearities as ``{"name": ..., "params": {...}}``; the registry turns that into a callable
``fn(v, u, t)`` (v being the projected state) together with a Lipschitz constant in v. Nothing is ever
deserialized as code.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List

import numpy as np

from ultralocal.plant.invalid_plant import InvalidLipschitzConstant, UnknownNonlinearity

logger = logging.getLogger(__name__)

NonlinearFn = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class Nonlinearity:
    name: str
    params: Dict[str, Any]
    fn: NonlinearFn = field(repr=False, compare=False)
    lipschitz: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.lipschitz) or self.lipschitz < 0:
            raise InvalidLipschitzConstant(f'Nonlinearity {self.name!r} has invalid Lipschitz constant {self.lipschitz}')

    def __call__(self, v: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.fn(v, u, t), dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        return {'name': self.name, 'params': dict(self.params)}


_REGISTRY: Dict[str, Callable[..., Nonlinearity]] = {}


def register_nonlinearity(*names: str) -> Callable[[Callable[..., Nonlinearity]], Callable[..., Nonlinearity]]:
    def wrap(factory: Callable[..., Nonlinearity]) -> Callable[..., Nonlinearity]:
        for name in names:
            if name in _REGISTRY:
                raise ValueError(f'Nonlinearity {name!r} registered twice')
            _REGISTRY[name] = factory
        return factory
    return wrap


def registered_nonlinearities() -> List[str]:
    return sorted(_REGISTRY)


def make_nonlinearity(name: str, params: Dict[str, Any] = None) -> Nonlinearity:
    params = dict(params or {})
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise UnknownNonlinearity(f'Unknown nonlinearity {name!r}, expected one of {registered_nonlinearities()}')
    try:
        return factory(name, **params)
    except TypeError as e:
        raise UnknownNonlinearity(f'Bad parameters for nonlinearity {name!r}: {e}') from e


@register_nonlinearity('zero')
def _zero(name: str, dimension: int = 1) -> Nonlinearity:
    out = np.zeros(int(dimension))
    return Nonlinearity(name, {'dimension': int(dimension)}, lambda v, u, t: out.copy(), 0.)


@register_nonlinearity('sin', 'sin-of-x4')
def _sin(name: str, gain: float = 1.) -> Nonlinearity:
    gain = float(gain)
    return Nonlinearity(name, {'gain': gain}, lambda v, u, t: gain * np.sin(v), abs(gain))


@register_nonlinearity('tanh')
def _tanh(name: str, gain: float = 1.) -> Nonlinearity:
    gain = float(gain)
    return Nonlinearity(name, {'gain': gain}, lambda v, u, t: gain * np.tanh(v), abs(gain))


@register_nonlinearity('linear')
def _linear(name: str, theta: List[List[float]]) -> Nonlinearity:
    matrix = np.atleast_2d(np.asarray(theta, dtype=float))
    return Nonlinearity(
        name,
        {'theta': matrix.tolist()},
        lambda v, u, t: matrix @ v,
        float(np.linalg.norm(matrix, 2)) if matrix.size else 0.
    )


@register_nonlinearity('elastic-joint-uncertainty', 'robot-arm-uncertainty')
def _elastic_joint(name: str, k_motor: float, k_link: float, c_link: float) -> Nonlinearity:
    """
    Stiffness/friction mismatch of an elastic joint, on v = (q_motor, q_link):
        eta = [k_motor (v2 - v1), k_link (v1 - v2) - c_link sin(v2)]

    The Jacobian is affine in cos(v2), so its spectral norm is maximised at cos(v2) = +-1.
    """
    k_motor, k_link, c_link = float(k_motor), float(k_link), float(c_link)

    def eta(v: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
        return np.array([
            k_motor * (v[1] - v[0]),
            k_link * (v[0] - v[1]) - c_link * np.sin(v[1]),
        ])

    lipschitz = max(
        np.linalg.norm(np.array([[-k_motor, k_motor], [k_link, -k_link - c_link * c]]), 2)
        for c in (-1., 1.)
    )
    return Nonlinearity(name, {'k_motor': k_motor, 'k_link': k_link, 'c_link': c_link}, eta, float(lipschitz))
