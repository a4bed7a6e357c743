import logging
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Union

import numpy as np

from ultralocal.plant.invalid_plant import DimensionMismatch, InvalidLipschitzConstant, SensorFaultRankViolation
from ultralocal.plant.nonlinearities import Nonlinearity

logger = logging.getLogger(__name__)

MATRIX_NAMES = ('A', 'B_u', 'S_g', 'V_g', 'S_eta', 'V_eta', 'B_f', 'B_omega', 'C', 'D_f', 'D_nu')

RANK_RTOL = 1e-9


def as_matrix(value: Union[np.ndarray, List[List[float]], float], name: str = '?') -> np.ndarray:
    """Read-only 2d float array. Empty lists give a 0x0 matrix."""
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        if arr.size == 0:
            arr = arr.reshape(0, 0)
        else:
            raise DimensionMismatch([name], f'expected a 2d matrix, got a vector of length {arr.size}')
    elif arr.ndim != 2:
        raise DimensionMismatch([name], f'expected a 2d matrix, got {arr.ndim} dimensions')
    arr.setflags(write=False)
    return arr


def numerical_rank(matrix: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if not matrix.size:
        return 0
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    if singular_values[0] == 0:
        return 0
    return int(np.sum(singular_values > rtol * singular_values[0]))


@dataclass(frozen=True)
class PlantModel:
    """
    Uncertain Lipschitz-nonlinear plant

        x' = A x + B_u u + S_g g(V_g x, u, t) + S_eta eta(V_eta x, u, t) + B_f f + B_omega omega
        y  = C x + D_f f + D_nu nu

    `g` is the known nonlinearity. `eta` is the true uncertainty; it is only ever used to simulate the plant, design
    works from an UncertaintyModel approximation of it.
    """
    A: np.ndarray
    B_u: np.ndarray
    S_g: np.ndarray
    V_g: np.ndarray
    S_eta: np.ndarray
    V_eta: np.ndarray
    B_f: np.ndarray
    B_omega: np.ndarray
    C: np.ndarray
    D_f: np.ndarray
    D_nu: np.ndarray
    g: Nonlinearity = field(compare=False)
    eta: Optional[Nonlinearity] = field(default=None, compare=False)
    alpha_g_override: Optional[float] = None
    name: str = 'plant'

    def __post_init__(self) -> None:
        for name in MATRIX_NAMES:
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))

    @property
    def alpha_g(self) -> float:
        if self.alpha_g_override is not None:
            return float(self.alpha_g_override)
        return self.g.lipschitz


@dataclass(frozen=True)
class PlantDimensions:
    n: int
    m: int
    l: int
    n_g: int
    n_vg: int
    n_eta: int
    n_veta: int
    n_f: int
    n_omega: int
    m_nu: int

    def as_dict(self) -> Dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class ValidatedPlant:
    plant: PlantModel
    dims: PlantDimensions

    @property
    def name(self) -> str:
        return self.plant.name

    @property
    def alpha_g(self) -> float:
        return self.plant.alpha_g


def _expected_shapes(p: PlantModel) -> PlantDimensions:
    n = p.A.shape[0]
    return PlantDimensions(
        n=n,
        m=p.C.shape[0],
        l=p.B_u.shape[1],
        n_g=p.S_g.shape[1],
        n_vg=p.V_g.shape[0],
        n_eta=p.S_eta.shape[1],
        n_veta=p.V_eta.shape[0],
        n_f=p.B_f.shape[1],
        n_omega=p.B_omega.shape[1],
        m_nu=p.D_nu.shape[1],
    )


def validate_plant(p: Union[PlantModel, ValidatedPlant]) -> ValidatedPlant:
    """
    Check every shape against the dimension ledger derived from (A, C, B_u, S_g, V_g, S_eta, V_eta, B_f, B_omega, D_nu),
    the Lipschitz constant, and the sensor-fault rank condition rank(D_f) < m.
    """
    if isinstance(p, ValidatedPlant):
        return p

    dims = _expected_shapes(p)
    n, m = dims.n, dims.m
    expected = {
        'A': (n, n),
        'B_u': (n, dims.l),
        'S_g': (n, dims.n_g),
        'V_g': (dims.n_vg, n),
        'S_eta': (n, dims.n_eta),
        'V_eta': (dims.n_veta, n),
        'B_f': (n, dims.n_f),
        'B_omega': (n, dims.n_omega),
        'C': (m, n),
        'D_f': (m, dims.n_f),
        'D_nu': (m, dims.m_nu),
    }
    # empty matrices (e.g. no nonlinearity) are given their ledger shape
    empties = {
        name: np.zeros(shape) for name, shape in expected.items()
        if getattr(p, name).size == 0 and 0 in shape and getattr(p, name).shape != shape
    }
    if empties:
        p = replace(p, **empties)
    mismatched = [name for name, shape in expected.items() if getattr(p, name).shape != shape]
    if mismatched:
        raise DimensionMismatch(
            mismatched,
            ', '.join(f'{name} is {getattr(p, name).shape}, expected {expected[name]}' for name in mismatched)
        )
    if dims.n_f < 1:
        raise DimensionMismatch(['B_f'], 'at least one fault channel is required')

    if not np.isfinite(p.alpha_g) or p.alpha_g < 0:
        raise InvalidLipschitzConstant(f'alpha_g must be finite and >= 0, got {p.alpha_g}')

    probe_u = np.zeros(dims.l)
    g_out = p.g(np.zeros(dims.n_vg), probe_u, 0.)
    if g_out.shape != (dims.n_g, ):
        raise DimensionMismatch(['g'], f'g returns {g_out.shape}, expected ({dims.n_g},)')
    if p.eta is not None:
        eta_out = p.eta(np.zeros(dims.n_veta), probe_u, 0.)
        if eta_out.shape != (dims.n_eta, ):
            raise DimensionMismatch(['eta'], f'eta returns {eta_out.shape}, expected ({dims.n_eta},)')

    rank = numerical_rank(p.D_f)
    if rank >= m:
        raise SensorFaultRankViolation(
            f'rank(D_f)={rank} must be < m={m}: every output direction is corrupted by a sensor fault'
        )

    logger.debug(f'Validated plant {p.name!r}: {dims.as_dict()}, rank(D_f)={rank}, alpha_g={p.alpha_g}')
    return ValidatedPlant(p, dims)
