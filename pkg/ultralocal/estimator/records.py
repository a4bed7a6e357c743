"""
JSON design records: everything needed to rebuild and re-verify a designed filter without re-solving the SDP.

The augmented system itself is rebuilt from the configuration; the record keeps its matrices only to detect a
mismatch.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import typedload

from ultralocal.augmentation import AugmentedSystem
from ultralocal.estimator.filter import FilterRealization
from ultralocal.lmi.line_search import LineSearchResult

logger = logging.getLogger(__name__)

Matrix = List[List[float]]

AUGMENTED_NAMES = ('A_a', 'B_ua', 'S_ga', 'V_ga', 'B_omega_a', 'C_a', 'C_bar', 'D_nu')
MISMATCH_RTOL = 1e-9


class DesignMismatch(ValueError):
    pass


@dataclass
class Certificate:
    P: Matrix
    R: Matrix
    Q: Matrix
    J: Matrix
    rho: float
    sigma: float
    a: float
    b: float
    eps: float


@dataclass
class DesignRecord:
    mode: str
    status: str
    kind: str
    r: int
    alpha: float
    l2_form: str
    l2linf_form: str
    augmented: Dict[str, Matrix]
    gains: Dict[str, Matrix]
    filter: Dict[str, Matrix]
    certificate: Certificate
    bounds: Dict[str, float]
    # None stands for an inactive (infinite) bound
    sigma_max: Optional[float] = None
    plant: str = 'plant'
    table: List[Dict[str, Any]] = field(default_factory=list)
    version: int = 1


def _shapes(aug: AugmentedSystem) -> Dict[str, tuple]:
    d = aug.dims
    return {
        'E': (d.n_z, d.m), 'K': (d.n_z, d.m), 'J': (d.n_vga, d.m),
        'N': (d.n_z, d.n_z), 'G': (d.n_z, d.l_a), 'L': (d.n_z, d.m), 'M': (d.n_z, d.n_z),
        'P': (d.n_z, d.n_z), 'R': (d.n_z, d.m), 'Q': (d.n_z, d.m),
        **{name: getattr(aug, name).shape for name in AUGMENTED_NAMES},
    }


def _matrix(value: Matrix, shape: tuple) -> np.ndarray:
    # 0-row matrices serialise as [] and lose their column count
    return np.array(value, dtype=float).reshape(shape)


def make_design_record(aug: AugmentedSystem, result: LineSearchResult, fr: FilterRealization) -> DesignRecord:
    sol, params = result.solution, result.problem.params
    bounds = result.bounds
    return DesignRecord(
        mode=result.mode,
        status=sol.status,
        kind=aug.kind,
        r=aug.dims.r,
        alpha=aug.alpha,
        l2_form=result.problem.l2_form,
        l2linf_form=result.problem.l2linf_form,
        augmented={name: getattr(aug, name).tolist() for name in AUGMENTED_NAMES},
        gains={name: getattr(fr, name).tolist() for name in ('E', 'K', 'J')},
        filter={name: getattr(fr, name).tolist() for name in ('N', 'G', 'L', 'M')},
        certificate=Certificate(
            P=sol['P'].tolist(),
            R=sol['R'].tolist(),
            Q=sol['Q'].tolist(),
            J=sol['J'].tolist(),
            rho=float(sol['rho']),
            sigma=float(sol['sigma']),
            a=params.a,
            b=params.b,
            eps=params.eps,
        ),
        bounds={'l2': bounds.l2, 'peak': bounds.peak, 'peak_full': bounds.peak_full},
        sigma_max=params.sigma_max if math.isfinite(params.sigma_max) else None,
        plant=aug.plant.name,
        table=[
            {'a': e.a, 'b': e.b, 'status': e.status, 'rho': e.rho, 'sigma': e.sigma, 'iterations': e.iterations}
            for e in result.table
        ],
    )


def save_design(record: DesignRecord, path: str) -> str:
    with open(path, 'w') as f:
        # NaN entries of infeasible grid points are written as null
        json.dump(nan_to_none(typedload.dump(record)), f, indent=2)
    logger.info(f'Saved {record.mode} design to {path}')
    return path


def nan_to_none(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: nan_to_none(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [nan_to_none(v) for v in obj]
    return obj


def load_design(path: str) -> DesignRecord:
    with open(path) as f:
        record = typedload.load(json.load(f), DesignRecord)
    logger.info(f'Loaded {record.mode} design of {record.plant!r} from {path}')
    return record


def certificate_matrices(record: DesignRecord, aug: AugmentedSystem) -> Dict[str, np.ndarray]:
    shapes = _shapes(aug)
    cert = record.certificate
    return {
        'P': _matrix(cert.P, shapes['P']),
        'R': _matrix(cert.R, shapes['R']),
        'Q': _matrix(cert.Q, shapes['Q']),
        'J': _matrix(cert.J, shapes['J']),
        'rho': np.array(cert.rho),
        'sigma': np.array(cert.sigma),
    }


def filter_from_design(record: DesignRecord, aug: AugmentedSystem) -> FilterRealization:
    """Rebuild the filter against `aug`, which must match the augmented system the design was made for."""
    shapes = _shapes(aug)
    for name in AUGMENTED_NAMES:
        stored = record.augmented.get(name)
        if stored is None:
            raise DesignMismatch(f'Design record has no {name}')
        stored_matrix = np.array(stored, dtype=float)
        if stored_matrix.size != int(np.prod(shapes[name])):
            raise DesignMismatch(f'{name} of the design has {stored_matrix.size} entries, augmented system has shape {shapes[name]}')
        current = getattr(aug, name)
        if np.linalg.norm(stored_matrix.reshape(shapes[name]) - current) > MISMATCH_RTOL * max(1., np.linalg.norm(current)):
            raise DesignMismatch(f'{name} of the design differs from the augmented system it is loaded against')

    fr = FilterRealization(
        aug,
        *(_matrix(record.gains[name], shapes[name]) for name in ('E', 'K', 'J')),
        **{name: _matrix(record.filter[name], shapes[name]) for name in ('N', 'G', 'L', 'M')},
    )
    logger.info(f'Rebuilt filter from {record.mode} design, identities re-checked')
    return fr
