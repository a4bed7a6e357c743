"""
Trace CSV files.

Line 1 is a ``#`` comment giving the column groups in order, line 2 the column header, then one row per grid point
written with ``%.17g``. The metadata goes to a JSON sidecar ``<path>.meta.json``.
"""
import json
import logging
from typing import Any, Dict, List, Tuple

import numpy as np

from ultralocal.simulation.harness import TRACE_ARRAYS, SimulationTrace

logger = logging.getLogger(__name__)


def _groups(trace: SimulationTrace) -> List[Tuple[str, int]]:
    groups = [('t', 1)] + [(name, getattr(trace, name).shape[1]) for name in TRACE_ARRAYS[1:]]
    if trace.nu_dot is not None:
        groups.append(('nu_dot', trace.nu_dot.shape[1]))
    return groups


def _column_names(groups: List[Tuple[str, int]]) -> List[str]:
    return [name if name == 't' else f'{name}_{i + 1}' for name, width in groups for i in range(width)]


def meta_path(path: str) -> str:
    return f'{path}.meta.json'


def save_trace_csv(trace: SimulationTrace, path: str) -> str:
    groups = _groups(trace)
    data = np.hstack([trace.t[:, None]] + [getattr(trace, name) for name, _ in groups[1:]])
    with open(path, 'w') as f:
        f.write('# columns: ' + ', '.join(f'{name}[{width}]' for name, width in groups) + '\n')
        f.write(','.join(_column_names(groups)) + '\n')
        np.savetxt(f, data, delimiter=',', fmt='%.17g')

    with open(meta_path(path), 'w') as f:
        json.dump({'groups': [[name, width] for name, width in groups], 'meta': trace.meta}, f, indent=2, default=str)
    logger.info(f'Wrote trace of {len(trace.t)} rows x {data.shape[1]} columns to {path}')
    return path


def load_trace_csv(path: str) -> SimulationTrace:
    with open(meta_path(path)) as f:
        sidecar = json.load(f)
    groups: List[Tuple[str, int]] = [(name, int(width)) for name, width in sidecar['groups']]
    data = np.loadtxt(path, delimiter=',', skiprows=2, ndmin=2)
    expected = sum(width for _, width in groups)
    if data.shape[1] != expected:
        raise ValueError(f'{path} has {data.shape[1]} columns, its sidecar describes {expected}')

    arrays: Dict[str, Any] = {}
    offset = 0
    for name, width in groups:
        arrays[name] = data[:, offset:offset + width]
        offset += width
    arrays['t'] = arrays['t'][:, 0]
    arrays.setdefault('nu_dot', None)
    return SimulationTrace(**arrays, meta=sidecar['meta'])


def save_fault_csv(trace: SimulationTrace, path: str) -> str:
    """Plot-ready t, f, f_hat columns."""
    n_f = trace.f.shape[1]
    header = ['t'] + [f'f_{i + 1}' for i in range(n_f)] + [f'f_hat_{i + 1}' for i in range(n_f)]
    np.savetxt(
        path,
        np.hstack([trace.t[:, None], trace.f, trace.f_hat]),
        delimiter=',',
        fmt='%.17g',
        header=','.join(header),
        comments='',
    )
    logger.info(f'Wrote fault estimate of {len(trace.t)} rows to {path}')
    return path
