"""
Sparse SDPA text format.

SDPA states the primal problem  min c^T x  s.t.  sum_i x_i F_i - F_0 >= 0;  for SdpData (max b^T y s.t.
C - sum_i y_i A_i >= 0) that is c = -b, F_0 = -C, F_i = -A_i. Entries are ``mat block i j value`` with 1-based
indices, upper triangle only.
"""
import logging
import re
from typing import List, Optional, Union

import numpy as np

from ultralocal.sdp.data import InvalidProblem, ProblemLike, SdpData, to_sdp_data

logger = logging.getLogger(__name__)

_SEPARATORS = re.compile(r'[,{}()]')
_LABEL = re.compile(r'^\*\s*block\s+(\d+):\s*(.+)$')


def write_sdpa(problem: Union[SdpData, ProblemLike], path: str, comment: Optional[str] = None) -> str:
    data = problem if isinstance(problem, SdpData) else to_sdp_data(problem)
    lines = [f'"{comment or "ultralocal export"}']
    lines += [f'* block {k + 1}: {label}' for k, label in enumerate(data.labels)]
    lines.append(f'{data.n_vars} = mDIM')
    lines.append(f'{len(data.C)} = nBLOCK')
    lines.append(' '.join(str(s) for s in data.block_sizes))
    lines.append(' '.join(f'{v:.17g}' for v in -data.b))

    for k, (C, A) in enumerate(zip(data.C, data.A)):
        rows, cols = np.triu_indices(C.shape[0])
        for mat, F in [(0, -C)] + [(i + 1, -A[i]) for i in range(data.n_vars)]:
            values = F[rows, cols]
            for i, j, v in zip(rows[values != 0], cols[values != 0], values[values != 0]):
                lines.append(f'{mat} {k + 1} {i + 1} {j + 1} {v:.17g}')

    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    logger.info(f'Wrote SDPA problem with {data.n_vars} variables and blocks {data.block_sizes} to {path}')
    return path


def read_sdpa(path: str) -> SdpData:
    with open(path) as f:
        raw = f.read().splitlines()

    labels = {}
    body: List[str] = []
    for line in raw:
        stripped = line.strip()
        if not body and (stripped.startswith('"') or stripped.startswith('*')):
            match = _LABEL.match(stripped)
            if match:
                labels[int(match.group(1)) - 1] = match.group(2).strip()
            continue
        if stripped:
            body.append(_SEPARATORS.sub(' ', stripped))
    if len(body) < 3:
        raise InvalidProblem(f'{path}: truncated SDPA header')

    try:
        m = int(body[0].split()[0])
        n_blocks = int(body[1].split()[0])
        block_struct = [int(float(v)) for v in body[2].split()[:n_blocks]]
        tokens = ' '.join(body[3:]).split()
        c = np.array([float(v) for v in tokens[:m]])
        entries = np.array([float(v) for v in tokens[m:]])
    except (ValueError, IndexError) as e:
        raise InvalidProblem(f'{path}: malformed SDPA file: {e}') from e
    if len(block_struct) != n_blocks or c.size != m or entries.size % 5:
        raise InvalidProblem(f'{path}: inconsistent SDPA header or entry list')

    sizes = [abs(s) for s in block_struct]
    F = [np.zeros((m + 1, s, s)) for s in sizes]
    for mat, blk, i, j, v in entries.reshape(-1, 5):
        mat, blk, i, j = int(mat), int(blk) - 1, int(i) - 1, int(j) - 1
        if not (0 <= mat <= m and 0 <= blk < n_blocks and 0 <= i < sizes[blk] and 0 <= j < sizes[blk]):
            raise InvalidProblem(f'{path}: entry ({mat}, {blk + 1}, {i + 1}, {j + 1}) out of range')
        if block_struct[blk] < 0 and i != j:
            raise InvalidProblem(f'{path}: off-diagonal entry in diagonal block {blk + 1}')
        F[blk][mat, i, j] = v
        F[blk][mat, j, i] = v

    data = SdpData(
        b=-c,
        C=[-Fk[0] for Fk in F],
        A=[-Fk[1:] for Fk in F],
        labels=[labels.get(k, f'block{k}') for k in range(n_blocks)],
    )
    logger.info(f'Read SDPA problem with {m} variables and blocks {sizes} from {path}')
    return data
