import logging
from typing import Mapping, Tuple, Union

import numpy as np
import scipy.linalg

from ultralocal.sdp.solution import SdpSolution

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12


class IllConditioned(RuntimeError):
    pass


def recover_gains(sol: Union[SdpSolution, Mapping[str, np.ndarray]]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """E = P^-1 R and K = P^-1 Q by Cholesky solves; J is passed through."""
    if isinstance(sol, SdpSolution) and not sol.optimal:
        raise ValueError(f'Gains can only be recovered from an optimal solution, got status {sol.status}')
    P, R, Q = (np.asarray(sol[name], dtype=float) for name in ('P', 'R', 'Q'))
    J = np.array(sol['J'], dtype=float)

    cond = float(np.linalg.cond(P))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise IllConditioned(f'cond(P) = {cond:.3g} exceeds {COND_LIMIT:.0e}')
    try:
        factor = scipy.linalg.cho_factor(P)
    except np.linalg.LinAlgError as e:
        raise IllConditioned(f'P is not positive definite: {e}') from e

    E = scipy.linalg.cho_solve(factor, R)
    K = scipy.linalg.cho_solve(factor, Q)
    logger.info(f'Recovered gains with cond(P)={cond:.3g}: |E|={np.linalg.norm(E):.4g} |K|={np.linalg.norm(K):.4g} |J|={np.linalg.norm(J):.4g}')
    return E, K, J
