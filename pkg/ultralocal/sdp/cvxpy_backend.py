"""Adapter running a synthesis problem through cvxpy, for cross-checking the built-in solver. Needs the cvxpy extra."""
import logging
from typing import Optional, Tuple

import numpy as np

from ultralocal.sdp.solution import SdpStatus, SolverSettings

logger = logging.getLogger(__name__)

_STATUS_MAP = {
    'optimal': 'optimal',
    'optimal_inaccurate': 'optimal',
    'infeasible': 'infeasible',
    'infeasible_inaccurate': 'infeasible',
    'unbounded': 'numerical_failure',
    'unbounded_inaccurate': 'numerical_failure',
    'user_limit': 'max_iterations',
}


def solve_cvxpy(problem, settings: SolverSettings) -> Tuple[Optional[np.ndarray], SdpStatus, int, str]:
    try:
        import cvxpy as cp
    except ImportError as e:
        raise ImportError('The cvxpy backend needs the optional dependency: pip install ultralocal[cvxpy]') from e

    c = np.asarray(problem.objective, dtype=float)
    x = cp.Variable(c.size)
    constraints = []
    for constraint in problem.constraints:
        s = constraint.constant.shape[0]
        flat = constraint.coefficients.reshape(c.size, s * s).T
        F = constraint.constant + cp.reshape(flat @ x, (s, s), order='C')
        F = 0.5 * (F + F.T)
        constraints.append(F >> 0 if constraint.sense == 'psd' else F << 0)

    cvx_problem = cp.Problem(cp.Minimize(c @ x), constraints)
    try:
        cvx_problem.solve(solver=settings.cvxpy_solver)
    except cp.SolverError as e:
        logger.warning(f'cvxpy solver error: {e}')
        return None, 'numerical_failure', 0, str(e)

    status: SdpStatus = _STATUS_MAP.get(cvx_problem.status, 'numerical_failure')  # type: ignore
    iterations = getattr(cvx_problem.solver_stats, 'num_iters', None) or 0
    value = None if x.value is None else np.asarray(x.value, dtype=float)
    return value, status, int(iterations), f'cvxpy status {cvx_problem.status}'
