import logging
from dataclasses import replace
from typing import Dict, Optional, Protocol, Sequence

import numpy as np

from ultralocal.sdp.data import ConstraintLike, SdpData, to_sdp_data
from ultralocal.sdp.interior_point import InteriorPointSolver, IpmResult, phase1_data
from ultralocal.sdp.linalg import min_eig
from ultralocal.sdp.solution import Residuals, SdpSolution, SolverSettings

logger = logging.getLogger(__name__)

# phase-1 optimum above this (relative to the data scale) means no strictly feasible point exists
PHASE1_TOL = 1e-6


class LayoutLike(Protocol):
    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        ...


class SolvableProblem(Protocol):
    constraints: Sequence[ConstraintLike]
    objective: np.ndarray
    layout: LayoutLike


def _settings(
        settings: Optional[SolverSettings],
        tol_feas: Optional[float],
        tol_gap: Optional[float],
        max_iter: Optional[int]) -> SolverSettings:
    settings = settings or SolverSettings()
    overrides = {
        name: value for name, value in (('tol_feas', tol_feas), ('tol_gap', tol_gap), ('max_iter', max_iter))
        if value is not None
    }
    return replace(settings, **overrides)


def phase1_margin(data: SdpData, settings: SolverSettings) -> Optional[float]:
    """
    Optimal t of  min t s.t. C - A^T(y) + tI >= 0, or None if phase-1 itself does not converge.
    """
    result = InteriorPointSolver(replace(settings, phase1=False)).solve(phase1_data(data))
    if result.status != 'optimal':
        logger.warning(f'Phase-1 problem did not converge: {result.status} {result.message}')
        return None
    return float(result.y[-1])


def solve_data(data: SdpData, settings: Optional[SolverSettings] = None) -> IpmResult:
    """Interior point on raw SDP data; unsettled runs are classified by phase-1."""
    settings = settings or SolverSettings()
    result = InteriorPointSolver(settings).solve(data)
    unsettled = result.status == 'max_iterations' or (
        result.status == 'numerical_failure' and not result.message.startswith('objective unbounded')
    )
    if unsettled and settings.phase1:
        margin = phase1_margin(data, settings)
        scale = 1 + max((float(np.max(np.abs(C), initial=0.)) for C in data.C), default=0.)
        if margin is not None and margin > PHASE1_TOL * scale:
            logger.info(f'Phase-1 margin t*={margin:.4g} > 0 after {result.status}: problem is infeasible')
            result.status = 'infeasible'
            result.message = f'phase-1 margin t*={margin:.6g}'
        elif margin is not None:
            result.message += f' (phase-1 margin t*={margin:.3g}, feasible but not solved)'
    return result


def constraint_margin(constraint: ConstraintLike, x: np.ndarray) -> float:
    """Smallest eigenvalue of the cone-side matrix: F(x) for psd constraints, -F(x) for nsd ones."""
    F = constraint.constant + np.tensordot(x, constraint.coefficients, axes=1)
    F = 0.5 * (F + F.T)
    return min_eig(F if constraint.sense == 'psd' else -F)


def solve(
        problem: SolvableProblem,
        tol_feas: Optional[float] = None,
        tol_gap: Optional[float] = None,
        max_iter: Optional[int] = None,
        settings: Optional[SolverSettings] = None) -> SdpSolution:
    """
    Minimise problem.objective @ x subject to the problem's affine matrix inequalities.

    The returned assignment maps every decision matrix name to its value. Optimal solutions are re-checked against
    each constraint with an independent eigenvalue computation; a failed re-check downgrades the status to
    numerical_failure.
    """
    settings = _settings(settings, tol_feas, tol_gap, max_iter)
    c = np.asarray(problem.objective, dtype=float)

    if settings.backend == 'cvxpy':
        from ultralocal.sdp.cvxpy_backend import solve_cvxpy
        x, status, iterations, message = solve_cvxpy(problem, settings)
        residuals = Residuals(float('nan'), float('nan'), float('nan'))
        primal_objective = dual_objective = float(c @ x) if x is not None else float('nan')
    else:
        data = to_sdp_data(problem)
        result = solve_data(data, settings)
        x, status, iterations, message = result.y, result.status, result.iterations, result.message
        residuals = result.residuals
        primal_objective = float(c @ x)
        dual_objective = -result.primal_objective

    if x is None:
        x = np.full(c.size, np.nan)

    min_eigenvalues: Dict[str, float] = {}
    if np.all(np.isfinite(x)):
        for constraint in problem.constraints:
            min_eigenvalues[constraint.label] = constraint_margin(constraint, x)
    if status == 'optimal':
        for constraint in problem.constraints:
            scale = 1 + float(np.max(np.abs(constraint.constant), initial=0.))
            if min_eigenvalues[constraint.label] < -10 * settings.tol_feas * scale:
                logger.warning(
                    f'Constraint {constraint.label!r} fails the re-check: '
                    f'min eigenvalue {min_eigenvalues[constraint.label]:.3g}'
                )
                status = 'numerical_failure'
                message = f're-check failed on {constraint.label!r}'

    solution = SdpSolution(
        status=status,
        assignment=problem.layout.unpack(x),
        objective=float(c @ x),
        residuals=residuals,
        iterations=iterations,
        primal_objective=primal_objective,
        dual_objective=dual_objective,
        x=x,
        min_eigenvalues=min_eigenvalues,
        message=message,
    )
    logger.debug(
        f'Solved {len(problem.constraints)} constraints over {c.size} variables: {status} in {iterations} iterations, '
        f'objective={solution.objective:.6g} {message}'
    )
    return solution
