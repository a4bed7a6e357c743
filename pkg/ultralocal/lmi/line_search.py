import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import tabulate
from tqdm import tqdm

from ultralocal.augmentation import AugmentedSystem
from ultralocal.lmi.synthesis import CertifiedBounds, DesignMode, SynthesisProblem, assemble_synthesis_problem
from ultralocal.sdp.solution import SdpSolution, SdpStatus, SolverSettings
from ultralocal.sdp.solver import solve

logger = logging.getLogger(__name__)

DEFAULT_A_GRID = tuple(np.logspace(-2, 2, 5))
DEFAULT_B_GRID = tuple(np.logspace(-1, 1, 5))


@dataclass(frozen=True)
class LineSearchEntry:
    a: float
    b: float
    status: SdpStatus
    rho: float
    sigma: float
    iterations: int
    message: str = ''

    @property
    def feasible(self) -> bool:
        return self.status == 'optimal'


def format_table(entries: Sequence[LineSearchEntry]) -> str:
    return tabulate.tabulate(
        [(e.a, e.b, e.status, e.rho, e.sigma, e.iterations) for e in entries],
        headers=['a', 'b', 'status', 'rho*', 'sigma*', 'iters'],
        floatfmt='.5g',
    )


class SynthesisFailed(RuntimeError):

    def __init__(self, message: str, table: List[LineSearchEntry]):
        super().__init__(f'{message}\n{format_table(table)}')
        self.table = table


class AllInfeasible(SynthesisFailed):
    pass


class NumericalFailure(SynthesisFailed):
    pass


@dataclass
class LineSearchResult:
    a: float
    b: float
    solution: SdpSolution = field(repr=False)
    problem: SynthesisProblem = field(repr=False)
    table: List[LineSearchEntry] = field(repr=False)
    mode: DesignMode

    @property
    def rho(self) -> float:
        return float(self.solution['rho'])

    @property
    def sigma(self) -> float:
        return float(self.solution['sigma'])

    @property
    def bounds(self) -> CertifiedBounds:
        return self.problem.bounds(self.solution)

    def format_table(self) -> str:
        return format_table(self.table)


def _ranking(mode: DesignMode, a: float, b: float, problem: SynthesisProblem, solution: SdpSolution) -> Tuple[float, ...]:
    rho, sigma = float(solution['rho']), float(solution['sigma'])
    if mode == 'l2linf':
        return problem.bounds(solution).peak, rho, a, abs(b)
    return rho, sigma, a, abs(b)


def line_search(
        aug: AugmentedSystem,
        a_grid: Sequence[float] = DEFAULT_A_GRID,
        b_grid: Sequence[float] = DEFAULT_B_GRID,
        sigma_max: float = math.inf,
        eps: Optional[float] = None,
        mode: DesignMode = 'tradeoff',
        linear_reduction: bool = False,
        settings: Optional[SolverSettings] = None,
        workers: int = 1,
        progress: bool = True) -> LineSearchResult:
    """
    Solve the synthesis program on every (a, b) of the grid and keep the best optimal point: smallest rho*, then
    sigma*, then a, then |b| (l2linf ranks by the energy-to-peak bound first).

    Raises AllInfeasible when every point is infeasible, NumericalFailure when none is optimal but some did not settle.
    """
    if not len(a_grid) or not len(b_grid):
        raise ValueError('line search needs nonempty grids')
    if any(a <= 0 for a in a_grid) or any(b == 0 for b in b_grid):
        raise ValueError('line search needs positive a and nonzero b')

    points = [(float(a), float(b)) for a in a_grid for b in b_grid]

    def run(point: Tuple[float, float]) -> Tuple[SynthesisProblem, SdpSolution]:
        problem = assemble_synthesis_problem(aug, point[0], point[1], sigma_max, eps, mode, linear_reduction)
        return problem, solve(problem, settings=settings)

    bar: Any = tqdm(total=len(points), desc=f'{mode} line search', disable=not progress)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = []
            for r in pool.map(run, points):
                results.append(r)
                bar.update()
    else:
        results = []
        for point in points:
            results.append(run(point))
            bar.update()
    bar.close()

    table = [
        LineSearchEntry(
            a, b, solution.status, float(solution['rho']), float(solution['sigma']), solution.iterations, solution.message
        )
        for (a, b), (problem, solution) in zip(points, results)
    ]
    logger.info(f'{mode} line search over {len(points)} points (sigma_max={sigma_max:.4g}):\n{format_table(table)}')

    candidates = [
        (_ranking(mode, a, b, problem, solution), a, b, problem, solution)
        for (a, b), (problem, solution) in zip(points, results)
        if solution.optimal
    ]
    if not candidates:
        if all(entry.status == 'infeasible' for entry in table):
            raise AllInfeasible(f'{mode} synthesis infeasible at every grid point', table)
        raise NumericalFailure(f'{mode} synthesis found no optimal grid point', table)

    _, a, b, problem, solution = min(candidates, key=lambda c: c[0])
    result = LineSearchResult(a, b, solution, problem, table, mode)
    bounds = result.bounds
    logger.info(
        f'Best {mode} point a={a:.4g} b={b:.4g}: rho*={result.rho:.6g} sigma*={result.sigma:.6g} '
        f'L2 bound={bounds.l2:.6g} peak bound={bounds.peak:.6g} ({problem.l2linf_form})'
    )
    return result
