from dataclasses import dataclass, field
from typing import Dict, Literal, Optional

import numpy as np

SdpStatus = Literal['optimal', 'infeasible', 'max_iterations', 'numerical_failure']
SdpBackend = Literal['interior-point', 'cvxpy']


@dataclass(frozen=True)
class SolverSettings:
    tol_feas: float = 1e-8
    tol_gap: float = 1e-7
    max_iter: int = 200
    step_fraction: float = 0.98
    # Farkas ratio below which a diverging iterate is taken as an infeasibility certificate
    tol_infeas: float = 1e-8
    phase1: bool = True
    backend: SdpBackend = 'interior-point'
    cvxpy_solver: Optional[str] = None


@dataclass(frozen=True)
class Residuals:
    primal: float
    dual: float
    gap: float


@dataclass
class SdpSolution:
    status: SdpStatus
    assignment: Dict[str, np.ndarray]
    objective: float
    residuals: Residuals
    iterations: int
    primal_objective: float = float('nan')
    dual_objective: float = float('nan')
    x: Optional[np.ndarray] = field(default=None, repr=False)
    min_eigenvalues: Dict[str, float] = field(default_factory=dict)
    message: str = ''

    @property
    def optimal(self) -> bool:
        return self.status == 'optimal'

    def __getitem__(self, name: str) -> np.ndarray:
        return self.assignment[name]
