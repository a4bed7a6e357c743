import logging
from typing import Callable, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray], np.ndarray]

GRID_TOL = 1e-9


class NonFiniteState(RuntimeError):

    def __init__(self, t: float):
        super().__init__(f'State became non-finite at t={t:.6g}')
        self.t = t


def step_count(t0: float, t1: float, h: float) -> int:
    if h <= 0:
        raise ValueError(f'Step must be > 0, got {h}')
    n = (t1 - t0) / h
    if n < 0 or abs(n - round(n)) > GRID_TOL:
        raise ValueError(f'(t1 - t0) / h = {n!r} is not a non-negative integer')
    return int(round(n))


def integrate_rk4(
        rhs: Rhs,
        state0: np.ndarray,
        t0: float,
        t1: float,
        h: float,
        before_step: Optional[Callable[[int, float], None]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Classical fixed-step RK4. Returns the time grid t0 + k h and the states on it, shape (steps + 1, len(state0)).

    `before_step(k, t_k)` runs before each step, e.g. to latch signals held constant over the step.
    """
    n = step_count(t0, t1, h)
    t = t0 + h * np.arange(n + 1)
    x = np.asarray(state0, dtype=float)
    states = np.empty((n + 1, x.size))
    states[0] = x
    if not np.all(np.isfinite(x)):
        raise NonFiniteState(t0)

    for k in range(n):
        tk = t[k]
        if before_step:
            before_step(k, tk)
        k1 = rhs(tk, x)
        k2 = rhs(tk + h / 2, x + h / 2 * k1)
        k3 = rhs(tk + h / 2, x + h / 2 * k2)
        k4 = rhs(tk + h, x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(t[k + 1])
        states[k + 1] = x
    return t, states
