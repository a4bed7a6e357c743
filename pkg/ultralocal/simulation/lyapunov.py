"""
Numerical spot-check of the dissipation inequalities behind the certificates, along a simulated trace.

With W(e) = e^T P e, PM = P + R C_a, x = S_ga^T PM^T e, the error dynamics give the pointwise bound

    W' <= e^T D e - 2 e^T PM B_omega_a omega_a + 2 e^T [Q D_nu, -R D_nu] (nu, nu') + 2 alpha |x| |J D_nu nu|

where D = X11 + X12 X12^T is built from the certificate (P, R, Q, J). The L2 certificate additionally gives, for
nu = 0, the integral form  int |e_f|^2 <= rho int |omega_a|^2 + W(e(0)) / a.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ultralocal.estimator import FilterRealization
from ultralocal.simulation.harness import SimulationTrace
from ultralocal.simulation.metrics import ZERO_TOL, cumulative_energy, cumulative_omega_a_energy
from ultralocal.util.arrayops import contiguous_regions, rowwise_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpotCheckReport:
    pointwise_checked: bool
    pointwise_violations: int
    pointwise_worst_margin: float
    pointwise_first_time: Optional[float]
    cumulative_checked: bool
    cumulative_violations: int
    cumulative_worst_margin: float
    tolerance: float
    cumulative_tolerance: float

    @property
    def total_violations(self) -> int:
        return self.pointwise_violations + self.cumulative_violations


def _quadratic(e: np.ndarray, M: np.ndarray) -> np.ndarray:
    return np.einsum('ki,ij,kj->k', e, M, e)


def lyapunov_spot_check(
        trace: SimulationTrace,
        P: np.ndarray,
        fr: FilterRealization,
        alpha: float,
        R: Optional[np.ndarray] = None,
        Q: Optional[np.ndarray] = None,
        J: Optional[np.ndarray] = None,
        rho: Optional[float] = None,
        a: float = 1.) -> SpotCheckReport:
    """
    R, Q and J default to the ones implied by the filter (P E, P K, J); pass the certificate's values to check a
    filter against a certificate it was not built from.

    The pointwise test is taken per step: (W_{k+1} - W_k) / h against the trapezoid of the bound over the step, with
    step-held signals kept at their step-start value on both ends. It is skipped when noise is present without an
    analytic derivative. The integral test needs `rho` and a noise-free trace.
    """
    aug = fr.aug
    A, C, S, V, B = aug.A_a, aug.C_a, aug.S_ga, aug.V_ga, aug.B_omega_a
    D_nu = aug.D_nu
    P = np.asarray(P, dtype=float)
    R = P @ fr.E if R is None else np.asarray(R, dtype=float)
    Q = P @ fr.K if Q is None else np.asarray(Q, dtype=float)
    J = fr.J if J is None else np.asarray(J, dtype=float).reshape(fr.J.shape)

    PM = P + R @ C
    S11 = PM @ A - Q @ C
    S11 = S11 + S11.T
    VJC = V - J @ C
    x_map = S.T @ PM.T
    D = S11 + alpha * (VJC.T @ VJC) + 2 * alpha * (x_map.T @ x_map)
    channel = PM @ B
    H12 = np.hstack([Q @ D_nu, -R @ D_nu])
    JD = J @ D_nu

    t, h = trace.t, trace.h
    e = np.asarray(trace.e)
    W = _quadratic(e, P)
    noisy = float(np.max(np.abs(trace.nu), initial=0.)) > ZERO_TOL
    held = trace.held

    def at(name: str, values: np.ndarray, right: bool) -> np.ndarray:
        # right-hand end of each step; held signals keep their step-start value
        return values[:-1] if (name in held or not right) else values[1:]

    def bound(right: bool) -> np.ndarray:
        e_end = e[1:] if right else e[:-1]
        omega_a = np.hstack([
            at('delta_eta', trace.delta_eta, right),
            at('omega', trace.omega, right),
            at('fault', trace.f_r, right),
        ])
        value = _quadratic(e_end, D) - 2 * np.einsum('ki,ij,kj->k', e_end, channel, omega_a)
        if noisy:
            nu = at('nu', trace.nu, right)
            nu_a = np.hstack([nu, at('nu', trace.nu_dot, right)])
            value = value + 2 * np.einsum('ki,ij,kj->k', e_end, H12, nu_a)
            if alpha:
                value = value + 2 * alpha * rowwise_norm(e_end @ x_map.T) * rowwise_norm(nu @ JD.T)
        return value

    pointwise_checked = not noisy or trace.nu_dot is not None
    pointwise_violations, pointwise_worst, first_time = 0, float('-inf'), None
    tolerance = float('nan')
    if pointwise_checked and len(t) > 1:
        left, right = bound(False), bound(True)
        lhs = np.diff(W) / h
        rhs = (left + right) / 2
        slope = (right - left) / h
        curvature = float(np.max(np.abs(np.diff(slope)) / h, initial=0.))
        tolerance = 10 * h ** 2 * (1 + curvature)
        margin = lhs - rhs
        violated = margin > tolerance
        pointwise_violations = int(np.count_nonzero(violated))
        pointwise_worst = float(np.max(margin))
        if pointwise_violations:
            first_time = float(t[int(np.argmax(violated))])
            episodes = contiguous_regions(violated)
            logger.warning(
                f'{pointwise_violations} pointwise decay violations in {len(episodes)} episodes, '
                f'worst margin {pointwise_worst:.4g} > tol {tolerance:.3g}, first at t={first_time:.4g}'
            )

    cumulative_checked = rho is not None and not noisy
    cumulative_violations, cumulative_worst = 0, float('-inf')
    cumulative_tolerance = float('nan')
    if cumulative_checked:
        error_energy = cumulative_energy(t, trace.e_f)
        budget = rho * cumulative_omega_a_energy(trace) + W[0] / a
        cumulative_tolerance = 10 * h ** 2 * (1 + error_energy[-1] + budget[-1])
        margin = error_energy - budget
        cumulative_violations = int(np.count_nonzero(margin > cumulative_tolerance))
        cumulative_worst = float(np.max(margin))
        if cumulative_violations:
            logger.warning(
                f'{cumulative_violations} cumulative L2 violations, worst margin {cumulative_worst:.4g} '
                f'> tol {cumulative_tolerance:.3g}'
            )

    report = SpotCheckReport(
        pointwise_checked=pointwise_checked,
        pointwise_violations=pointwise_violations,
        pointwise_worst_margin=pointwise_worst,
        pointwise_first_time=first_time,
        cumulative_checked=cumulative_checked,
        cumulative_violations=cumulative_violations,
        cumulative_worst_margin=cumulative_worst,
        tolerance=tolerance,
        cumulative_tolerance=cumulative_tolerance,
    )
    logger.debug(f'Lyapunov spot-check: {report}')
    return report
