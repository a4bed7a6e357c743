"""
Infeasible-start primal-dual interior-point method for small dense block-diagonal SDPs in the form of `SdpData`.

Nesterov-Todd scaling with a Mehrotra predictor-corrector. Infeasibility shows up as diverging iterates whose Farkas
ratio drops below `tol_infeas`; anything the main loop cannot settle is classified with a phase-1 problem.

Certificate thresholds:

* primal infeasible when <C, X> < 0 and |A(X)| <= tol_infeas * -<C, X> (default 1e-8): X is then a Farkas ray.
* unbounded objective (reported as numerical_failure) when b^T y > 0 and |A^T(y) + Z| <= tol_infeas * b^T y.
* iterates beyond DIVERGENCE_LIMIT, or STALL_LIMIT consecutive steps shorter than STALL_STEP, end the run as
  numerical_failure; `solve_data` then runs phase 1 and calls the problem infeasible when its margin t* exceeds
  PHASE1_TOL times the data scale.
"""
import logging
from dataclasses import dataclass, field
from typing import ClassVar, List, Optional, Tuple

import numpy as np
import scipy.linalg

from ultralocal.sdp.data import SdpData
from ultralocal.sdp.linalg import symmetrize
from ultralocal.sdp.solution import Residuals, SdpStatus, SolverSettings

DIVERGENCE_LIMIT = 1e13
STALL_STEP = 1e-10
STALL_LIMIT = 5


@dataclass
class IpmResult:
    status: SdpStatus
    y: np.ndarray
    X: List[np.ndarray] = field(repr=False)
    Z: List[np.ndarray] = field(repr=False)
    iterations: int
    primal_objective: float
    dual_objective: float
    residuals: Residuals
    message: str = ''


@dataclass
class _Scaling:
    G: np.ndarray
    G_inv: np.ndarray
    W: np.ndarray
    lam: np.ndarray


def nt_scaling(X: np.ndarray, Z: np.ndarray) -> _Scaling:
    """G with G^T Z G = G^-1 X G^-T = diag(lam); W = G G^T is the NT scaling point."""
    L_X = np.linalg.cholesky(X)
    L_Z = np.linalg.cholesky(Z)
    U, lam, Vt = np.linalg.svd(L_Z.T @ L_X)
    root = np.sqrt(lam)
    G = (L_X @ Vt.T) / root
    G_inv = (U / root).T @ L_Z.T
    return _Scaling(G, G_inv, G @ G.T, lam)


def _max_step(lam: np.ndarray, d_scaled: np.ndarray) -> float:
    """Largest a with diag(lam) + a d_scaled >= 0."""
    if not lam.size:
        return float('inf')
    s = 1. / np.sqrt(lam)
    ev = scipy.linalg.eigvalsh(symmetrize(d_scaled * s[:, None] * s[None, :]), subset_by_index=[0, 0])[0]
    return float('inf') if ev >= 0 else -1. / ev


class InteriorPointSolver:

    logger: ClassVar[logging.Logger] = logging.getLogger(__qualname__)

    def __init__(self, settings: Optional[SolverSettings] = None):
        self.settings = settings or SolverSettings()

    def _initial_point(self, data: SdpData) -> Tuple[List[np.ndarray], np.ndarray, List[np.ndarray]]:
        X, Z = [], []
        for C, A in zip(data.C, data.A):
            s = C.shape[0]
            norms_A = np.linalg.norm(A.reshape(A.shape[0], -1), axis=1) if A.size else np.zeros(0)
            xi = max(10., np.sqrt(s), s * float(np.max((1 + np.abs(data.b)) / (1 + norms_A), initial=0.)))
            eta = max(10., np.sqrt(s), float(np.linalg.norm(C)), float(np.max(norms_A, initial=0.)))
            X.append(xi * np.eye(s))
            Z.append(eta * np.eye(s))
        return X, np.zeros(data.n_vars), Z

    def _schur(self, data: SdpData, scalings: List[_Scaling]):
        p = data.n_vars
        M = np.zeros((p, p))
        for A, sc in zip(data.A, scalings):
            WAW = np.einsum('ab,ibc,cd->iad', sc.W, A, sc.W, optimize=True)
            M += np.einsum('iab,jab->ij', A, WAW)
        M = symmetrize(M)
        try:
            return 'cholesky', scipy.linalg.cho_factor(M)
        except (np.linalg.LinAlgError, ValueError):
            # variables absent from every block leave M singular
            return 'lstsq', M

    @staticmethod
    def _solve_schur(schur, rhs: np.ndarray) -> np.ndarray:
        kind, factor = schur
        if kind == 'cholesky':
            return scipy.linalg.cho_solve(factor, rhs)
        return np.linalg.lstsq(factor, rhs, rcond=None)[0]

    def _direction(
            self,
            data: SdpData,
            scalings: List[_Scaling],
            schur,
            rp: np.ndarray,
            Rd: List[np.ndarray],
            R: List[np.ndarray]) -> Tuple[List[np.ndarray], np.ndarray, List[np.ndarray]]:
        """
        Solve the linearised system with scaled complementarity lam o (dX~ + dZ~) = R:

            A(dX) = rp,    dZ + A^T(dy) = Rd,    dX + W dZ W = G T G^T
        """
        Rc = []
        for sc, Rk in zip(scalings, R):
            T = 2 * Rk / (sc.lam[:, None] + sc.lam[None, :])
            Rc.append(sc.G @ T @ sc.G.T)
        WRdW = [sc.W @ Rdk @ sc.W for sc, Rdk in zip(scalings, Rd)]
        dy = self._solve_schur(schur, rp - data.apply(Rc) + data.apply(WRdW))
        dZ = [symmetrize(Rdk - ATdy) for Rdk, ATdy in zip(Rd, data.adjoint(dy))]
        dX = [symmetrize(Rck - sc.W @ dZk @ sc.W) for Rck, sc, dZk in zip(Rc, scalings, dZ)]
        return dX, dy, dZ

    def _steps(self, scalings: List[_Scaling], dX: List[np.ndarray], dZ: List[np.ndarray]):
        step_p, step_d = float('inf'), float('inf')
        dX_s, dZ_s = [], []
        for sc, dXk, dZk in zip(scalings, dX, dZ):
            dXs = symmetrize(sc.G_inv @ dXk @ sc.G_inv.T)
            dZs = symmetrize(sc.G.T @ dZk @ sc.G)
            step_p = min(step_p, _max_step(sc.lam, dXs))
            step_d = min(step_d, _max_step(sc.lam, dZs))
            dX_s.append(dXs)
            dZ_s.append(dZs)
        return step_p, step_d, dX_s, dZ_s

    def solve(self, data: SdpData) -> IpmResult:
        settings = self.settings
        X, y, Z = self._initial_point(data)
        N = sum(data.block_sizes)
        norm_b = 1 + float(np.linalg.norm(data.b))
        norm_C = 1 + float(np.sqrt(sum(np.sum(C ** 2) for C in data.C)))

        status: Optional[SdpStatus] = None
        message = ''
        stalled = 0
        iteration = 0
        residuals = Residuals(float('inf'), float('inf'), float('inf'))
        pobj = dobj = float('nan')

        for iteration in range(settings.max_iter + 1):
            AX = data.apply(X)
            rp = data.b - AX
            Rd = [symmetrize(C - Zk - ATy) for C, Zk, ATy in zip(data.C, Z, data.adjoint(y))]
            pobj = float(sum(np.sum(C * Xk) for C, Xk in zip(data.C, X)))
            dobj = float(data.b @ y)
            mu = float(sum(np.sum(Xk * Zk) for Xk, Zk in zip(X, Z))) / N
            residuals = Residuals(
                primal=float(np.linalg.norm(rp)) / norm_b,
                dual=float(np.sqrt(sum(np.sum(R ** 2) for R in Rd))) / norm_C,
                gap=abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj)),
            )
            self.logger.debug(
                f'it={iteration:3d} pobj={pobj: .8e} dobj={dobj: .8e} '
                f'pinf={residuals.primal:.2e} dinf={residuals.dual:.2e} gap={residuals.gap:.2e} mu={mu:.2e}'
            )

            if residuals.primal <= settings.tol_feas and residuals.dual <= settings.tol_feas and residuals.gap <= settings.tol_gap:
                status = 'optimal'
                break
            if pobj < 0 and np.linalg.norm(AX) <= settings.tol_infeas * -pobj:
                status = 'infeasible'
                message = f'Farkas certificate: |A(X)| / -<C,X> = {np.linalg.norm(AX) / -pobj:.3g}'
                break
            ATy_Z = np.sqrt(sum(np.sum((ATy + Zk) ** 2) for ATy, Zk in zip(data.adjoint(y), Z)))
            if dobj > 0 and ATy_Z <= settings.tol_infeas * dobj:
                status = 'numerical_failure'
                message = f'objective unbounded below: |A^T y + Z| / b^T y = {ATy_Z / dobj:.3g}'
                break
            if max(np.abs(y).max(initial=0.), max(np.abs(Xk).max() for Xk in X)) > DIVERGENCE_LIMIT:
                status = 'numerical_failure'
                message = 'iterates diverged'
                break
            if iteration == settings.max_iter:
                break

            try:
                scalings = [nt_scaling(Xk, Zk) for Xk, Zk in zip(X, Z)]
                schur = self._schur(data, scalings)

                # predictor
                R_aff = [-np.diag(sc.lam ** 2) for sc in scalings]
                dX, dy, dZ = self._direction(data, scalings, schur, rp, Rd, R_aff)
                step_p, step_d, dX_s, dZ_s = self._steps(scalings, dX, dZ)
                a_p, a_d = min(1., step_p), min(1., step_d)
                mu_aff = sum(
                    float(np.sum((Xk + a_p * dXk) * (Zk + a_d * dZk)))
                    for Xk, dXk, Zk, dZk in zip(X, dX, Z, dZ)
                ) / N
                sigma = float(np.clip((max(mu_aff, 0.) / mu) ** 3, 0., 1.))

                # corrector
                R_cor = [
                    sigma * mu * np.eye(sc.lam.size) - np.diag(sc.lam ** 2) - symmetrize(dXs @ dZs)
                    for sc, dXs, dZs in zip(scalings, dX_s, dZ_s)
                ]
                dX, dy, dZ = self._direction(data, scalings, schur, rp, Rd, R_cor)
                step_p, step_d, _, _ = self._steps(scalings, dX, dZ)
            except (np.linalg.LinAlgError, ValueError, FloatingPointError) as e:
                status = 'numerical_failure'
                message = f'factorization breakdown: {e}'
                break

            a_p = min(1., settings.step_fraction * step_p)
            a_d = min(1., settings.step_fraction * step_d)
            X = [symmetrize(Xk + a_p * dXk) for Xk, dXk in zip(X, dX)]
            y = y + a_d * dy
            Z = [symmetrize(Zk + a_d * dZk) for Zk, dZk in zip(Z, dZ)]

            if max(a_p, a_d) < STALL_STEP:
                stalled += 1
                if stalled >= STALL_LIMIT:
                    status = 'numerical_failure'
                    message = 'stalled: step lengths collapsed'
                    break
            else:
                stalled = 0

        if status is None:
            status = 'max_iterations'
            message = f'no convergence in {settings.max_iter} iterations'
        self.logger.debug(f'Finished with status={status} after {iteration} iterations {message}')
        return IpmResult(status, y, X, Z, iteration, pobj, dobj, residuals, message)


def phase1_data(data: SdpData) -> SdpData:
    """
    min t  s.t.  C_k - sum_i y_i A_k[i] + t I >= 0,  t >= -1

    The original constraints are feasible iff t* <= 0.
    """
    p = data.n_vars
    b = np.zeros(p + 1)
    b[-1] = -1.
    C, A = [], []
    for Ck, Ak in zip(data.C, data.A):
        s = Ck.shape[0]
        C.append(Ck)
        A.append(np.concatenate([Ak, -np.eye(s)[None]], axis=0))
    bound = np.zeros((p + 1, 1, 1))
    bound[-1] = -1.
    C.append(np.ones((1, 1)))
    A.append(bound)
    return SdpData(b, C, A, list(data.labels) + ['phase1-bound'])
