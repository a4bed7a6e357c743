import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np

from ultralocal.augmentation import AugmentedSystem
from ultralocal.lmi.affine import AffineExpr, DecisionLayout
from ultralocal.lmi.inequalities import (
    AffineMatrixInequality,
    LmiForm,
    assemble_l2_lmi,
    assemble_l2linf_lmis,
    assemble_stability_lmi,
    default_epsilon,
    synthesis_layout,
)
from ultralocal.sdp.data import InvalidProblem
from ultralocal.sdp.sdpa import write_sdpa
from ultralocal.sdp.solution import SdpSolution

logger = logging.getLogger(__name__)

DesignMode = Literal['l2', 'l2linf', 'tradeoff']
DESIGN_MODES = ('l2', 'l2linf', 'tradeoff')


@dataclass(frozen=True)
class SynthesisParams:
    a: float
    b: float
    sigma_max: float
    eps: float
    alpha: float
    mode: DesignMode = 'tradeoff'
    linear_reduction: bool = False


@dataclass(frozen=True)
class CertifiedBounds:
    """
    l2:        sqrt(rho), bound on |e_f|_L2 / |omega_a|_L2
    peak:      energy-to-peak bound in printed form, sqrt(|b| sigma) (sqrt(sigma) for the linear reduction)
    peak_full: the same bound carried through the b^2 scaling of the full LMI, |b| sqrt(sigma)
    """
    l2: float
    peak: float
    peak_full: float


@dataclass
class SynthesisProblem:
    """
    minimise c^T x subject to: stability, L2-gain, the L2-Linf pair, P - eps I >= 0, rho >= 0, sigma >= 0 and
    (tradeoff mode with finite sigma_max) sigma <= sigma_max.
    """
    layout: DecisionLayout = field(repr=False)
    constraints: List[AffineMatrixInequality] = field(repr=False)
    objective: np.ndarray = field(repr=False)
    params: SynthesisParams
    l2_form: LmiForm = 'full'
    l2linf_form: LmiForm = 'full'

    @property
    def n_vars(self) -> int:
        return self.layout.size

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.constraints]

    def constraint(self, label: str) -> AffineMatrixInequality:
        for c in self.constraints:
            if c.label == label:
                return c
        raise KeyError(label)

    def bounds(self, solution: SdpSolution) -> CertifiedBounds:
        rho = max(float(solution['rho']), 0.)
        sigma = max(float(solution['sigma']), 0.)
        b = abs(self.params.b)
        peak = math.sqrt(sigma) if self.l2linf_form == 'linear-reduction' else math.sqrt(b * sigma)
        return CertifiedBounds(l2=math.sqrt(rho), peak=peak, peak_full=b * math.sqrt(sigma))


def _scalar_constraint(label: str, expr: AffineExpr) -> AffineMatrixInequality:
    return AffineMatrixInequality.from_expr(label, expr, 'psd')


def assemble_synthesis_problem(
        aug: AugmentedSystem,
        a: float,
        b: float,
        sigma_max: float = math.inf,
        eps: Optional[float] = None,
        mode: DesignMode = 'tradeoff',
        linear_reduction: bool = False) -> SynthesisProblem:
    if mode not in DESIGN_MODES:
        raise InvalidProblem(f'Unknown design mode {mode!r}, expected one of {DESIGN_MODES}')
    if eps is None:
        eps = default_epsilon(aug)
    if a <= 0 or b == 0 or eps <= 0 or not sigma_max > 0:
        raise InvalidProblem(f'Need a > 0, b != 0, eps > 0 and sigma_max > 0; got a={a}, b={b}, eps={eps}, sigma_max={sigma_max}')
    if mode == 'tradeoff' and not math.isfinite(sigma_max):
        raise InvalidProblem('tradeoff mode needs a finite sigma_max')

    layout = synthesis_layout(aug)
    P, rho, sigma = layout.expr('P'), layout.expr('rho'), layout.expr('sigma')

    l2, l2_form = assemble_l2_lmi(aug, a, layout=layout, linear_reduction=linear_reduction)
    energy, peak, l2linf_form = assemble_l2linf_lmis(aug, b, layout=layout, linear_reduction=linear_reduction)
    constraints = [
        assemble_stability_lmi(aug, eps, layout=layout),
        l2,
        energy,
        peak,
        _scalar_constraint('P-eps', P - eps * np.eye(aug.dims.n_z)),
        _scalar_constraint('rho>=0', rho),
        _scalar_constraint('sigma>=0', sigma),
    ]
    if mode == 'tradeoff':
        constraints.append(_scalar_constraint('sigma<=sigma_max', sigma_max - sigma))

    objective = layout.unit('sigma' if mode == 'l2linf' else 'rho')
    problem = SynthesisProblem(
        layout=layout,
        constraints=constraints,
        objective=objective,
        params=SynthesisParams(a, b, sigma_max, eps, aug.alpha, mode, linear_reduction),
        l2_form=l2_form,
        l2linf_form=l2linf_form,
    )
    logger.debug(
        f'Assembled {mode} problem a={a:.4g} b={b:.4g} sigma_max={sigma_max:.4g} eps={eps:.3g}: '
        f'{layout.size} variables, blocks {[c.size for c in constraints]}, forms l2={l2_form} l2linf={l2linf_form}'
    )
    return problem


def export_sdpa(problem: SynthesisProblem, path: str) -> str:
    p = problem.params
    return write_sdpa(
        problem,
        path,
        comment=f'fault estimator synthesis mode={p.mode} a={p.a:.17g} b={p.b:.17g} sigma_max={p.sigma_max:.17g} eps={p.eps:.17g}'
    )
