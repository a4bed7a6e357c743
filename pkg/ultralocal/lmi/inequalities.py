"""
The four LMI families of the robust fault estimator, affine in (P, R, Q, J, rho, sigma).

With A_a, C_a, V = V_ga, S = S_ga of the augmented system:

    S11 = sym(P A_a + R C_a A_a - Q C_a)
    X11 = S11 + alpha (V^T V - sym(V^T J C_a))
    X12 = [sqrt(2 alpha) (P + R C_a) S,  sqrt(alpha) C_a^T J^T]

where sym(X) = X + X^T. X12 has zero width when alpha = 0.
"""
import logging
from dataclasses import dataclass
from typing import Literal, Tuple

import numpy as np

from ultralocal.augmentation import AugmentedSystem
from ultralocal.lmi.affine import AffineExpr, DecisionLayout
from ultralocal.sdp.data import InvalidProblem
from ultralocal.sdp.linalg import asymmetry, min_eig, symmetrize

logger = logging.getLogger(__name__)

Sense = Literal['nsd', 'psd']
LmiForm = Literal['full', 'linear-reduction']

SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class AffineMatrixInequality:
    """F(x) = constant + sum_i x_i coefficients[i], constrained F(x) <= 0 ('nsd') or F(x) >= 0 ('psd')."""
    label: str
    constant: np.ndarray
    coefficients: np.ndarray
    sense: Sense

    @classmethod
    def from_expr(cls, label: str, expr: AffineExpr, sense: Sense) -> 'AffineMatrixInequality':
        if expr.shape[0] != expr.shape[1]:
            raise InvalidProblem(f'LMI {label!r} is not square: {expr.shape}')
        scale = max(1., float(np.max(np.abs(expr.constant), initial=0.)), float(np.max(np.abs(expr.coefficients), initial=0.)))
        skew = max(asymmetry(expr.constant), asymmetry(expr.coefficients))
        if skew > SYMMETRY_RTOL * scale:
            raise InvalidProblem(f'LMI {label!r} is not symmetric: max asymmetry {skew:.3g}')
        return cls(label, symmetrize(expr.constant), symmetrize(expr.coefficients), sense)

    @property
    def size(self) -> int:
        return self.constant.shape[0]

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.constant + np.tensordot(np.asarray(x, dtype=float), self.coefficients, axes=1)

    def margin(self, x: np.ndarray) -> float:
        """Smallest eigenvalue on the cone side; >= 0 iff the inequality holds at x."""
        F = symmetrize(self.evaluate(x))
        return min_eig(F if self.sense == 'psd' else -F)


@dataclass(frozen=True)
class LmiBlocks:
    S11: AffineExpr
    X11: AffineExpr
    X12: AffineExpr
    # P + R C_a, the left factor of every disturbance/nonlinearity channel
    PRC: AffineExpr


def synthesis_layout(aug: AugmentedSystem) -> DecisionLayout:
    dims = aug.dims
    layout = DecisionLayout()
    layout.add_symmetric('P', dims.n_z)
    layout.add_matrix('R', dims.n_z, dims.m)
    layout.add_matrix('Q', dims.n_z, dims.m)
    layout.add_matrix('J', dims.n_vga, dims.m)
    layout.add_scalar('rho')
    layout.add_scalar('sigma')
    return layout


def default_epsilon(aug: AugmentedSystem) -> float:
    return 1e-6 * (1 + float(np.linalg.norm(aug.A_a, 2)))


def build_x11_x12(aug: AugmentedSystem, layout: DecisionLayout = None) -> LmiBlocks:
    layout = layout or synthesis_layout(aug)
    P, R, Q, J = (layout.expr(name) for name in ('P', 'R', 'Q', 'J'))
    A, C, V, S = aug.A_a, aug.C_a, aug.V_ga, aug.S_ga
    alpha = aug.alpha
    if alpha < 0:
        raise InvalidProblem(f'alpha must be >= 0, got {alpha}')

    PRC = P + R @ C
    S11 = (P @ A + R @ (C @ A) - Q @ C).sym()
    if alpha == 0:
        return LmiBlocks(S11, S11, AffineExpr.zeros((aug.dims.n_z, 0), layout.size), PRC)

    X11 = S11 + alpha * (V.T @ V - (V.T @ J @ C).sym())
    X12 = AffineExpr.block([[np.sqrt(2 * alpha) * (PRC @ S), np.sqrt(alpha) * (J @ C).T]])
    return LmiBlocks(S11, X11, X12, PRC)


def _neg_eye(k: int) -> np.ndarray:
    return -np.eye(k)


def assemble_stability_lmi(aug: AugmentedSystem, eps: float, layout: DecisionLayout = None) -> AffineMatrixInequality:
    """[[X11 + eps I, X12], [*, -I]] <= 0"""
    if eps <= 0:
        raise InvalidProblem(f'eps must be > 0, got {eps}')
    blocks = build_x11_x12(aug, layout)
    k = blocks.X12.shape[1]
    expr = AffineExpr.block([
        [blocks.X11 + eps * np.eye(aug.dims.n_z), blocks.X12],
        [blocks.X12.T, _neg_eye(k)],
    ])
    return AffineMatrixInequality.from_expr('stability', expr, 'nsd')


def assemble_l2_lmi(
        aug: AugmentedSystem,
        a: float,
        eps: float = 0.,
        layout: DecisionLayout = None,
        linear_reduction: bool = False) -> Tuple[AffineMatrixInequality, LmiForm]:
    """
    Full form:

        [[X11 + a Cb^T Cb + eps I, -(P + R C_a) B_omega_a, X12],
         [*,                        -rho a I,              0  ],
         [*,                        *,                     -I ]] <= 0

    With alpha = 0 and `linear_reduction`, the reduced form [[S11 + Cb^T Cb + eps I, (P + R C_a) B_omega_a], [*, -rho I]]
    is used instead.
    """
    if a <= 0:
        raise InvalidProblem(f'a must be > 0, got {a}')
    layout = layout or synthesis_layout(aug)
    blocks = build_x11_x12(aug, layout)
    rho = layout.expr('rho')
    n_z, n_w = aug.dims.n_z, aug.dims.n_omega_a
    CtC = aug.C_bar.T @ aug.C_bar
    channel = blocks.PRC @ aug.B_omega_a

    if aug.alpha == 0 and linear_reduction:
        expr = AffineExpr.block([
            [blocks.S11 + CtC + eps * np.eye(n_z), channel],
            [channel.T, -rho.kron_eye(n_w)],
        ])
        return AffineMatrixInequality.from_expr('l2', expr, 'nsd'), 'linear-reduction'

    k = blocks.X12.shape[1]
    expr = AffineExpr.block([
        [blocks.X11 + a * CtC + eps * np.eye(n_z), -channel, blocks.X12],
        [-channel.T, -a * rho.kron_eye(n_w), np.zeros((n_w, k))],
        [blocks.X12.T, np.zeros((k, n_w)), _neg_eye(k)],
    ])
    return AffineMatrixInequality.from_expr('l2', expr, 'nsd'), 'full'


def assemble_l2linf_lmis(
        aug: AugmentedSystem,
        b: float,
        layout: DecisionLayout = None,
        linear_reduction: bool = False) -> Tuple[AffineMatrixInequality, AffineMatrixInequality, LmiForm]:
    """
    First:

        [[X11, H12,        0,           X12],
         [*,   -b^2 I,     T_nu^T J^T,  0  ],
         [*,   *,          -I,          0  ],
         [*,   *,          *,           -I ]] <= 0,     H12 = [Q D_nu, -R D_nu],  T_nu = [D_nu, 0]

    (the reduced form [[S11, H12], [*, -I]] with alpha = 0 and `linear_reduction`). Second: [[P, Cb^T], [Cb, sigma I]] >= 0.

    The J-coupling block carries no alpha factor; the resulting bound is exact for alpha <= 1 and conservative in the
    nonlinearity otherwise.
    """
    if b == 0:
        raise InvalidProblem('b must be nonzero')
    layout = layout or synthesis_layout(aug)
    blocks = build_x11_x12(aug, layout)
    P, R, Q, J, sigma = (layout.expr(name) for name in ('P', 'R', 'Q', 'J', 'sigma'))
    dims = aug.dims
    D_nu = aug.D_nu
    m_nu = dims.m_nu

    H12 = AffineExpr.block([[Q @ D_nu, -(R @ D_nu)]])
    T_nu = np.hstack([D_nu, np.zeros_like(D_nu)])

    if aug.alpha == 0 and linear_reduction:
        form: LmiForm = 'linear-reduction'
        first = AffineExpr.block([
            [blocks.S11, H12],
            [H12.T, _neg_eye(2 * m_nu)],
        ])
    else:
        form = 'full'
        k = blocks.X12.shape[1]
        coupling = (J @ T_nu).T
        first = AffineExpr.block([
            [blocks.X11, H12, np.zeros((dims.n_z, dims.n_vga)), blocks.X12],
            [H12.T, -b ** 2 * np.eye(2 * m_nu), coupling, np.zeros((2 * m_nu, k))],
            [np.zeros((dims.n_vga, dims.n_z)), coupling.T, _neg_eye(dims.n_vga), np.zeros((dims.n_vga, k))],
            [blocks.X12.T, np.zeros((k, 2 * m_nu)), np.zeros((k, dims.n_vga)), _neg_eye(k)],
        ])
    second = AffineExpr.block([
        [P, aug.C_bar.T],
        [aug.C_bar, sigma.kron_eye(dims.n_f)],
    ])
    return (
        AffineMatrixInequality.from_expr('l2linf-energy', first, 'nsd'),
        AffineMatrixInequality.from_expr('l2linf-peak', second, 'psd'),
        form,
    )
