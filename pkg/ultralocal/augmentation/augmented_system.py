import logging
from dataclasses import dataclass, field
from typing import ClassVar, Sequence, Tuple

import numpy as np

from ultralocal.augmentation.fault_model import FaultInternalModel, build_fault_internal_model
from ultralocal.plant import DimensionMismatch, UncertaintyModel, ValidatedPlant, eval_uncertainty_model, validate_plant
from ultralocal.plant.uncertainty import UncertaintyKind


@dataclass(frozen=True)
class AugmentedDimensions:
    n: int
    n_f: int
    r: int
    n_z: int
    m: int
    l: int
    l_a: int
    n_ga: int
    n_vga: int
    n_omega_a: int
    m_nu: int


@dataclass(frozen=True)
class AugmentedSystem:
    """
    Plant extended with the fault chain, x_a = (x, zeta_1, ..., zeta_r):

        x_a' = A_a x_a + B_ua u_a + S_ga g_a(V_ga x_a, u_a, t) + B_omega_a omega_a
        y    = C_a x_a + D_nu nu

    omega_a stacks (delta_eta, omega, f^(r)); `omega_partition` gives the width of each part.
    """
    A_a: np.ndarray
    B_ua: np.ndarray
    S_ga: np.ndarray
    V_ga: np.ndarray
    B_omega_a: np.ndarray
    C_a: np.ndarray
    C_bar: np.ndarray
    D_nu: np.ndarray
    dims: AugmentedDimensions
    alpha: float
    kind: UncertaintyKind
    omega_partition: Tuple[int, int, int]
    plant: ValidatedPlant = field(repr=False, compare=False)
    u_model: UncertaintyModel = field(repr=False, compare=False)
    fault_model: FaultInternalModel = field(repr=False, compare=False)

    logger: ClassVar[logging.Logger] = logging.getLogger(__qualname__)

    def __post_init__(self) -> None:
        for name in ('A_a', 'B_ua', 'S_ga', 'V_ga', 'B_omega_a', 'C_a', 'C_bar', 'D_nu'):
            getattr(self, name).setflags(write=False)

    def g_a(self, v: np.ndarray, u_a: np.ndarray, t: float) -> np.ndarray:
        """Stacked nonlinearity. Only the nonlinear-state variant stacks eta_lx below g."""
        plant = self.plant.plant
        dims = self.plant.dims
        u = u_a[:dims.l]
        if self.kind == 'nonlinear-state':
            return np.concatenate([
                plant.g(v[:dims.n_vg], u, t),
                self.u_model.eta_lx(v[dims.n_vg:], u, t),
            ])
        return plant.g(v, u, t)

    def build_u_a(self, u: np.ndarray, y: np.ndarray, t: float) -> np.ndarray:
        """u_a = u for state-dependent models, (u, theta_y T_eta y) from the measured output otherwise."""
        if self.u_model.state_dependent:
            return np.asarray(u, dtype=float)
        return np.concatenate([u, self.model_eta(None, y, u, t)])

    def model_eta(self, x: np.ndarray, y: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
        """The uncertainty model output eta_l, from the state or the measured output depending on the kind."""
        plant = self.plant.plant
        if self.u_model.state_dependent:
            return eval_uncertainty_model(self.u_model, x, u, t, argument='state', V_eta=plant.V_eta)
        return eval_uncertainty_model(self.u_model, y, u, t, argument='output', n_eta=self.plant.dims.n_eta)

    def x_a(self, x: np.ndarray, chain: np.ndarray) -> np.ndarray:
        return np.concatenate([x, np.ravel(chain)])

    def fault_chain(self, derivatives: Sequence[np.ndarray]) -> np.ndarray:
        """zeta = (f, f', ..., f^(r-1)) from the first r entries of `derivatives`."""
        return np.concatenate([np.atleast_1d(d) for d in derivatives[:self.dims.r]])


def _check_uncertainty_shapes(p: ValidatedPlant, u_model: UncertaintyModel) -> None:
    dims = p.dims
    if u_model.kind == 'linear-state' and u_model.theta_x.shape != (dims.n_eta, dims.n_veta):
        raise DimensionMismatch(['theta_x'], f'theta_x is {u_model.theta_x.shape}, expected {(dims.n_eta, dims.n_veta)}')
    if u_model.kind == 'linear-output':
        if u_model.T_eta.shape[1] != dims.m:
            raise DimensionMismatch(['T_eta'], f'T_eta is {u_model.T_eta.shape}, expected (*, {dims.m})')
        if u_model.theta_y.shape[0] != dims.n_eta:
            raise DimensionMismatch(['theta_y'], f'theta_y is {u_model.theta_y.shape}, expected ({dims.n_eta}, *)')
    if u_model.kind == 'nonlinear-state':
        out = u_model.eta_lx(np.zeros(dims.n_veta), np.zeros(dims.l), 0.)
        if out.shape != (dims.n_eta, ):
            raise DimensionMismatch(['eta_lx'], f'eta_lx returns {out.shape}, expected ({dims.n_eta},)')


def augment(p: ValidatedPlant, u_model: UncertaintyModel, r: int = 1) -> AugmentedSystem:
    p = validate_plant(p)
    _check_uncertainty_shapes(p, u_model)
    plant, dims = p.plant, p.dims
    fault_model = build_fault_internal_model(dims.n_f, r)

    n, n_f, m = dims.n, dims.n_f, dims.m
    n_chain = fault_model.size
    n_z = n + n_chain

    A = plant.A
    if u_model.kind == 'linear-state':
        A = A + plant.S_eta @ u_model.theta_x @ plant.V_eta

    A_a = np.zeros((n_z, n_z))
    A_a[:n, :n] = A
    A_a[:n, n:n + n_f] = plant.B_f
    A_a[n:, n:] = fault_model.chain

    C_a = np.hstack([plant.C, plant.D_f, np.zeros((m, n_chain - n_f))])
    C_bar = np.hstack([np.zeros((n_f, n)), fault_model.selector])

    # omega_a = (delta_eta, omega, f^(r)); for r = 1 the chain block-row is the last block-row
    B_omega_a = np.vstack([
        np.hstack([plant.S_eta, plant.B_omega, np.zeros((n, n_f))]),
        np.hstack([np.zeros((n_chain, dims.n_eta + dims.n_omega)), fault_model.input]),
    ])

    if u_model.kind == 'nonlinear-state':
        S_ga = np.vstack([np.hstack([plant.S_g, plant.S_eta]), np.zeros((n_chain, dims.n_g + dims.n_eta))])
        V_ga = np.hstack([np.vstack([plant.V_g, plant.V_eta]), np.zeros((dims.n_vg + dims.n_veta, n_chain))])
        alpha = max(plant.alpha_g, u_model.alpha_eta)
    else:
        S_ga = np.vstack([plant.S_g, np.zeros((n_chain, dims.n_g))])
        V_ga = np.hstack([plant.V_g, np.zeros((dims.n_vg, n_chain))])
        alpha = plant.alpha_g

    if u_model.state_dependent:
        B_ua = np.vstack([plant.B_u, np.zeros((n_chain, dims.l))])
    else:
        # eta_l of the output-dependent models enters as a known input through S_eta
        B_ua = np.vstack([np.hstack([plant.B_u, plant.S_eta]), np.zeros((n_chain, dims.l + dims.n_eta))])

    aug_dims = AugmentedDimensions(
        n=n,
        n_f=n_f,
        r=r,
        n_z=n_z,
        m=m,
        l=dims.l,
        l_a=B_ua.shape[1],
        n_ga=S_ga.shape[1],
        n_vga=V_ga.shape[0],
        n_omega_a=B_omega_a.shape[1],
        m_nu=dims.m_nu,
    )
    aug = AugmentedSystem(
        A_a=A_a,
        B_ua=B_ua,
        S_ga=S_ga,
        V_ga=V_ga,
        B_omega_a=B_omega_a,
        C_a=C_a,
        C_bar=C_bar,
        D_nu=np.array(plant.D_nu),
        dims=aug_dims,
        alpha=float(alpha),
        kind=u_model.kind,
        omega_partition=(dims.n_eta, dims.n_omega, n_f),
        plant=p,
        u_model=u_model,
        fault_model=fault_model,
    )
    AugmentedSystem.logger.info(
        f'Augmented {plant.name!r} with r={r}, kind={u_model.kind}: n_z={n_z}, l_a={aug_dims.l_a}, '
        f'n_ga={aug_dims.n_ga}, n_vga={aug_dims.n_vga}, n_omega_a={aug_dims.n_omega_a}, alpha={alpha:.4g}'
    )
    return aug
