"""
Single-link arm driven through an elastic joint, states x = (motor speed, motor angle, link speed, link angle).

The stiffness and friction-coefficient mismatches (delta_k_s, delta_c) make up the true uncertainty eta, which
acts on the two speed equations through (x2, x4).
"""
import logging
from dataclasses import dataclass

import numpy as np

from ultralocal.plant import (
    InvalidUncertaintyModel,
    Nonlinearity,
    PlantModel,
    UncertaintyModel,
    ValidatedPlant,
    make_nonlinearity,
    validate_plant,
)
from ultralocal.plant.uncertainty import UncertaintyKind

logger = logging.getLogger(__name__)

ROBOT_ARM_X0 = (0.01, 0.01, 0.01, 0.01)


@dataclass(frozen=True)
class RobotArmParams:
    J_b: float = 4.5
    J_m: float = 1.
    F_l: float = 0.5
    F_m: float = 1.
    k_s: float = 2.
    # -0.25 k_s
    delta_k_s: float = -0.5
    m: float = 4.
    g: float = 9.8
    c: float = 0.5
    # 0.25 c
    delta_c: float = 0.125
    k_tau: float = 1.

    @property
    def J_l(self) -> float:
        return self.J_b

    @property
    def gravity_gain(self) -> float:
        return self.m * self.g * self.c / self.J_l


def robot_arm_eta(params: RobotArmParams = RobotArmParams()) -> Nonlinearity:
    """True uncertainty on v = (x2, x4)."""
    p = params
    return make_nonlinearity(
        'elastic-joint-uncertainty', {
            'k_motor': p.delta_k_s / p.J_m,
            'k_link': p.delta_k_s / p.J_l,
            'c_link': p.m * p.g * p.delta_c / p.J_l,
        }
    )


def nominal_theta_x(params: RobotArmParams = RobotArmParams()) -> np.ndarray:
    """Linear part of the true uncertainty in (x2, x4); exact when delta_c = 0."""
    p = params
    return np.array([
        [-p.delta_k_s / p.J_m, p.delta_k_s / p.J_m],
        [p.delta_k_s / p.J_l, -p.delta_k_s / p.J_l],
    ])


def build_robot_arm(params: RobotArmParams = RobotArmParams()) -> ValidatedPlant:
    p = params
    A = np.array([
        [-p.F_m / p.J_m, -p.k_s / p.J_m, 0., p.k_s / p.J_m],
        [1., 0., 0., 0.],
        [0., p.k_s / p.J_l, -p.F_l / p.J_l, -p.k_s / p.J_l],
        [0., 0., 1., 0.],
    ])
    plant = PlantModel(
        A=A,
        B_u=[[p.k_tau / p.J_m], [0.], [0.], [0.]],
        S_g=[[0.], [0.], [-p.gravity_gain], [0.]],
        V_g=[[0., 0., 0., 1.]],
        S_eta=[[1., 0.], [0., 0.], [0., 1.], [0., 0.]],
        V_eta=[[0., 1., 0., 0.], [0., 0., 0., 1.]],
        B_f=[[1.], [0.], [0.], [0.]],
        B_omega=[[0.], [0.], [1.], [0.]],
        C=[[0., 1., 0., 0.], [0., 0., 0., 1.]],
        D_f=[[0.], [0.]],
        D_nu=np.eye(2),
        g=make_nonlinearity('sin-of-x4'),
        eta=robot_arm_eta(p),
        name='robot-arm',
    )
    logger.debug(f'Building robot arm with {p}')
    return validate_plant(plant)


def robot_arm_uncertainty(
        kind: UncertaintyKind = 'linear-state',
        params: RobotArmParams = RobotArmParams()) -> UncertaintyModel:
    """
    Uncertainty model built from the nominal mismatch. The outputs are exactly (x2, x4), so the output form uses
    T_eta = I; the nonlinear-state form carries the same linear map as a registered nonlinearity.
    """
    theta = nominal_theta_x(params)
    if kind == 'none':
        return UncertaintyModel.none()
    if kind == 'linear-state':
        return UncertaintyModel.linear_state(theta)
    if kind == 'linear-output':
        return UncertaintyModel.linear_output(theta, np.eye(2))
    if kind == 'nonlinear-state':
        return UncertaintyModel.nonlinear_state(make_nonlinearity('linear', {'theta': theta.tolist()}))
    raise InvalidUncertaintyModel(f'Unknown uncertainty model kind {kind!r}')
