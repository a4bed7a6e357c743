from types import SimpleNamespace

import numpy as np
import pytest

from ultralocal.augmentation import AugmentedSystem, augment
from ultralocal.benchmark import RobotArmParams, build_robot_arm, robot_arm_uncertainty
from ultralocal.estimator import FilterRealization, build_filter, recover_gains
from ultralocal.lmi import DecisionLayout, line_search
from ultralocal.plant import PlantModel, UncertaintyModel, ValidatedPlant, make_nonlinearity, validate_plant
from ultralocal.simulation import SignalSpec, SimulationSpecs


def chain_plant(g: str = 'zero', name: str = 'toy-chain') -> ValidatedPlant:
    """
    Two-state chain with a state-entering fault and both states measured. With g = 'sin', x2 additionally sees
    sin(x1).
    """
    if g == 'zero':
        S_g, V_g, nonlinearity = [], [], make_nonlinearity('zero', {'dimension': 0})
    else:
        S_g, V_g, nonlinearity = [[0.], [1.]], [[1., 0.]], make_nonlinearity(g)
    return validate_plant(PlantModel(
        A=[[0., 1.], [-2., -3.]],
        B_u=[[0.], [1.]],
        S_g=S_g,
        V_g=V_g,
        S_eta=[],
        V_eta=[],
        B_f=[[0.], [1.]],
        B_omega=[[1.], [0.]],
        C=[[1., 0.], [0., 1.]],
        D_f=[[0.], [0.]],
        D_nu=np.eye(2),
        g=nonlinearity,
        name=name,
    ))


@pytest.fixture
def toy_chain() -> ValidatedPlant:
    return chain_plant()


@pytest.fixture
def toy_chain_aug(toy_chain) -> AugmentedSystem:
    return augment(toy_chain, UncertaintyModel.none(), 1)


@pytest.fixture(scope='session')
def arm() -> ValidatedPlant:
    return build_robot_arm()


@pytest.fixture(scope='session')
def exact_arm() -> ValidatedPlant:
    """The arm without the friction mismatch: the nominal linear model of the uncertainty is then exact."""
    return build_robot_arm(RobotArmParams(delta_c=0.))


@pytest.fixture(scope='session')
def arm_aug(arm) -> AugmentedSystem:
    # the nominal model does not depend on delta_c, so this also serves the exact arm
    return augment(arm, robot_arm_uncertainty('linear-state'), 1)


@pytest.fixture(scope='session')
def l2linf_design(arm_aug):
    return line_search(arm_aug, mode='l2linf', progress=False)


@pytest.fixture(scope='session')
def tradeoff_design(arm_aug, l2linf_design):
    return line_search(arm_aug, sigma_max=2 * l2linf_design.sigma, mode='tradeoff', progress=False)


@pytest.fixture(scope='session')
def tradeoff_filter(arm_aug, tradeoff_design) -> FilterRealization:
    return build_filter(arm_aug, *recover_gains(tradeoff_design.solution))


def open_loop_filter(aug: AugmentedSystem) -> FilterRealization:
    """E = K = J = 0: a copy of the augmented model driven by u only."""
    d = aug.dims
    return FilterRealization(aug, np.zeros((d.n_z, d.m)), np.zeros((d.n_z, d.m)), np.zeros((d.n_vga, d.m)))


def arm_signals(
        fault: SignalSpec = None,
        omega: SignalSpec = None,
        nu: SignalSpec = None) -> SimulationSpecs:
    return SimulationSpecs(
        u=SignalSpec('sinusoid', 1, amplitude=2., frequency=0.25),
        fault=fault or SignalSpec(dimension=1),
        omega=omega or SignalSpec(dimension=1),
        nu=nu or SignalSpec(dimension=2),
    )


def scalar_problem(constraints, layout: DecisionLayout, objective: np.ndarray):
    return SimpleNamespace(constraints=constraints, layout=layout, objective=objective)
