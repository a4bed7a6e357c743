import json
from dataclasses import replace

import numpy as np
import pytest

from ultralocal.plant import (
    DimensionMismatch,
    InvalidLipschitzConstant,
    InvalidUncertaintyModel,
    KindArgumentMismatch,
    SensorFaultRankViolation,
    UncertaintyModel,
    UnknownNonlinearity,
    eval_uncertainty_model,
    load_plant,
    make_nonlinearity,
    plant_to_dict,
    registered_nonlinearities,
    uncertainty_from_dict,
    validate_plant,
)

from conftest import chain_plant


def test_dimension_ledger(toy_chain):
    d = toy_chain.dims
    assert (d.n, d.m, d.l, d.n_f, d.n_omega, d.m_nu) == (2, 2, 1, 1, 1, 2)
    assert (d.n_g, d.n_vg, d.n_eta, d.n_veta) == (0, 0, 0, 0)
    assert toy_chain.plant.S_g.shape == (2, 0)
    assert toy_chain.plant.V_g.shape == (0, 2)


def test_dimension_mismatch_names_the_matrix(toy_chain):
    bad = replace(toy_chain.plant, B_omega=np.ones((3, 1)))
    with pytest.raises(DimensionMismatch) as e:
        validate_plant(bad)
    assert e.value.names == ['B_omega']


def test_sensor_fault_rank(toy_chain):
    with pytest.raises(SensorFaultRankViolation):
        validate_plant(replace(toy_chain.plant, B_f=np.zeros((2, 2)), D_f=np.eye(2)))
    # one corrupted output out of two is fine
    validate_plant(replace(toy_chain.plant, D_f=[[1.], [0.]]))


def test_lipschitz_constant_must_be_nonnegative(toy_chain):
    with pytest.raises(InvalidLipschitzConstant):
        validate_plant(replace(toy_chain.plant, alpha_g_override=-1.))
    with pytest.raises(InvalidLipschitzConstant):
        make_nonlinearity('sin', {'gain': float('inf')})


def test_nonlinearity_registry():
    assert {'zero', 'sin', 'linear', 'elastic-joint-uncertainty'} <= set(registered_nonlinearities())
    with pytest.raises(UnknownNonlinearity):
        make_nonlinearity('cubic')
    with pytest.raises(UnknownNonlinearity):
        make_nonlinearity('sin', {'frequency': 2.})

    sin = make_nonlinearity('sin', {'gain': -2.})
    assert sin.lipschitz == 2.
    np.testing.assert_allclose(sin(np.array([np.pi / 2]), np.zeros(1), 0.), [-2.])


def test_elastic_joint_lipschitz_bounds_finite_differences():
    eta = make_nonlinearity('elastic-joint-uncertainty', {'k_motor': -0.5, 'k_link': -0.11, 'c_link': 1.1})
    rng = np.random.default_rng(3)
    for _ in range(200):
        v, w = rng.uniform(-3, 3, size=(2, 2))
        lhs = np.linalg.norm(eta(v, np.zeros(1), 0.) - eta(w, np.zeros(1), 0.))
        assert lhs <= eta.lipschitz * np.linalg.norm(v - w) + 1e-12


def test_plant_document_round_trip(tmp_path):
    plant = chain_plant('sin')
    path = tmp_path / 'plant.json'
    path.write_text(json.dumps(plant_to_dict(plant)))
    loaded = load_plant(str(path))
    assert loaded.dims == plant.dims
    np.testing.assert_array_equal(loaded.plant.A, plant.plant.A)
    assert loaded.plant.g.name == 'sin'
    assert loaded.alpha_g == 1.


@pytest.mark.parametrize('kind, fields', [
    ('none', {'theta_x': [[1.]]}),
    ('linear-state', {}),
    ('linear-output', {'theta_y': [[1.]]}),
    ('nonlinear-state', {'theta_x': [[1.]]}),
    ('quadratic', {}),
])
def test_uncertainty_model_fields_follow_kind(kind, fields):
    with pytest.raises(InvalidUncertaintyModel):
        UncertaintyModel(kind, **fields)


def test_eval_uncertainty_model():
    theta = np.array([[1., 2.], [3., 4.]])
    V = np.array([[0., 1., 0.], [0., 0., 1.]])
    x = np.array([5., 1., -1.])
    state = UncertaintyModel.linear_state(theta)
    np.testing.assert_allclose(eval_uncertainty_model(state, x, np.zeros(1), 0., V_eta=V), theta @ [1., -1.])
    with pytest.raises(KindArgumentMismatch):
        eval_uncertainty_model(state, x[:2], np.zeros(1), 0., argument='output')

    output = UncertaintyModel.linear_output(theta, np.eye(2))
    np.testing.assert_allclose(eval_uncertainty_model(output, [1., 1.], np.zeros(1), 0., argument='output'), [3., 7.])
    with pytest.raises(KindArgumentMismatch):
        eval_uncertainty_model(output, x, np.zeros(1), 0., argument='state')

    assert eval_uncertainty_model(UncertaintyModel.none(), x, np.zeros(1), 0., n_eta=2).tolist() == [0., 0.]


def test_uncertainty_document():
    model = uncertainty_from_dict({'kind': 'nonlinear-state', 'eta_lx': {'name': 'tanh', 'params': {'gain': 0.5}}})
    assert model.kind == 'nonlinear-state'
    assert model.alpha_eta == 0.5
