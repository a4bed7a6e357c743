import time

import numpy as np
import pytest

from ultralocal.augmentation import augment
from ultralocal.benchmark import robot_arm_uncertainty
from ultralocal.estimator import (
    DesignMismatch,
    FilterRealization,
    IdentityViolation,
    IllConditioned,
    build_filter,
    certificate_matrices,
    extract_fault,
    filter_from_design,
    filter_rhs,
    load_design,
    make_design_record,
    matched_filter_state,
    recover_gains,
    save_design,
)
from ultralocal.plant import DimensionMismatch, UncertaintyModel

from conftest import open_loop_filter


def test_identities_hold_for_random_gains(arm_aug):
    d = arm_aug.dims
    rng = np.random.default_rng(0)
    t0 = time.time()
    for _ in range(1000):
        fr = FilterRealization(arm_aug, rng.normal(size=(d.n_z, d.m)), rng.normal(size=(d.n_z, d.m)), rng.normal(size=(d.n_vga, d.m)))
        assert max(fr.identity_residuals().values()) < 1e-10
    assert time.time() - t0 < 1.


def test_corrupted_realization_is_rejected(arm_aug):
    fr = open_loop_filter(arm_aug)
    with pytest.raises(IdentityViolation) as e:
        FilterRealization(arm_aug, fr.E, fr.K, fr.J, N=fr.N + 1e-6)
    assert e.value.identity == 'N = M A_a - K C_a'
    assert e.value.residual > 1e-10


def test_gain_shapes_checked(arm_aug):
    d = arm_aug.dims
    with pytest.raises(DimensionMismatch) as e:
        build_filter(arm_aug, np.zeros((d.n_z + 1, d.m)), np.zeros((d.n_z, d.m)), np.zeros((d.n_vga, d.m)))
    assert e.value.names == ['E']


def test_recover_gains():
    rng = np.random.default_rng(2)
    B = rng.normal(size=(3, 3))
    P = B @ B.T + np.eye(3)
    R, Q, J = rng.normal(size=(3, 2)), rng.normal(size=(3, 2)), rng.normal(size=(1, 2))
    E, K, J_out = recover_gains({'P': P, 'R': R, 'Q': Q, 'J': J})
    np.testing.assert_allclose(P @ E, R, atol=1e-12)
    np.testing.assert_allclose(P @ K, Q, atol=1e-12)
    np.testing.assert_array_equal(J_out, J)


@pytest.mark.parametrize('P', [
    np.diag([1., 1e-14]),
    np.diag([1., -1.]),
])
def test_recover_gains_rejects_bad_p(P):
    zeros = np.zeros((2, 1))
    with pytest.raises(IllConditioned):
        recover_gains({'P': P, 'R': zeros, 'Q': zeros, 'J': np.zeros((0, 1))})


def test_matched_state_has_zero_estimation_error(arm_aug):
    d = arm_aug.dims
    rng = np.random.default_rng(4)
    fr = FilterRealization(arm_aug, rng.normal(size=(d.n_z, d.m)), rng.normal(size=(d.n_z, d.m)), rng.normal(size=(d.n_vga, d.m)))
    x_a0 = rng.normal(size=d.n_z)
    nu0 = rng.normal(size=d.m_nu)
    y0 = arm_aug.C_a @ x_a0 + arm_aug.D_nu @ nu0
    z0 = matched_filter_state(fr, x_a0, nu0)
    np.testing.assert_allclose(fr.x_hat(z0, y0), x_a0, atol=1e-12)
    np.testing.assert_allclose(extract_fault(fr, z0, y0), arm_aug.C_bar @ x_a0, atol=1e-12)


def test_open_loop_filter_copies_the_model(arm_aug):
    fr = open_loop_filter(arm_aug)
    d = arm_aug.dims
    z = np.linspace(-1., 1., d.n_z)
    u_a = np.array([0.5])
    y = np.zeros(d.m)
    expected = arm_aug.A_a @ z + arm_aug.B_ua @ u_a + arm_aug.S_ga @ arm_aug.g_a(arm_aug.V_ga @ z, u_a, 0.)
    np.testing.assert_allclose(filter_rhs(fr, z, u_a, y, 0.), expected, atol=1e-12)


def test_design_record_round_trip(arm_aug, l2linf_design, tmp_path):
    fr = build_filter(arm_aug, *recover_gains(l2linf_design.solution))
    record = make_design_record(arm_aug, l2linf_design, fr)
    assert record.mode == 'l2linf'
    assert record.sigma_max is None
    assert record.plant == 'robot-arm'

    loaded = load_design(save_design(record, str(tmp_path / 'gains.json')))
    assert loaded.certificate.sigma == pytest.approx(l2linf_design.sigma)
    assert loaded.bounds == pytest.approx(record.bounds)
    rebuilt = filter_from_design(loaded, arm_aug)
    np.testing.assert_allclose(rebuilt.E, fr.E)
    np.testing.assert_allclose(rebuilt.L, fr.L)

    cert = certificate_matrices(loaded, arm_aug)
    np.testing.assert_allclose(cert['P'], l2linf_design.solution['P'])
    assert cert['rho'].shape == ()


def test_design_loaded_against_other_system(arm, arm_aug, l2linf_design):
    fr = build_filter(arm_aug, *recover_gains(l2linf_design.solution))
    record = make_design_record(arm_aug, l2linf_design, fr)
    with pytest.raises(DesignMismatch):
        filter_from_design(record, augment(arm, UncertaintyModel.none(), 1))
    with pytest.raises(DesignMismatch):
        filter_from_design(record, augment(arm, robot_arm_uncertainty('linear-output'), 1))
