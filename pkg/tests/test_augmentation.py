import numpy as np
import pytest

from ultralocal.augmentation import InvalidOrder, augment, build_fault_internal_model
from ultralocal.benchmark import nominal_theta_x, robot_arm_uncertainty
from ultralocal.plant import DimensionMismatch, UncertaintyModel


def test_fault_internal_model():
    fm = build_fault_internal_model(2, 3)
    assert fm.size == 6
    # zeta = (f, f', f''), each block 2 wide
    np.testing.assert_array_equal(fm.chain, np.eye(6, k=2))
    np.testing.assert_array_equal(fm.input[4:], np.eye(2))
    np.testing.assert_array_equal(fm.selector[:, :2], np.eye(2))
    for n_f, r in ((0, 1), (1, 0)):
        with pytest.raises(InvalidOrder):
            build_fault_internal_model(n_f, r)


def test_arm_linear_state(arm, arm_aug):
    d = arm_aug.dims
    assert (d.n_z, d.m, d.l_a, d.n_ga, d.n_vga, d.n_omega_a) == (5, 2, 1, 1, 1, 4)
    assert arm_aug.alpha == 1.
    assert arm_aug.omega_partition == (2, 1, 1)

    p = arm.plant
    A = p.A + p.S_eta @ nominal_theta_x() @ p.V_eta
    np.testing.assert_allclose(arm_aug.A_a[:4, :4], A)
    np.testing.assert_array_equal(arm_aug.A_a[:4, 4], p.B_f[:, 0])
    np.testing.assert_array_equal(arm_aug.A_a[4], np.zeros(5))
    np.testing.assert_array_equal(arm_aug.C_bar, [[0., 0., 0., 0., 1.]])
    np.testing.assert_array_equal(arm_aug.C_a[:, :4], p.C)
    # f^(r) drives the last chain state only
    np.testing.assert_array_equal(arm_aug.B_omega_a[:, 3], [0., 0., 0., 0., 1.])


def test_arm_other_kinds(arm):
    output = augment(arm, robot_arm_uncertainty('linear-output'), 1)
    assert output.dims.l_a == 3
    np.testing.assert_array_equal(output.A_a[:4, :4], arm.plant.A)

    nonlinear = augment(arm, robot_arm_uncertainty('nonlinear-state'), 1)
    assert (nonlinear.dims.n_ga, nonlinear.dims.n_vga) == (3, 3)
    assert nonlinear.alpha == pytest.approx(max(1., np.linalg.norm(nominal_theta_x(), 2)))

    none = augment(arm, UncertaintyModel.none(), 2)
    assert none.dims.n_z == 6
    np.testing.assert_array_equal(none.C_bar, [[0., 0., 0., 0., 1., 0.]])


def test_uncertainty_shape_checked(arm):
    with pytest.raises(DimensionMismatch):
        augment(arm, UncertaintyModel.linear_state(np.eye(3)), 1)


def test_output_model_enters_as_known_input(arm):
    aug = augment(arm, robot_arm_uncertainty('linear-output'), 1)
    y = np.array([0.3, -0.2])
    u_a = aug.build_u_a(np.array([1.]), y, 0.)
    np.testing.assert_allclose(u_a, np.concatenate([[1.], nominal_theta_x() @ y]))


def test_fault_chain_and_state(arm):
    aug = augment(arm, UncertaintyModel.none(), 2)
    chain = aug.fault_chain([np.array([0.1]), np.array([0.02]), np.array([9.])])
    np.testing.assert_array_equal(chain, [0.1, 0.02])
    np.testing.assert_array_equal(aug.x_a(np.arange(4.), chain), [0., 1., 2., 3., 0.1, 0.02])


def test_stacked_nonlinearity(arm):
    aug = augment(arm, robot_arm_uncertainty('nonlinear-state'), 1)
    v = np.array([0.5, 0.1, 0.2])
    out = aug.g_a(v, np.zeros(1), 0.)
    np.testing.assert_allclose(out, np.concatenate([[np.sin(0.5)], nominal_theta_x() @ v[1:]]))
