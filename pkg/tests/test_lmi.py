import importlib
import math

import numpy as np
import pytest

from ultralocal.lmi import (
    AffineExpr,
    AffineMatrixInequality,
    AllInfeasible,
    DecisionLayout,
    NumericalFailure,
    SynthesisFailed,
    assemble_l2_lmi,
    assemble_l2linf_lmis,
    assemble_stability_lmi,
    assemble_synthesis_problem,
    build_x11_x12,
    export_sdpa,
    line_search,
    synthesis_layout,
)
from ultralocal.augmentation import augment
from ultralocal.plant import InvalidPlant, PlantModel, UncertaintyModel, make_nonlinearity, validate_plant
from ultralocal.sdp import InvalidProblem, Residuals, SdpSolution, read_sdpa, solve

from conftest import chain_plant, scalar_problem

# the package re-exports the line_search function under the module name
line_search_module = importlib.import_module('ultralocal.lmi.line_search')


def sym(X: np.ndarray) -> np.ndarray:
    return X + X.T


def random_point(layout: DecisionLayout, rng: np.random.Generator) -> dict:
    values = {}
    for name, block in layout.blocks.items():
        M = rng.normal(size=block.shape)
        values[name] = M + M.T if block.symmetric else M
    return values


def test_affine_expressions():
    layout = DecisionLayout()
    layout.add_symmetric('P', 2)
    layout.add_matrix('R', 2, 1)
    layout.add_scalar('s')
    assert layout.size == 3 + 2 + 1
    P, R, s = layout.expr('P'), layout.expr('R'), layout.expr('s')

    rng = np.random.default_rng(1)
    values = random_point(layout, rng)
    x = layout.pack(values)
    unpacked = layout.unpack(x)
    np.testing.assert_allclose(unpacked['P'], values['P'])
    assert unpacked['s'].shape == ()

    A = rng.normal(size=(2, 2))
    expr = AffineExpr.block([[(P @ A).sym() + s.kron_eye(2), R], [R.T, None]], layout.size)
    expected = np.block([
        [sym(values['P'] @ A) + values['s'][0, 0] * np.eye(2), values['R']],
        [values['R'].T, np.zeros((1, 1))],
    ])
    np.testing.assert_allclose(expr.evaluate(x), expected)
    np.testing.assert_allclose((A @ P - 2. * P).evaluate(x), A @ values['P'] - 2 * values['P'])

    with pytest.raises(TypeError):
        P @ P
    with pytest.raises(ValueError):
        P + R
    with pytest.raises(ValueError):
        layout.add_scalar('late')


def test_lmi_blocks_match_direct_formulas(arm_aug):
    layout = synthesis_layout(arm_aug)
    assert list(layout.blocks) == ['P', 'R', 'Q', 'J', 'rho', 'sigma']
    rng = np.random.default_rng(5)
    values = random_point(layout, rng)
    x = layout.pack(values)
    P, R, Q, J = (values[name] for name in ('P', 'R', 'Q', 'J'))
    A, C, V, S = arm_aug.A_a, arm_aug.C_a, arm_aug.V_ga, arm_aug.S_ga
    alpha = arm_aug.alpha

    blocks = build_x11_x12(arm_aug, layout)
    PRC = P + R @ C
    S11 = sym(PRC @ A - Q @ C)
    X11 = S11 + alpha * (V.T @ V - sym(V.T @ J @ C))
    X12 = np.hstack([np.sqrt(2 * alpha) * PRC @ S, np.sqrt(alpha) * (J @ C).T])
    np.testing.assert_allclose(blocks.S11.evaluate(x), S11, atol=1e-12)
    np.testing.assert_allclose(blocks.X11.evaluate(x), X11, atol=1e-12)
    np.testing.assert_allclose(blocks.X12.evaluate(x), X12, atol=1e-12)

    a, rho = 0.3, values['rho'][0, 0]
    l2, form = assemble_l2_lmi(arm_aug, a, layout=layout)
    assert form == 'full'
    Cb, B = arm_aug.C_bar, arm_aug.B_omega_a
    n_w, k = B.shape[1], X12.shape[1]
    expected = np.block([
        [X11 + a * Cb.T @ Cb, -PRC @ B, X12],
        [-(PRC @ B).T, -a * rho * np.eye(n_w), np.zeros((n_w, k))],
        [X12.T, np.zeros((k, n_w)), -np.eye(k)],
    ])
    np.testing.assert_allclose(l2.evaluate(x), expected, atol=1e-12)


def test_linear_reduction_needs_alpha_zero(toy_chain_aug, arm_aug):
    assert build_x11_x12(toy_chain_aug).X12.shape == (3, 0)
    assert assemble_l2_lmi(toy_chain_aug, 1., linear_reduction=True)[1] == 'linear-reduction'
    energy, peak, form = assemble_l2linf_lmis(toy_chain_aug, 1., linear_reduction=True)
    assert form == 'linear-reduction'
    assert energy.size == 3 + 4
    assert peak.size == 3 + 1
    assert assemble_l2_lmi(arm_aug, 1., linear_reduction=True)[1] == 'full'


def test_stability_lmi_margin(toy_chain_aug):
    layout = synthesis_layout(toy_chain_aug)
    lmi = assemble_stability_lmi(toy_chain_aug, 1e-3, layout)
    assert lmi.sense == 'nsd'
    # P = 0 leaves eps I, which violates the strict inequality
    assert lmi.margin(np.zeros(layout.size)) == pytest.approx(-1e-3)


def test_from_expr_rejects_asymmetric():
    layout = DecisionLayout()
    layout.add_matrix('R', 2, 2)
    with pytest.raises(InvalidProblem):
        AffineMatrixInequality.from_expr('R', layout.expr('R'), 'nsd')


@pytest.mark.parametrize('mode, objective, extra', [
    ('l2', 'rho', []),
    ('l2linf', 'sigma', []),
    ('tradeoff', 'rho', ['sigma<=sigma_max']),
])
def test_synthesis_problem_modes(arm_aug, mode, objective, extra):
    problem = assemble_synthesis_problem(arm_aug, 1., 1., sigma_max=10., mode=mode)
    assert problem.labels == ['stability', 'l2', 'l2linf-energy', 'l2linf-peak', 'P-eps', 'rho>=0', 'sigma>=0'] + extra
    np.testing.assert_array_equal(problem.objective, problem.layout.unit(objective))
    # 15 + 10 + 10 + 2 + 1 + 1
    assert problem.n_vars == 39


def test_synthesis_problem_arguments(arm_aug):
    with pytest.raises(InvalidProblem):
        assemble_synthesis_problem(arm_aug, 1., 1., mode='tradeoff')
    with pytest.raises(InvalidProblem):
        assemble_synthesis_problem(arm_aug, 0., 1., sigma_max=1.)
    with pytest.raises(InvalidProblem):
        assemble_synthesis_problem(arm_aug, 1., 0., sigma_max=1.)
    with pytest.raises(InvalidProblem):
        assemble_synthesis_problem(arm_aug, 1., 1., mode='h2')


def test_toy_chain_design(toy_chain_aug):
    result = line_search(toy_chain_aug, [1.], [1.], mode='l2', linear_reduction=True, progress=False)
    assert result.solution.optimal
    assert result.problem.l2_form == 'linear-reduction'
    assert result.rho > 0
    assert result.bounds.l2 == pytest.approx(math.sqrt(result.rho))
    assert all(m > -1e-6 for m in result.solution.min_eigenvalues.values())
    P = result.solution['P']
    assert np.linalg.eigvalsh(P)[0] > 0


def test_export_sdpa(toy_chain_aug, tmp_path):
    problem = assemble_synthesis_problem(toy_chain_aug, 1., 1., sigma_max=5.)
    data = read_sdpa(export_sdpa(problem, str(tmp_path / 'toy.dat-s')))
    assert data.n_vars == problem.n_vars
    assert data.labels == problem.labels


def unobservable_fault_plant():
    """The fault drives an unstable state that never reaches the output, so no stable filter exists."""
    return validate_plant(PlantModel(
        A=[[-1., 0.], [0., 1.]],
        B_u=[[1.], [0.]],
        S_g=[],
        V_g=[],
        S_eta=[],
        V_eta=[],
        B_f=[[0.], [1.]],
        B_omega=[[1.], [0.]],
        C=[[1., 0.]],
        D_f=[[0.]],
        D_nu=[[1.]],
        g=make_nonlinearity('zero', {'dimension': 0}),
        name='unobservable',
    ))


def test_unestimable_fault_fails_synthesis():
    aug = augment(unobservable_fault_plant(), UncertaintyModel.none(), 1)
    with pytest.raises(SynthesisFailed) as e:
        line_search(aug, [1.], [1.], mode='l2', progress=False)
    assert not any(entry.feasible for entry in e.value.table)


def test_chain_with_nonlinearity_uses_full_form():
    aug = augment(chain_plant('sin'), UncertaintyModel.none(), 1)
    assert aug.alpha == 1.
    _, form = assemble_l2_lmi(aug, 1., linear_reduction=True)
    assert form == 'full'
    with pytest.raises(InvalidPlant):
        chain_plant('cubic')


def test_linear_reduction_matches_full_l2_form(toy_chain_aug):
    rho = {}
    for linear_reduction in (False, True):
        problem = assemble_synthesis_problem(toy_chain_aug, 1., 1., mode='l2', linear_reduction=linear_reduction)
        sol = solve(problem)
        assert sol.optimal
        rho[problem.l2_form] = float(sol['rho'])
    assert rho['linear-reduction'] == pytest.approx(rho['full'], rel=1e-5, abs=1e-8)


def test_tighter_sigma_max_never_lowers_rho(toy_chain_aug):
    sigma_min = float(solve(assemble_synthesis_problem(toy_chain_aug, 1., 1., mode='l2linf'))['sigma'])
    rho = {}
    for scale in (1.5, 10.):
        sol = solve(assemble_synthesis_problem(toy_chain_aug, 1., 1., sigma_max=scale * sigma_min, mode='tradeoff'))
        assert sol.optimal
        assert float(sol['sigma']) <= scale * sigma_min * (1 + 1e-6)
        rho[scale] = float(sol['rho'])
    assert rho[1.5] >= rho[10.] - 1e-6 * (1 + rho[10.])


def test_peak_lmi_is_the_schur_complement(toy_chain_aug):
    layout = synthesis_layout(toy_chain_aug)
    _, peak, _ = assemble_l2linf_lmis(toy_chain_aug, 1., layout=layout)
    rng = np.random.default_rng(3)
    B = rng.normal(size=(3, 3))
    P = B @ B.T + 0.5 * np.eye(3)
    Cb = toy_chain_aug.C_bar
    bound = np.linalg.eigvalsh(Cb @ np.linalg.solve(P, Cb.T))[-1]

    values = {name: np.zeros(block.shape) for name, block in layout.blocks.items()}
    values['P'] = P
    for scale, holds in ((1 + 1e-3, True), (1 - 1e-3, False)):
        values['sigma'] = np.array([[scale * bound]])
        assert (peak.margin(layout.pack(values)) > 0) == holds

    # the smallest sigma for this P, found by the solver
    fixed = DecisionLayout()
    fixed.add_scalar('s')
    s = fixed.expr('s')
    lmi = AffineMatrixInequality.from_expr('peak', AffineExpr.block([[P, Cb.T], [Cb, s.kron_eye(1)]]), 'psd')
    sol = solve(scalar_problem([lmi], fixed, fixed.unit('s')))
    assert float(sol['s']) == pytest.approx(bound, rel=1e-6)


def fake_solver(outcomes):
    """solve() replacement returning canned (status, rho, sigma) per grid point."""
    def solve(problem, settings=None):
        status, rho, sigma = outcomes[problem.params.a, problem.params.b]
        return SdpSolution(status, {'rho': np.array(rho), 'sigma': np.array(sigma)}, rho, Residuals(0., 0., 0.), 7)
    return solve


def test_line_search_skips_infeasible_points(monkeypatch, toy_chain_aug):
    monkeypatch.setattr(line_search_module, 'solve', fake_solver({
        (1., 1.): ('infeasible', math.nan, math.nan),
        (2., 1.): ('optimal', 3., 4.),
    }))
    result = line_search(toy_chain_aug, [1., 2.], [1.], mode='l2', progress=False)
    assert (result.a, result.b) == (2., 1.)
    assert [entry.status for entry in result.table] == ['infeasible', 'optimal']
    assert 'infeasible' in result.format_table()
    assert result.bounds.l2 == pytest.approx(math.sqrt(3.))


def test_line_search_tie_breaking(monkeypatch, toy_chain_aug):
    monkeypatch.setattr(line_search_module, 'solve', fake_solver({
        (1., 1.): ('optimal', 1., 2.),
        (1., -0.5): ('optimal', 1., 2.),
        (2., 1.): ('optimal', 1., 1.),
        (2., -0.5): ('optimal', 1., 1.),
        (3., 1.): ('optimal', 1., 1.),
        (3., -0.5): ('optimal', 1.5, 0.1),
    }))
    # equal rho*, then smallest sigma*, then smallest a, then smallest |b|
    result = line_search(toy_chain_aug, [1., 2., 3.], [1., -0.5], mode='l2', progress=False)
    assert (result.a, result.b) == (2., -0.5)


@pytest.mark.parametrize('statuses, error', [
    (('infeasible', 'infeasible'), AllInfeasible),
    (('infeasible', 'max_iterations'), NumericalFailure),
])
def test_line_search_without_optimal_point(monkeypatch, toy_chain_aug, statuses, error):
    monkeypatch.setattr(line_search_module, 'solve', fake_solver({
        (1., 1.): (statuses[0], math.nan, math.nan),
        (2., 1.): (statuses[1], math.nan, math.nan),
    }))
    with pytest.raises(error) as e:
        line_search(toy_chain_aug, [1., 2.], [1.], mode='l2', progress=False)
    assert len(e.value.table) == 2
