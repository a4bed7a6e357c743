import time

import numpy as np
import pytest

from ultralocal.lmi import AffineMatrixInequality, DecisionLayout
from ultralocal.sdp import (
    InvalidProblem,
    NotSymmetric,
    SdpData,
    SolverSettings,
    min_eig,
    read_sdpa,
    smat,
    solve,
    solve_data,
    svec,
    write_sdpa,
)

from conftest import scalar_problem


def random_symmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    M = rng.normal(size=(n, n))
    return (M + M.T) / 2


def lambda_max_problem(A: np.ndarray):
    layout = DecisionLayout()
    layout.add_scalar('t')
    t = layout.expr('t')
    constraint = AffineMatrixInequality.from_expr('tI-A', t.kron_eye(A.shape[0]) - A, 'psd')
    return scalar_problem([constraint], layout, layout.unit('t'))


def test_min_eig():
    assert min_eig(np.diag([3., -1., 2.])) == pytest.approx(-1.)
    assert min_eig(np.zeros((0, 0))) == float('inf')
    with pytest.raises(NotSymmetric):
        min_eig(np.array([[0., 1.], [0., 0.]]))
    with pytest.raises(NotSymmetric):
        min_eig(np.ones((2, 3)))


def test_svec_preserves_inner_product():
    rng = np.random.default_rng(0)
    A, B = random_symmetric(rng, 4), random_symmetric(rng, 4)
    assert svec(A) @ svec(B) == pytest.approx(np.sum(A * B))
    np.testing.assert_allclose(smat(svec(A)), A)
    with pytest.raises(ValueError):
        smat(np.ones(4))


def test_lambda_max_oracle():
    rng = np.random.default_rng(42)
    t0 = time.time()
    for k in range(50):
        A = random_symmetric(rng, 1 + k % 8)
        sol = solve(lambda_max_problem(A))
        assert sol.status == 'optimal'
        assert float(sol['t']) == pytest.approx(np.linalg.eigvalsh(A)[-1], abs=1e-6)
        assert sol.min_eigenvalues['tI-A'] > -1e-6
    assert time.time() - t0 < 10


def test_boundary_optimum():
    # max y s.t. [[1, y], [y, 1]] >= 0
    data = SdpData(b=[1.], C=[np.eye(2)], A=[np.array([[[0., -1.], [-1., 0.]]])])
    result = solve_data(data)
    assert result.status == 'optimal'
    assert result.y[0] == pytest.approx(1., abs=1e-6)
    assert result.dual_objective == pytest.approx(1., abs=1e-6)


def test_infeasible_problem():
    layout = DecisionLayout()
    layout.add_scalar('x')
    x = layout.expr('x')
    constraints = [
        AffineMatrixInequality.from_expr('x>=1', x - 1., 'psd'),
        AffineMatrixInequality.from_expr('x<=0', -x, 'psd'),
    ]
    sol = solve(scalar_problem(constraints, layout, layout.unit('x')))
    assert sol.status == 'infeasible'
    assert not sol.optimal


def test_iteration_limit_is_reported():
    A = np.diag([1., 2., 3.])
    sol = solve(lambda_max_problem(A), max_iter=1, settings=SolverSettings(phase1=False))
    assert sol.status == 'max_iterations'
    assert sol.iterations == 1


def test_sdp_data_rejects_asymmetric_blocks():
    with pytest.raises(InvalidProblem):
        SdpData(b=[1.], C=[np.array([[0., 1.], [0., 0.]])], A=[np.zeros((1, 2, 2))])
    with pytest.raises(InvalidProblem):
        SdpData(b=[1., 2.], C=[np.eye(2)], A=[np.zeros((1, 2, 2))])


def test_sdpa_file(tmp_path):
    rng = np.random.default_rng(7)
    A = random_symmetric(rng, 3)
    data = SdpData(b=[1., -2.], C=[A, np.diag([1., 2.])], A=[np.stack([np.eye(3), A]), np.zeros((2, 2, 2))], labels=['first', 'second'])
    path = write_sdpa(data, str(tmp_path / 'problem.dat-s'), comment='two blocks')

    text = open(path).read()
    assert text.startswith('"two blocks')
    assert '2 = mDIM' in text

    loaded = read_sdpa(path)
    assert loaded.labels == ['first', 'second']
    np.testing.assert_allclose(loaded.b, data.b)
    for got, expected in zip(loaded.C + loaded.A, data.C + data.A):
        np.testing.assert_allclose(got, expected, rtol=0, atol=1e-15)


def test_truncated_sdpa_file(tmp_path):
    path = tmp_path / 'bad.dat-s'
    path.write_text('"comment\n1 = mDIM\n')
    with pytest.raises(InvalidProblem):
        read_sdpa(str(path))


def test_cvxpy_backend_agrees():
    pytest.importorskip('cvxpy')
    A = np.array([[2., 1.], [1., 2.]])
    sol = solve(lambda_max_problem(A), settings=SolverSettings(backend='cvxpy'))
    assert sol.status == 'optimal'
    assert float(sol['t']) == pytest.approx(3., abs=1e-5)


def random_feasible_data(rng: np.random.Generator, n: int = 4, p: int = 5) -> SdpData:
    """Both sides strictly feasible: C > 0 admits y = 0, and b is the image of a positive definite X0."""
    A = np.stack([random_symmetric(rng, n) for _ in range(p)])
    B = rng.normal(size=(n, n))
    C = B @ B.T + np.eye(n)
    B0 = rng.normal(size=(n, n))
    X0 = B0 @ B0.T + np.eye(n)
    b = np.einsum('iab,ab->i', A, X0)
    return SdpData(b=b, C=[C], A=[A])


def test_weak_duality():
    rng = np.random.default_rng(11)
    for _ in range(10):
        data = random_feasible_data(rng)
        result = solve_data(data)
        assert result.status == 'optimal'
        scale = 1 + abs(result.primal_objective)
        assert result.primal_objective >= result.dual_objective - 1e-7 * scale
        assert result.primal_objective - result.dual_objective <= 1e-6 * scale
        # y = 0 is dual feasible, so the optimum is at least 0
        assert result.dual_objective >= -1e-7 * scale
        assert min_eig(data.slack(result.y)[0]) > -1e-7


def test_objective_scaling_leaves_the_solution():
    rng = np.random.default_rng(12)
    data = random_feasible_data(rng)
    scaled = SdpData(b=10. * data.b, C=list(data.C), A=list(data.A))
    base, result = solve_data(data), solve_data(scaled)
    assert base.status == result.status == 'optimal'
    np.testing.assert_allclose(result.y, base.y, rtol=1e-3, atol=1e-4)
    assert result.dual_objective == pytest.approx(10. * base.dual_objective, rel=1e-5, abs=1e-6)
