import json
import os
import re
from types import SimpleNamespace

import numpy as np
import pytest

from ultralocal.benchmark import (
    InvalidConfig,
    RobotArmParams,
    ScenarioConfig,
    build_system,
    compare_modes,
    config_from_dict,
    config_hash,
    load_config,
    nominal_theta_x,
    robot_arm_eta,
    robot_arm_uncertainty,
    run_scenario,
)
from ultralocal.benchmark import cli
from ultralocal.benchmark.config import run_key
from ultralocal.benchmark.scenario import InvalidMode
from ultralocal.estimator import DesignMismatch, IdentityViolation, IllConditioned
from ultralocal.lmi import AllInfeasible, NumericalFailure
from ultralocal.plant import DimensionMismatch, InvalidUncertaintyModel

slow = pytest.mark.slow

QUICK_TOML = '''
name = "quick"

[design]
mode = "l2"
a_grid = [1.0, 10.0]
b_grid = [1.0]

[simulation]
T = 20.0
h = 0.02
t_transient = 5.0

'''


def test_robot_arm_matrices(arm):
    p = arm.plant
    assert arm.name == 'robot-arm'
    assert (p.A[0, 0], p.A[0, 1], p.A[0, 3]) == (-1., -2., 2.)
    assert p.A[2, 2] == pytest.approx(-0.5 / 4.5)
    assert p.S_g[2, 0] == pytest.approx(-19.6 / 4.5)
    assert arm.alpha_g == 1.
    d = arm.dims
    assert (d.n, d.m, d.l, d.n_f, d.n_omega, d.n_eta) == (4, 2, 1, 1, 1, 2)


def test_true_uncertainty_without_mismatch_is_zero():
    eta = robot_arm_eta(RobotArmParams(delta_k_s=0., delta_c=0.))
    rng = np.random.default_rng(0)
    for v in rng.uniform(-2, 2, size=(20, 2)):
        np.testing.assert_array_equal(eta(v, np.zeros(1), 0.), [0., 0.])
    np.testing.assert_array_equal(nominal_theta_x(RobotArmParams(delta_k_s=0.)), np.zeros((2, 2)))


def test_nominal_model_is_the_linear_part(exact_arm):
    theta = nominal_theta_x()
    np.testing.assert_allclose(theta, [[0.5, -0.5], [-0.5 / 4.5, 0.5 / 4.5]])
    eta = exact_arm.plant.eta
    v = np.array([0.3, -0.7])
    np.testing.assert_allclose(eta(v, np.zeros(1), 0.), theta @ v, atol=1e-15)


def test_unknown_uncertainty_kind():
    with pytest.raises(InvalidUncertaintyModel):
        robot_arm_uncertainty('quadratic')  # type: ignore[arg-type]


def test_default_config():
    cfg = ScenarioConfig()
    assert cfg.design.mode == 'tradeoff'
    assert cfg.design.sigma_max == 'auto'
    assert cfg.signals.nu.relative
    plant, aug = build_system(cfg)
    assert plant.name == 'robot-arm'
    assert aug.kind == 'linear-state'
    assert aug.dims.n_z == 5


def test_load_toml_and_json(tmp_path):
    toml = tmp_path / 'quick.toml'
    toml.write_text(QUICK_TOML)
    cfg = load_config(str(toml))
    assert cfg.name == 'quick'
    assert cfg.design.mode == 'l2'
    assert cfg.design.a_grid == [1., 10.]
    assert cfg.simulation.T == 20.
    # untouched sections keep their defaults
    assert cfg.signals.u.amplitude == 2.

    path = tmp_path / 'quick.json'
    path.write_text(json.dumps({'name': 'quick', 'design': {'mode': 'l2', 'a_grid': [1., 10.], 'b_grid': [1.]},
                                'simulation': {'T': 20., 'h': 0.02, 't_transient': 5.}}))
    assert config_hash(load_config(str(path))) == config_hash(cfg)

    with pytest.raises(InvalidConfig):
        load_config(str(tmp_path / 'quick.yaml'))


@pytest.mark.parametrize('data', [
    {'desgin': {}},
    {'design': {'mode': 'h2'}},
    {'design': {'sigma_max': 'big'}},
    {'design': {'mode': 'tradeoff', 'sigma_max': None}},
    {'design': {'r': 0}},
    {'design': {'a_grid': []}},
    {'design': {'b_grid': [0.]}},
    {'simulation': {'h': 0.}},
    {'simulation': {'ensemble': -1}},
    {'plant': 'no-such-plant.json'},
])
def test_invalid_config(data):
    with pytest.raises(InvalidConfig):
        config_from_dict(data)


def test_l2_mode_accepts_unbounded_sigma():
    cfg = config_from_dict({'design': {'mode': 'l2', 'sigma_max': None}})
    assert cfg.design.sigma_max is None


def test_config_hash():
    assert config_hash(ScenarioConfig()) == config_hash(config_from_dict({}))
    assert re.fullmatch('[0-9a-f]{64}', config_hash(ScenarioConfig()))
    assert config_hash(config_from_dict({'simulation': {'seed': 1}})) != config_hash(ScenarioConfig())
    assert re.fullmatch(r'\d{4}(-\d{2}){5}-\w{6}', run_key())


def test_run_scenario_rejects_all():
    with pytest.raises(InvalidMode):
        run_scenario(ScenarioConfig(), 'all', write=False)


@pytest.mark.parametrize('error, code', [
    (AllInfeasible('every point infeasible', []), cli.EXIT_INFEASIBLE),
    (NumericalFailure('no optimal point', []), cli.EXIT_NUMERICAL),
    (IllConditioned('cond(P) too large'), cli.EXIT_NUMERICAL),
    (IdentityViolation('N = M A_a - K C_a', 1.), cli.EXIT_NUMERICAL),
    (InvalidConfig('bad'), cli.EXIT_FAILED),
    (FileNotFoundError(2, 'No such file or directory', 'gains.json'), cli.EXIT_FAILED),
    (DesignMismatch('gains were synthesized for another system'), cli.EXIT_FAILED),
    (DimensionMismatch(['B_f'], 'expected 4 rows'), cli.EXIT_FAILED),
    (InvalidUncertaintyModel('unknown kind'), cli.EXIT_FAILED),
])
def test_cli_exit_codes(monkeypatch, tmp_path, error, code):
    def fail(args):
        raise error
    monkeypatch.setattr(cli, 'cmd_benchmark', fail)
    assert cli.main(['--no-log-file', '--no-progress', 'benchmark', '--out', str(tmp_path)]) == code


def test_cli_invalid_config_file(tmp_path):
    path = tmp_path / 'bad.toml'
    path.write_text('[design]\nmode = "h2"\n')
    assert cli.main(['--no-log-file', 'synthesize', str(path)]) == cli.EXIT_FAILED


def test_cli_missing_inputs(tmp_path):
    assert cli.main(['--no-log-file', 'synthesize', str(tmp_path / 'missing.toml')]) == cli.EXIT_FAILED
    assert cli.main(['--no-log-file', 'verify', '--gains', str(tmp_path / 'gains.json'), '--trace', str(tmp_path / 'trace.csv')]) == cli.EXIT_FAILED


@pytest.mark.parametrize('violations, code', [(0, cli.EXIT_OK), (2, cli.EXIT_FAILED)])
def test_cli_benchmark_reports_certificate_violations(monkeypatch, tmp_path, violations, code):
    def run(cfg, mode):
        assert mode == 'l2'
        return SimpleNamespace(summary={'violations': violations})
    monkeypatch.setattr(cli, 'run_scenario', run)
    assert cli.main(['--no-log-file', '--no-progress', 'benchmark', '--mode', 'l2', '--out', str(tmp_path)]) == code


def test_cli_requires_a_command():
    with pytest.raises(SystemExit):
        cli.main(['--no-log-file'])


@slow
def test_scenario_writes_artifacts(tmp_path):
    cfg = load_config_text(tmp_path, QUICK_TOML)
    cfg.progress = False
    result = run_scenario(cfg, out=str(tmp_path / 'run'))
    summary = json.load(open(tmp_path / 'run' / 'summary.json'))
    for key in ('config_hash', 'seeds', 'rho', 'sigma', 'bounds', 'feasibility_table', 'identity_residuals', 'performance', 'violations'):
        assert key in summary
    assert summary['mode'] == 'l2'
    assert summary['config_hash'] == config_hash(cfg)
    assert len(summary['feasibility_table']) == 2
    assert max(summary['identity_residuals'].values()) < 1e-10
    assert summary['violations'] == 0
    for name in ('gains.json', 'trace.csv', 'trace.csv.meta.json', 'fault.csv'):
        assert os.path.exists(tmp_path / 'run' / name)

    # the noise-free certificate run of the same design
    l2 = next(c['l2'] for c in summary['certificate_checks'] if c['label'].startswith('l2'))
    assert l2['holds']
    assert result.performance.noise_amplification > 0


def load_config_text(tmp_path, text):
    path = tmp_path / 'scenario.toml'
    path.write_text(text)
    return load_config(str(path))


@slow
def test_cli_synthesize_then_verify(tmp_path):
    config = tmp_path / 'scenario.toml'
    config.write_text(QUICK_TOML)
    run = tmp_path / 'run'
    assert cli.main(['--no-log-file', '--no-progress', 'synthesize', str(config), '--out', str(run), '--sdpa', str(tmp_path / 'best.dat-s')]) == cli.EXIT_OK
    assert os.path.exists(tmp_path / 'best.dat-s')

    sim = tmp_path / 'sim'
    assert cli.main(['--no-log-file', '--no-progress', 'simulate', str(config), '--gains', str(run / 'gains.json'), '--out', str(sim)]) == cli.EXIT_OK
    # the trace carries its config, so --config is optional
    assert cli.main(['--no-log-file', 'verify', '--gains', str(run / 'gains.json'), '--trace', str(sim / 'trace.csv')]) == cli.EXIT_OK

    # gains designed for the linear-state model do not fit a plant without one
    other = tmp_path / 'other.toml'
    other.write_text(QUICK_TOML + '[uncertainty]\nkind = "none"\n')
    assert cli.main(['--no-log-file', '--no-progress', 'simulate', str(other), '--gains', str(run / 'gains.json'), '--out', str(tmp_path / 'other')]) == cli.EXIT_FAILED


@slow
def test_tradeoff_ordering(tmp_path):
    """With 5% output noise, the l2 design amplifies noise most and l2linf least; fault tracking goes the other way."""
    cfg = ScenarioConfig(progress=False)
    comparison = compare_modes(cfg, out=str(tmp_path))
    rows = {row.mode: row for row in comparison.rows}
    assert rows['l2'].noise_amplification > rows['tradeoff'].noise_amplification > rows['l2linf'].noise_amplification
    assert rows['l2'].tracking_rms < rows['tradeoff'].tracking_rms < rows['l2linf'].tracking_rms
    sigma = {mode: result.design.sigma for mode, result in comparison.results.items()}
    assert sigma['l2linf'] <= comparison.sigma_max <= sigma['l2']
    assert sigma['tradeoff'] <= comparison.sigma_max * (1 + 1e-6)

    saved = json.load(open(tmp_path / 'comparison.json'))
    assert [m['mode'] for m in saved['modes']] == ['l2', 'l2linf', 'tradeoff']
    for mode in ('l2', 'l2linf', 'tradeoff'):
        assert os.path.exists(tmp_path / mode / 'summary.json')
