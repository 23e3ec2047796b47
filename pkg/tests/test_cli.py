import json

import pytest

from cfhandoff import pathfinder
from cfhandoff.errors import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VALIDATION
from cfhandoff.main import main
from cfhandoff.sim import validate


def test_complexity_prints_sizes(capsys):
    assert main(['complexity', '--aps', '125', '--b-con', '5']) == EXIT_OK
    sizes = json.loads(capsys.readouterr().out)
    assert sizes['divide_and_conquer']['subproblems'] == 120
    assert sizes['divide_and_conquer']['states'] == 64


def test_run_writes_results(small_args, tmp_path):
    out = tmp_path / 'run'
    assert main(['run', *small_args, '--seed', '3', '--out', str(out)]) == EXIT_OK
    assert (out / 'records.csv').is_file()
    manifest = json.loads((out / 'manifest.json').read_text())
    assert manifest['master_seed'] == 3
    assert manifest['config']['seeds']['trials'] == 2


def test_run_single_scheme(small_args, tmp_path):
    out = tmp_path / 'run'
    assert main(['run', *small_args, '--scheme', 'lsf_time,lsf_threshold', '--trials', '1',
                 '--out', str(out)]) == EXIT_OK
    summary = json.loads((out / 'summary.json').read_text())
    assert sorted(summary['schemes']) == ['lsf_threshold', 'lsf_time']
    assert summary['n_trials'] == 1


def test_output_directory_from_environment(small_args, tmp_path, monkeypatch):
    monkeypatch.setenv(pathfinder.OUTPUT_DIR_ENV, str(tmp_path / 'env'))
    assert main(['run', *small_args, '--scheme', 'lsf_time']) == EXIT_OK
    assert (tmp_path / 'env' / 'summary.json').is_file()


def test_dump_model(small_args, tmp_path):
    path = tmp_path / 'first.pomdp'
    assert main(['run', *small_args, '--scheme', 'pomdp_ho_min', '--trials', '1',
                 '--out', str(tmp_path / 'run'), '--dump-model', str(path)]) == EXIT_OK
    lines = path.read_text().splitlines()
    assert lines[0] == 'discount: 0.95'
    assert lines[1] == 'horizon: 2'


@pytest.mark.parametrize('extra', [['--set', 'network.n_aps=2'], ['--profile', 'campus'],
                                   ['--scheme', 'round_robin']])
def test_configuration_errors(small_args, tmp_path, extra):
    assert main(['run', *small_args, *extra, '--out', str(tmp_path)]) == EXIT_CONFIG


def test_output_path_taken_by_a_file(small_args, tmp_path):
    target = tmp_path / 'taken'
    target.write_text('')
    assert main(['run', *small_args, '--scheme', 'lsf_time', '--out', str(target)]) == EXIT_IO


def test_validation_failure_exit_code(monkeypatch):
    def failing(seed=0):
        result = validate.SuiteResult('solver')
        result.check('forced', 1.0, 0.0)
        return result

    monkeypatch.setitem(validate.SUITES, 'solver', failing)
    assert main(['validate', '--suite', 'solver', '--quiet']) == EXIT_VALIDATION


def test_sweep_writes_one_directory_per_value(small_args, tmp_path):
    out = tmp_path / 'sweep'
    assert main(['sweep', *small_args, '--scheme', 'lsf_threshold', '--trials', '1',
                 '--param', 'engine.r_threshold', '--values', '0,100', '--out', str(out)]) \
        == EXIT_OK
    sweep = json.loads((out / 'sweep.json').read_text())
    assert sweep['param'] == 'engine.r_threshold'
    assert [point['value'] for point in sweep['points']] == [0, 100]
    assert (out / 'engine.r_threshold=0' / 'records.csv').is_file()
    totals = [point['mean_total_ho_per_trial_aps']['lsf_threshold'] for point in sweep['points']]
    assert totals[0] == 0.0


@pytest.mark.parametrize('ratio,code', [(0.5, EXIT_OK), (0.7, EXIT_VALIDATION)])
def test_check_reads_run_summary(tmp_path, ratio, code):
    summary = {'ho_reduction_ratios': {'pomdp_ho_min_vs_lsf_time': ratio,
                                       'pomdp_ho_min_vs_lsf_threshold': 0.5}}
    (tmp_path / 'summary.json').write_text(json.dumps(summary))
    assert main(['check', '--out', str(tmp_path), '--quiet']) == code


def test_check_without_summary(tmp_path):
    assert main(['check', '--out', str(tmp_path / 'missing'), '--quiet']) == EXIT_CONFIG
