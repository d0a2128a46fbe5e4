import os

from conftest import parse_json_output
from reward_profiling.commands import verify_commands
from reward_profiling.harness.results import ROUNDS_FILE, SUMMARY_FILE, SWEEP_SUMMARY_FILE
from reward_profiling.verification import CheckResult

SMALL_RUN = ['--env', 'chain', '--horizon', '20', '--rounds', '2', '--steps-per-round', '40', '--eval-rollouts', '2',
             '--seeds', '0..1', '--learning-rate', '0.5']


def test_run_command(runner, tmp_path):
    out = str(tmp_path / 'run')
    result = runner.invoke(args=['run', *SMALL_RUN, '--variant', 'tp', '--out', out])
    assert result.exit_code == 0, result.output
    data = parse_json_output(result.output)
    assert data['success'] is True
    assert data['out'] == out
    assert data['rounds'] == 4
    assert data['failures'] == []
    assert data['summary'][0]['variant'] == 'tp'
    assert os.path.isfile(os.path.join(out, ROUNDS_FILE))


def test_run_uses_configured_output_dir(app, runner):
    result = runner.invoke(args=['run', *SMALL_RUN])
    assert result.exit_code == 0, result.output
    assert os.path.isfile(os.path.join(app.config['PROFILING_OUTPUT_DIR'], ROUNDS_FILE))


def test_run_with_config_file(runner, tmp_path):
    config = tmp_path / 'exp.env'
    config.write_text('env=chain\nhorizon=20\nrounds=1\nsteps_per_round=20\neval_rollouts=1\nseeds=3\n')
    result = runner.invoke(args=['run', '--config', str(config), '--variant', 'mu', '--out', str(tmp_path / 'o')])
    assert result.exit_code == 0, result.output
    data = parse_json_output(result.output)
    assert data['rounds'] == 1
    assert data['summary'][0]['variant'] == 'mu'


def test_run_rejects_bad_settings(runner, tmp_path):
    result = runner.invoke(args=['run', *SMALL_RUN, '--rounds', '0', '--out', str(tmp_path)])
    assert result.exit_code == 2
    assert 'total_rounds' in result.output
    result = runner.invoke(args=['run', '--variant', 'greedy'])
    assert result.exit_code == 2


def test_run_reports_missing_config_file(runner, tmp_path):
    result = runner.invoke(args=['run', '--config', str(tmp_path / 'absent.env'), '--out', str(tmp_path)])
    assert result.exit_code == 3
    assert 'Failed to read config' in result.output


def test_sweep_command(runner, tmp_path):
    out = tmp_path / 'sweep'
    result = runner.invoke(args=['sweep', *SMALL_RUN, '--grid', 'eval_rollouts:1,2', '--out', str(out)])
    assert result.exit_code == 0, result.output
    data = parse_json_output(result.output)
    assert len(data['directories']) == 2
    assert os.path.isfile(out / 'eval_rollouts_1' / ROUNDS_FILE)
    assert os.path.isfile(out / SWEEP_SUMMARY_FILE)


def test_sweep_requires_grid(runner, tmp_path):
    result = runner.invoke(args=['sweep', *SMALL_RUN, '--out', str(tmp_path)])
    assert result.exit_code == 2


def test_report_command(runner, tmp_path):
    out = tmp_path / 'run'
    assert runner.invoke(args=['run', *SMALL_RUN, '--out', str(out)]).exit_code == 0
    result = runner.invoke(args=['report', '--out', str(out)])
    assert result.exit_code == 0, result.output
    data = parse_json_output(result.output)
    assert data['rounds'] == 4
    assert data['summary_matches'] and data['curves_matches']

    with open(out / SUMMARY_FILE, 'a') as fh:
        fh.write('tampered\n')
    assert runner.invoke(args=['report', '--out', str(out)]).exit_code == 4
    assert runner.invoke(args=['report', '--out', str(tmp_path / 'missing')]).exit_code == 3


def test_verify_command(runner, monkeypatch):
    checks = [CheckResult('budget_formula', True, 'ok'), CheckResult('softmax_bound', True, 'ok')]
    monkeypatch.setattr(verify_commands, 'run_suite', lambda suite: checks)
    result = runner.invoke(args=['verify', '--suite', 'quick'])
    assert result.exit_code == 0, result.output
    data = parse_json_output(result.output)
    assert data['suite'] == 'quick'
    assert [c['name'] for c in data['checks']] == ['budget_formula', 'softmax_bound']


def test_verify_command_fails_on_a_failed_check(runner, monkeypatch):
    checks = [CheckResult('budget_formula', True, 'ok'), CheckResult('hoeffding_coverage', False, '90/100')]
    monkeypatch.setattr(verify_commands, 'run_suite', lambda suite: checks)
    result = runner.invoke(args=['verify'])
    assert result.exit_code == 1
    assert 'hoeffding_coverage' in result.output
