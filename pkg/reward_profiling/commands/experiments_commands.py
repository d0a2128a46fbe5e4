import click
from flask import Blueprint, current_app

from reward_profiling.harness.config import SINGLE, SWEEP, build_experiment_config
from reward_profiling.harness.results import report as report_results
from reward_profiling.harness.runner import run_experiment
from reward_profiling.profiling import VARIANTS
from reward_profiling.utils.errors import ProfilingError
from reward_profiling.utils.responses import error_response, error_status, success_response

experiments_bp = Blueprint('experiments', __name__, cli_group=None)

EXPERIMENT_OPTIONS = (
    click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='key=value experiment file.'),
    click.option('--env', help='chain, cartpole, reacher or lq.'),
    click.option('--algo', help='reinforce, reinforce-baseline, ppo-clip or ddpg-lite.'),
    click.option('--variant', type=click.Choice(VARIANTS)),
    click.option('--eval-rollouts', help='Rollouts per candidate, or "auto" for the Hoeffding budget.'),
    click.option('--lambda', 'mix_lambda', type=float, help='Fixed mixing weight.'),
    click.option('--beta', help='Sample the mixing weight from Beta(a,b), given as "a,b".'),
    click.option('--rounds', type=int),
    click.option('--steps-per-round', type=int),
    click.option('--seeds', help='e.g. 0..4 or 0,2,5'),
    click.option('--out', type=click.Path(file_okay=False)),
    click.option('--independent-eval-seeds/--shared-eval-seeds', default=None),
    click.option('--rollback', type=click.Choice(['full', 'actor'])),
    click.option('--learning-rate', type=float),
    click.option('--epsilon', type=float),
    click.option('--delta', type=float),
    click.option('--gamma', type=float),
    click.option('--horizon', type=int),
    click.option('--reuse-eval-samples/--no-reuse-eval-samples', default=None),
    click.option('--reuse-old-estimate/--no-reuse-old-estimate', default=None),
    click.option('--lambda-schedule', type=click.Choice(['round', 'run'])),
)


def experiment_options(command):
    for option in reversed(EXPERIMENT_OPTIONS):
        command = option(command)
    return command


def _build_config(mode, options):
    flags = dict(options)
    config_path = flags.pop('config_path')
    flags['lambda'] = flags.pop('mix_lambda')
    return build_experiment_config(config_path, mode=mode, default_out=current_app.config['PROFILING_OUTPUT_DIR'],
                                   **flags)


def _summary(metrics):
    return [{key: value for key, value in m.to_mongo().to_dict().items() if key != 'curve'} for m in metrics]


def _run(mode, options):
    try:
        cfg = _build_config(mode, options)
        result = run_experiment(cfg, workers=current_app.config['PROFILING_WORKERS'],
                                record_wall_time=current_app.config['PROFILING_RECORD_WALL_TIME'])
    except ProfilingError as e:
        current_app.logger.error("experiment failed: %s", e)
        raise error_response(str(e), error_status(e))
    return success_response({
        'out': cfg.out,
        'directories': result.paths,
        'rounds': len(result.records),
        'failures': [{'cell': cell, 'error': error} for cell, _, error in result.failures],
        'summary': _summary(result.metrics),
    })


@experiments_bp.cli.command('run')
@experiment_options
def run(**options):
    """Run the configured experiment for every seed."""
    return _run(SINGLE, options)


@experiments_bp.cli.command('sweep')
@experiment_options
@click.option('--grid', help='axis:v1,v2,... with axis eval_rollouts, variant or lambda.')
def sweep(**options):
    """Run the experiment once per grid value."""
    return _run(SWEEP, options)


@experiments_bp.cli.command('report')
@click.option('--out', type=click.Path(file_okay=False), help='Results directory written by run.')
def report(out):
    """Recompute summary and curves from rounds.csv and compare with the stored files."""
    out = out or current_app.config['PROFILING_OUTPUT_DIR']
    try:
        result = report_results(out)
    except ProfilingError as e:
        raise error_response(str(e), error_status(e))
    if not result.consistent:
        current_app.logger.warning("stored summary or curves in %s differ from rounds.csv", out)
        raise error_response(f"Results in {out} are inconsistent: summary {result.summary_matches}, "
                             f"curves {result.curves_matches}", 4)
    return success_response({
        'out': out,
        'rounds': result.n_rounds,
        'summary_matches': result.summary_matches,
        'curves_matches': result.curves_matches,
        'summary': _summary(result.metrics),
    })
