import click
from flask import Blueprint, current_app

from reward_profiling.utils.responses import error_response, success_response
from reward_profiling.verification import FULL, QUICK, run_suite

verify_bp = Blueprint('verify', __name__, cli_group=None)


@verify_bp.cli.command('verify')
@click.option('--suite', type=click.Choice([QUICK, FULL]), default=QUICK, show_default=True)
def verify(suite):
    """Run the property checks and report each one."""
    results = run_suite(suite)
    failed = [r.name for r in results if not r.passed]
    for r in results:
        click.echo(f"{'ok' if r.passed else 'FAILED':6} {r.name}: {r.detail}", err=True)
    if failed:
        current_app.logger.error("%d of %d checks failed", len(failed), len(results))
        raise error_response(f"{len(failed)} check(s) failed: {', '.join(failed)}", 1)
    return success_response({'suite': suite, 'checks': [r._asdict() for r in results]})
